import math

import numpy as np
import pytest

from app.errors import INVALID_ARGUMENT, INVALID_DELTA, LabError
from app.flows.scenarios import build_scenario
from app.tools import theory
from app.tools.response import ResponseMap, best_response_det, best_response_mix
from app.tools.world import Hypothesis, HypothesisClass, Mixture, parse_world


# ---------- SUFFICIENT CONDITIONS ----------
def test_zero_optimal_risk_short_circuits(line3):
    check = theory.check_sufficient_conditions(line3, line3.hypothesis_class, 4)
    assert check.reason == theory.ZERO_OPTIMAL_RISK
    assert check.reports == []
    assert check.witness is None
    assert check.to_dict()["conditions_hold"] is False


def test_annulus_has_a_witness(annulus):
    world, F = annulus
    check = theory.check_sufficient_conditions(world, F, 2)
    assert check.f_star == ["f", "f_prime"]
    report = check.witness
    assert report is not None
    assert report.e_sym_pos == 0.0
    assert report.n_neg == 0.0 and report.n_pos == 0.0
    assert report.risk_gap > 0
    assert 2 * report.risk_gap == pytest.approx(report.e_sym_neg - report.e_sym_pos, abs=1e-12)


def test_redundant_world_masses(redundant):
    world, F = redundant
    check = theory.check_sufficient_conditions(world, F, 2)
    assert check.r_star == pytest.approx(0.3, abs=1e-12)
    [report] = check.reports
    assert report.e_sym_neg == pytest.approx(0.24, abs=1e-12)
    assert report.e_sym_pos == pytest.approx(0.16, abs=1e-12)
    assert report.n_neg == pytest.approx(0.08, abs=1e-12)
    assert report.n_pos == pytest.approx(0.02, abs=1e-12)
    assert report.conditions_hold and report.strict and report.admissible
    assert report.mixture_risk == pytest.approx(0.2, abs=1e-12)
    assert report.risk_gap == pytest.approx(0.1, abs=1e-12)
    assert check.witness is report


def test_cheap_block_leaves_a_single_optimum():
    world, F = build_scenario("redundant-free-b")
    check = theory.check_sufficient_conditions(world, F, 2)
    assert check.reason == theory.SINGLE_OPTIMUM
    assert check.f_star == ["f_A"]


def test_conditions_fail_when_positives_dominate():
    world, F = build_scenario("redundant", {"p_pos": [0.0, 0.6, 0.2, 0.2], "p_neg": [0.4, 0.2, 0.2, 0.2]})
    check = theory.check_sufficient_conditions(world, F, 2)
    [report] = check.reports
    assert report.e_sym_pos > report.e_sym_neg
    assert not report.conditions_hold
    assert check.witness is None
    assert check.to_dict()["conditions_hold"] is False


# ---------- RADEMACHER ----------
def _constants(world):
    return HypothesisClass([
        Hypothesis("neg", -np.ones(world.n, dtype=int)),
        Hypothesis("pos", np.ones(world.n, dtype=int)),
    ])


def test_single_classifier_has_zero_complexity(line3):
    F = HypothesisClass(line3.hypotheses[:1])
    est = theory.rademacher_estimate(line3, F, ResponseMap.identity(3), 20, sigma_draws=50, dataset_draws=3, seed=1)
    assert est.mean == 0.0


def test_constant_classifiers_at_one_sample(line3):
    F = _constants(line3)
    delta = ResponseMap.identity(3)
    est = theory.rademacher_estimate(line3, F, delta, 1, sigma_draws=40, dataset_draws=5, seed=3)
    assert est.mean == pytest.approx(0.5)
    exact = theory.rademacher_estimate(line3, F, delta, 1, dataset_draws=5, seed=3, exact=True)
    assert exact.mean == pytest.approx(0.5)
    assert exact.sigma_draws == 2


def test_finite_class_bound(random_worlds):
    n = 8
    for world in random_worlds:
        F = world.hypothesis_class
        if len(F) < 2:
            continue
        est = theory.rademacher_estimate(world, F, best_response_det(world, F[0]), n,
                                         dataset_draws=3, seed=2, exact=True)
        assert est.mean <= math.sqrt(2 * math.log(len(F)) / n) + 1e-12


def test_monte_carlo_matches_enumeration(line3):
    F = line3.hypothesis_class
    delta = best_response_mix(line3, F, Mixture.uniform(2, [0, 1]))
    exact = theory.rademacher_estimate(line3, F, delta, 10, dataset_draws=1, seed=4, exact=True)
    mc = theory.rademacher_estimate(line3, F, delta, 10, sigma_draws=4000, dataset_draws=1, seed=4)
    assert abs(mc.mean - exact.mean) <= 3 * mc.std_error + 1e-12


def test_estimates_are_reproducible(line3):
    F = line3.hypothesis_class
    delta = ResponseMap.identity(3)
    a = theory.rademacher_estimate(line3, F, delta, 30, sigma_draws=100, dataset_draws=4, seed=9)
    b = theory.rademacher_estimate(line3, F, delta, 30, sigma_draws=100, dataset_draws=4, seed=9)
    assert a == b


def test_exact_enumeration_is_limited(line3):
    with pytest.raises(LabError) as exc:
        theory.rademacher_estimate(line3, line3.hypothesis_class, ResponseMap.identity(3), 25, exact=True)
    assert exc.value.code == INVALID_ARGUMENT


def test_mixtures_never_raise_the_sup(random_worlds):
    for world in random_worlds[:20]:
        F = world.hypothesis_class
        report = theory.rademacher_hull_check(world, F, best_response_det(world, F[0]), 15, seed=6)
        assert report.changed == 0


def test_sup_over_single_classifier(line3):
    F = HypothesisClass(line3.hypotheses[:1])
    assert theory.sup_rademacher(line3, F, 4, 20, draws=50, dataset_draws=2) == 0.0


def test_sup_rademacher_line3(line3):
    n = 50
    detail = theory.sup_rademacher_detail(line3, line3.hypothesis_class, 4, n, sigma_draws=400, dataset_draws=10, seed=1)
    assert detail.value > 0
    assert detail.value <= 2 * math.sqrt(2 * math.log(2) / n) + 4 * detail.std_error
    assert detail.distinct_responses >= 2


def test_sup_without_movement_ignores_the_grid(line3_doc):
    line3_doc["cost"]["scale"] = 3.0
    world = parse_world(line3_doc)
    F = world.hypothesis_class
    coarse = theory.sup_rademacher_detail(world, F, 1, 40, sigma_draws=100, dataset_draws=3, seed=8)
    fine = theory.sup_rademacher_detail(world, F, 10, 40, sigma_draws=100, dataset_draws=3, seed=8)
    assert coarse.distinct_responses == fine.distinct_responses == 1
    assert coarse.value == fine.value


# ---------- CONVERGENCE ----------
@pytest.mark.parametrize("deterministic", [False, True])
def test_realizable_world_has_no_excess(line3, deterministic):
    f2 = line3.hypotheses[1]
    F = HypothesisClass([f2, Hypothesis("all_neg", -np.ones(3, dtype=int))])
    report = theory.excess_risk_experiment(line3, F, 3, [10, 20], trials=3, delta=0.1, seed=0,
                                           deterministic=deterministic, sigma_draws=50, dataset_draws=2)
    assert [r.n for r in report.rows] == [10, 20]
    assert all(r.mean_excess == 0.0 for r in report.rows)
    assert all(r.violation_fraction == 0.0 for r in report.rows)
    assert report.slope is None
    assert report.k == (1 if deterministic else 3)
    assert report.optimum == 0.0
    assert len(report.csv_rows()) == 2


def test_experiment_arguments(line3):
    F = line3.hypothesis_class
    with pytest.raises(LabError) as exc:
        theory.excess_risk_experiment(line3, F, 2, [10], trials=3, delta=1.5, seed=0)
    assert exc.value.code == INVALID_DELTA
    with pytest.raises(LabError) as exc:
        theory.excess_risk_experiment(line3, F, 2, [], trials=3, delta=0.1, seed=0)
    assert exc.value.code == INVALID_ARGUMENT


def test_annulus_excess_stays_under_the_bound_quick(annulus):
    world, F = annulus
    report = theory.excess_risk_experiment(world, F, 4, [50, 200], trials=10, delta=0.1, seed=3,
                                           sigma_draws=100, dataset_draws=4)
    for row in report.rows:
        assert row.mean_excess <= row.bound + 3 * (row.std_error + row.sup_std_error)
        assert row.violation_fraction <= 0.13


@pytest.mark.slow
def test_annulus_excess_stays_under_the_bound(annulus):
    world, F = annulus
    n_list = [25, 50, 100, 200, 400, 800]
    report = theory.excess_risk_experiment(world, F, 10, n_list, trials=200, delta=0.1, seed=0)
    assert [row.n for row in report.rows] == n_list
    assert all(row.trials == 200 for row in report.rows)
    for row in report.rows:
        assert row.mean_excess <= row.bound + 3 * (row.std_error + row.sup_std_error)
        assert row.violation_fraction <= 0.13


# ---------- BOUNDS ----------
def test_bound_values():
    assert theory.bound_table(theory.BoundParams(n=1000, d=3))["vc_growth"] == pytest.approx(0.2021, abs=1e-4)
    table = theory.bound_table(theory.BoundParams(n=100, u_star=1.0))
    assert table["linear_hinge_serm"] == pytest.approx(0.2865, abs=1e-4)
    assert table["linear_hinge_prior"] == pytest.approx(1.0192, abs=1e-4)
    assert table["confidence_term"] == pytest.approx(theory.confidence_term(100, 0.05))
    assert "massart_finite" not in table


def test_massart_row_needs_class_size():
    table = theory.bound_table(theory.BoundParams(n=50, class_size=4))
    assert table["massart_finite"] == pytest.approx(math.sqrt(2 * math.log(4) / 50))


@pytest.mark.parametrize("delta", [0.0, 1.0, -0.2])
def test_invalid_delta(delta):
    with pytest.raises(LabError) as exc:
        theory.BoundParams(n=10, delta=delta)
    assert exc.value.code == INVALID_DELTA


def test_serm_bound_dominates_the_prior_one():
    for n in (10, 100, 1000):
        for X in (0.5, 1.0, 3.0):
            for B in (0.5, 1.0, 2.0):
                for u_star in (0.1, 1.0, 5.0):
                    for delta in (0.01, 0.05, 0.5):
                        t = theory.bound_table(theory.BoundParams(n=n, delta=delta, B=B, X=X, u_star=u_star))
                        assert t["linear_hinge_serm"] < t["linear_hinge_prior"]


def test_growth_bound_needs_n_at_least_d():
    with pytest.raises(LabError) as exc:
        theory.BoundParams(n=1, d=3)
    assert exc.value.code == INVALID_ARGUMENT
    assert exc.value.details == {"n": 1, "d": 3}
    table = theory.bound_table(theory.BoundParams(n=3, d=3))
    assert table["vc_growth"] == pytest.approx(math.sqrt(2.0))
    assert all(math.isfinite(v) for v in table.values())
