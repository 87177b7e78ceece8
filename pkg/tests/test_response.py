import numpy as np
import pytest

from app.errors import INDEX_ERROR, LabError
from app.flows.scenarios import build_scenario
from app.tools import response as resp
from app.tools.world import Hypothesis, Mixture

from conftest import make_world


def _pos(world):
    return Hypothesis("all_pos", np.ones(world.n, dtype=int))


def test_expected_vote(line3):
    F = line3.hypothesis_class
    assert resp.expected_vote(Mixture.point_mass(2, 0), F, 0) == -1.0
    assert resp.expected_vote(Mixture.point_mass(2, 0), F, 1) == 1.0
    U = Mixture.uniform(2, [0, 1])
    assert resp.expected_vote(U, F, 1) == 0.0
    assert resp.expected_vote(U, F, 2) == 1.0


def test_expected_vote_index_error(line3):
    with pytest.raises(LabError) as exc:
        resp.expected_vote(Mixture.uniform(2, [0, 1]), line3.hypothesis_class, 3)
    assert exc.value.code == INDEX_ERROR


def test_best_response_det_line3(line3):
    f1, f2 = line3.hypotheses
    assert resp.best_response_det(line3, f1).target.tolist() == [1, 1, 2]
    # x0 -> x2 costs exactly 2: a tie with staying, so x0 stays
    assert resp.best_response_det(line3, f2).target.tolist() == [0, 2, 2]
    assert not resp.best_response_det(line3, _pos(line3)).moved.any()


def test_best_response_mix_line3(line3):
    F = line3.hypothesis_class
    delta = resp.best_response_mix(line3, F, Mixture.uniform(2, [0, 1]))
    assert delta.target.tolist() == [0, 1, 2]


def test_point_mass_reduces_to_deterministic(line3, random_worlds):
    for world in [line3] + random_worlds:
        F = world.hypothesis_class
        for k, f in enumerate(F.hypotheses):
            det = resp.best_response_det(world, f)
            mix = resp.best_response_mix(world, F, Mixture.point_mass(len(F), k))
            assert np.array_equal(det.target, mix.target)


def test_movement_matches_gaming_set(random_worlds):
    for world in random_worlds:
        for f in world.hypotheses:
            moved = resp.best_response_det(world, f).moved
            assert np.array_equal(moved, resp.gaming_set(world, f).members)


def test_set_algebra(random_worlds):
    for world in random_worlds:
        hyps = world.hypotheses
        for f in hyps:
            g, c = resp.gaming_set(world, f).members, resp.cheap_set(world, f).members
            e = resp.expensive_set(world, f).members
            assert not np.any(c & ~g)
            assert np.array_equal(e, g & ~c)
        for f in hyps:
            for f2 in hyps:
                n = resp.nonsimultaneous_set(world, f, f2).members
                joint = resp.joint_gaming_set(world, f, f2).members
                assert not np.any(n & joint)


def test_gaming_sets_line3(line3):
    f1, f2 = line3.hypotheses
    assert resp.gaming_set(line3, f1).ids(line3) == ["x0"]
    assert resp.gaming_set(line3, f2).ids(line3) == ["x1"]
    assert resp.cheap_set(line3, f1).ids(line3) == []
    assert resp.expensive_set(line3, f1).ids(line3) == ["x0"]
    assert resp.joint_gaming_set(line3, f1, f2).ids(line3) == []
    assert resp.nonsimultaneous_set(line3, f1, f2).ids(line3) == []
    assert resp.half_positive_set(line3, f1, f2).ids(line3) == ["x1"]
    for make in (resp.gaming_set, resp.cheap_set, resp.expensive_set):
        assert not make(line3, _pos(line3)).members.any()


def test_cheap_gamer():
    world = make_world([[0, 0.5], [0.5, 0]], [[0.5, 0], [0, 0.5]], [("f", [-1, 1])])
    f = world.hypotheses[0]
    assert resp.cheap_set(world, f).ids(world) == ["x0"]
    assert resp.expensive_set(world, f).ids(world) == []


def test_joint_set_of_identical_pair_is_gaming_set(line3):
    for f in line3.hypotheses:
        assert np.array_equal(resp.joint_gaming_set(line3, f, f).members, resp.gaming_set(line3, f).members)
        assert not resp.nonsimultaneous_set(line3, f, f).members.any()


def test_nonsimultaneous_needs_both_but_not_together():
    coords = [0.0, -1.5, 1.5]
    cost = np.abs(np.subtract.outer(coords, coords))
    mass = [[0.5, 0], [0, 0.25], [0, 0.25]]
    world = make_world(cost, mass, [("f", [-1, -1, 1]), ("g", [-1, 1, -1])])
    f, g = world.hypotheses
    assert resp.nonsimultaneous_set(world, f, g).ids(world) == ["x0"]


def test_line3_pair_is_admissible(line3):
    report = resp.admissibility_check(line3, *line3.hypotheses)
    assert report.admissible
    assert report.violating_points == []


def test_cheap_solo_gaming_contested_by_other_member():
    # x0 games f for 0.5, could game g only expensively, and nothing is jointly positive
    cost = [[0.0, 0.5, 1.5], [0.5, 0.0, 1.0], [1.5, 1.0, 0.0]]
    mass = [[0.5, 0.0], [0.0, 0.25], [0.0, 0.25]]
    world = make_world(cost, mass, [("f", [-1, 1, -1]), ("g", [-1, -1, 1])])
    report = resp.admissibility_check(world, *world.hypotheses)
    assert not report.admissible
    assert (0, resp.CHEAP_SOLO_CONTESTED_F) in report.violating_points


def test_uniform_pair_vote_transitions(line3, redundant, random_worlds):
    checked = 0
    for world in [line3, redundant[0]] + random_worlds:
        hyps = world.hypotheses
        support = world.mass.sum(axis=1) > 0
        for i in range(len(hyps)):
            for j in range(i + 1, len(hyps)):
                f, g = hyps[i], hyps[j]
                if not resp.admissibility_check(world, f, g).admissible:
                    continue
                checked += 1
                start = support & (f.labels == -1) & (g.labels == -1)
                t = resp.pair_vote_transitions(world, f, g)
                joint = resp.joint_gaming_set(world, f, g).members
                cheap_solo = (resp.cheap_set(world, f).members & ~resp.gaming_set(world, g).members) | (
                    resp.cheap_set(world, g).members & ~resp.gaming_set(world, f).members)
                assert np.array_equal(t.to_positive & start, joint & start)
                assert np.array_equal(t.to_zero & start, cheap_solo & start)
    assert checked > 0


def test_responses_are_deterministic(random_worlds):
    for world in random_worlds:
        F = world.hypothesis_class
        Q = Mixture(np.full(len(F), 1.0 / len(F)))
        a = resp.best_response_mix(world, F, Q)
        b = resp.best_response_mix(world, F, Q)
        assert a.key() == b.key()


def test_incentive_compatibility(line3):
    f1, f2 = line3.hypotheses
    assert resp.incentive_compatible(line3, _pos(line3))
    assert not resp.incentive_compatible(line3, f1)
    assert not resp.incentive_compatible(line3, f2)


def test_annulus_mixture_response(annulus):
    world, F = annulus
    f, g = F.hypotheses
    vote, delta = resp.pair_response(world, f, g)
    moved = delta.moved
    # movers land on jointly positive cells, for less than 1
    assert np.all(vote[delta.target[moved]] == 1.0)
    assert np.all(world.cost[np.flatnonzero(moved), delta.target[moved]] < 1.0)
    half = vote == 0.0
    reach = np.where((vote == 1.0)[None, :], world.cost, np.inf).min(axis=1)
    assert np.array_equal(moved[half], (1.0 - reach[half]) > resp.TAU)
    # expensive gamers of a single member stay put
    for h in (f, g):
        assert not moved[resp.expensive_set(world, h).members].any()


def test_annulus_pair_is_admissible_without_joint_gaming(annulus):
    world, F = annulus
    f, g = F.hypotheses
    assert resp.admissibility_check(world, f, g).admissible
    assert not resp.joint_gaming_set(world, f, g).members.any()
    assert resp.expensive_set(world, f).mass(world)[0] > 0


def test_figure_curves_have_a_joint_band():
    world, F = build_scenario("annulus-figure")
    f, g = F.hypotheses
    joint = resp.joint_gaming_set(world, f, g).members
    assert joint.any()
    both_neg = (f.labels == -1) & (g.labels == -1)
    assert np.all(both_neg[joint])
