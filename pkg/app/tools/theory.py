"""
When does randomising help, and how fast does strategic ERM converge:
sufficient-condition checks for a strictly better uniform pair, Monte-Carlo
Rademacher estimates of the strategic loss class, the excess-risk experiment
and closed-form generalisation bounds.
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from app.config import LAB_DATASET_DRAWS, LAB_SIGMA_DRAWS
from app.errors import INVALID_ARGUMENT, INVALID_DELTA, LabError
from app.tools.response import (
    TAU,
    ResponseMap,
    admissibility_check,
    expensive_set,
    nonsimultaneous_set,
    pair_response,
)
from app.tools.risk import loss_table
from app.tools.rng import derive_seed, rng_stream
from app.tools.serm import GRID, StrategicLossCache, population_optima, search_grid, select_min, simplex_grid
from app.tools.world import Dataset, HypothesisClass, World, require_valid, sample_dataset

logger = logging.getLogger(__name__)

EXACT_SIGMA_MAX_N = 20

ZERO_OPTIMAL_RISK = "ZERO_OPTIMAL_RISK"
SINGLE_OPTIMUM = "SINGLE_OPTIMUM"


# ---------- SUFFICIENT CONDITIONS ----------
@dataclass(frozen=True)
class ConditionReport:
    pair: List[int]
    names: List[str]
    e_sym_neg: float
    e_sym_pos: float
    n_neg: float
    n_pos: float
    conditions_hold: bool
    strict: bool
    admissible: bool
    mixture_risk: float
    risk_gap: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class ConditionCheck:
    r_star: float
    f_star: List[str]
    reports: List[ConditionReport]
    reason: Optional[str] = None

    @property
    def witness(self) -> Optional[ConditionReport]:
        for r in self.reports:
            if r.conditions_hold and r.strict and r.admissible and r.risk_gap > 0:
                return r
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "r_star": self.r_star,
            "f_star": self.f_star,
            "reason": self.reason,
            "reports": [r.to_dict() for r in self.reports],
            "conditions_hold": any(r.conditions_hold for r in self.reports),
            "witness": self.witness.to_dict() if self.witness else None,
        }


def check_sufficient_conditions(world: World, F: HypothesisClass, k: int) -> ConditionCheck:
    """
    For each pair of strategic-risk-optimal classifiers, compare the mass of
    E_f xor E_f2 and of N_{f,f2} by label, and measure how much U{f, f2}
    actually improves on R*.
    """
    opt = population_optima(world, F, k)
    names = [F.names[i] for i in opt.f_star]
    if opt.r_star <= TAU:
        return ConditionCheck(opt.r_star, names, [], ZERO_OPTIMAL_RISK)
    if len(opt.f_star) < 2:
        return ConditionCheck(opt.r_star, names, [], SINGLE_OPTIMUM)

    reports = []
    for i, j in combinations(opt.f_star, 2):
        f, f2 = F[i], F[j]
        e_neg, e_pos = world.mass[expensive_set(world, f).members ^ expensive_set(world, f2).members].sum(axis=0)
        n_neg, n_pos = world.mass[nonsimultaneous_set(world, f, f2).members].sum(axis=0)
        _, delta = pair_response(world, f, f2)
        table = loss_table(np.stack([f.labels, f2.labels]), np.array([0.5, 0.5]), delta.target)
        r_q = float((world.mass * table).sum())
        reports.append(ConditionReport(
            pair=[i, j],
            names=[f.name, f2.name],
            e_sym_neg=float(e_neg),
            e_sym_pos=float(e_pos),
            n_neg=float(n_neg),
            n_pos=float(n_pos),
            conditions_hold=bool(e_pos <= e_neg + TAU and n_pos <= n_neg + TAU),
            strict=bool(e_neg - e_pos > TAU or n_neg - n_pos > TAU),
            admissible=admissibility_check(world, f, f2).admissible,
            mixture_risk=r_q,
            risk_gap=opt.r_star - r_q,
        ))
    return ConditionCheck(opt.r_star, names, reports)


# ---------- RADEMACHER ----------
@dataclass(frozen=True)
class RademacherEstimate:
    mean: float
    std_error: float
    n: int
    sigma_draws: int
    dataset_draws: int
    seed: int
    exact: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _loss_matrix(F: HypothesisClass, delta: ResponseMap, dataset: Dataset) -> np.ndarray:
    post = F.labels[:, delta.target[dataset.points]]
    return (post != dataset.labels[None, :]).astype(np.int64)


def _sigma_pairs(rng: np.random.Generator, pairs: int, n: int) -> np.ndarray:
    return rng.integers(0, 2, size=(pairs, n), dtype=np.int64) * 2 - 1


def _all_sigmas(n: int) -> np.ndarray:
    bits = (np.arange(2 ** n, dtype=np.int64)[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return bits * 2 - 1


def _datasets(world: World, n: int, draws: int, seed: int) -> List[Dataset]:
    return [sample_dataset(world, n, derive_seed(seed, 0, d)) for d in range(draws)]


def _estimate(
    F: HypothesisClass,
    delta: ResponseMap,
    datasets: Sequence[Dataset],
    n: int,
    sigma_draws: int,
    seed: int,
    exact: bool,
) -> RademacherEstimate:
    per_dataset = []
    inner: np.ndarray = np.zeros(0)
    pairs = max(1, sigma_draws // 2)
    for d, ds in enumerate(datasets):
        L = _loss_matrix(F, delta, ds)
        if exact:
            inner = (_all_sigmas(n) @ L.T).max(axis=1) / n
        else:
            # each sign vector is paired with its negation
            S = _sigma_pairs(rng_stream(seed, 1, d), pairs, n) @ L.T
            inner = (S.max(axis=1) - S.min(axis=1)) / (2 * n)
        per_dataset.append(inner.mean())

    means = np.asarray(per_dataset)
    if means.size >= 2:
        se = float(means.std(ddof=1) / math.sqrt(means.size))
    elif not exact and inner.size >= 2:
        se = float(inner.std(ddof=1) / math.sqrt(inner.size))
    else:
        se = 0.0
    return RademacherEstimate(
        mean=float(means.mean()),
        std_error=se,
        n=n,
        sigma_draws=2 ** n if exact else 2 * pairs,
        dataset_draws=len(datasets),
        seed=seed,
        exact=exact,
    )


def _check_draws(n: int, sigma_draws: int, dataset_draws: int, exact: bool) -> None:
    if n < 1 or sigma_draws < 1 or dataset_draws < 1:
        raise LabError(INVALID_ARGUMENT, "n, sigma_draws and dataset_draws must be >= 1")
    if exact and n > EXACT_SIGMA_MAX_N:
        raise LabError(INVALID_ARGUMENT, f"exact sign enumeration needs n <= {EXACT_SIGMA_MAX_N}, got {n}")


def rademacher_estimate(
    world: World,
    F: HypothesisClass,
    delta: ResponseMap,
    n: int,
    sigma_draws: int = LAB_SIGMA_DRAWS,
    dataset_draws: int = LAB_DATASET_DRAWS,
    seed: int = 0,
    exact: bool = False,
) -> RademacherEstimate:
    """
    E_S E_sigma sup_f (1/n) sum_i sigma_i loss(f(Delta(x_i)), y_i) by Monte Carlo
    over datasets and sign vectors; the sup is an exact max over F.
    `exact=True` enumerates all 2^n sign vectors instead.
    """
    _check_draws(n, sigma_draws, dataset_draws, exact)
    return _estimate(F, delta, _datasets(world, n, dataset_draws, seed), n, sigma_draws, seed, exact)


@dataclass(frozen=True)
class HullCheckReport:
    sigma_draws: int
    mixtures: int
    changed: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def rademacher_hull_check(
    world: World,
    F: HypothesisClass,
    delta: ResponseMap,
    n: int,
    k: int = 10,
    extra: int = 50,
    sigma_draws: int = 200,
    seed: int = 0,
) -> HullCheckReport:
    """
    Adds `extra` grid mixtures of F's loss vectors to the sup set and counts
    sign draws whose sup changes. Integer arithmetic: a mixture with counts c
    beats the vertices iff c . s > k * max(s).
    """
    _check_draws(n, sigma_draws, 1, False)
    grid = simplex_grid(len(F), k)
    rng = rng_stream(seed, 2)
    pick = rng.choice(len(grid), size=min(extra, len(grid)), replace=False)
    counts = grid.counts[np.sort(pick)]
    L = _loss_matrix(F, delta, sample_dataset(world, n, derive_seed(seed, 0, 0)))
    S = _sigma_pairs(rng, sigma_draws, n) @ L.T
    vertex_sup = k * S.max(axis=1)
    mixture_sup = (S @ counts.T).max(axis=1)
    changed = int(np.count_nonzero(mixture_sup > vertex_sup))
    return HullCheckReport(sigma_draws, int(counts.shape[0]), changed)


@dataclass(frozen=True)
class SupRademacher:
    value: float
    std_error: float
    distinct_responses: int
    argmax: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def sup_rademacher_detail(
    world: World,
    F: HypothesisClass,
    k: int,
    n: int,
    sigma_draws: int = LAB_SIGMA_DRAWS,
    dataset_draws: int = LAB_DATASET_DRAWS,
    seed: int = 0,
    mode: str = GRID,
) -> SupRademacher:
    """
    2 x the largest estimate over the best responses induced by the grid.
    Mixtures sharing a response map share an estimate, and every map is
    scored on the same datasets and sign draws.
    """
    _check_draws(n, sigma_draws, dataset_draws, False)
    require_valid(world)
    grid = search_grid(len(F), k, mode)
    cache = StrategicLossCache(world, F, grid)
    datasets = _datasets(world, n, dataset_draws, seed)
    seen: Dict[bytes, int] = {}
    best: Optional[RademacherEstimate] = None
    best_g = 0
    for g in range(len(grid)):
        key = cache.targets[g].tobytes()
        if key in seen:
            continue
        seen[key] = g
        est = _estimate(F, ResponseMap(cache.targets[g]), datasets, n, sigma_draws, seed, False)
        if best is None or est.mean > best.mean:
            best, best_g = est, g
    return SupRademacher(2.0 * best.mean, 2.0 * best.std_error, len(seen), best_g)


def sup_rademacher(
    world: World,
    F: HypothesisClass,
    k: int,
    n: int,
    draws: int = LAB_SIGMA_DRAWS,
    seed: int = 0,
    dataset_draws: int = LAB_DATASET_DRAWS,
) -> float:
    return sup_rademacher_detail(world, F, k, n, draws, dataset_draws, seed).value


# ---------- CONVERGENCE ----------
@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    trials: int
    mean_excess: float
    std_error: float
    sup_rademacher: float
    sup_std_error: float
    bound: float
    violation_fraction: float


@dataclass(frozen=True)
class ConvergenceReport:
    rows: List[ConvergenceRow]
    slope: Optional[float]
    deterministic: bool
    k: int
    delta: float
    seed: int
    optimum: float = 0.0
    notes: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def csv_rows(self) -> List[Dict[str, Any]]:
        return [asdict(r) for r in self.rows]


def confidence_term(n: int, delta: float) -> float:
    _check_delta(delta)
    return math.sqrt(math.log(1.0 / delta) / (2.0 * n))


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise LabError(INVALID_DELTA, f"delta must lie in (0, 1), got {delta!r}")


def excess_risk_experiment(
    world: World,
    F: HypothesisClass,
    k: int,
    n_list: Sequence[int],
    trials: int,
    delta: float,
    seed: int,
    deterministic: bool = False,
    sigma_draws: int = LAB_SIGMA_DRAWS,
    dataset_draws: int = LAB_DATASET_DRAWS,
) -> ConvergenceReport:
    """
    For each n, learn from `trials` seeded samples and record how far the
    learned classifier's population strategic risk sits above the grid
    optimum, next to sup-Rademacher + sqrt(ln(1/delta) / 2n).
    """
    if not n_list:
        raise LabError(INVALID_ARGUMENT, "n_list must not be empty")
    if trials < 2:
        raise LabError(INVALID_ARGUMENT, f"trials must be >= 2, got {trials}")
    _check_delta(delta)
    k_eff = 1 if deterministic else k
    grid = simplex_grid(len(F), k_eff)
    cache = StrategicLossCache(world, F, grid)
    population = cache.population()
    optimum = float(population.min())

    rows = []
    for n in n_list:
        sup = sup_rademacher_detail(world, F, k_eff, n, sigma_draws, dataset_draws, derive_seed(seed, n))
        bound = sup.value + confidence_term(n, delta)
        excess = np.empty(trials)
        for t in range(trials):
            ds = sample_dataset(world, n, derive_seed(seed, n, t))
            g, _, _ = select_min(cache.empirical(ds))
            excess[t] = max(float(population[g]) - optimum, 0.0)
        row = ConvergenceRow(
            n=int(n),
            trials=trials,
            mean_excess=float(excess.mean()),
            std_error=float(excess.std(ddof=1) / math.sqrt(trials)),
            sup_rademacher=sup.value,
            sup_std_error=sup.std_error,
            bound=bound,
            violation_fraction=float(np.mean(excess > bound)),
        )
        logger.info("n=%d mean excess %.4g (se %.2g), bound %.4g", n, row.mean_excess, row.std_error, bound)
        rows.append(row)

    positive = [r for r in rows if r.mean_excess > 0]
    slope = None
    if len(positive) >= 2:
        x = np.log([r.n for r in positive])
        y = np.log([r.mean_excess for r in positive])
        slope = float(np.polyfit(x, y, 1)[0])
    return ConvergenceReport(rows, slope, deterministic, k_eff, delta, seed, optimum)


# ---------- BOUNDS ----------
@dataclass(frozen=True)
class BoundParams:
    n: int
    delta: float = 0.05
    d: int = 1
    B: float = 1.0
    X: float = 1.0
    u_star: float = 0.0
    class_size: Optional[int] = None
    C: float = 1.0

    def __post_init__(self):
        _check_delta(self.delta)
        if self.n < 1 or self.d < 1:
            raise LabError(INVALID_ARGUMENT, f"n and d must be >= 1, got n={self.n}, d={self.d}")
        # the growth-function bound (e n / d)^d needs n >= d
        if self.n < self.d:
            raise LabError(INVALID_ARGUMENT, f"n must be >= d, got n={self.n}, d={self.d}",
                           {"n": self.n, "d": self.d})
        if self.B < 0 or self.X < 0 or self.u_star < 0 or self.C <= 0:
            raise LabError(INVALID_ARGUMENT, "B, X and u_star must be non-negative and C positive")
        if self.class_size is not None and self.class_size < 1:
            raise LabError(INVALID_ARGUMENT, f"class_size must be >= 1, got {self.class_size}")


BOUND_NOTES = {
    "vc_growth": "sqrt(2 d ln(e n / d) / n)",
    "strategic_vc_shape_only": "C sqrt((d + ln(1/delta)) / n); shape only, C is user-supplied",
    "linear_hinge_prior": "(B (4X + u*) + 3 sqrt(ln(1/delta))) / sqrt(n)",
    "linear_hinge_serm": "(4XB + sqrt(ln(1/delta))) / (2 sqrt(n))",
    "confidence_term": "sqrt(ln(1/delta) / (2n))",
    "massart_finite": "sqrt(2 ln|F| / n)",
}


def bound_table(params: BoundParams) -> Dict[str, float]:
    n, d = params.n, params.d
    log_delta = math.log(1.0 / params.delta)
    table = {
        "vc_growth": math.sqrt(2.0 * d * math.log(math.e * n / d) / n),
        "strategic_vc_shape_only": params.C * math.sqrt((d + log_delta) / n),
        "linear_hinge_prior": (params.B * (4.0 * params.X + params.u_star) + 3.0 * math.sqrt(log_delta)) / math.sqrt(n),
        "linear_hinge_serm": (4.0 * params.X * params.B + math.sqrt(log_delta)) / (2.0 * math.sqrt(n)),
        "confidence_term": math.sqrt(log_delta / (2.0 * n)),
    }
    if params.class_size is not None:
        table["massart_finite"] = math.sqrt(2.0 * math.log(params.class_size) / n)
    return table
