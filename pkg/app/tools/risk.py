"""
Zero-one clean / strategic risks (population and empirical) and the checks
that compare simulated strategic risks against their set-based expansions.
"""
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from app.tools.response import (
    ResponseMap,
    admissibility_check,
    best_response_det,
    cheap_set,
    expensive_set,
    gaming_set,
    joint_gaming_set,
    nonsimultaneous_set,
    pair_response,
)
from app.tools.world import Dataset, Hypothesis, HypothesisClass, Mixture, World, require_valid

logger = logging.getLogger(__name__)

ZERO_ONE = "ZERO_ONE"


@dataclass(frozen=True)
class RiskReport:
    clean_risk: float
    strategic_risk: float
    response_provenance: str
    loss_kind: str = ZERO_ONE

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class DecompositionReport:
    simulated: float
    analytic: float
    terms: Dict[str, float]
    residual: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class PairDecompositionReport:
    lhs: float
    rhs: float
    residual: float
    admissible: bool
    terms: Dict[str, float]
    # per member: R_{Delta_Q}(h) simulated vs. its set-based expansion
    members: Dict[str, Dict[str, float]] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class ExpensiveIdentityReport:
    lhs: float
    rhs: float
    overlap: float
    residual: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


# ---------- KERNEL ----------
def loss_table(labels: np.ndarray, weights: np.ndarray, target: np.ndarray) -> np.ndarray:
    """
    Expected zero-one loss per (point, label) when the agent at point i presents
    target[i] and the learner draws f with probability weights[k].
    Column 0 is y = -1, column 1 is y = +1.
    """
    post = labels[:, target]
    return np.stack([weights @ (post == 1), weights @ (post == -1)], axis=1)


def _risk(world: World, labels: np.ndarray, weights: np.ndarray, target: np.ndarray) -> float:
    return float((world.mass * loss_table(labels, weights, target)).sum())


def _set_mass(world: World, members: np.ndarray) -> np.ndarray:
    return world.mass[members].sum(axis=0)


# ---------- RISKS ----------
def single_risk(world: World, h: Hypothesis, delta: Optional[ResponseMap] = None) -> float:
    """Risk of one classifier; clean when no response map is given."""
    target = np.arange(world.n) if delta is None else delta.target
    return _risk(world, h.labels[None, :], np.ones(1), target)


def clean_risk(world: World, F: HypothesisClass, Q: Mixture) -> float:
    Q.check(F)
    return _risk(world, F.labels, Q.weights, np.arange(world.n))


def strategic_risk(world: World, F: HypothesisClass, Q: Mixture, delta: ResponseMap) -> float:
    Q.check(F)
    return _risk(world, F.labels, Q.weights, delta.target)


def empirical_strategic_risk(dataset: Dataset, F: HypothesisClass, Q: Mixture, delta: ResponseMap) -> float:
    dataset.require_nonempty()
    dataset.check(delta.target.size)
    Q.check(F)
    table = loss_table(F.labels, Q.weights, delta.target)
    return float(table[dataset.points, (dataset.labels.astype(np.int64) + 1) // 2].mean())


def risk_report(world: World, F: HypothesisClass, Q: Mixture, delta: ResponseMap) -> RiskReport:
    return RiskReport(
        clean_risk=clean_risk(world, F, Q),
        strategic_risk=strategic_risk(world, F, Q, delta),
        response_provenance=delta.provenance,
    )


# ---------- DECOMPOSITIONS ----------
def decompose_deterministic(world: World, f: Hypothesis) -> DecompositionReport:
    delta = best_response_det(world, f)
    simulated = single_risk(world, f, delta)
    clean = single_risk(world, f)
    g_neg, g_pos = _set_mass(world, gaming_set(world, f).members)
    analytic = clean + g_neg - g_pos
    return DecompositionReport(
        simulated=simulated,
        analytic=analytic,
        terms={"clean": clean, "P(G,-1)": float(g_neg), "P(G,+1)": float(g_pos)},
        residual=abs(simulated - analytic),
    )


def decompose_pair_mixture(world: World, f: Hypothesis, f2: Hypothesis) -> PairDecompositionReport:
    """
    R_{Delta_f}(f) + R_{Delta_f2}(f2) - 2 R_{Delta_Q}(Q) for Q = U{f, f2}, by
    simulation, against the expression over E_f xor E_f2 and N_{f,f2}.
    """
    require_valid(world)
    r_f = single_risk(world, f, best_response_det(world, f))
    r_f2 = single_risk(world, f2, best_response_det(world, f2))
    _, delta_q = pair_response(world, f, f2)
    labels = np.stack([f.labels, f2.labels])
    r_q = _risk(world, labels, np.array([0.5, 0.5]), delta_q.target)
    lhs = r_f + r_f2 - 2.0 * r_q

    e_sym = expensive_set(world, f).members ^ expensive_set(world, f2).members
    e_neg, e_pos = _set_mass(world, e_sym)
    n_neg, n_pos = _set_mass(world, nonsimultaneous_set(world, f, f2).members)
    rhs = float(e_neg - e_pos + 2.0 * n_neg - 2.0 * n_pos)

    g = {f.name: gaming_set(world, f).members, f2.name: gaming_set(world, f2).members}
    c = {f.name: cheap_set(world, f).members, f2.name: cheap_set(world, f2).members}
    joint = joint_gaming_set(world, f, f2).members
    members: Dict[str, Dict[str, float]] = {}
    for h, other in ((f, f2), (f2, f)):
        gamed = (c[h.name] & ~g[other.name]) | joint
        a_neg, a_pos = _set_mass(world, gamed)
        clean = single_risk(world, h)
        members[h.name] = {
            "simulated": single_risk(world, h, delta_q),
            "analytic": float(clean + a_neg - a_pos),
        }

    return PairDecompositionReport(
        lhs=lhs,
        rhs=rhs,
        residual=abs(lhs - rhs),
        admissible=admissibility_check(world, f, f2).admissible,
        terms={
            "R_f": r_f,
            "R_f_prime": r_f2,
            "R_Q": r_q,
            "P(E_sym,-1)": float(e_neg),
            "P(E_sym,+1)": float(e_pos),
            "P(N,-1)": float(n_neg),
            "P(N,+1)": float(n_pos),
        },
        members=members,
    )


def expensive_gaming_identity(world: World, f: Hypothesis, f2: Hypothesis) -> ExpensiveIdentityReport:
    """
    P(E_f, x not in G_f2) + P(E_f2, x not in G_f) against P(E_f xor E_f2).
    The two sides differ by exactly the mass of (E_f & C_f2) | (C_f & E_f2).
    """
    p = world.mass.sum(axis=1)
    e_a, e_b = expensive_set(world, f).members, expensive_set(world, f2).members
    g_a, g_b = gaming_set(world, f).members, gaming_set(world, f2).members
    c_a, c_b = cheap_set(world, f).members, cheap_set(world, f2).members
    lhs = float(p[e_a & ~g_b].sum() + p[e_b & ~g_a].sum())
    rhs = float(p[e_a ^ e_b].sum())
    overlap = float(p[(e_a & c_b) | (c_a & e_b)].sum())
    return ExpensiveIdentityReport(lhs=lhs, rhs=rhs, overlap=overlap, residual=abs(lhs - rhs))
