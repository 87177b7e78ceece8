"""
Agent best responses against a deterministic classifier or a mixture, and the
point sets that describe who can game what (G, C, E, joint, non-simultaneous).

All comparisons go through the same "gain beats staying by more than TAU"
arithmetic, so a point is in G_f exactly when Delta_f moves it.
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from app.errors import DIMENSION_MISMATCH, INDEX_ERROR, LabError
from app.tools.world import Hypothesis, HypothesisClass, Mixture, World, require_valid

logger = logging.getLogger(__name__)

TAU = 1e-12
GAMING_BUDGET = 2.0
CHEAP_BUDGET = 1.0

# PointSet roles
G = "G"
C = "C"
E = "E"
G_JOINT = "G_JOINT"
N = "N"
H_HALF = "H_HALF"

# Admissibility reason codes
CHEAP_SOLO_CONTESTED_F = "CHEAP_SOLO_CONTESTED_F"
CHEAP_SOLO_CONTESTED_F_PRIME = "CHEAP_SOLO_CONTESTED_F_PRIME"
MIXED_COST_JOINT = "MIXED_COST_JOINT"
HALF_POSITIVE_MISMATCH = "HALF_POSITIVE_MISMATCH"
JOINT_GAMING_DIVERTED = "JOINT_GAMING_DIVERTED"
RESPONSE_MISMATCH = "RESPONSE_MISMATCH"


@dataclass(frozen=True, eq=False)
class ResponseMap:
    target: np.ndarray
    provenance: str = ""

    @property
    def moved(self) -> np.ndarray:
        return self.target != np.arange(self.target.size)

    @classmethod
    def identity(cls, n: int) -> "ResponseMap":
        return cls(np.arange(n), "identity")

    def key(self) -> bytes:
        return np.asarray(self.target, dtype=np.int64).tobytes()

    def to_dict(self, world: World) -> Dict[str, Any]:
        ids = world.ids
        return {
            "provenance": self.provenance,
            "target": {ids[i]: ids[t] for i, t in enumerate(self.target.tolist())},
            "moved": [ids[i] for i in np.flatnonzero(self.moved).tolist()],
        }


@dataclass(frozen=True, eq=False)
class PointSet:
    members: np.ndarray
    role: str
    hypotheses: Tuple[str, ...] = ()

    def ids(self, world: World) -> List[str]:
        return [world.points[i].id for i in np.flatnonzero(self.members).tolist()]

    def mass(self, world: World) -> Tuple[float, float]:
        """(P(x in set, y=-1), P(x in set, y=+1))"""
        m = world.mass[self.members]
        return float(m[:, 0].sum()), float(m[:, 1].sum())

    def label(self) -> str:
        return f"{self.role}({','.join(self.hypotheses)})" if self.hypotheses else self.role


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    violating_points: List[Tuple[int, str]]

    def to_dict(self, world: Optional[World] = None) -> Dict[str, Any]:
        pts = [
            {"point": world.points[i].id if world else i, "reason": r}
            for i, r in self.violating_points
        ]
        return {"admissible": self.admissible, "violating_points": pts}


# ---------- HELPERS ----------
def _labels(world: World, f: Hypothesis) -> np.ndarray:
    if f.labels.shape != (world.n,):
        raise LabError(DIMENSION_MISMATCH, f"hypothesis {f.name!r} has {f.labels.size} labels for {world.n} points")
    return f.labels


def respond(cost: np.ndarray, vote: np.ndarray) -> np.ndarray:
    """
    Canonical best response to the vote function `vote` (E_{f~Q}[f(z)] per point).
    Stay unless some z beats staying by more than TAU; among the maximisers
    (within TAU) take the lowest cost, then the lowest index.
    """
    util = vote[None, :] - cost
    best = util.max(axis=1)
    moving = best - vote > TAU
    cand = util >= (best - TAU)[:, None]
    masked = np.where(cand, cost, np.inf)
    pick = np.argmax(masked == masked.min(axis=1)[:, None], axis=1)
    return np.where(moving, pick, np.arange(vote.size))


def _reachable(world: World, source: np.ndarray, target: np.ndarray, budget: float) -> np.ndarray:
    if not target.any():
        return np.zeros(world.n, dtype=bool)
    cmin = np.where(target[None, :], world.cost, np.inf).min(axis=1)
    # same arithmetic as the improvement test in `respond`: gain of a +1 vote over a (1 - budget) one
    return source & ((1.0 - cmin) - (1.0 - budget) > TAU)


# ---------- OPERATIONS ----------
def expected_vote(Q: Mixture, F: HypothesisClass, point: int) -> float:
    Q.check(F)
    n = F.labels.shape[1]
    if not 0 <= int(point) < n:
        raise LabError(INDEX_ERROR, f"point index {point} out of range for {n} points")
    return float(Q.weights @ F.labels[:, int(point)])


def vote_vector(F: HypothesisClass, Q: Mixture) -> np.ndarray:
    Q.check(F)
    return Q.weights @ F.labels


def best_response_det(world: World, f: Hypothesis) -> ResponseMap:
    require_valid(world)
    vote = _labels(world, f).astype(np.float64)
    return ResponseMap(respond(world.cost, vote), f"best_response({f.name})")


def best_response_mix(world: World, F: HypothesisClass, Q: Mixture) -> ResponseMap:
    require_valid(world)
    if F.labels.shape[1] != world.n:
        raise LabError(DIMENSION_MISMATCH, f"hypotheses have {F.labels.shape[1]} labels for {world.n} points")
    vote = vote_vector(F, Q)
    desc = ",".join(f"{name}:{w:g}" for name, w in zip(F.names, Q.weights.tolist()) if w > 0)
    return ResponseMap(respond(world.cost, vote), f"best_response_mix({desc})")


def gaming_set(world: World, f: Hypothesis) -> PointSet:
    lab = _labels(world, f)
    return PointSet(_reachable(world, lab == -1, lab == 1, GAMING_BUDGET), G, (f.name,))


def cheap_set(world: World, f: Hypothesis) -> PointSet:
    lab = _labels(world, f)
    return PointSet(_reachable(world, lab == -1, lab == 1, CHEAP_BUDGET), C, (f.name,))


def expensive_set(world: World, f: Hypothesis) -> PointSet:
    members = gaming_set(world, f).members ^ cheap_set(world, f).members
    return PointSet(members, E, (f.name,))


def joint_gaming_set(world: World, f: Hypothesis, f2: Hypothesis) -> PointSet:
    a, b = _labels(world, f), _labels(world, f2)
    members = _reachable(world, (a == -1) & (b == -1), (a == 1) & (b == 1), GAMING_BUDGET)
    return PointSet(members, G_JOINT, (f.name, f2.name))


def nonsimultaneous_set(world: World, f: Hypothesis, f2: Hypothesis) -> PointSet:
    both = gaming_set(world, f).members & gaming_set(world, f2).members
    return PointSet(both & ~joint_gaming_set(world, f, f2).members, N, (f.name, f2.name))


def half_positive_set(world: World, f: Hypothesis, f2: Hypothesis) -> PointSet:
    return PointSet(_labels(world, f) != _labels(world, f2), H_HALF, (f.name, f2.name))


def incentive_compatible(world: World, f: Hypothesis) -> bool:
    """True when Delta_f moves no point that carries mass."""
    moved = best_response_det(world, f).moved
    return not bool(np.any(moved & (world.mass.sum(axis=1) > 0)))


def pair_response(world: World, f: Hypothesis, f2: Hypothesis) -> Tuple[np.ndarray, ResponseMap]:
    """Vote vector and best response for the uniform mixture over {f, f2}."""
    lab = np.stack([_labels(world, f), _labels(world, f2)])
    vote = np.array([0.5, 0.5]) @ lab
    return vote, ResponseMap(respond(world.cost, vote), f"best_response_mix({f.name}:0.5,{f2.name}:0.5)")


@dataclass(frozen=True, eq=False)
class VoteTransitions:
    to_positive: np.ndarray
    to_zero: np.ndarray


def pair_vote_transitions(world: World, f: Hypothesis, f2: Hypothesis) -> VoteTransitions:
    """Points whose expected vote under U{f, f2} goes -1 -> +1 and -1 -> 0 after responding."""
    vote, delta = pair_response(world, f, f2)
    after = vote[delta.target]
    start = vote == -1.0
    return VoteTransitions(start & (after == 1.0), start & (after == 0.0))


def admissibility_check(world: World, f: Hypothesis, f2: Hypothesis) -> AdmissibilityReport:
    """
    A pair is admissible when, on every point with mass, the labels realised by
    the uniform-mixture best response agree with the labels the pair
    decomposition assumes: f gets gamed exactly on (C_f \\ G_f2) | G_joint
    (symmetrically for f2), and nothing positive turns negative.
    Jointly gameable points that are cheap for one member and expensive for
    the other are also excluded.
    """
    require_valid(world)
    a, b = _labels(world, f), _labels(world, f2)
    g_a, g_b = gaming_set(world, f).members, gaming_set(world, f2).members
    c_a, c_b = cheap_set(world, f).members, cheap_set(world, f2).members
    joint = joint_gaming_set(world, f, f2).members
    _, delta = pair_response(world, f, f2)

    assumed_a = np.where((c_a & ~g_b) | joint, 1, a)
    assumed_b = np.where((c_b & ~g_a) | joint, 1, b)
    contested_a = c_a & g_b & ~joint
    contested_b = c_b & g_a & ~joint
    mixed = joint & ((g_a & ~c_a) ^ (g_b & ~c_b))
    mismatch = (a[delta.target] != assumed_a) | (b[delta.target] != assumed_b)

    bad = (world.mass.sum(axis=1) > 0) & (mismatch | contested_a | contested_b | mixed)
    violating: List[Tuple[int, str]] = []
    for i in np.flatnonzero(bad).tolist():
        if contested_a[i]:
            reason = CHEAP_SOLO_CONTESTED_F
        elif contested_b[i]:
            reason = CHEAP_SOLO_CONTESTED_F_PRIME
        elif mixed[i]:
            reason = MIXED_COST_JOINT
        elif a[i] != b[i]:
            reason = HALF_POSITIVE_MISMATCH
        elif joint[i]:
            reason = JOINT_GAMING_DIVERTED
        else:
            reason = RESPONSE_MISMATCH
        violating.append((i, reason))
    if violating:
        logger.debug("pair (%s, %s) inadmissible at %d point(s)", f.name, f2.name, len(violating))
    return AdmissibilityReport(not violating, violating)
