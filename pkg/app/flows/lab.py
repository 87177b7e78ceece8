"""
Orchestration shared by the CLI and the HTTP routes: resolve hypotheses and
mixtures from user input, run an operation, return a JSON-ready dict.
"""
import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.config import LAB_DATASET_DRAWS, LAB_GRID_K, LAB_SIGMA_DRAWS
from app.errors import INVALID_ARGUMENT, INVALID_WORLD, LabError
from app.tools import response as resp
from app.tools import risk, serm, theory
from app.tools.world import Dataset, Hypothesis, HypothesisClass, Mixture, World, parse_world, validate_world

logger = logging.getLogger(__name__)


# ---------- INPUT HELPERS ----------
def hypothesis_pair(F: HypothesisClass, refs: Optional[Sequence[str]]) -> Tuple[Hypothesis, Hypothesis]:
    if not refs:
        if len(F) < 2:
            return F[0], F[0]
        return F[0], F[1]
    if len(refs) == 1:
        h = F[F.resolve(refs[0])]
        return h, h
    if len(refs) != 2:
        raise LabError(INVALID_ARGUMENT, f"expected one or two hypotheses, got {len(refs)}")
    return F[F.resolve(refs[0])], F[F.resolve(refs[1])]


def parse_mixture(F: HypothesisClass, spec: Optional[str]) -> Mixture:
    """
    "name:w,name:w" sets explicit weights; a bare "a,b" is the uniform mixture
    over those hypotheses; nothing means the first hypothesis.
    """
    if not spec:
        return Mixture.point_mass(len(F), 0)
    parts = [p.strip() for p in spec.split(",") if p.strip()]
    if all(":" not in p for p in parts):
        return Mixture.uniform(len(F), [F.resolve(p) for p in parts])
    w = np.zeros(len(F))
    for p in parts:
        name, _, val = p.partition(":")
        try:
            w[F.resolve(name)] += float(val)
        except ValueError as e:
            raise LabError(INVALID_ARGUMENT, f"bad mixture weight {p!r}") from e
    return Mixture(w)


def _point_set(world: World, ps: resp.PointSet) -> Dict[str, Any]:
    neg, pos = ps.mass(world)
    return {"role": ps.role, "hypotheses": list(ps.hypotheses), "points": ps.ids(world),
            "mass_neg": neg, "mass_pos": pos}


# ---------- OPERATIONS ----------
def validate_document(document: Any) -> Dict[str, Any]:
    try:
        world = parse_world(document)
    except LabError as e:
        if e.code == INVALID_WORLD:
            return {"valid": False, "violations": e.details}
        raise
    return {"valid": True, "violations": [v.to_dict() for v in validate_world(world)],
            "points": world.n, "hypotheses": len(world.hypotheses)}


def respond(world: World, mixture: Optional[str] = None) -> Dict[str, Any]:
    F = world.hypothesis_class
    Q = parse_mixture(F, mixture)
    nz = np.flatnonzero(Q.weights)
    delta = resp.best_response_det(world, F[int(nz[0])]) if nz.size == 1 else resp.best_response_mix(world, F, Q)
    return delta.to_dict(world)


def sets(world: World, refs: Optional[Sequence[str]] = None) -> Dict[str, Any]:
    F = world.hypothesis_class
    f, f2 = hypothesis_pair(F, refs)
    out = {
        "G": [_point_set(world, resp.gaming_set(world, h)) for h in (f, f2)],
        "C": [_point_set(world, resp.cheap_set(world, h)) for h in (f, f2)],
        "E": [_point_set(world, resp.expensive_set(world, h)) for h in (f, f2)],
        "G_JOINT": _point_set(world, resp.joint_gaming_set(world, f, f2)),
        "N": _point_set(world, resp.nonsimultaneous_set(world, f, f2)),
        "H_HALF": _point_set(world, resp.half_positive_set(world, f, f2)),
        "admissibility": resp.admissibility_check(world, f, f2).to_dict(world),
        "incentive_compatible": {h.name: resp.incentive_compatible(world, h) for h in F.hypotheses},
    }
    return out


def risks(world: World, mixture: Optional[str] = None, dataset: Optional[Dataset] = None) -> Dict[str, Any]:
    F = world.hypothesis_class
    Q = parse_mixture(F, mixture)
    delta = resp.best_response_mix(world, F, Q)
    out = risk.risk_report(world, F, Q, delta).to_dict()
    out["weights"] = dict(zip(F.names, Q.weights.tolist()))
    if dataset is not None:
        out["empirical_strategic_risk"] = risk.empirical_strategic_risk(dataset, F, Q, delta)
        out["n"] = len(dataset)
    return out


def decompose(world: World, refs: Optional[Sequence[str]] = None) -> Dict[str, Any]:
    F = world.hypothesis_class
    f, f2 = hypothesis_pair(F, refs)
    return {
        "deterministic": {h.name: risk.decompose_deterministic(world, h).to_dict() for h in F.hypotheses},
        "pair": risk.decompose_pair_mixture(world, f, f2).to_dict(),
        "expensive_identity": risk.expensive_gaming_identity(world, f, f2).to_dict(),
    }


def run_serm(world: World, dataset: Dataset, k: Optional[int] = None, randomised: bool = False,
             mode: str = serm.GRID) -> Dict[str, Any]:
    F = world.hypothesis_class
    det = serm.serm_deterministic(dataset, world, F)
    out: Dict[str, Any] = {"deterministic": det.to_dict(), "n": len(dataset)}
    if randomised:
        rnd = serm.serm_randomised(dataset, world, F, k or LAB_GRID_K, mode)
        out["randomised"] = rnd.to_dict()
        out["improvement"] = det.objective - rnd.objective
    return out


def check_conditions(world: World, k: Optional[int] = None) -> Dict[str, Any]:
    return theory.check_sufficient_conditions(world, world.hypothesis_class, k or LAB_GRID_K).to_dict()


def rademacher(world: World, n: int, mixture: Optional[str] = None, sigma_draws: int = LAB_SIGMA_DRAWS,
               dataset_draws: int = LAB_DATASET_DRAWS, seed: int = 0, exact: bool = False,
               k: Optional[int] = None) -> Dict[str, Any]:
    F = world.hypothesis_class
    Q = parse_mixture(F, mixture)
    delta = resp.best_response_mix(world, F, Q)
    est = theory.rademacher_estimate(world, F, delta, n, sigma_draws, dataset_draws, seed, exact)
    out = {"estimate": est.to_dict(), "massart": theory.bound_table(theory.BoundParams(n=n, class_size=len(F)))["massart_finite"]}
    if k:
        out["sup_rademacher"] = theory.sup_rademacher_detail(world, F, k, n, sigma_draws, dataset_draws, seed).to_dict()
    return out


def converge(world: World, n_list: List[int], trials: int, delta: float, seed: int, k: Optional[int] = None,
             deterministic: bool = False, sigma_draws: int = LAB_SIGMA_DRAWS,
             dataset_draws: int = LAB_DATASET_DRAWS) -> theory.ConvergenceReport:
    return theory.excess_risk_experiment(world, world.hypothesis_class, k or LAB_GRID_K, n_list, trials, delta,
                                         seed, deterministic, sigma_draws, dataset_draws)


def bounds(params: theory.BoundParams) -> List[Dict[str, Any]]:
    return [{"bound": name, "value": value, "formula": theory.BOUND_NOTES[name]}
            for name, value in theory.bound_table(params).items()]


def overlay_sets(world: World, roles: Sequence[str], refs: Optional[Sequence[str]] = None) -> List[resp.PointSet]:
    F = world.hypothesis_class
    f, f2 = hypothesis_pair(F, refs)
    builders = {
        "G": lambda: resp.gaming_set(world, f),
        "G2": lambda: resp.gaming_set(world, f2),
        "C": lambda: resp.cheap_set(world, f),
        "C2": lambda: resp.cheap_set(world, f2),
        "E": lambda: resp.expensive_set(world, f),
        "E2": lambda: resp.expensive_set(world, f2),
        "G_JOINT": lambda: resp.joint_gaming_set(world, f, f2),
        "N": lambda: resp.nonsimultaneous_set(world, f, f2),
        "H_HALF": lambda: resp.half_positive_set(world, f, f2),
    }
    out = []
    for role in roles:
        if role not in builders:
            raise LabError(INVALID_ARGUMENT, f"unknown set {role!r}; known: {', '.join(builders)}")
        out.append(builders[role]())
    return out
