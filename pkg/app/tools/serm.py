"""
Strategic ERM by enumeration: deterministic classifiers are the grid vertices,
randomised classifiers are points of a simplex grid over F. Every candidate is
scored under its own best response.
"""
import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np

from app.config import LAB_GRID_CAP
from app.errors import GRID_TOO_LARGE, INVALID_ARGUMENT, LabError
from app.tools.response import TAU, respond
from app.tools.risk import loss_table
from app.tools.world import Dataset, HypothesisClass, Mixture, World, require_valid

logger = logging.getLogger(__name__)

GRID = "grid"
PAIRS = "pairs"
POPULATION = "population"


@dataclass(frozen=True, eq=False)
class SimplexGrid:
    resolution: int
    counts: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return self.counts / self.resolution

    def __len__(self) -> int:
        return int(self.counts.shape[0])


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def grid_size(m: int, k: int) -> int:
    return math.comb(k + m - 1, m - 1)


def simplex_grid(m: int, k: int, cap: Optional[int] = None) -> SimplexGrid:
    """
    All compositions of k into m parts, weights counts / k, ordered
    lexicographically from the first vertex down: m=2, k=2 gives
    (1, 0), (0.5, 0.5), (0, 1).
    """
    if m < 1 or k < 1:
        raise LabError(INVALID_ARGUMENT, f"simplex grid needs m >= 1 and k >= 1, got m={m}, k={k}")
    cap = LAB_GRID_CAP if cap is None else cap
    size = grid_size(m, k)
    if size > cap:
        raise LabError(GRID_TOO_LARGE, f"grid of {size} mixtures exceeds cap {cap}; lower --grid-k",
                       {"size": size, "cap": cap})
    counts = np.fromiter((c for comp in _compositions(k, m) for c in comp), dtype=np.int64, count=size * m)
    return SimplexGrid(k, counts.reshape(size, m))


def pairs_grid(m: int) -> SimplexGrid:
    """Vertices in class order, then U{f_i, f_j} for i < j."""
    rows = [2 * np.eye(m, dtype=np.int64)[i] for i in range(m)]
    for i, j in combinations(range(m), 2):
        row = np.zeros(m, dtype=np.int64)
        row[i] = row[j] = 1
        rows.append(row)
    return SimplexGrid(2, np.stack(rows))


def search_grid(m: int, k: int, mode: str = GRID, cap: Optional[int] = None) -> SimplexGrid:
    if mode == PAIRS:
        return pairs_grid(m)
    if mode != GRID:
        raise LabError(INVALID_ARGUMENT, f"unknown search mode {mode!r}")
    return simplex_grid(m, k, cap)


class StrategicLossCache:
    """
    Best response and expected loss table of every grid mixture. Both depend
    on the world only, so one cache serves any number of datasets.
    """

    def __init__(self, world: World, F: HypothesisClass, grid: SimplexGrid):
        require_valid(world)
        self.world = world
        self.F = F
        self.grid = grid
        weights = grid.weights
        targets = np.empty((len(grid), world.n), dtype=np.int64)
        tables = np.empty((len(grid), world.n, 2))
        for g in range(len(grid)):
            vote = weights[g] @ F.labels
            targets[g] = respond(world.cost, vote)
            tables[g] = loss_table(F.labels, weights[g], targets[g])
        self.targets = targets
        self.tables = tables
        logger.debug("cached %d strategic loss tables over %d points", len(grid), world.n)

    def population(self) -> np.ndarray:
        return (self.tables * self.world.mass[None, :, :]).sum(axis=(1, 2))

    def empirical(self, dataset: Dataset) -> np.ndarray:
        dataset.require_nonempty()
        dataset.check(self.world.n)
        cols = (dataset.labels.astype(np.int64) + 1) // 2
        return self.tables[:, dataset.points, cols].mean(axis=1)


@dataclass(frozen=True, eq=False)
class SermResult:
    argmin: int
    weights: np.ndarray
    objective: float
    ties: int
    provenance: str
    names: Tuple[str, ...] = ()
    objectives: Optional[np.ndarray] = None

    @property
    def mixture(self) -> Mixture:
        return Mixture(self.weights)

    @property
    def hypothesis(self) -> Optional[str]:
        """Name of the argmin when it is a point mass."""
        nz = np.flatnonzero(self.weights)
        return self.names[int(nz[0])] if nz.size == 1 and self.names else None

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "argmin": self.argmin,
            "weights": {n: float(w) for n, w in zip(self.names, self.weights.tolist())},
            "objective": self.objective,
            "ties": self.ties,
            "provenance": self.provenance,
        }
        if self.hypothesis is not None:
            out["hypothesis"] = self.hypothesis
        return out


def select_min(objectives: np.ndarray) -> Tuple[int, float, int]:
    """First index within TAU of the minimum, the minimum itself, and the tie count."""
    best = float(objectives.min())
    near = objectives <= best + TAU
    return int(np.argmax(near)), best, int(near.sum())


def _result(grid: SimplexGrid, F: HypothesisClass, objectives: np.ndarray, provenance: str) -> SermResult:
    g, best, ties = select_min(objectives)
    return SermResult(g, grid.weights[g], best, ties, provenance, tuple(F.names), objectives)


def _provenance(dataset: Dataset) -> str:
    return f"seed:{dataset.seed}" if dataset.seed is not None else "dataset"


# ---------- OPERATIONS ----------
def serm_deterministic(dataset: Dataset, world: World, F: HypothesisClass) -> SermResult:
    dataset.require_nonempty()
    grid = simplex_grid(len(F), 1)
    return _result(grid, F, StrategicLossCache(world, F, grid).empirical(dataset), _provenance(dataset))


def serm_randomised(
    dataset: Dataset,
    world: World,
    F: HypothesisClass,
    k: int,
    mode: str = GRID,
    cap: Optional[int] = None,
) -> SermResult:
    dataset.require_nonempty()
    grid = search_grid(len(F), k, mode, cap)
    cache = StrategicLossCache(world, F, grid)
    return _result(grid, F, cache.empirical(dataset), _provenance(dataset))


@dataclass(frozen=True, eq=False)
class PopulationOptima:
    det: SermResult
    f_star: List[int]
    r_star: float
    mix: SermResult

    def to_dict(self) -> Dict[str, Any]:
        return {
            "deterministic": self.det.to_dict(),
            "f_star": [self.det.names[i] for i in self.f_star],
            "r_star": self.r_star,
            "mixture": self.mix.to_dict(),
        }


def population_optima(
    world: World,
    F: HypothesisClass,
    k: int,
    mode: str = GRID,
    cap: Optional[int] = None,
) -> PopulationOptima:
    vertices = simplex_grid(len(F), 1)
    det_risks = StrategicLossCache(world, F, vertices).population()
    det = _result(vertices, F, det_risks, POPULATION)
    f_star = np.flatnonzero(det_risks <= det.objective + TAU).tolist()

    grid = search_grid(len(F), k, mode, cap)
    mix = _result(grid, F, StrategicLossCache(world, F, grid).population(), POPULATION)
    logger.info("population optima: R*=%.6g over %d optimal classifier(s), grid optimum %.6g",
                det.objective, len(f_star), mix.objective)
    return PopulationOptima(det, f_star, det.objective, mix)
