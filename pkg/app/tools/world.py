"""
Finite strategic-classification worlds: points, cost matrix, joint (x, y) mass,
hypotheses and mixtures, plus the world / dataset file formats.

Labels are stored as int8 in {-1, +1}. The mass table has shape (n, 2) with
column 0 for y = -1 and column 1 for y = +1 (see `label_column`).
"""
import csv
import json
import logging
from dataclasses import dataclass, field
from typing import Annotated, Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from app.errors import (
    DIMENSION_MISMATCH,
    EMPTY_DATASET,
    INDEX_ERROR,
    INVALID_ARGUMENT,
    INVALID_DATASET,
    INVALID_WORLD,
    IO_ERROR,
    MISSING_HYPOTHESES,
    NO_COORDS,
    PARSE_ERROR,
    LabError,
)
from app.tools.rng import rng_stream

logger = logging.getLogger(__name__)

MASS_TOL = 1e-12


def label_column(y: Union[int, np.ndarray]) -> Union[int, np.ndarray]:
    return (np.asarray(y) + 1) // 2 if isinstance(y, np.ndarray) else (int(y) + 1) // 2


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


# ---------- TYPES ----------
@dataclass(frozen=True)
class Point:
    id: str
    coords: Optional[Tuple[float, ...]] = None


@dataclass(frozen=True, eq=False)
class Hypothesis:
    name: str
    labels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", _frozen(np.asarray(self.labels, dtype=np.int8).copy()))


@dataclass(frozen=True, eq=False)
class HypothesisClass:
    hypotheses: Tuple[Hypothesis, ...]
    labels: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        hyps = tuple(self.hypotheses)
        if not hyps:
            raise LabError(MISSING_HYPOTHESES, "hypothesis class is empty")
        sizes = {h.labels.shape for h in hyps}
        if len(sizes) != 1:
            raise LabError(DIMENSION_MISMATCH, "hypotheses have different label lengths")
        seen: Dict[bytes, str] = {}
        for h in hyps:
            key = h.labels.tobytes()
            if key in seen:
                raise LabError(
                    INVALID_WORLD,
                    f"hypotheses {seen[key]!r} and {h.name!r} have identical labels",
                    [Violation("DUPLICATE_HYPOTHESIS", "identical label vectors", h.name).to_dict()],
                )
            seen[key] = h.name
        object.__setattr__(self, "hypotheses", hyps)
        object.__setattr__(self, "labels", _frozen(np.stack([h.labels for h in hyps])))

    def __len__(self) -> int:
        return len(self.hypotheses)

    def __getitem__(self, k: int) -> Hypothesis:
        return self.hypotheses[k]

    @property
    def names(self) -> List[str]:
        return [h.name for h in self.hypotheses]

    def index(self, name: str) -> int:
        for k, h in enumerate(self.hypotheses):
            if h.name == name:
                return k
        raise LabError(INDEX_ERROR, f"no hypothesis named {name!r}")

    def resolve(self, ref: Union[int, str]) -> int:
        if isinstance(ref, str) and not ref.lstrip("-").isdigit():
            return self.index(ref)
        k = int(ref)
        if not 0 <= k < len(self):
            raise LabError(INDEX_ERROR, f"hypothesis index {k} out of range for |F|={len(self)}")
        return k


@dataclass(frozen=True, eq=False)
class Mixture:
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).copy()
        if w.ndim != 1 or w.size == 0 or np.any(w < 0) or abs(w.sum() - 1.0) > MASS_TOL:
            raise LabError(INVALID_ARGUMENT, f"mixture weights must be a non-negative vector summing to 1, got {w.tolist()}")
        object.__setattr__(self, "weights", _frozen(w))

    @classmethod
    def point_mass(cls, m: int, k: int) -> "Mixture":
        w = np.zeros(m)
        w[k] = 1.0
        return cls(w)

    @classmethod
    def uniform(cls, m: int, members: Sequence[int]) -> "Mixture":
        w = np.zeros(m)
        for k in members:
            w[k] += 1.0 / len(members)
        return cls(w)

    def check(self, F: HypothesisClass) -> None:
        if self.weights.size != len(F):
            raise LabError(DIMENSION_MISMATCH, f"mixture has {self.weights.size} weights for |F|={len(F)}")


@dataclass(frozen=True, eq=False)
class Dataset:
    points: np.ndarray
    labels: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen(np.asarray(self.points, dtype=np.int64).reshape(-1).copy()))
        object.__setattr__(self, "labels", _frozen(np.asarray(self.labels, dtype=np.int8).reshape(-1).copy()))
        if self.points.shape != self.labels.shape:
            raise LabError(INVALID_DATASET, "points and labels differ in length")

    def __len__(self) -> int:
        return int(self.points.size)

    @property
    def items(self) -> List[Tuple[int, int]]:
        return list(zip(self.points.tolist(), self.labels.tolist()))

    def require_nonempty(self) -> None:
        if len(self) == 0:
            raise LabError(EMPTY_DATASET, "dataset has no items")

    def check(self, n_points: int) -> None:
        """Every item must name a point of an n_points world and carry a ±1 label."""
        bad = np.flatnonzero((self.points < 0) | (self.points >= n_points))
        if bad.size:
            raise LabError(INVALID_DATASET, f"point index out of range for a world of {n_points} points",
                           {"item": int(bad[0]), "point": int(self.points[bad[0]])})
        if not np.isin(self.labels, (-1, 1)).all():
            raise LabError(INVALID_DATASET, "labels must be -1 or +1")


@dataclass(frozen=True, eq=False)
class World:
    points: Tuple[Point, ...]
    cost: np.ndarray
    mass: np.ndarray
    hypotheses: Tuple[Hypothesis, ...] = ()
    # How the cost was declared in the source document; kept so serialisation round-trips.
    cost_spec: Optional[Dict[str, Any]] = None

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "cost", _frozen(np.asarray(self.cost, dtype=np.float64).copy()))
        object.__setattr__(self, "mass", _frozen(np.asarray(self.mass, dtype=np.float64).copy()))
        object.__setattr__(self, "hypotheses", tuple(self.hypotheses))

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def ids(self) -> List[str]:
        return [p.id for p in self.points]

    def coords_array(self) -> np.ndarray:
        if not self.points or any(p.coords is None for p in self.points):
            raise LabError(NO_COORDS, "world points carry no coordinates")
        return np.asarray([p.coords for p in self.points], dtype=np.float64)

    @property
    def hypothesis_class(self) -> HypothesisClass:
        if not self.hypotheses:
            raise LabError(MISSING_HYPOTHESES, "world document declares no hypotheses")
        return HypothesisClass(self.hypotheses)


# ---------- VALIDATION ----------
@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    location: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {"code": self.code, "message": self.message, "location": self.location}


def validate_world(world: World) -> List[Violation]:
    """
    Collects every invariant violation of `world` (and of the hypotheses it
    carries). An empty list means the world is valid; nothing here raises.
    """
    out: List[Violation] = []
    n = world.n
    if n == 0:
        out.append(Violation("EMPTY_WORLD", "world has no points"))

    seen: Dict[str, int] = {}
    for i, p in enumerate(world.points):
        if p.id in seen:
            out.append(Violation("DUPLICATE_POINT_ID", f"id {p.id!r} repeats point {seen[p.id]}", f"points[{i}]"))
        else:
            seen[p.id] = i
    dims = {len(p.coords) for p in world.points if p.coords is not None}
    if len(dims) > 1:
        out.append(Violation("COORD_DIMENSION", f"coordinates have mixed dimensions {sorted(dims)}", "points"))

    cost = world.cost
    if cost.shape != (n, n):
        out.append(Violation("COST_SHAPE", f"cost matrix has shape {cost.shape}, expected {(n, n)}", "cost"))
    else:
        if not np.all(np.isfinite(cost)):
            out.append(Violation("NONFINITE_COST", "cost matrix contains non-finite entries", "cost"))
        for i, j in np.argwhere(cost < 0)[:10]:
            out.append(Violation("NEGATIVE_COST", f"cost[{i}][{j}] = {cost[i, j]!r}", f"cost[{i}][{j}]"))
        for i in np.flatnonzero(np.diag(cost) != 0)[:10]:
            out.append(Violation("NONZERO_SELF_COST", f"cost[{i}][{i}] = {cost[i, i]!r}", f"cost[{i}][{i}]"))

    mass = world.mass
    if mass.shape != (n, 2):
        out.append(Violation("MASS_SHAPE", f"mass table has shape {mass.shape}, expected {(n, 2)}", "distribution"))
    else:
        if not np.all(np.isfinite(mass)):
            out.append(Violation("NONFINITE_MASS", "mass table contains non-finite entries", "distribution"))
        for i, c in np.argwhere(mass < 0)[:10]:
            y = 2 * int(c) - 1
            out.append(Violation("NEGATIVE_MASS", f"mass[{i}][{y}] = {mass[i, c]!r}", f"distribution[{world.points[i].id},{y}]"))
        total = float(mass.sum())
        if not abs(total - 1.0) <= MASS_TOL:
            out.append(Violation("MASS_NOT_NORMALISED", f"mass sums to {total!r}", "distribution"))

    labels_seen: Dict[bytes, str] = {}
    names_seen = set()
    for k, h in enumerate(world.hypotheses):
        loc = f"hypotheses[{k}]"
        if h.name in names_seen:
            out.append(Violation("DUPLICATE_HYPOTHESIS_NAME", f"name {h.name!r} repeats", loc))
        names_seen.add(h.name)
        if h.labels.shape != (n,):
            out.append(Violation("LABEL_LENGTH", f"{h.name!r} has {h.labels.size} labels for {n} points", loc))
            continue
        if not np.all(np.abs(h.labels) == 1):
            out.append(Violation("INVALID_LABEL", f"{h.name!r} has labels outside {{-1, +1}}", loc))
        key = h.labels.tobytes()
        if key in labels_seen:
            out.append(Violation("DUPLICATE_HYPOTHESIS", f"{h.name!r} repeats the labels of {labels_seen[key]!r}", loc))
        else:
            labels_seen[key] = h.name
    return out


def require_valid(world: World) -> None:
    report = validate_world(world)
    if report:
        raise LabError(INVALID_WORLD, f"world has {len(report)} violation(s), first: {report[0].code}", [v.to_dict() for v in report])


# ---------- COST ----------
def cost_from_metric(points: Sequence[Sequence[float]], scale: float) -> np.ndarray:
    dims = {len(p) for p in points}
    if len(dims) > 1:
        raise LabError(DIMENSION_MISMATCH, f"coordinates have mixed dimensions {sorted(dims)}")
    if not scale > 0:
        raise LabError(INVALID_ARGUMENT, f"cost scale must be positive, got {scale!r}")
    X = np.asarray(points, dtype=np.float64).reshape(len(points), -1)
    diff = X[:, None, :] - X[None, :, :]
    return scale * np.sqrt((diff * diff).sum(axis=-1))


# ---------- SAMPLING ----------
def sample_dataset(world: World, n: int, seed: int) -> Dataset:
    """
    n i.i.d. (x, y) draws by inverse CDF over the flattened mass table, cells
    ordered point-major with y = -1 before y = +1. Draw j consumes the j-th
    uniform of the Philox stream keyed by `seed`.
    """
    require_valid(world)
    if n < 0:
        raise LabError(INVALID_ARGUMENT, f"sample size must be non-negative, got {n}")
    cdf = np.cumsum(world.mass.reshape(-1))
    u = rng_stream(seed).random(int(n)) * cdf[-1]
    cells = np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)
    return Dataset(points=cells // 2, labels=2 * (cells % 2) - 1, seed=int(seed))


def read_dataset(path: str, world: World) -> Dataset:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as e:
        raise LabError(IO_ERROR, f"cannot read dataset {path}: {e}") from e
    index = {p.id: i for i, p in enumerate(world.points)}
    pts, ys = [], []
    for line, row in enumerate(rows, start=2):
        pid, label = (row.get("point") or "").strip(), (row.get("label") or "").strip()
        if pid not in index:
            raise LabError(INVALID_DATASET, f"{path}:{line}: unknown point id {pid!r}")
        if label not in ("-1", "1", "+1"):
            raise LabError(INVALID_DATASET, f"{path}:{line}: label must be -1 or 1, got {label!r}")
        pts.append(index[pid])
        ys.append(int(label))
    return Dataset(points=pts, labels=ys)


def write_dataset(path: str, world: World, dataset: Dataset) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["point", "label"])
            for i, y in dataset.items:
                w.writerow([world.points[i].id, y])
    except OSError as e:
        raise LabError(IO_ERROR, f"cannot write dataset {path}: {e}") from e


# ---------- WORLD DOCUMENT ----------
class PointDoc(BaseModel):
    id: str
    coords: Optional[List[float]] = None


class MatrixCostDoc(BaseModel):
    type: Literal["matrix"]
    matrix: List[List[float]]


class ScaledEuclideanCostDoc(BaseModel):
    type: Literal["scaled_euclidean"]
    scale: float


class MassEntryDoc(BaseModel):
    point: str
    label: Literal[-1, 1]
    prob: float


class HypothesisDoc(BaseModel):
    name: str
    labels: List[int]


class WorldDoc(BaseModel):
    points: List[PointDoc]
    cost: Annotated[Union[MatrixCostDoc, ScaledEuclideanCostDoc], Field(discriminator="type")]
    distribution: List[MassEntryDoc]
    hypotheses: List[HypothesisDoc] = []


def _location(err: Dict[str, Any]) -> str:
    return ".".join(str(p) for p in err.get("loc", ()))


def parse_world(document: Union[str, bytes, Dict[str, Any]]) -> World:
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise LabError(PARSE_ERROR, f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}",
                           {"line": e.lineno, "column": e.colno}) from e
    try:
        doc = WorldDoc.model_validate(document)
    except ValidationError as e:
        first = e.errors()[0]
        raise LabError(PARSE_ERROR, f"{_location(first)}: {first['msg']}", {"location": _location(first)}) from e
    return world_from_doc(doc)


def world_from_doc(doc: WorldDoc) -> World:
    points = tuple(Point(p.id, tuple(p.coords) if p.coords is not None else None) for p in doc.points)
    n = len(points)

    if isinstance(doc.cost, MatrixCostDoc):
        rows = doc.cost.matrix
        if len(rows) != n or any(len(r) != n for r in rows):
            raise LabError(INVALID_WORLD, f"cost matrix must be {n}x{n}",
                           [Violation("COST_SHAPE", f"expected {n}x{n}", "cost.matrix").to_dict()])
        cost = np.asarray(rows, dtype=np.float64).reshape(n, n)
        cost_spec = None
    else:
        if any(p.coords is None for p in points):
            raise LabError(NO_COORDS, "scaled_euclidean cost needs coordinates on every point")
        cost = cost_from_metric([p.coords for p in points], doc.cost.scale)
        cost_spec = {"type": "scaled_euclidean", "scale": doc.cost.scale}

    index: Dict[str, int] = {}
    for i, p in enumerate(points):
        index.setdefault(p.id, i)
    mass = np.zeros((n, 2))
    filled = np.zeros((n, 2), dtype=bool)
    problems: List[Violation] = []
    for k, entry in enumerate(doc.distribution):
        loc = f"distribution[{k}]"
        if entry.point not in index:
            problems.append(Violation("UNKNOWN_POINT", f"unknown point id {entry.point!r}", loc))
            continue
        i, c = index[entry.point], label_column(entry.label)
        if filled[i, c]:
            problems.append(Violation("DUPLICATE_MASS_ENTRY", f"({entry.point}, {entry.label}) given twice", loc))
        filled[i, c] = True
        mass[i, c] = entry.prob

    # out-of-range labels stay invalid after the int8 cast so validation reports them
    hyps = tuple(Hypothesis(h.name, np.clip(np.asarray(h.labels, dtype=np.int64), -2, 2)) for h in doc.hypotheses)
    world = World(points, cost, mass, hyps, cost_spec)
    problems.extend(validate_world(world))
    if problems:
        raise LabError(INVALID_WORLD, f"world has {len(problems)} violation(s), first: {problems[0].code}",
                       [v.to_dict() for v in problems])
    logger.debug("parsed world with %d points and %d hypotheses", n, len(hyps))
    return world


def serialize_world(world: World) -> Dict[str, Any]:
    points = []
    for p in world.points:
        entry: Dict[str, Any] = {"id": p.id}
        if p.coords is not None:
            entry["coords"] = [float(c) for c in p.coords]
        points.append(entry)
    cost = dict(world.cost_spec) if world.cost_spec else {"type": "matrix", "matrix": world.cost.tolist()}
    distribution = [
        {"point": world.points[i].id, "label": 2 * int(c) - 1, "prob": float(world.mass[i, c])}
        for i, c in zip(*np.nonzero(world.mass))
    ]
    return {
        "points": points,
        "cost": cost,
        "distribution": distribution,
        "hypotheses": [{"name": h.name, "labels": h.labels.astype(int).tolist()} for h in world.hypotheses],
    }


def load_world(path: str) -> World:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise LabError(IO_ERROR, f"cannot read world {path}: {e}") from e
    return parse_world(text)


def save_world(path: str, world: World) -> None:
    try:
        with open(path, "w") as fh:
            json.dump(serialize_world(world), fh, sort_keys=True)
            fh.write("\n")
    except OSError as e:
        raise LabError(IO_ERROR, f"cannot write world {path}: {e}") from e
