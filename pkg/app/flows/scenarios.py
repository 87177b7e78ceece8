"""
Scenario generators: the annulus world (positive disc, negative ring, a
mirrored pair of quadratic-band classifiers) and the redundant-features world.
"""
import logging
import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ValidationError, model_validator

from app.errors import CONFIG_ERROR, LabError
from app.scenario_config import SCENARIOS
from app.tools.world import Hypothesis, HypothesisClass, Point, World, cost_from_metric, require_valid

logger = logging.getLogger(__name__)


class AnnulusConfig(BaseModel):
    inner_radius: float = 2.0
    gap_radius: float = 3.0
    outer_radius: float = 5.0
    angular_bins: int = 64
    radial_bins: int = 24
    cost_scale: float = 2.0
    class_balance: float = 0.5
    curvature: float = 0.1
    offset: float = 4.0
    rotations: List[float] = []

    @model_validator(mode="after")
    def _check(self):
        if not 0 < self.inner_radius < self.gap_radius < self.outer_radius:
            raise ValueError("radii must satisfy 0 < inner_radius < gap_radius < outer_radius")
        if self.angular_bins < 4 or self.radial_bins < 4:
            raise ValueError("angular_bins and radial_bins must be >= 4")
        if self.angular_bins % 2:
            raise ValueError("angular_bins must be even so the grid mirrors onto itself")
        if not self.cost_scale > 0:
            raise ValueError("cost_scale must be positive")
        if not 0 < self.class_balance < 1:
            raise ValueError("class_balance must lie in (0, 1)")
        return self


class RedundantConfig(BaseModel):
    blocks: int = 2
    block_values: List[float] = [0.0, 1.0, 2.0, 3.0]
    cost_scale: List[float] = [1.0, 1.0]
    threshold: float = 2.0
    class_balance: float = 0.5
    p_pos: List[float] = [0.0, 0.2, 0.4, 0.4]
    p_neg: List[float] = [0.4, 0.4, 0.2, 0.0]

    @model_validator(mode="after")
    def _check(self):
        if self.blocks != 2:
            raise ValueError("the redundant world has exactly two feature blocks")
        if not self.block_values:
            raise ValueError("block_values must not be empty")
        if len(self.cost_scale) != 2 or any(not s > 0 for s in self.cost_scale):
            raise ValueError("cost_scale needs two positive per-block scales")
        if not 0 < self.class_balance < 1:
            raise ValueError("class_balance must lie in (0, 1)")
        for name in ("p_pos", "p_neg"):
            p = getattr(self, name)
            if len(p) != len(self.block_values) or any(v < 0 for v in p) or not abs(sum(p) - 1.0) <= 1e-9:
                raise ValueError(f"{name} must be a distribution over block_values")
        return self


def _config(model, values: Optional[Dict[str, Any]]):
    try:
        return model.model_validate(values or {})
    except ValidationError as e:
        first = e.errors()[0]
        loc = ".".join(str(p) for p in first.get("loc", ())) or model.__name__
        raise LabError(CONFIG_ERROR, f"{loc}: {first['msg']}") from e


# ---------- ANNULUS ----------
def _annulus_coords(cfg: AnnulusConfig) -> Tuple[List[str], np.ndarray, np.ndarray]:
    """
    Cell centres on a polar grid, radius-major. Angles in the lower half are
    exact mirror images (x, -y) of the upper half.
    """
    half = cfg.angular_bins // 2
    step = 2.0 * math.pi / cfg.angular_bins
    ids, xy, radii = [], [], []
    for j in range(cfg.radial_bins):
        r = (j + 0.5) * cfg.outer_radius / cfg.radial_bins
        upper = [(r * math.cos((k + 0.5) * step), r * math.sin((k + 0.5) * step)) for k in range(half)]
        for k in range(cfg.angular_bins):
            x, y = upper[k] if k < half else upper[cfg.angular_bins - 1 - k]
            ids.append(f"r{j:02d}a{k:02d}")
            xy.append((x, y if k < half else -y))
            radii.append(r)
    return ids, np.asarray(xy), np.asarray(radii)


def _band(xy: np.ndarray, a: float, b: float) -> np.ndarray:
    return np.where(xy[:, 1] >= a * xy[:, 0] ** 2 - b, 1, -1)


def gen_annulus(config: Optional[Dict[str, Any]] = None) -> Tuple[World, HypothesisClass]:
    cfg = config if isinstance(config, AnnulusConfig) else _config(AnnulusConfig, config)
    ids, xy, radii = _annulus_coords(cfg)

    # midpoint rule: a polar cell's area grows linearly with its radius
    pos = radii <= cfg.inner_radius
    neg = (radii >= cfg.gap_radius) & (radii <= cfg.outer_radius)
    if not pos.any() or not neg.any():
        raise LabError(CONFIG_ERROR, "grid too coarse: no cell centre falls in the disc or the ring")
    mass = np.zeros((len(ids), 2))
    mass[pos, 1] = cfg.class_balance * radii[pos] / radii[pos].sum()
    mass[neg, 0] = (1.0 - cfg.class_balance) * radii[neg] / radii[neg].sum()

    a, b = cfg.curvature, cfg.offset
    flipped = xy * np.array([1.0, -1.0])
    hyps = [Hypothesis("f", _band(xy, a, b)), Hypothesis("f_prime", _band(flipped, a, b))]
    seen = {h.labels.tobytes() for h in hyps}
    for deg in cfg.rotations:
        phi = math.radians(deg)
        rot = np.stack([xy[:, 0] * math.cos(phi) + xy[:, 1] * math.sin(phi),
                        -xy[:, 0] * math.sin(phi) + xy[:, 1] * math.cos(phi)], axis=1)
        h = Hypothesis(f"f_rot{deg:g}", _band(rot, a, b))
        if h.labels.tobytes() in seen:
            logger.info("rotation %g duplicates an existing classifier on this grid; skipped", deg)
            continue
        seen.add(h.labels.tobytes())
        hyps.append(h)

    points = tuple(Point(i, (float(x), float(y))) for i, (x, y) in zip(ids, xy))
    cost = cost_from_metric(xy, cfg.cost_scale)
    world = World(points, cost, mass, tuple(hyps), {"type": "scaled_euclidean", "scale": cfg.cost_scale})
    require_valid(world)
    logger.info("annulus world: %d cells, %d classifiers", world.n, len(hyps))
    return world, world.hypothesis_class


# ---------- REDUNDANT FEATURES ----------
def gen_redundant(config: Optional[Dict[str, Any]] = None) -> Tuple[World, HypothesisClass]:
    """
    Point (a, b) for every pair of block values; both blocks carry the label
    signal independently given y. Moving costs add across blocks.
    """
    cfg = config if isinstance(config, RedundantConfig) else _config(RedundantConfig, config)
    vals = np.asarray(cfg.block_values, dtype=np.float64)
    p_pos, p_neg = np.asarray(cfg.p_pos), np.asarray(cfg.p_neg)
    ia, ib = np.meshgrid(np.arange(vals.size), np.arange(vals.size), indexing="ij")
    ia, ib = ia.reshape(-1), ib.reshape(-1)
    a, b = vals[ia], vals[ib]

    s_a, s_b = cfg.cost_scale
    cost = s_a * np.abs(a[:, None] - a[None, :]) + s_b * np.abs(b[:, None] - b[None, :])
    mass = np.stack([
        (1.0 - cfg.class_balance) * p_neg[ia] * p_neg[ib],
        cfg.class_balance * p_pos[ia] * p_pos[ib],
    ], axis=1)

    points = tuple(Point(f"a{i}b{j}", (float(x), float(y))) for i, j, x, y in zip(ia, ib, a, b))
    hyps = (
        Hypothesis("f_A", np.where(a >= cfg.threshold, 1, -1)),
        Hypothesis("f_B", np.where(b >= cfg.threshold, 1, -1)),
    )
    world = World(points, cost, mass, hyps)
    require_valid(world)
    return world, world.hypothesis_class


GENERATORS = {"annulus": gen_annulus, "redundant": gen_redundant}


def build_scenario(name: str, overrides: Optional[Dict[str, Any]] = None) -> Tuple[World, HypothesisClass]:
    preset = SCENARIOS.get(name)
    if preset is None:
        raise LabError(CONFIG_ERROR, f"unknown scenario {name!r}; known: {', '.join(sorted(SCENARIOS))}")
    values = {k: v for k, v in preset.items() if k != "kind"}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return GENERATORS[preset["kind"]](values)
