import copy

import numpy as np
import pytest

from app.flows.scenarios import build_scenario
from app.tools.world import Hypothesis, Point, World, parse_world

LINE3_DOC = {
    "points": [{"id": "x0", "coords": [0.0]}, {"id": "x1", "coords": [1.0]}, {"id": "x2", "coords": [2.0]}],
    "cost": {"type": "scaled_euclidean", "scale": 1.0},
    "distribution": [
        {"point": "x0", "label": -1, "prob": 0.3},
        {"point": "x1", "label": 1, "prob": 0.4},
        {"point": "x2", "label": 1, "prob": 0.3},
    ],
    "hypotheses": [
        {"name": "f1", "labels": [-1, 1, 1]},
        {"name": "f2", "labels": [-1, -1, 1]},
    ],
}


@pytest.fixture
def line3_doc():
    return copy.deepcopy(LINE3_DOC)


@pytest.fixture
def line3(line3_doc):
    return parse_world(line3_doc)


def make_world(cost, mass, hypotheses, coords=None) -> World:
    n = len(cost)
    points = tuple(Point(f"x{i}", None if coords is None else tuple(coords[i])) for i in range(n))
    hyps = tuple(Hypothesis(name, np.asarray(labels)) for name, labels in hypotheses)
    return World(points, np.asarray(cost, dtype=float), np.asarray(mass, dtype=float), hyps)


def random_world(seed: int) -> World:
    """Random costs (half on a coarse grid so ties happen), sparse mass, up to 5 distinct hypotheses."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 31))
    if seed % 2:
        cost = rng.choice([0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0], size=(n, n))
    else:
        cost = rng.uniform(0.0, 3.0, size=(n, n))
    np.fill_diagonal(cost, 0.0)
    mass = rng.uniform(size=(n, 2)) * (rng.uniform(size=(n, 2)) < 0.7)
    if mass.sum() == 0:
        mass[0, 0] = 1.0
    mass = mass / mass.sum()
    m = int(rng.integers(1, 6))
    rows, seen = [], set()
    for _ in range(m):
        labels = rng.choice([-1, 1], size=n)
        if labels.tobytes() not in seen:
            seen.add(labels.tobytes())
            rows.append((f"h{len(rows)}", labels))
    return make_world(cost, mass, rows)


@pytest.fixture(scope="session")
def random_worlds():
    worlds = [random_world(s) for s in range(500)]
    # renormalising can leave the total a few ulps off 1
    return [w for w in worlds if abs(w.mass.sum() - 1.0) <= 1e-12]


@pytest.fixture(scope="session")
def annulus():
    return build_scenario("annulus")


@pytest.fixture(scope="session")
def redundant():
    return build_scenario("redundant")
