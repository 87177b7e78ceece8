import numpy as np
import pytest

from app.errors import CONFIG_ERROR, LabError
from app.flows.scenarios import build_scenario, gen_annulus, gen_redundant
from app.tools.response import best_response_det, nonsimultaneous_set
from app.tools.risk import single_risk


def _mirror(world):
    """Index of the (x, -y) image of every annulus cell."""
    index = {pid: i for i, pid in enumerate(world.ids)}
    out = []
    for pid in world.ids:
        j, k = int(pid[1:3]), int(pid[4:6])
        out.append(index[f"r{j:02d}a{63 - k:02d}"])
    return np.asarray(out)


def test_annulus_shape(annulus):
    world, F = annulus
    assert world.n == 64 * 24
    assert F.names == ["f", "f_prime"]
    assert abs(world.mass.sum() - 1.0) <= 1e-12
    assert world.mass[:, 1].sum() == pytest.approx(0.5)
    assert world.cost_spec == {"type": "scaled_euclidean", "scale": 2.0}


def test_annulus_is_mirror_symmetric(annulus):
    world, F = annulus
    m = _mirror(world)
    xy = world.coords_array()
    assert np.array_equal(xy[m, 0], xy[:, 0])
    assert np.array_equal(xy[m, 1], -xy[:, 1])
    assert np.array_equal(world.mass[m], world.mass)
    f, f2 = F.hypotheses
    assert np.array_equal(f.labels[m], f2.labels)


def test_annulus_classifiers_are_equally_good(annulus):
    world, F = annulus
    f, f2 = F.hypotheses
    r = single_risk(world, f, best_response_det(world, f))
    r2 = single_risk(world, f2, best_response_det(world, f2))
    assert r == pytest.approx(r2, abs=1e-12)
    assert r > 0


@pytest.mark.parametrize("overrides", [
    {"inner_radius": 4.0, "gap_radius": 3.0},
    {"angular_bins": 63},
    {"cost_scale": -1.0},
    {"class_balance": 1.0},
    {"radial_bins": "many"},
])
def test_annulus_config_errors(overrides):
    with pytest.raises(LabError) as exc:
        gen_annulus(overrides)
    assert exc.value.code == CONFIG_ERROR


def test_annulus_rotations():
    world, F = gen_annulus({"angular_bins": 16, "radial_bins": 8, "rotations": [90]})
    assert F.names == ["f", "f_prime", "f_rot90"]
    assert world.n == 128


def test_redundant_world(redundant):
    world, F = redundant
    assert world.n == 16
    assert F.names == ["f_A", "f_B"]
    for h in F.hypotheses:
        assert single_risk(world, h, best_response_det(world, h)) == pytest.approx(0.3, abs=1e-12)
    f, f2 = F.hypotheses
    assert nonsimultaneous_set(world, f, f2).ids(world) == ["a1b1"]


def test_redundant_config_errors():
    with pytest.raises(LabError) as exc:
        gen_redundant({"p_pos": [0.5, 0.5]})
    assert exc.value.code == CONFIG_ERROR
    with pytest.raises(LabError) as exc:
        gen_redundant({"cost_scale": [1.0]})
    assert exc.value.code == CONFIG_ERROR


def test_unknown_scenario():
    with pytest.raises(LabError) as exc:
        build_scenario("moebius")
    assert exc.value.code == CONFIG_ERROR


def test_overrides_skip_unset_values():
    world, _ = build_scenario("redundant", {"threshold": None, "cost_scale": [2.0, 2.0]})
    assert world.cost[0, 1] == 2.0
