"""Unit tests for projection sets: exactness and the projection inequalities."""

import math

import numpy as np
import pytest

from visolve.feasible_sets import UNBOUNDED, Ball, Box, WholeSpace, diameter, from_config, project


def test_whole_space_identity():
    ws = WholeSpace(3)
    v = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(ws.project(v), v)
    assert diameter(ws) == UNBOUNDED


def test_box_clip_and_diameter():
    box = Box(np.array([-1.0, 0.0]), np.array([1.0, 2.0]))
    assert np.allclose(box.project([5.0, -5.0]), [1.0, 0.0])
    assert np.allclose(box.project([0.5, 1.0]), [0.5, 1.0])  # interior fixed
    assert math.isclose(box.diameter(), math.sqrt(4.0 + 4.0))
    with pytest.raises(ValueError):
        Box(np.array([1.0]), np.array([0.0]))


def test_ball_radial_projection():
    ball = Ball(np.zeros(2), 1.0)
    assert np.allclose(ball.project([3.0, 4.0]), [0.6, 0.8])
    v = np.array([0.1, -0.2])
    assert np.array_equal(ball.project(v), v)  # interior fixed
    off = Ball(np.array([1.0, 1.0]), 2.0)
    p = off.project([1.0, 10.0])
    assert np.allclose(p, [1.0, 3.0])
    assert math.isclose(ball.diameter(), 2.0)
    with pytest.raises(ValueError):
        Ball(np.zeros(2), 0.0)


def _random_sets(rng, dim=4):
    lo = rng.uniform(-2.0, 0.0, size=dim)
    hi = lo + rng.uniform(0.1, 3.0, size=dim)
    return [
        WholeSpace(dim),
        Box(lo, hi),
        Ball(rng.normal(size=dim), float(rng.uniform(0.5, 3.0))),
    ]


def _feasible_point(fset, rng):
    return fset.project(rng.normal(size=fset.dim if hasattr(fset, "dim") else 4))


@pytest.mark.parametrize("trial_seed", range(3))
def test_projection_inequalities_randomized(trial_seed):
    """Variational characterization, strengthened nonexpansiveness, 1-Lipschitz."""
    rng = np.random.default_rng(trial_seed)
    tol = 1e-9
    for fset in _random_sets(rng):
        for _ in range(500):
            v = rng.normal(0.0, 3.0, size=4)
            w = rng.normal(0.0, 3.0, size=4)
            u = _feasible_point(fset, rng)
            pv = fset.project(v)
            pw = fset.project(w)
            assert float(np.dot(v - pv, u - pv)) <= tol
            assert np.sum((u - pv) ** 2) <= np.sum((u - v) ** 2) - np.sum((v - pv) ** 2) + tol
            assert np.linalg.norm(pv - pw) <= np.linalg.norm(v - w) + tol


def test_projection_idempotent():
    rng = np.random.default_rng(42)
    for fset in _random_sets(rng):
        v = rng.normal(0.0, 5.0, size=4)
        p = fset.project(v)
        assert np.allclose(fset.project(p), p, atol=1e-12)


def test_from_config():
    ws = from_config({"kind": "whole_space"}, 3)
    assert isinstance(ws, WholeSpace) and ws.dim == 3
    box = from_config({"kind": "box", "lo": [0, 0], "hi": [1, 1]}, 2)
    assert isinstance(box, Box)
    ball = from_config({"kind": "ball", "radius": 2.0}, 2)
    assert isinstance(ball, Ball) and np.allclose(ball.center, 0.0)
    with pytest.raises(ValueError):
        from_config({"kind": "simplex"}, 2)


def test_project_module_function():
    assert np.allclose(project(Ball(np.zeros(1), 1.0), [5.0]), [1.0])
