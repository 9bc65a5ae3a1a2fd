import numpy as np
import pytest

from gmcf.fields import (BallDistance, FuncField, GridField2D,
                         HalfSpaceDistance, fd_grad, fd_hess)


def test_ball_distance_values():
    f = BallDistance(np.array([1.0, -2.0]), 3.0)
    assert f.value(np.array([1.0, -2.0])) == 3.0          # center
    assert f.value(np.array([4.0, -2.0])) == 0.0          # on the sphere
    assert f.value(np.array([6.0, -2.0])) == -2.0         # outside
    pts = np.array([[1.0, 1.0], [1.0, -5.0]])
    assert np.allclose(f.values(pts), 0.0)


def test_ball_distance_derivatives_match_fd():
    rng = np.random.default_rng(42)
    f = BallDistance(np.array([0.5, 0.5, -1.0]), 2.0)
    for _ in range(25):
        x = rng.uniform(-2.5, 2.5, 3)
        if np.linalg.norm(x - f.center) < 1e-2:
            continue
        g = f.grad(x)
        h = f.hess(x)
        assert np.allclose(g, fd_grad(f.value, x, 1e-5), atol=1e-6)
        assert np.allclose(h, fd_hess(f.value, x, 1e-4), atol=1e-5)
        # eikonal away from the center
        assert abs(np.linalg.norm(g) - 1.0) < 1e-12


def test_halfspace_distance_exact():
    nu = np.array([3.0, 4.0]) / 5.0
    f = HalfSpaceDistance(nu, 2.0)
    x = 2.0 * nu
    assert abs(f.value(x)) < 1e-14
    assert abs(f.value(x + 0.7 * nu) - (-0.7)) < 1e-14 or abs(f.value(x + 0.7 * nu) - 0.7) < 1e-14
    assert np.allclose(f.hess(x), 0.0)


def test_funcfield_fd_fallback():
    # quadratic with known derivatives, no analytic grad/hess supplied
    f = FuncField(2, lambda x: x[0] ** 2 + 3.0 * x[0] * x[1])
    x = np.array([0.7, -0.4])
    assert np.allclose(f.grad(x), [2 * 0.7 + 3 * (-0.4), 3 * 0.7], atol=1e-6)
    assert np.allclose(f.hess(x), [[2.0, 3.0], [3.0, 0.0]], atol=1e-4)


def test_funcfield_uses_supplied_derivatives():
    calls = {"g": 0}

    def grad(x):
        calls["g"] += 1
        return np.array([1.0, 0.0])

    f = FuncField(2, lambda x: x[0], grad=grad)
    f.grad(np.zeros(2))
    assert calls["g"] == 1


def test_gridfield_reproduces_polynomials():
    # the spline interpolant is exact on cubics, so grad/hess of a quadratic
    # come out exact in the interior
    h = 0.1
    xs = h * np.arange(11)
    ys = h * np.arange(11)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    vals = 2.0 + 0.5 * X - 1.5 * Y + 0.25 * X * Y + 0.4 * X ** 2
    f = GridField2D(vals, h, np.array([0.0, 0.0]))
    rng = np.random.default_rng(7)
    pts = rng.uniform(0.2, 0.8, size=(50, 2))
    exact = (2.0 + 0.5 * pts[:, 0] - 1.5 * pts[:, 1]
             + 0.25 * pts[:, 0] * pts[:, 1] + 0.4 * pts[:, 0] ** 2)
    assert np.allclose(f.values(pts), exact, atol=1e-10)
    x = np.array([0.43, 0.57])
    g = f.grad(x)
    assert np.allclose(g, [0.5 + 0.25 * x[1] + 0.8 * x[0], -1.5 + 0.25 * x[0]],
                       atol=1e-8)
    hss = f.hess(x)
    assert np.allclose(hss, [[0.8, 0.25], [0.25, 0.0]], atol=1e-7)


def test_gridfield_clamps_outside_queries():
    vals = np.outer(np.arange(5.0), np.ones(5))
    f = GridField2D(vals, 1.0, np.zeros(2))
    assert f.value(np.array([9.0, 2.0])) == f.value(np.array([4.0, 2.0]))
