"""Scalar fields with pointwise value / gradient / Hessian access.

A field is a smooth function R^dim -> R.  Domains are described by such
fields with the convention value > 0 inside, < 0 outside, boundary at the
zero level.  Analytic derivatives are supplied where cheap; everything else
falls back to centered finite differences with stencil width ``h_fd``.

Conventions
-----------
* points are numpy arrays of shape (dim,); ``value`` also accepts stacked
  points of shape (N, dim) and returns shape (N,)
* ``grad``/``hess`` are single-point
* signed-distance fields additionally satisfy |grad| = 1 where the closest
  boundary point is unique
"""

from __future__ import annotations

import numpy as np

DEFAULT_FD_REL = 1e-4  # stencil width relative to a unit of geometry size


class ScalarField:
    """Base class: subclasses implement value(); derivatives default to FD."""

    dim: int = 2
    h_fd: float = DEFAULT_FD_REL

    def value(self, x):
        raise NotImplementedError

    def grad(self, x):
        return fd_grad(self.value, np.asarray(x, dtype=float), self.h_fd)

    def hess(self, x):
        return fd_hess(self.value, np.asarray(x, dtype=float), self.h_fd)

    # -- conveniences -------------------------------------------------
    def values(self, pts):
        pts = np.asarray(pts, dtype=float)
        return self.value(pts)

    def __call__(self, x):
        return self.value(x)


def fd_grad(f, x, h):
    """Centered first differences of a scalar callable."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    g = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g

def fd_hess(f, x, h):
    """Centered second differences; symmetric by construction."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    H = np.empty((n, n))
    f0 = f(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        H[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / (h * h)
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h
            v = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4.0 * h * h)
            H[i, j] = v
            H[j, i] = v
    return H


class FuncField(ScalarField):
    """Field from plain callables; analytic grad/hess optional."""

    def __init__(self, dim, value, grad=None, hess=None, h_fd=DEFAULT_FD_REL):
        self.dim = dim
        self._value = value
        self._grad = grad
        self._hess = hess
        self.h_fd = h_fd

    def value(self, x):
        return self._value(np.asarray(x, dtype=float))

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        if self._grad is not None:
            return np.asarray(self._grad(x), dtype=float)
        return fd_grad(self._value, x, self.h_fd)

    def hess(self, x):
        x = np.asarray(x, dtype=float)
        if self._hess is not None:
            return np.asarray(self._hess(x), dtype=float)
        return fd_hess(self._value, x, self.h_fd)


class BallDistance(ScalarField):
    """Exact signed distance to a ball: d(x) = R - |x - c|, positive inside."""

    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.dim = self.center.size
        self.h_fd = DEFAULT_FD_REL * 2.0 * self.radius

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return self.radius - np.linalg.norm(x - self.center, axis=-1)

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        v = x - self.center
        r = np.linalg.norm(v)
        return -v / r

    def hess(self, x):
        x = np.asarray(x, dtype=float)
        v = x - self.center
        r = np.linalg.norm(v)
        n = v / r
        return -(np.eye(self.dim) - np.outer(n, n)) / r


class HalfSpaceDistance(ScalarField):
    """Signed distance to the half-space {n·x >= c}: d(x) = n·x - c."""

    def __init__(self, normal, offset):
        n = np.asarray(normal, dtype=float)
        self.normal = n / np.linalg.norm(n)
        self.offset = float(offset)
        self.dim = self.normal.size
        self.h_fd = DEFAULT_FD_REL

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return x @ self.normal - self.offset

    def grad(self, x):
        return self.normal.copy()

    def hess(self, x):
        return np.zeros((self.dim, self.dim))


class GridField2D(ScalarField):
    """Bicubic spline interpolant of node values on a uniform 2D grid.

    Derivatives come from the spline, so grad/hess are smooth inside the
    grid's interior.  Evaluation outside the sampled box is clamped to it.
    """

    def __init__(self, values, spacing, origin):
        from scipy.interpolate import RectBivariateSpline

        self.node_values = np.asarray(values, dtype=float)
        if self.node_values.ndim != 2:
            raise ValueError("GridField2D needs a 2D value array")
        self.spacing = float(spacing)
        self.origin = np.asarray(origin, dtype=float)
        self.dim = 2
        nx, ny = self.node_values.shape
        self._xs = self.origin[0] + self.spacing * np.arange(nx)
        self._ys = self.origin[1] + self.spacing * np.arange(ny)
        self._spl = RectBivariateSpline(self._xs, self._ys, self.node_values, kx=3, ky=3, s=0)
        self.h_fd = DEFAULT_FD_REL * self.spacing * max(nx, ny)

    def _clamp(self, x):
        x = np.asarray(x, dtype=float)
        cx = np.clip(x[..., 0], self._xs[0], self._xs[-1])
        cy = np.clip(x[..., 1], self._ys[0], self._ys[-1])
        return cx, cy

    def value(self, x):
        cx, cy = self._clamp(x)
        out = self._spl.ev(cx, cy)
        return float(out) if np.ndim(cx) == 0 else out

    def grad(self, x):
        cx, cy = self._clamp(x)
        return np.array([float(self._spl.ev(cx, cy, dx=1)), float(self._spl.ev(cx, cy, dy=1))])

    def hess(self, x):
        cx, cy = self._clamp(x)
        hxx = float(self._spl.ev(cx, cy, dx=2))
        hyy = float(self._spl.ev(cx, cy, dy=2))
        hxy = float(self._spl.ev(cx, cy, dx=1, dy=1))
        return np.array([[hxx, hxy], [hxy, hyy]])
