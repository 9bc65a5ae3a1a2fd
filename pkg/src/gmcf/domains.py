"""Domain specifications and signed-distance geometry.

A domain spec couples two fields:

* ``field()``   -- a smooth defining field, positive inside, negative outside,
                   with a regular zero level (|grad| bounded below on a collar);
* ``sdf()``     -- the exact signed distance, valid at least on a tubular
                   collar around the boundary and extended smoothly outside it.

For balls and half-spaces the signed distance is closed form.  For ellipsoids,
perturbed balls and smoothed composites it is computed through the foot point:
project x onto the zero level, take d = sign * |x - p|.  The gradient is then
(x - p)/d and the Hessian is assembled from the boundary shape operator at p,
whose eigenvalue kappa_i transported a distance d inward becomes
-kappa_i / (1 - d * kappa_i) (and 0 in the normal direction).  Keeping |grad d|
exactly 1 matters: the curvature analysis of altered distances reads eigenvalue
structure straight off these Hessians.

Grid-sampled specs are redistanced by extracting the interpolated zero contour
(marching-squares segments) and taking exact point-segment distances -- same
contract as a fast-marching sweep, better constants at the grid sizes used here.
"""

from __future__ import annotations

import numpy as np

from .fields import (
    BallDistance,
    FuncField,
    GridField2D,
    HalfSpaceDistance,
    ScalarField,
    fd_hess,
)

# --------------------------------------------------------------------------
# generic differential geometry of level sets
# --------------------------------------------------------------------------

def tangent_basis(nu):
    """Orthonormal basis of the hyperplane orthogonal to the unit vector nu."""
    nu = np.asarray(nu, dtype=float)
    n = nu.size
    if n == 1:
        return np.zeros((1, 0))
    if n == 2:
        return np.array([[-nu[1]], [nu[0]]])
    k = int(np.argmin(np.abs(nu)))
    e = np.zeros(n)
    e[k] = 1.0
    t1 = np.cross(nu, e)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(nu, t1)
    return np.column_stack([t1, t2])


def shape_operator(field, x):
    """Principal curvatures/directions of the level set of ``field`` through x.

    Returns (kappa, directions) with kappa ascending, directions as columns.
    Sign convention: positive curvature when the level set bends away from the
    region where the field is positive (a ball boundary seen from inside has
    kappa = +1/R).
    """
    x = np.asarray(x, dtype=float)
    g = np.asarray(field.grad(x), dtype=float)
    ng = np.linalg.norm(g)
    if ng == 0.0 or not np.isfinite(ng):
        raise ValueError("degenerate gradient; level set is not regular at %r" % (x,))
    nu = g / ng
    T = tangent_basis(nu)
    if T.shape[1] == 0:
        return np.zeros(0), T
    H = np.asarray(field.hess(x), dtype=float)
    S = -(T.T @ H @ T) / ng
    kappa, V = np.linalg.eigh(S)
    return kappa, T @ V


def principal_curvatures(spec_or_field, x):
    """Curvature vector (length dim-1, ascending) of the level set through x."""
    field = spec_or_field.field() if isinstance(spec_or_field, DomainSpec) else spec_or_field
    kappa, _ = shape_operator(field, x)
    return kappa


# --------------------------------------------------------------------------
# closest-point projection
# --------------------------------------------------------------------------

def _grad_many(field, pts):
    gm = getattr(field, "grad_many", None)
    if gm is not None:
        return gm(pts)
    return np.array([field.grad(p) for p in pts])


def project_to_level_set(field, pts, max_iter=60, tol=1e-13):
    """Closest points on {field = 0} for a batch of query points.

    Alternates Newton steps onto the level set with tangential slides toward
    the query point; converges for queries within the reach of the boundary.
    """
    x = np.atleast_2d(np.asarray(pts, dtype=float))
    p = x.copy()
    for _ in range(max_iter):
        v = np.atleast_1d(field.values(p))
        g = _grad_many(field, p)
        g2 = np.einsum("ij,ij->i", g, g)
        g2 = np.where(g2 > 0, g2, 1.0)
        # Newton onto the zero level
        p = p - (v / g2)[:, None] * g
        # slide within the tangent plane toward x
        g = _grad_many(field, p)
        gn = np.linalg.norm(g, axis=1)
        gn = np.where(gn > 0, gn, 1.0)
        nu = g / gn[:, None]
        w = x - p
        step = w - np.einsum("ij,ij->i", w, nu)[:, None] * nu
        p = p + step
        if np.max(np.abs(field.values(p))) < tol and np.max(np.abs(step)) < 1e-11:
            break
    # final Newton polish
    for _ in range(3):
        v = np.atleast_1d(field.values(p))
        g = _grad_many(field, p)
        g2 = np.einsum("ij,ij->i", g, g)
        g2 = np.where(g2 > 0, g2, 1.0)
        p = p - (v / g2)[:, None] * g
    return p if np.asarray(pts).ndim == 2 else p[0]


def closest_point(spec_or_field, x):
    """Closest boundary point: x - d*grad refined by projection iterations."""
    field = spec_or_field.sdf() if isinstance(spec_or_field, DomainSpec) else spec_or_field
    x = np.asarray(x, dtype=float)
    return project_to_level_set(field, x)


# --------------------------------------------------------------------------
# exact SDF through foot points
# --------------------------------------------------------------------------

class FootPointSDF(ScalarField):
    """Signed distance to {defining = 0} computed per query via projection."""

    def __init__(self, defining, dim, h_fd=1e-6):
        self.defining = defining
        self.dim = dim
        self.h_fd = h_fd

    def value(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        p = project_to_level_set(self.defining, pts)
        d = np.linalg.norm(pts - p, axis=1)
        sgn = np.sign(np.atleast_1d(self.defining.values(pts)))
        sgn = np.where(sgn == 0, 1.0, sgn)
        out = sgn * d
        return float(out[0]) if single else out

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        p = project_to_level_set(self.defining, x)
        d = self.value(x)
        if abs(d) < 1e-9:
            g = np.asarray(self.defining.grad(p), dtype=float)
            return g / np.linalg.norm(g)
        return (x - p) / d

    def grad_many(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        p = project_to_level_set(self.defining, pts)
        diff = pts - p
        d = np.linalg.norm(diff, axis=1)
        sgn = np.sign(np.atleast_1d(self.defining.values(pts)))
        sgn = np.where(sgn == 0, 1.0, sgn)
        out = np.empty_like(pts)
        far = d > 1e-9
        out[far] = diff[far] / (sgn[far] * d[far])[:, None]
        if np.any(~far):
            g = _grad_many(self.defining, p[~far])
            out[~far] = g / np.linalg.norm(g, axis=1, keepdims=True)
        return out

    def hess(self, x):
        x = np.asarray(x, dtype=float)
        p = project_to_level_set(self.defining, x)
        d = float(self.value(x))
        kappa, dirs = shape_operator(self.defining, p)
        H = np.zeros((self.dim, self.dim))
        for i in range(kappa.size):
            denom = 1.0 - d * kappa[i]
            e = dirs[:, i]
            H += (-kappa[i] / denom) * np.outer(e, e)
        return H


# --------------------------------------------------------------------------
# domain specs
# --------------------------------------------------------------------------

class DomainSpec:
    kind = "abstract"
    dim: int

    def field(self) -> ScalarField:
        raise NotImplementedError

    def sdf(self) -> ScalarField:
        raise NotImplementedError

    def bounding_box(self):
        """(lo, hi) box containing the boundary and its collar."""
        raise NotImplementedError

    def boundary_points(self, n, rng=None):
        raise NotImplementedError

    def curvature_bound(self, n=400, rng=None):
        rng = rng or np.random.default_rng(0)
        pts = self.boundary_points(n, rng)
        f = self.field()
        worst = 0.0
        for p in pts:
            kappa = principal_curvatures(f, p)
            if kappa.size:
                worst = max(worst, float(np.max(np.abs(kappa))))
        return worst

    def tubular_width(self):
        K = self.curvature_bound()
        return 0.45 / max(K, 1e-3)

    def contains(self, pts):
        return np.atleast_1d(self.field().values(pts)) > 0.0

    def sample_inside(self, n, rng, trim=0.0):
        """Rejection-sample interior points (optionally d > trim from boundary)."""
        lo, hi = self.bounding_box()
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        out = []
        sdf = self.sdf() if trim > 0 else None
        guard = 0
        while sum(len(o) for o in out) < n:
            guard += 1
            if guard > 4000:
                raise RuntimeError("interior sampling failed; is the domain empty?")
            cand = rng.uniform(lo, hi, size=(max(2 * n, 256), lo.size))
            keep = self.contains(cand)
            cand = cand[keep]
            if trim > 0 and len(cand):
                cand = cand[np.atleast_1d(sdf.values(cand)) > trim]
            if len(cand):
                out.append(cand)
        return np.concatenate(out)[:n]

    def validate(self, n=500, rng=None, grad_floor=0.5):
        """Sampled regularity check: |grad field| >= grad_floor on the collar."""
        rng = rng or np.random.default_rng(0)
        f = self.field()
        w = 0.5 * self.tubular_width()
        pts = self.boundary_points(n, rng)
        if len(pts) == 0:
            raise ValueError("spec has an empty boundary")
        offsets = rng.uniform(-w, w, size=n)
        bad = []
        for p, off in zip(pts, offsets):
            g = np.asarray(f.grad(p), dtype=float)
            nu = g / np.linalg.norm(g)
            q = p + off * nu
            gq = np.linalg.norm(f.grad(q))
            if gq < grad_floor:
                bad.append((q, gq))
        if bad:
            q, gq = bad[0]
            raise ValueError(
                "boundary is not a regular level set: |grad| = %.3g < %.3g at %s"
                % (gq, grad_floor, np.array2string(np.asarray(q), precision=4))
            )
        return {"samples": n, "min_grad_floor": grad_floor, "collar": w}


def _unit_directions(n, dim, rng):
    v = rng.normal(size=(n, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v


class Ball(DomainSpec):
    kind = "ball"

    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")
        self.dim = self.center.size

    def field(self):
        return self.sdf()

    def sdf(self):
        f = BallDistance(self.center, self.radius)
        f.grad_many = lambda pts: -(pts - self.center) / np.linalg.norm(
            pts - self.center, axis=1, keepdims=True
        )
        return f

    def bounding_box(self):
        pad = 1.6 * self.radius
        return self.center - pad, self.center + pad

    def boundary_points(self, n, rng=None):
        rng = rng or np.random.default_rng(0)
        if self.dim == 1:
            pts = self.center + self.radius * np.array([[-1.0], [1.0]])
            return pts[rng.integers(0, 2, size=n)] if n > 2 else pts[:n]
        return self.center + self.radius * _unit_directions(n, self.dim, rng)

    def curvature_bound(self, n=0, rng=None):
        return 1.0 / self.radius

    def tubular_width(self):
        return 0.9 * self.radius


def interval(a, b):
    """1D domain (a, b) as a radius-(b-a)/2 ball."""
    a, b = float(a), float(b)
    if not b > a:
        raise ValueError("need b > a")
    return Ball([(a + b) / 2.0], (b - a) / 2.0)


def interval_extent(spec):
    """Exact endpoints (a, b) of a 1D domain.

    Not the bounding box, which is padded to hold the boundary collar.
    Non-ball specs are resolved by bisecting the field from its sampled
    maximum, which assumes a connected domain.
    """
    if spec.dim != 1:
        raise ValueError("interval_extent needs a 1D spec")
    if isinstance(spec, Ball):
        c = float(spec.center[0])
        return c - spec.radius, c + spec.radius
    f = spec.field()
    lo, hi = spec.bounding_box()
    lo, hi = float(lo[0]), float(hi[0])
    grid = np.linspace(lo, hi, 2049)
    vals = np.atleast_1d(f.values(grid[:, None]))
    if not np.any(vals > 0):
        raise ValueError("could not find an interior point of the 1D spec")
    x0 = float(grid[np.argmax(vals)])

    def cross(inner, outer):
        for _ in range(80):
            mid = 0.5 * (inner + outer)
            if float(np.atleast_1d(f.values(np.array([[mid]])))[0]) > 0:
                inner = mid
            else:
                outer = mid
        return 0.5 * (inner + outer)

    return cross(x0, lo), cross(x0, hi)


class HalfSpace(DomainSpec):
    kind = "half-space"

    def __init__(self, normal, offset, window=4.0):
        self.normal = np.asarray(normal, dtype=float)
        self.normal = self.normal / np.linalg.norm(self.normal)
        self.offset = float(offset)
        self.dim = self.normal.size
        self.window = float(window)  # finite patch used for sampling

    def field(self):
        return self.sdf()

    def sdf(self):
        f = HalfSpaceDistance(self.normal, self.offset)
        f.grad_many = lambda pts: np.broadcast_to(self.normal, np.atleast_2d(pts).shape).copy()
        return f

    def bounding_box(self):
        c = self.offset * self.normal
        return c - self.window, c + self.window

    def boundary_points(self, n, rng=None):
        rng = rng or np.random.default_rng(0)
        T = tangent_basis(self.normal)
        coef = rng.uniform(-self.window, self.window, size=(n, max(self.dim - 1, 1)))
        base = self.offset * self.normal
        if self.dim == 1:
            return np.repeat(base[None, :], n, axis=0)
        return base + coef @ T.T

    def curvature_bound(self, n=0, rng=None):
        return 0.0

    def tubular_width(self):
        return self.window


class Ellipsoid(DomainSpec):
    """Axis-aligned ellipsoid sum((x-c)_i^2 / a_i^2) = 1."""

    kind = "ellipsoid"

    def __init__(self, center, semi_axes):
        self.center = np.asarray(center, dtype=float)
        self.semi_axes = np.asarray(semi_axes, dtype=float)
        if np.any(self.semi_axes <= 0):
            raise ValueError("semi-axes must be positive")
        self.dim = self.center.size

    def field(self):
        c, a = self.center, self.semi_axes

        def val(x):
            y = (np.asarray(x, dtype=float) - c) / a
            return 1.0 - np.linalg.norm(y, axis=-1)

        def grad(x):
            y = (np.asarray(x, dtype=float) - c) / a
            r = np.linalg.norm(y)
            return -(y / a) / r

        def hess(x):
            y = (np.asarray(x, dtype=float) - c) / a
            r = np.linalg.norm(y)
            return -(np.diag(1.0 / (a * a)) / r - np.outer(y / a, y / a) / r ** 3)

        f = FuncField(self.dim, val, grad, hess)
        f.grad_many = lambda pts: -((np.atleast_2d(pts) - c) / a ** 2) / np.linalg.norm(
            (np.atleast_2d(pts) - c) / a, axis=1, keepdims=True
        )
        return f

    def sdf(self):
        return FootPointSDF(self.field(), self.dim)

    def bounding_box(self):
        pad = 1.6 * self.semi_axes
        return self.center - pad, self.center + pad

    def boundary_points(self, n, rng=None):
        rng = rng or np.random.default_rng(0)
        d = _unit_directions(n, self.dim, rng)
        t = 1.0 / np.linalg.norm(d / self.semi_axes, axis=1, keepdims=True)
        return self.center + t * d

    def tubular_width(self):
        b, a = float(np.min(self.semi_axes)), float(np.max(self.semi_axes))
        return 0.8 * b * b / a


class PerturbedBall(DomainSpec):
    """2D star-shaped domain r < rho(theta), rho a truncated Fourier series.

    rho(theta) = r0 + sum_k (cos_coeffs[k] cos((k+1) theta) + sin_coeffs[k] sin((k+1) theta))
    """

    kind = "perturbed-ball"

    def __init__(self, center, r0, cos_coeffs=(), sin_coeffs=()):
        self.center = np.asarray(center, dtype=float)
        if self.center.size != 2:
            raise ValueError("PerturbedBall is 2D")
        self.dim = 2
        self.r0 = float(r0)
        self.cos_coeffs = np.asarray(cos_coeffs, dtype=float)
        self.sin_coeffs = np.asarray(sin_coeffs, dtype=float)
        if self.rho_min() <= 0:
            raise ValueError("profile must stay positive")

    # -- profile and derivatives --------------------------------------
    def rho(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.full_like(theta, self.r0, dtype=float)
        for k, c in enumerate(self.cos_coeffs, start=1):
            out = out + c * np.cos(k * theta)
        for k, s in enumerate(self.sin_coeffs, start=1):
            out = out + s * np.sin(k * theta)
        return out

    def drho(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros_like(theta, dtype=float)
        for k, c in enumerate(self.cos_coeffs, start=1):
            out = out - c * k * np.sin(k * theta)
        for k, s in enumerate(self.sin_coeffs, start=1):
            out = out + s * k * np.cos(k * theta)
        return out

    def ddrho(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros_like(theta, dtype=float)
        for k, c in enumerate(self.cos_coeffs, start=1):
            out = out - c * k * k * np.cos(k * theta)
        for k, s in enumerate(self.sin_coeffs, start=1):
            out = out - s * k * k * np.sin(k * theta)
        return out

    def rho_min(self):
        th = np.linspace(0, 2 * np.pi, 2048, endpoint=False)
        return float(np.min(self.rho(th)))

    def boundary_curvature(self, theta):
        """Curvature of r = rho(theta): (rho^2 + 2 rho'^2 - rho rho'') / (...)^{3/2}."""
        r, dr, ddr = self.rho(theta), self.drho(theta), self.ddrho(theta)
        return (r * r + 2 * dr * dr - r * ddr) / np.power(r * r + dr * dr, 1.5)

    # -- fields --------------------------------------------------------
    def field(self):
        c = self.center

        def val(x):
            x = np.asarray(x, dtype=float)
            v = x - c
            r = np.linalg.norm(v, axis=-1)
            theta = np.arctan2(v[..., 1], v[..., 0])
            return self.rho(theta) - r

        def grad(x):
            x = np.asarray(x, dtype=float)
            v = x - c
            r = np.linalg.norm(v)
            theta = np.arctan2(v[1], v[0])
            dthetadx = np.array([-v[1], v[0]]) / (r * r)
            return self.drho(theta) * dthetadx - v / r

        def hess(x):
            x = np.asarray(x, dtype=float)
            v = x - c
            r = np.linalg.norm(v)
            theta = np.arctan2(v[1], v[0])
            n = v / r
            dth = np.array([-v[1], v[0]]) / (r * r)
            # second derivatives of theta and r
            Hth = np.array(
                [[2 * v[0] * v[1], v[1] ** 2 - v[0] ** 2],
                 [v[1] ** 2 - v[0] ** 2, -2 * v[0] * v[1]]]
            ) / (r ** 4)
            Hr = (np.eye(2) - np.outer(n, n)) / r
            return (self.ddrho(theta) * np.outer(dth, dth)
                    + self.drho(theta) * Hth - Hr)

        def grad_many(pts):
            pts = np.atleast_2d(pts)
            v = pts - c
            r = np.linalg.norm(v, axis=1)
            theta = np.arctan2(v[:, 1], v[:, 0])
            dth = np.column_stack([-v[:, 1], v[:, 0]]) / (r * r)[:, None]
            return self.drho(theta)[:, None] * dth - v / r[:, None]

        f = FuncField(2, val, grad, hess)
        f.grad_many = grad_many
        return f

    def sdf(self):
        return FootPointSDF(self.field(), 2)

    def bounding_box(self):
        th = np.linspace(0, 2 * np.pi, 512, endpoint=False)
        rmax = float(np.max(self.rho(th)))
        return self.center - 1.6 * rmax, self.center + 1.6 * rmax

    def boundary_points(self, n, rng=None):
        rng = rng or np.random.default_rng(0)
        theta = rng.uniform(0, 2 * np.pi, size=n)
        return self.center + self.rho(theta)[:, None] * np.column_stack(
            [np.cos(theta), np.sin(theta)]
        )

    def boundary_polyline(self, n=4096):
        """Dense boundary polyline (closed), for brute-force distance checks."""
        theta = np.linspace(0, 2 * np.pi, n, endpoint=False)
        return self.center + self.rho(theta)[:, None] * np.column_stack(
            [np.cos(theta), np.sin(theta)]
        )

    def curvature_bound(self, n=2048, rng=None):
        th = np.linspace(0, 2 * np.pi, n, endpoint=False)
        return float(np.max(np.abs(self.boundary_curvature(th))))


class PerturbedBall3D(DomainSpec):
    """Axisymmetric star-shaped 3D domain r < rho(u3), u3 the direction's 3rd
    component; rho(u3) = r0 + sum_m coeffs[m] * u3^m (polynomial, smooth at poles).
    """

    kind = "perturbed-ball-3d"

    def __init__(self, center, r0, coeffs=()):
        self.center = np.asarray(center, dtype=float)
        if self.center.size != 3:
            raise ValueError("PerturbedBall3D is 3D")
        self.dim = 3
        self.r0 = float(r0)
        self.coeffs = np.asarray(coeffs, dtype=float)
        self._poly = np.polynomial.Polynomial(np.concatenate([[self.r0], self.coeffs]))
        self._dpoly = self._poly.deriv()
        if self.rho_min() <= 0:
            raise ValueError("profile must stay positive")

    def rho(self, u3):
        return self._poly(np.asarray(u3, dtype=float))

    def rho_min(self):
        s = np.linspace(-1, 1, 4001)
        return float(np.min(self.rho(s)))

    def field(self):
        c = self.center

        def val(x):
            x = np.asarray(x, dtype=float)
            v = x - c
            r = np.linalg.norm(v, axis=-1)
            u3 = v[..., 2] / r
            return self.rho(u3) - r

        def grad(x):
            x = np.asarray(x, dtype=float)
            v = x - c
            r = np.linalg.norm(v)
            u = v / r
            du3 = (np.array([0.0, 0.0, 1.0]) - u[2] * u) / r
            return self._dpoly(u[2]) * du3 - u

        def grad_many(pts):
            pts = np.atleast_2d(pts)
            v = pts - c
            r = np.linalg.norm(v, axis=1, keepdims=True)
            u = v / r
            e3 = np.array([0.0, 0.0, 1.0])
            du3 = (e3[None, :] - u[:, 2:3] * u) / r
            return self._dpoly(u[:, 2])[:, None] * du3 - u

        f = FuncField(3, val, grad, hess=None, h_fd=1e-5 * self.r0)
        f.grad_many = grad_many
        return f

    def sdf(self):
        return FootPointSDF(self.field(), 3)

    def bounding_box(self):
        s = np.linspace(-1, 1, 801)
        rmax = float(np.max(self.rho(s)))
        return self.center - 1.6 * rmax, self.center + 1.6 * rmax

    def boundary_points(self, n, rng=None):
        rng = rng or np.random.default_rng(0)
        d = _unit_directions(n, 3, rng)
        return self.center + self.rho(d[:, 2])[:, None] * d

    def tubular_width(self):
        return 0.45 / max(self.curvature_bound(n=600), 1e-3)


class Slab(DomainSpec):
    """Region between two parallel hyperplanes: |n.x - c| < halfwidth.

    The signed distance halfwidth - |n.x - c| is exact everywhere and smooth
    away from the midplane; the midplane kink sits far outside the boundary
    collar, which is all the curvature machinery ever samples.
    """

    kind = "slab"

    def __init__(self, normal, center_offset, halfwidth, window=4.0):
        n = np.asarray(normal, dtype=float)
        self.normal = n / np.linalg.norm(n)
        self.center_offset = float(center_offset)
        self.halfwidth = float(halfwidth)
        if self.halfwidth <= 0:
            raise ValueError("halfwidth must be positive")
        self.dim = self.normal.size
        self.window = float(window)

    def field(self):
        return self.sdf()

    def sdf(self):
        n, c, w = self.normal, self.center_offset, self.halfwidth

        def val(x):
            s = np.asarray(x, dtype=float) @ n - c
            return w - np.abs(s)

        def grad(x):
            s = float(np.asarray(x, dtype=float) @ n - c)
            return -np.sign(s) * n if s != 0 else n.copy()

        def hess(x):
            return np.zeros((self.dim, self.dim))

        f = FuncField(self.dim, val, grad, hess)
        f.grad_many = lambda pts: -np.sign(
            (np.atleast_2d(pts) @ n - c)
        )[:, None] * n[None, :]
        return f

    def bounding_box(self):
        c = self.center_offset * self.normal
        pad = self.window + self.halfwidth
        return c - pad, c + pad

    def boundary_points(self, n_pts, rng=None):
        rng = rng or np.random.default_rng(0)
        T = tangent_basis(self.normal)
        coef = rng.uniform(-self.window, self.window, size=(n_pts, max(self.dim - 1, 1)))
        side = np.where(rng.integers(0, 2, size=n_pts) == 0, -1.0, 1.0)
        base = (self.center_offset + side * self.halfwidth)[:, None] * self.normal
        if self.dim == 1:
            return base
        return base + coef @ T.T

    def curvature_bound(self, n=0, rng=None):
        return 0.0

    def tubular_width(self):
        return 0.75 * self.halfwidth


class FullSpace(DomainSpec):
    """All of R^dim; only meaningful as input to domain truncation."""

    kind = "full-space"

    def __init__(self, dim=2):
        self.dim = dim

    def field(self):
        return FuncField(self.dim, lambda x: np.ones(np.asarray(x).shape[:-1]) if np.asarray(x).ndim > 1 else 1.0)

    def sdf(self):
        raise ValueError("full space has no boundary to measure distance to")

    def bounding_box(self):
        return -np.ones(self.dim), np.ones(self.dim)

    def boundary_points(self, n, rng=None):
        return np.zeros((0, self.dim))

    def curvature_bound(self, n=0, rng=None):
        return 0.0

    def contains(self, pts):
        pts = np.atleast_2d(pts)
        return np.ones(len(pts), dtype=bool)


class GridSampled(DomainSpec):
    """2D domain given by node samples of a defining field (positive inside)."""

    kind = "grid-sampled"

    def __init__(self, values, spacing, origin):
        self.values_arr = np.asarray(values, dtype=float)
        if self.values_arr.ndim != 2:
            raise ValueError("grid-sampled specs are 2D")
        self.spacing = float(spacing)
        self.origin = np.asarray(origin, dtype=float)
        self.dim = 2
        self._sdf_cache = None

    def field(self):
        return GridField2D(self.values_arr, self.spacing, self.origin)

    def sdf(self):
        if self._sdf_cache is None:
            d = redistance(self.values_arr, self.spacing)
            self._sdf_cache = GridField2D(d, self.spacing, self.origin)
        return self._sdf_cache

    def bounding_box(self):
        nx, ny = self.values_arr.shape
        hi = self.origin + self.spacing * np.array([nx - 1, ny - 1])
        return self.origin.copy(), hi

    def boundary_points(self, n, rng=None):
        segs = zero_contour(self.values_arr, self.spacing, self.origin)
        if len(segs) == 0:
            raise ValueError("grid-sampled spec has an empty boundary (no zero crossing)")
        rng = rng or np.random.default_rng(0)
        mids = segs.mean(axis=1)
        idx = rng.integers(0, len(mids), size=n)
        return mids[idx]

    def tubular_width(self):
        return max(2.0 * self.spacing, 0.45 / max(self.curvature_bound(n=200), 1e-3))


# --------------------------------------------------------------------------
# contour extraction and redistancing (2D)
# --------------------------------------------------------------------------

def zero_contour(values, spacing, origin=(0.0, 0.0)):
    """Marching-squares zero-level segments of node values; (M, 2, 2) array."""
    v = np.asarray(values, dtype=float)
    v = np.where(v == 0.0, 1e-30, v)  # nudge exact zeros off the contour
    origin = np.asarray(origin, dtype=float)
    nx, ny = v.shape
    segs = []
    for i in range(nx - 1):
        for j in range(ny - 1):
            c = [v[i, j], v[i + 1, j], v[i + 1, j + 1], v[i, j + 1]]
            corners = np.array(
                [[i, j], [i + 1, j], [i + 1, j + 1], [i, j + 1]], dtype=float
            )
            pts = []
            for k in range(4):
                a, b = c[k], c[(k + 1) % 4]
                if (a > 0) != (b > 0):
                    t = a / (a - b)
                    pts.append(corners[k] + t * (corners[(k + 1) % 4] - corners[k]))
            if len(pts) == 2:
                segs.append([pts[0], pts[1]])
            elif len(pts) == 4:
                # saddle cell: split by the center value's sign
                center = 0.25 * sum(c)
                if (center > 0) == (c[0] > 0):
                    segs.append([pts[0], pts[3]])
                    segs.append([pts[1], pts[2]])
                else:
                    segs.append([pts[0], pts[1]])
                    segs.append([pts[2], pts[3]])
    if not segs:
        return np.zeros((0, 2, 2))
    return origin + spacing * np.asarray(segs)


def _dist_to_segments(pts, segs):
    """Min distance from each point to a set of segments (vectorized, chunked)."""
    pts = np.asarray(pts, dtype=float)
    a = segs[:, 0]
    ab = segs[:, 1] - segs[:, 0]
    ab2 = np.einsum("ij,ij->i", ab, ab)
    ab2 = np.where(ab2 > 0, ab2, 1.0)
    best = np.full(len(pts), np.inf)
    chunk = 2048
    for s in range(0, len(pts), chunk):
        P = pts[s : s + chunk]
        ap = P[:, None, :] - a[None, :, :]
        t = np.clip(np.einsum("pmk,mk->pm", ap, ab) / ab2[None, :], 0.0, 1.0)
        close = a[None, :, :] + t[..., None] * ab[None, :, :]
        d = np.linalg.norm(P[:, None, :] - close, axis=2)
        best[s : s + chunk] = d.min(axis=1)
    return best


def redistance(values, spacing):
    """Exact signed node distances to the interpolated zero contour."""
    v = np.asarray(values, dtype=float)
    segs = zero_contour(v, spacing, (0.0, 0.0))
    if len(segs) == 0:
        raise ValueError("cannot redistance a field with no zero crossing")
    nx, ny = v.shape
    X, Y = np.meshgrid(
        spacing * np.arange(nx), spacing * np.arange(ny), indexing="ij"
    )
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    d = _dist_to_segments(nodes, segs).reshape(nx, ny)
    return np.where(v > 0, d, -d)


def signed_distance(spec):
    """Exact-in-collar signed distance field of a domain spec."""
    return spec.sdf()
