"""Smoothed boolean intersection of domains with curvature control.

Ingredients
-----------
``SmoothMinProfile``  the concave C^inf profile f with

    (i)   min(s,0) - 1 < f(s) < min(s,0)   for |s| < 1
    (ii)  f(s) = min(s,0)                  for |s| >= 1
    (iii) 0 <= f' <= 1
    (iv)  f'' <= 0

built as f(s) = integral_1^s psi(t) dt from a symmetric smooth step psi
(psi = 1 left of -1, 0 right of +1, psi(t) + psi(-t) = 1), so that f' = psi
and f'' = psi' are closed form and only f itself needs quadrature.

``BoundaryAlteration``  the distance alteration g with g(0) = 0,
1 <= g' <= 2 and g''(s) <= -C for |s| < eps_g, from

    g'(s) = 1 + (1 - tanh(k s)) / 2,   k = 4 C
    g(s)  = 3s/2 - log(cosh(k s)) / (2 k)
    g''(s) = -(k/2) sech^2(k s),  so g''(0) = -2C <= -C.

Feasibility: g'' <= -C on |s| < eps_g forces 4*C*eps_g <= ln(1 + sqrt(2)).

``mollified_min``  Phi = delta * f((a - b)/delta) + b, which satisfies the
sandwich  min(a,b) - delta < Phi <= min(a,b)  and equals min(a,b) *bitwise*
where |a - b| >= delta (the implementation branches instead of trusting
delta * ((a-b)/delta) to round back).

``smooth_intersection``  composes the pieces: alter each signed distance
(a = g(d_A), b = g(d_B)), pick delta by a geometric schedule with a level-set
regularity test, and return the smoothed domain {Phi > 0} together with the
data needed by the inclusion and curvature validators.

The inclusion requirement (everything of A cap B farther than eps from the
boundary intersection stays inside) is monotone in eps, so the construction
may internally tighten eps to fit the curvature-dominance collars while
validating the caller's eps.
"""

from __future__ import annotations

import numpy as np

from .cones import CurvatureCone
from .domains import DomainSpec, FootPointSDF, principal_curvatures, project_to_level_set
from .fields import ScalarField


class FeasibilityError(ValueError):
    """Requested alteration/smoothing parameters cannot satisfy the axioms."""


class DegenerateLevelSetError(RuntimeError):
    """No delta in the schedule produced a regular zero level."""


# --------------------------------------------------------------------------
# the smooth-min profile f
# --------------------------------------------------------------------------

def _bump(t):
    """exp(-1/t) continued by 0 for t <= 0 (C^inf)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out

def _bump_prime(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos]) / (t[pos] * t[pos])
    return out


class SmoothMinProfile:
    """The profile f; vectorized value and two derivatives."""

    def __init__(self, quad_nodes=96):
        # Gauss-Legendre rule reused for all value evaluations
        x, w = np.polynomial.legendre.leggauss(quad_nodes)
        self._qx = x
        self._qw = w

    # psi: smooth step, 1 for t <= -1, 0 for t >= 1, psi(t)+psi(-t) = 1
    def _psi(self, t):
        t = np.asarray(t, dtype=float)
        u = (1.0 - t) / 2.0
        bu = _bump(u)
        bv = _bump(1.0 - u)
        return bu / (bu + bv)

    def _psi_prime(self, t):
        t = np.asarray(t, dtype=float)
        u = (1.0 - t) / 2.0
        bu = _bump(u)
        bv = _bump(1.0 - u)
        s = bu + bv
        dS = (_bump_prime(u) * bv + bu * _bump_prime(1.0 - u)) / (s * s)
        return -0.5 * dS

    def value(self, s):
        """f(s); exact branches outside [-1, 1], quadrature inside."""
        s = np.asarray(s, dtype=float)
        scalar = s.ndim == 0
        s = np.atleast_1d(s)
        out = np.where(s >= 1.0, 0.0, s)  # covers both exact branches
        mid = (s > -1.0) & (s < 1.0)
        if np.any(mid):
            sm = s[mid]
            # integral_s^1 psi(t) dt via Gauss-Legendre mapped to [s, 1]
            half = (1.0 - sm) / 2.0
            midpt = (1.0 + sm) / 2.0
            nodes = midpt[:, None] + half[:, None] * self._qx[None, :]
            integ = half * np.sum(self._qw[None, :] * self._psi(nodes), axis=1)
            # quadrature roundoff may land one ulp above the true value near
            # the band edges, where f hugs min(s, 0); the bound is exact, so
            # saturate rather than let f poke above it
            out[mid] = np.minimum(-integ, np.minimum(sm, 0.0))
        return float(out[0]) if scalar else out

    def prime(self, s):
        s = np.asarray(s, dtype=float)
        scalar = s.ndim == 0
        s = np.atleast_1d(s)
        out = np.where(s <= -1.0, 1.0, np.where(s >= 1.0, 0.0, self._psi(s)))
        return float(out[0]) if scalar else out

    def second(self, s):
        s = np.asarray(s, dtype=float)
        scalar = s.ndim == 0
        s = np.atleast_1d(s)
        out = np.where(np.abs(s) >= 1.0, 0.0, self._psi_prime(s))
        return float(out[0]) if scalar else out


_PROFILE = None

def build_f():
    """Shared profile instance (stateless, safe to reuse)."""
    global _PROFILE
    if _PROFILE is None:
        _PROFILE = SmoothMinProfile()
    return _PROFILE


# --------------------------------------------------------------------------
# scalar mollified min / max and the height cutoff
# --------------------------------------------------------------------------

def mollified_min_values(p, q, delta, profile=None):
    """delta*f((p-q)/delta) + q with bitwise-exact branches for |p-q| >= delta."""
    f = profile or build_f()
    delta = float(delta)
    if not 0 < delta:
        raise ValueError("delta must be positive")
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    p, q = np.broadcast_arrays(p, q)
    scalar = p.ndim == 0
    p = np.atleast_1d(np.asarray(p, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=float))
    out = np.empty_like(p)
    with np.errstate(invalid="ignore"):
        diff = p - q
    take_q = diff >= delta
    take_p = diff <= -delta
    mid = ~(take_q | take_p)
    out[take_q] = q[take_q]
    out[take_p] = p[take_p]
    if np.any(mid):
        out[mid] = delta * f.value(diff[mid] / delta) + q[mid]
    return float(out[0]) if scalar else out


def mollified_max_values(p, q, delta, profile=None):
    return -mollified_min_values(-np.asarray(p, dtype=float), -np.asarray(q, dtype=float), delta, profile)


def mollified_min_max_height(u0, R, delta=0.5):
    """Height cutoff: clamp u0 into [-R, R] with the smooth min/max pair.

    Accepts a callable (returns a callable) or an array (returns an array).
    The result equals u0 wherever |u0| <= R - 1 and is constant +-R wherever
    +-u0 >= R + 1; values +-inf are legal inputs and land exactly on +-R.
    """
    R = float(R)
    if R <= 1.0:
        raise ValueError("height cutoff needs R > 1")

    def clamp(vals):
        vals = np.asarray(vals, dtype=float)
        lo = mollified_min_values(vals, np.full_like(vals, R), delta)
        return mollified_max_values(lo, np.full_like(lo, -R), delta)

    if callable(u0):
        return lambda x: clamp(u0(x))
    return clamp(u0)


# --------------------------------------------------------------------------
# boundary alteration g
# --------------------------------------------------------------------------

def _logcosh(z):
    z = np.abs(np.asarray(z, dtype=float))
    return z + np.log1p(np.exp(-2.0 * z)) - np.log(2.0)


EPS_G_FEASIBLE = float(np.log(1.0 + np.sqrt(2.0)))  # 4*C*eps_g must stay below this


class BoundaryAlteration:
    """g with g(0)=0, 1 <= g' <= 2, g'' <= -C on |s| < eps_g."""

    def __init__(self, C, eps_g):
        self.C = float(C)
        self.eps_g = float(eps_g)
        if self.C <= 0 or self.eps_g <= 0:
            raise ValueError("need C > 0 and eps_g > 0")
        self.k = 4.0 * self.C
        if self.k * self.eps_g > EPS_G_FEASIBLE:
            raise FeasibilityError(
                "g'' <= -C on |s| < eps_g is infeasible: need eps_g <= %.6g for C = %.6g"
                % (EPS_G_FEASIBLE / self.k, self.C)
            )

    def g(self, s):
        s = np.asarray(s, dtype=float)
        return 1.5 * s - _logcosh(self.k * s) / (2.0 * self.k)

    def gp(self, s):
        s = np.asarray(s, dtype=float)
        return 1.0 + 0.5 * (1.0 - np.tanh(self.k * s))

    def gpp(self, s):
        s = np.asarray(s, dtype=float)
        return -(self.k / 2.0) / np.cosh(self.k * s) ** 2


def build_g(C, eps_g=None):
    """Alteration for curvature constant C; eps_g defaults to the feasibility cap."""
    if eps_g is None:
        eps_g = 0.999 * EPS_G_FEASIBLE / (4.0 * float(C))
    return BoundaryAlteration(C, eps_g)


def reference_collar(alt, curvature_bound, tubular_width):
    """Largest collar width w on which the normal eigenvalue g''(d) dominates.

    Tangential eigenvalues of the altered Hessian at depth |d| <= w are
    g'(d) * (-kappa/(1 - d kappa)), bounded in magnitude by 2K/(1 - wK); the
    normal one is g''(d), least negative at the collar edge.  Bisection on

        (k/2) sech^2(k w) >= 2 K / (1 - w K).
    """
    K = float(curvature_bound)
    cap = min(alt.eps_g, float(tubular_width))
    if K <= 0:
        return cap

    def ok(w):
        if w * K >= 1.0:
            return False
        return (alt.k / 2.0) / np.cosh(alt.k * w) ** 2 >= 2.0 * K / (1.0 - w * K)

    if not ok(1e-12):
        return 0.0
    lo, hi = 1e-12, cap
    if ok(hi):
        return hi
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


class AlteredDistance(ScalarField):
    """a = g(d) for an exact signed distance d; chain-rule derivatives."""

    def __init__(self, sdf, alt):
        self.sdf = sdf
        self.alt = alt
        self.dim = sdf.dim
        self.h_fd = sdf.h_fd

    def value(self, x):
        return self.alt.g(self.sdf.value(x))

    def grad(self, x):
        d = self.sdf.value(x)
        return float(self.alt.gp(d)) * np.asarray(self.sdf.grad(x), dtype=float)

    def grad_many(self, pts):
        pts = np.atleast_2d(pts)
        d = np.atleast_1d(self.sdf.values(pts))
        gm = getattr(self.sdf, "grad_many", None)
        G = gm(pts) if gm is not None else np.array([self.sdf.grad(p) for p in pts])
        return self.alt.gp(d)[:, None] * G

    def hess(self, x):
        d = float(self.sdf.value(x))
        Dd = np.asarray(self.sdf.grad(x), dtype=float)
        Hd = np.asarray(self.sdf.hess(x), dtype=float)
        return float(self.alt.gpp(d)) * np.outer(Dd, Dd) + float(self.alt.gp(d)) * Hd


def altered_distance(spec, alt):
    """g composed with the spec's exact signed distance."""
    return AlteredDistance(spec.sdf(), alt)


# --------------------------------------------------------------------------
# the mollified min of two fields
# --------------------------------------------------------------------------

class MollifiedMin(ScalarField):
    """Phi = delta f((a-b)/delta) + b, branch-exact in the single-field regimes."""

    def __init__(self, a, b, delta, profile=None):
        if a.dim != b.dim:
            raise ValueError("field dims differ")
        self.a = a
        self.b = b
        self.delta = float(delta)
        self.f = profile or build_f()
        self.dim = a.dim
        self.h_fd = min(getattr(a, "h_fd", 1e-4), getattr(b, "h_fd", 1e-4))

    def value(self, x):
        av = self.a.value(x)
        bv = self.b.value(x)
        return mollified_min_values(av, bv, self.delta, self.f)

    def grad(self, x):
        av = float(self.a.value(x))
        bv = float(self.b.value(x))
        s = av - bv
        if s >= self.delta:
            return np.asarray(self.b.grad(x), dtype=float)
        if s <= -self.delta:
            return np.asarray(self.a.grad(x), dtype=float)
        fp = self.f.prime(s / self.delta)
        Da = np.asarray(self.a.grad(x), dtype=float)
        Db = np.asarray(self.b.grad(x), dtype=float)
        return fp * (Da - Db) + Db

    def grad_many(self, pts):
        pts = np.atleast_2d(pts)
        av = np.atleast_1d(self.a.values(pts))
        bv = np.atleast_1d(self.b.values(pts))
        s = av - bv
        Da = self.a.grad_many(pts) if hasattr(self.a, "grad_many") else np.array([self.a.grad(p) for p in pts])
        Db = self.b.grad_many(pts) if hasattr(self.b, "grad_many") else np.array([self.b.grad(p) for p in pts])
        fp = self.f.prime(np.clip(s / self.delta, -1.0, 1.0))
        fp = np.where(s >= self.delta, 0.0, np.where(s <= -self.delta, 1.0, fp))
        return fp[:, None] * (Da - Db) + Db

    def hess(self, x):
        av = float(self.a.value(x))
        bv = float(self.b.value(x))
        s = av - bv
        if s >= self.delta:
            return np.asarray(self.b.hess(x), dtype=float)
        if s <= -self.delta:
            return np.asarray(self.a.hess(x), dtype=float)
        u = s / self.delta
        fp = self.f.prime(u)
        fpp = self.f.second(u)
        Da = np.asarray(self.a.grad(x), dtype=float)
        Db = np.asarray(self.b.grad(x), dtype=float)
        Ha = np.asarray(self.a.hess(x), dtype=float)
        Hb = np.asarray(self.b.hess(x), dtype=float)
        w = Da - Db
        return (fpp / self.delta) * np.outer(w, w) + fp * (Ha - Hb) + Hb


def mollified_min(a, b, delta, profile=None):
    return MollifiedMin(a, b, delta, profile)


# --------------------------------------------------------------------------
# delta selection
# --------------------------------------------------------------------------

def sample_zero_level(field, bbox, n, rng, band=None, batch=4096, max_batches=200):
    """Well-spread points on {field = 0}: rejection near the level + projection."""
    lo, hi = np.asarray(bbox[0], dtype=float), np.asarray(bbox[1], dtype=float)
    if band is None:
        band = 0.05 * float(np.max(hi - lo))
    hits = []
    total = 0
    for _ in range(max_batches):
        cand = rng.uniform(lo, hi, size=(batch, lo.size))
        v = np.atleast_1d(field.values(cand))
        near = np.abs(v) < band
        if np.any(near):
            hits.append(cand[near])
            total += int(near.sum())
        if total >= n:
            break
    if total == 0:
        return np.zeros((0, lo.size))
    seeds = np.concatenate(hits)[:n]
    pts = project_to_level_set(field, seeds)
    ok = np.abs(np.atleast_1d(field.values(pts))) < 1e-9
    return pts[ok]


def select_delta(a, b, delta_upper, bbox, rng, tau=0.05, j_max=10, n_samples=600, profile=None):
    """First delta in {delta_upper * 2^-j} whose zero level is uniformly regular.

    Regularity test: min |grad Phi| over sampled zero-level points must exceed
    tau * max |grad Phi|.  Failing every candidate raises DegenerateLevelSetError
    (tangent boundaries with opposite normals genuinely have no good delta).
    """
    report = []
    for j in range(j_max):
        delta = float(delta_upper) * 2.0 ** (-j)
        phi = MollifiedMin(a, b, delta, profile)
        pts = sample_zero_level(phi, bbox, n_samples, rng)
        if len(pts) < max(8, n_samples // 20):
            report.append((delta, 0.0, 0.0, "level set not found"))
            continue
        G = phi.grad_many(pts)
        mags = np.linalg.norm(G, axis=1)
        gmin, gmax = float(np.min(mags)), float(np.max(mags))
        report.append((delta, gmin, gmax, "ok" if gmin > tau * gmax else "irregular"))
        if gmin > tau * gmax:
            return delta, {"schedule": report, "tau": tau}
    raise DegenerateLevelSetError(
        "no delta in the geometric schedule gave a regular zero level; "
        "schedule (delta, min|grad|, max|grad|, verdict): %s" % (report,)
    )


# --------------------------------------------------------------------------
# the smoothed intersection
# --------------------------------------------------------------------------

class SmoothedDomain(DomainSpec):
    """Domain spec wrapping a smoothed-intersection field {phi > 0}."""

    kind = "smoothed"

    def __init__(self, phi, bbox, dim, collar=0.1):
        self.phi = phi
        self._bbox = (np.asarray(bbox[0], dtype=float), np.asarray(bbox[1], dtype=float))
        self.dim = dim
        self._collar = collar

    def field(self):
        return self.phi

    def sdf(self):
        return FootPointSDF(self.phi, self.dim)

    def bounding_box(self):
        return self._bbox

    def boundary_points(self, n, rng=None):
        rng = rng or np.random.default_rng(0)
        pts = sample_zero_level(self.phi, self._bbox, n, rng)
        if len(pts) == 0:
            raise ValueError("smoothed domain has an empty boundary")
        idx = rng.integers(0, len(pts), size=n)
        return pts[idx]

    def tubular_width(self):
        return self._collar


class SmoothedIntersection:
    """Result bundle: altered fields, phi, chosen delta, and diagnostics."""

    def __init__(self, spec_a, spec_b, a, b, phi, delta, eps, eps_eff,
                 collar_a, collar_b, rim, delta1, diagnostics):
        self.spec_a = spec_a
        self.spec_b = spec_b
        self.a = a
        self.b = b
        self.phi = phi
        self.delta = delta
        self.eps = eps
        self.eps_eff = eps_eff
        self.collar_a = collar_a
        self.collar_b = collar_b
        self.rim = rim
        self.delta1 = delta1
        self.diagnostics = diagnostics

    def bounding_box(self):
        lo_a, hi_a = self.spec_a.bounding_box()
        lo_b, hi_b = self.spec_b.bounding_box()
        return np.maximum(lo_a, lo_b), np.minimum(hi_a, hi_b)

    def as_spec(self):
        w = min(self.collar_a, self.collar_b)
        return SmoothedDomain(self.phi, self.bounding_box(), self.phi.dim, collar=w)

    def dist_to_rim(self, pts):
        pts = np.atleast_2d(pts)
        if len(self.rim) == 0:
            return np.full(len(pts), np.inf)
        diff = pts[:, None, :] - self.rim[None, :, :]
        return np.min(np.linalg.norm(diff, axis=2), axis=1)


def _rim_cloud(spec_a, spec_b, n=1500, rng=None):
    """Points on the boundary intersection, by joint Newton on both distances."""
    rng = rng or np.random.default_rng(7)
    da, db = spec_a.sdf(), spec_b.sdf()
    seeds = spec_a.boundary_points(4 * n, rng)
    if len(seeds) == 0:
        return np.zeros((0, spec_a.dim))
    vb = np.abs(np.atleast_1d(db.values(seeds)))
    # coincident boundaries: the whole boundary is the intersection
    if float(np.max(vb)) < 1e-9:
        return seeds[:n]
    keep = vb < np.maximum(0.5, 3.0 * float(np.min(vb)))
    pts = seeds[keep]
    if len(pts) == 0:
        return np.zeros((0, spec_a.dim))
    for _ in range(40):
        va = np.atleast_1d(da.values(pts))
        vb = np.atleast_1d(db.values(pts))
        Ga = da.grad_many(pts) if hasattr(da, "grad_many") else np.array([da.grad(p) for p in pts])
        Gb = db.grad_many(pts) if hasattr(db, "grad_many") else np.array([db.grad(p) for p in pts])
        # least-squares Newton step for the 2-constraint system
        a11 = np.einsum("ij,ij->i", Ga, Ga)
        a12 = np.einsum("ij,ij->i", Ga, Gb)
        a22 = np.einsum("ij,ij->i", Gb, Gb)
        det = a11 * a22 - a12 * a12
        bad = np.abs(det) < 1e-12  # parallel normals: tangency, no transversal rim
        det = np.where(bad, 1.0, det)
        l1 = (va * a22 - vb * a12) / det
        l2 = (vb * a11 - va * a12) / det
        step = l1[:, None] * Ga + l2[:, None] * Gb
        step[bad] = 0.0
        pts = pts - step
        if float(np.max(np.abs(step))) < 1e-12:
            break
    va = np.abs(np.atleast_1d(da.values(pts)))
    vb = np.abs(np.atleast_1d(db.values(pts)))
    ok = (va < 1e-8) & (vb < 1e-8)
    return pts[ok][:n]


def smooth_intersection(spec_a, spec_b, eps, cone=None, delta=None, rng=None,
                        n_rim=1500, n_trim=3000, tau=0.05):
    """Smooth replacement for A intersect B with cone-aware boundary curvature.

    Preconditions checked by sampling: nonempty bounded intersection; both
    boundary curvature vectors inside the cone (when a cone is given); the
    effective eps-neighborhood of the boundary intersection within both
    dominance collars.  Violations raise with the offending sample point.
    """
    rng = rng or np.random.default_rng(20)
    if spec_a.dim != spec_b.dim:
        raise ValueError("specs have different dims")
    dim = spec_a.dim

    # cone preconditions on the two boundaries
    if cone is not None and dim >= 2:
        for tag, spec in (("A", spec_a), ("B", spec_b)):
            f = spec.field()
            for p in spec.boundary_points(200, rng):
                res = cone.contains(principal_curvatures(f, p))
                if not res.member:
                    raise ValueError(
                        "boundary of %s leaves the %s cone (margin %.3g) at %s"
                        % (tag, cone.name, res.margin, np.array2string(p, precision=4))
                    )

    # alterations sized from the curvature bounds
    K_a = spec_a.curvature_bound()
    K_b = spec_b.curvature_bound()
    alt_a = build_g(max(2.3 * max(K_a, 0.2), 1.0))
    alt_b = build_g(max(2.3 * max(K_b, 0.2), 1.0))
    collar_a = reference_collar(alt_a, K_a, spec_a.tubular_width())
    collar_b = reference_collar(alt_b, K_b, spec_b.tubular_width())
    if min(collar_a, collar_b) <= 0:
        raise FeasibilityError("dominance collar collapsed; curvature bound too large")

    a = altered_distance(spec_a, alt_a)
    b = altered_distance(spec_b, alt_b)

    lo_a, hi_a = spec_a.bounding_box()
    lo_b, hi_b = spec_b.bounding_box()
    lo, hi = np.maximum(lo_a, lo_b), np.minimum(hi_a, hi_b)
    if np.any(hi <= lo):
        raise ValueError("intersection is empty (disjoint bounding boxes)")
    bbox = (lo, hi)

    eps = float(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    eps_eff = min(eps, 0.9 * min(collar_a, collar_b))

    rim = _rim_cloud(spec_a, spec_b, n=n_rim, rng=rng)

    # sample the trimmed region (inside both, farther than eps from the rim)
    fa, fb = spec_a.field(), spec_b.field()
    trimmed = []
    guard = 0
    while sum(len(t) for t in trimmed) < n_trim and guard < 400:
        guard += 1
        cand = rng.uniform(lo, hi, size=(4096, dim))
        inside = (np.atleast_1d(fa.values(cand)) > 0) & (np.atleast_1d(fb.values(cand)) > 0)
        cand = cand[inside]
        if len(cand) == 0:
            continue
        if len(rim):
            dr = np.min(np.linalg.norm(cand[:, None, :] - rim[None, :, :], axis=2), axis=1)
            cand = cand[dr > eps]
        if len(cand):
            trimmed.append(cand)
    if not trimmed:
        raise ValueError("nothing remains of the intersection after eps-trimming; "
                         "intersection empty or eps too large")
    trimmed = np.concatenate(trimmed)[:n_trim]

    av = np.atleast_1d(a.values(trimmed))
    bv = np.atleast_1d(b.values(trimmed))
    delta1 = float(np.min(np.maximum(av, bv)))
    if delta1 <= 0:
        raise ValueError("trimmed region touches the boundary; eps too small for these specs")

    if delta is None:
        delta_upper = min(0.5 * delta1, min(collar_a, collar_b) / 3.5, 0.9)
        delta, sel_report = select_delta(a, b, delta_upper, bbox, rng, tau=tau)
    else:
        delta = float(delta)
        sel_report = {"schedule": [], "tau": tau, "note": "delta supplied by caller"}
        if delta > 0.5 * delta1:
            raise FeasibilityError("supplied delta %.3g exceeds delta1/2 = %.3g" % (delta, 0.5 * delta1))

    phi = MollifiedMin(a, b, delta)

    diagnostics = {
        "K_a": K_a, "K_b": K_b,
        "C_a": alt_a.C, "C_b": alt_b.C,
        "delta_selection": sel_report,
        "n_rim": int(len(rim)),
    }
    return SmoothedIntersection(spec_a, spec_b, a, b, phi, delta, eps, eps_eff,
                                collar_a, collar_b, rim, delta1, diagnostics)


# --------------------------------------------------------------------------
# validators (sampled); both report margins, never bare booleans
# --------------------------------------------------------------------------

def validate_inclusions(si, n=10000, rng=None):
    """Check {phi>0} inside A cap B, and the eps-trimmed A cap B inside {phi>0}."""
    rng = rng or np.random.default_rng(3)
    lo, hi = si.bounding_box()
    dim = lo.size
    fa, fb = si.spec_a.field(), si.spec_b.field()

    # class 1: points of the smoothed domain must lie in A cap B
    pts1 = []
    guard = 0
    while sum(len(p) for p in pts1) < n and guard < 600:
        guard += 1
        cand = rng.uniform(lo, hi, size=(8192, dim))
        keep = np.atleast_1d(si.phi.values(cand)) > 0
        if np.any(keep):
            pts1.append(cand[keep])
    pts1 = np.concatenate(pts1)[:n] if pts1 else np.zeros((0, dim))
    va = np.atleast_1d(fa.values(pts1))
    vb = np.atleast_1d(fb.values(pts1))
    viol1 = int(np.sum(~((va > 0) & (vb > 0))))
    margin1 = float(np.min(np.minimum(va, vb))) if len(pts1) else np.nan

    # class 2: trimmed intersection must lie in the smoothed domain
    pts2 = []
    guard = 0
    while sum(len(p) for p in pts2) < n and guard < 600:
        guard += 1
        cand = rng.uniform(lo, hi, size=(8192, dim))
        inside = (np.atleast_1d(fa.values(cand)) > 0) & (np.atleast_1d(fb.values(cand)) > 0)
        cand = cand[inside]
        if len(cand) and len(si.rim):
            dr = si.dist_to_rim(cand)
            cand = cand[dr > si.eps]
        if len(cand):
            pts2.append(cand)
    pts2 = np.concatenate(pts2)[:n] if pts2 else np.zeros((0, dim))
    pv = np.atleast_1d(si.phi.values(pts2))
    viol2 = int(np.sum(~(pv > 0))) if len(pts2) else 0
    margin2 = float(np.min(pv)) if len(pts2) else np.nan

    return {
        "n_smoothed_in_intersection": int(len(pts1)),
        "violations_smoothed_in_intersection": viol1,
        "min_margin_smoothed_in_intersection": margin1,
        "n_trimmed_in_smoothed": int(len(pts2)),
        "violations_trimmed_in_smoothed": viol2,
        "min_margin_trimmed_in_smoothed": margin2,
        "delta": si.delta,
        "delta1": si.delta1,
    }


def validate_curvature(si, cone, n=1000, rng=None, single_field_tol=1e-4):
    """Sample the smoothed boundary: cone margins of its curvature vector.

    Also cross-checks the single-field regime (|a-b| >= delta): there the
    level set coincides with one original boundary, so curvatures must match.
    """
    rng = rng or np.random.default_rng(5)
    pts = sample_zero_level(si.phi, si.bounding_box(), n, rng)
    if len(pts) == 0:
        raise DegenerateLevelSetError("could not sample the smoothed boundary")
    margins = np.empty(len(pts))
    regime_dev = 0.0
    blend_pts = 0
    collar_viol = 0
    for i, x in enumerate(pts):
        kappa = principal_curvatures(si.phi, x)
        margins[i] = cone.margin(kappa)
        s = float(si.a.value(x)) - float(si.b.value(x))
        if abs(s) >= si.delta:
            active = si.spec_b if s > 0 else si.spec_a
            ka = principal_curvatures(active.field(), x)
            if kappa.size:
                regime_dev = max(regime_dev, float(np.max(np.abs(np.sort(kappa) - np.sort(ka)))))
        else:
            blend_pts += 1
            da = float(si.spec_a.sdf().value(x))
            db = float(si.spec_b.sdf().value(x))
            if abs(da) > si.collar_a or abs(db) > si.collar_b:
                collar_viol += 1
    return {
        "n_boundary_samples": int(len(pts)),
        "min_margin": float(np.min(margins)),
        "mean_margin": float(np.mean(margins)),
        "blend_samples": int(blend_pts),
        "blend_outside_collars": int(collar_viol),
        "single_field_max_curvature_dev": float(regime_dev),
        "single_field_tol": single_field_tol,
        "cone": cone.name,
    }
