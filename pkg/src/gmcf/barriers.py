"""Exact solutions and certified super-/subsolution barriers.

A ``Barrier`` carries a side ("upper" barriers must dominate solutions,
"lower" barriers must stay below), a value function of (points, t), a
validity predicate, and the construction label.  ``check_barrier`` scans a
FlowResult and reports the worst signed violation inside the validity
region; the certification routines sample the PDE residual

    residual = dw/dt - (delta_ij - w_i w_j / (1 + |Dw|^2)) w_ij

which must be >= -tol for upper barriers and <= +tol for lower ones.

Constructions
-------------
* ``grim_reaper``          the translating solution t - log|sin x| + shift,
  exact on either branch (0, pi) or (-pi, 0).
* ``sphere_graph_barrier`` hemisphere graphs of the shrinking sphere
  r(t) = sqrt(r0^2 - 2 n t); exact solutions, usable as one-sided barriers,
  and the source of the sqrt-in-time modulus of continuity.
* ``boundary_gradient_barrier``  w+- = phi +- delta log(1 + sigma d) +- M eta(d)
  on a boundary collar, with (delta, sigma) found by geometric search and
  certified by residual-sign sampling; yields the boundary gradient bound
  |Du| <= delta sigma + Lip(phi).
* ``sup_barrier``          w = (v(x', t) - x_n)^{-1} built from a computed
  lower-dimensional cap solution v; the pair +-(w + c t + sup_data) bounds
  |u| away from the cap, with drift constant c >= 4 s^2 ||D^2 v|| + 4 s.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fields import ScalarField


@dataclass
class Barrier:
    side: str                      # "upper" | "lower"
    label: str                     # construction name
    dim: int
    value: object                  # callable(pts, t) -> values
    valid: object                  # callable(pts, t) -> bool mask
    t_span: tuple = (0.0, np.inf)
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.side not in ("upper", "lower"):
            raise ValueError("side must be 'upper' or 'lower'")


def _pts2d(pts):
    pts = np.asarray(pts, dtype=float)
    return pts[:, None] if pts.ndim == 1 else pts


# --------------------------------------------------------------------------
# exact solutions
# --------------------------------------------------------------------------

class GrimReaper:
    """u(x, t) = t - log|sin x| + shift on one branch; rhs identically 1."""

    def __init__(self, branch=(0.0, np.pi), shift=0.0):
        lo, hi = float(branch[0]), float(branch[1])
        if not ((lo, hi) == (0.0, float(np.pi)) or (lo, hi) == (float(-np.pi), 0.0)):
            raise ValueError("branch must be (0, pi) or (-pi, 0)")
        self.branch = (lo, hi)
        self.shift = float(shift)
        self.dim = 1

    def value(self, x, t):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return t + self.shift - np.log(np.abs(np.sin(x)))

    def prime(self, x):
        x = np.asarray(x, dtype=float)
        return -1.0 / np.tan(x)

    def second(self, x):
        x = np.asarray(x, dtype=float)
        return 1.0 / np.sin(x) ** 2

    def valid(self, x, t):
        x = np.asarray(x, dtype=float)
        return (x > self.branch[0]) & (x < self.branch[1])

    def as_barrier(self, side):
        return Barrier(side, "translator", 1,
                       lambda pts, t: self.value(np.asarray(pts).reshape(-1), t),
                       lambda pts, t: self.valid(np.asarray(pts).reshape(-1), t),
                       info={"shift": self.shift, "branch": self.branch})


def grim_reaper(branch=(0.0, np.pi), shift=0.0):
    return GrimReaper(branch, shift)


def sphere_graph_barrier(center, r0, n, side, height=0.0, graph_frac=0.995):
    """Hemisphere graph over an n-dimensional base, radius sqrt(r0^2 - 2nt).

    "upper": dome height + sqrt(r(t)^2 - rho^2), descending in time;
    "lower": bowl height - sqrt(...), ascending.  Valid while rho is inside
    graph_frac of the current radius and the sphere exists.
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    r0 = float(r0)
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    t_max = r0 * r0 / (2.0 * n)
    sgn = 1.0 if side == "upper" else -1.0

    def radius(t):
        return np.sqrt(max(r0 * r0 - 2.0 * n * t, 0.0))

    def _rho(pts):
        pts = np.asarray(pts, dtype=float)
        if pts.ndim == 1:
            return np.abs(pts - center[0])
        return np.linalg.norm(pts - center[None, :], axis=1)

    def value(pts, t):
        r = radius(t)
        rho = _rho(pts)
        arg = np.maximum(r * r - rho * rho, 0.0)
        return height + sgn * np.sqrt(arg)

    def valid(pts, t):
        if t >= t_max:
            return np.zeros(len(np.atleast_1d(_rho(pts))), dtype=bool)
        return _rho(pts) <= graph_frac * radius(t)

    return Barrier(side, "shrinking-cap", center.size, value, valid,
                   t_span=(0.0, t_max),
                   info={"r0": r0, "n": n, "radius": radius, "height": height,
                         "center": center})


def modulus_sqrt_in_time(result, t_lo=0.0):
    """Smallest C with |u(x,t) - u(x,s)| <= C sqrt(|t-s|) over the frames."""
    best = 0.0
    times = result.times
    for i in range(len(times)):
        if times[i] < t_lo:
            continue
        for j in range(i + 1, len(times)):
            dtau = times[j] - times[i]
            if dtau <= 0:
                continue
            a, b = result.frames[i], result.frames[j]
            good = np.isfinite(a) & np.isfinite(b)
            if not np.any(good):
                continue
            dv = float(np.max(np.abs(a[good] - b[good])))
            best = max(best, dv / np.sqrt(dtau))
    return best


# --------------------------------------------------------------------------
# residual machinery
# --------------------------------------------------------------------------

def _quintic(tau):
    tau = np.clip(tau, 0.0, 1.0)
    return tau ** 3 * (10.0 - 15.0 * tau + 6.0 * tau * tau)

def _quintic_p(tau):
    t = np.clip(tau, 0.0, 1.0)
    return 30.0 * t * t * (t - 1.0) ** 2

def _quintic_pp(tau):
    t = np.clip(tau, 0.0, 1.0)
    return 60.0 * t * (2.0 * t - 1.0) * (t - 1.0)


def graph_operator(grad, hess):
    """(delta_ij - w_i w_j / (1+|Dw|^2)) w_ij for one point."""
    g2 = 1.0 + float(grad @ grad)
    A = np.eye(len(grad)) - np.outer(grad, grad) / g2
    return float(np.sum(A * hess))


# --------------------------------------------------------------------------
# boundary gradient barrier (collar construction)
# --------------------------------------------------------------------------

class BarrierSearchError(RuntimeError):
    """No (delta, sigma) in the search budget certified the residual signs."""


class _CollarBarrier:
    """w = phi + sgn * (delta log(1 + sigma d) + M eta(|x - x0|)) with derivatives.

    eta is the tangential cutoff: 0 inside B_r(x0), 1 outside B_{3r/2}(x0),
    quintic in between.
    """

    def __init__(self, sdf, phi, delta, sigma, M, x0, r_loc, sgn):
        self.sdf = sdf
        self.phi = phi          # ScalarField or float
        self.delta = delta
        self.sigma = sigma
        self.M = M
        self.x0 = np.asarray(x0, dtype=float)
        self.r = float(r_loc)
        self.sgn = sgn

    def _phi_parts(self, x):
        if isinstance(self.phi, ScalarField):
            return (float(self.phi.value(x)), np.asarray(self.phi.grad(x), dtype=float),
                    np.asarray(self.phi.hess(x), dtype=float))
        n = self.sdf.dim
        return float(self.phi), np.zeros(n), np.zeros((n, n))

    def _eta_parts(self, x):
        v = np.asarray(x, dtype=float) - self.x0
        rho = float(np.linalg.norm(v))
        half = 0.5 * self.r
        n = v.size
        if rho <= self.r or rho < 1e-12:
            return 0.0, np.zeros(n), np.zeros((n, n))
        tau = (rho - self.r) / half
        if tau >= 1.0:
            return 1.0, np.zeros(n), np.zeros((n, n))
        u = v / rho
        e = _quintic(tau)
        ep = _quintic_p(tau) / half
        epp = _quintic_pp(tau) / (half * half)
        De = ep * u
        He = epp * np.outer(u, u) + (ep / rho) * (np.eye(n) - np.outer(u, u))
        return e, De, He

    def parts(self, x):
        d = float(self.sdf.value(x))
        Dd = np.asarray(self.sdf.grad(x), dtype=float)
        Hd = np.asarray(self.sdf.hess(x), dtype=float)
        pv, pg, ph = self._phi_parts(x)
        ev, eg, eh = self._eta_parts(x)
        lg = self.delta * np.log1p(self.sigma * d)
        dlg = self.delta * self.sigma / (1.0 + self.sigma * d)
        ddlg = -self.delta * self.sigma ** 2 / (1.0 + self.sigma * d) ** 2
        w = pv + self.sgn * (lg + self.M * ev)
        Dw = pg + self.sgn * (dlg * Dd + self.M * eg)
        Hw = ph + self.sgn * (ddlg * np.outer(Dd, Dd) + dlg * Hd + self.M * eh)
        return w, Dw, Hw

    def residual(self, x):
        """Static barrier: dw/dt - F = -F; supersolution wants this >= 0."""
        _, Dw, Hw = self.parts(x)
        return -graph_operator(Dw, Hw)

    def value_at(self, pts):
        pts = _pts2d(pts)
        d = np.maximum(np.atleast_1d(self.sdf.values(pts)), 0.0)
        if isinstance(self.phi, ScalarField):
            pv = np.atleast_1d(self.phi.values(pts))
        else:
            pv = np.full(len(pts), float(self.phi))
        rho = np.linalg.norm(pts - self.x0[None, :], axis=1)
        eta = _quintic((rho - self.r) / (0.5 * self.r))
        return pv + self.sgn * (self.delta * np.log1p(self.sigma * d) + self.M * eta)


def _residual_batch(parts, delta, sigma, M, sgn):
    """Vectorized -F(Dw, D2w) over precomputed collar geometry."""
    D, DD, HD, EG, EH, PG, PH = parts
    n, dim = DD.shape
    lp = delta * sigma / (1.0 + sigma * D)
    lpp = -delta * sigma ** 2 / (1.0 + sigma * D) ** 2
    Dw = PG + sgn * (lp[:, None] * DD + M * EG)
    Hw = (PH + sgn * (lpp[:, None, None] * DD[:, :, None] * DD[:, None, :]
                      + lp[:, None, None] * HD + M * EH))
    g2 = 1.0 + np.einsum("ij,ij->i", Dw, Dw)
    tr = np.einsum("ikk->i", Hw)
    quad = np.einsum("ij,ijk,ik->i", Dw, Hw, Dw)
    F = tr - quad / g2
    return -F


def boundary_gradient_barrier(spec, phi, sup_u, r_loc, x0=None, lip_data=0.0,
                              eps=None, n_cert=400, rng=None, delta_grid=None,
                              sigma_factors=None, tol=1e-8, d_floor=1e-4,
                              m_over_delta_cap=40.0):
    """Certified barrier pair on a boundary patch; returns (upper, lower, info).

    The pair is w+- = phi +- (delta log(1 + sigma d) + M eta(|x - x0|)) with
    M = sup_u + sup|phi| and the tangential cutoff eta localized at the
    boundary point x0 (0 on B_r(x0), 1 outside B_{3r/2}(x0)).  Both are
    certified on the collar {0 < d < eps} cap B_2r(x0) by sampling the
    residual sign, with the depth closure delta log(1 + sigma eps) >= M and,
    when lip_data > 0, the slope closure delta sigma / (1 + sigma eps) >=
    lip_data.

    The search sweeps a (delta, sigma) grid in order of increasing gradient
    bound delta sigma.  Feasibility is genuinely limited: the log term's
    negative residual saturates near delta/(eps^2 + delta^2) <= 1/(2 eps),
    while the cutoff's Hessian costs ~30 M / r_loc^2, so certification
    requires M small against r_loc^2 (strict mean convexity of the boundary
    buys extra room).  Candidates with M/delta > m_over_delta_cap are
    skipped as unrepresentable.  Exhaustion raises BarrierSearchError with
    the best near-misses.
    """
    rng = rng or np.random.default_rng(17)
    sdf = spec.sdf()
    dim = spec.dim
    if isinstance(phi, ScalarField):
        probe = spec.sample_inside(400, rng)
        phi_sup = float(np.max(np.abs(phi.values(probe))))
        lip = float(np.max(np.linalg.norm(
            phi.grad_many(probe) if hasattr(phi, "grad_many")
            else np.array([phi.grad(p) for p in probe]), axis=1)))
    else:
        phi_sup, lip = abs(float(phi)), 0.0
    M = float(sup_u) + phi_sup
    if M <= 0:
        raise ValueError("sup_u + sup|phi| must be positive")
    if x0 is None:
        x0 = spec.boundary_points(1, np.random.default_rng(0))[0]
    x0 = np.asarray(x0, dtype=float)
    if eps is None:
        eps = min(0.9 * spec.tubular_width(), 0.5 * r_loc)

    # sample the patch collar {d_floor < d < eps} cap B_2r(x0)
    lo = x0 - 2.0 * r_loc
    hi = x0 + 2.0 * r_loc
    pts = []
    guard = 0
    while sum(len(p) for p in pts) < n_cert and guard < 800:
        guard += 1
        cand = rng.uniform(lo, hi, size=(4096, dim))
        d = np.atleast_1d(sdf.values(cand))
        keep = (d > d_floor) & (d < eps)
        keep &= np.linalg.norm(cand - x0[None, :], axis=1) < 2.0 * r_loc
        if np.any(keep):
            pts.append(cand[keep])
    if not pts:
        raise ValueError("could not sample the boundary collar patch")
    pts = np.concatenate(pts)[:n_cert]

    # precompute geometry once (the parameter sweep reuses it)
    ref = _CollarBarrier(sdf, phi, 1.0, 1.0, M, x0, r_loc, +1.0)
    D = np.empty(len(pts))
    DD = np.empty((len(pts), dim))
    HD = np.empty((len(pts), dim, dim))
    EG = np.empty((len(pts), dim))
    EH = np.empty((len(pts), dim, dim))
    PG = np.empty((len(pts), dim))
    PH = np.empty((len(pts), dim, dim))
    for i, x in enumerate(pts):
        D[i] = float(sdf.value(x))
        DD[i] = sdf.grad(x)
        HD[i] = sdf.hess(x)
        _, EG[i], EH[i] = ref._eta_parts(x)
        _, PG[i], PH[i] = ref._phi_parts(x)
    parts = (D, DD, HD, EG, EH, PG, PH)

    if delta_grid is None:
        delta_grid = [eps * 2.0 ** k for k in range(-4, 4)]
    if sigma_factors is None:
        sigma_factors = [2.0 ** k for k in range(0, 14)]
    cands = []
    for delta in delta_grid:
        if M / delta > m_over_delta_cap:
            continue
        sigma0 = np.expm1(M / delta) / eps       # depth closure binds here
        for fac in sigma_factors:
            sigma = sigma0 * fac
            if lip_data > 0.0 and delta * sigma / (1.0 + sigma * eps) < lip_data:
                continue
            cands.append((delta * sigma, delta, sigma))
    cands.sort()

    trials = []
    for _, delta, sigma in cands:
        res_up = _residual_batch(parts, delta, sigma, M, +1.0)
        res_dn = _residual_batch(parts, delta, sigma, M, -1.0)
        worst_up = float(np.min(res_up))          # supersolution: want >= -tol
        worst_dn = float(np.max(res_dn))          # subsolution: want <= +tol
        trials.append((delta, sigma, worst_up, worst_dn))
        if worst_up >= -tol and worst_dn <= tol:
            up = _CollarBarrier(sdf, phi, delta, sigma, M, x0, r_loc, +1.0)
            dn = _CollarBarrier(sdf, phi, delta, sigma, M, x0, r_loc, -1.0)
            grad_bound = delta * sigma + lip
            info = {"delta": delta, "sigma": sigma, "M": M, "r_loc": r_loc,
                    "x0": x0, "eps": eps,
                    "grad_bound": grad_bound, "lip_phi": lip,
                    "worst_residual_upper": worst_up,
                    "worst_residual_lower": worst_dn,
                    "n_certified": len(pts), "n_trials": len(trials)}

            def mkval(cb):
                return lambda q, t: cb.value_at(q)

            def valid(q, t):
                q = _pts2d(q)
                d = np.atleast_1d(sdf.values(q))
                near = np.linalg.norm(q - x0[None, :], axis=1) < 2.0 * r_loc
                return (d >= 0.0) & (d <= eps) & near

            upper = Barrier("upper", "boundary-collar", dim, mkval(up), valid, info=info)
            lower = Barrier("lower", "boundary-collar", dim, mkval(dn), valid, info=info)
            return upper, lower, info
    best = sorted(trials, key=lambda r: -min(r[2], -r[3]))[:8]
    raise BarrierSearchError(
        "no (delta, sigma) certified on the collar patch; M=%.3g eps=%.3g r=%.3g; "
        "closest trials (delta, sigma, min upper residual, max lower residual): %s"
        % (M, eps, r_loc, best))


# --------------------------------------------------------------------------
# reciprocal cap barrier
# --------------------------------------------------------------------------

def drift_constant(s, hess_sup):
    """Lower admissible drift: 4 s^2 ||D^2 v|| + 4 s."""
    s = float(s)
    return 4.0 * s * s * float(hess_sup) + 4.0 * s


class CapInterpolant:
    """Piecewise-linear-in-time, linear-in-space view of a 1D cap trajectory."""

    def __init__(self, result):
        if result.kind != "interval":
            raise ValueError("cap solution must come from the interval driver")
        self.x = result.coords
        self.t = result.times
        self.frames = np.array(result.frames)
        self.h = result.spacing

    def __call__(self, xhat, t):
        xhat = np.asarray(xhat, dtype=float)
        t = float(np.clip(t, self.t[0], self.t[-1]))
        j = int(np.searchsorted(self.t, t, side="right") - 1)
        j = min(max(j, 0), len(self.t) - 2)
        lam = (t - self.t[j]) / (self.t[j + 1] - self.t[j])
        vals = (1.0 - lam) * self.frames[j] + lam * self.frames[j + 1]
        return np.interp(xhat, self.x, vals)

    def state(self, xhat, t):
        """(v, v_x, v_xx, v_t) with spatial derivatives from the grid frames.

        Centered second-order differences on the frame grid are the right
        derivative estimates here; differencing the piecewise-linear
        interpolant itself would see its kinks instead of the solution.
        """
        xhat = np.asarray(xhat, dtype=float)
        t = float(np.clip(t, self.t[0], self.t[-1]))
        j = int(np.searchsorted(self.t, t, side="right") - 1)
        j = min(max(j, 0), len(self.t) - 2)
        dt = self.t[j + 1] - self.t[j]
        lam = (t - self.t[j]) / dt
        vals = (1.0 - lam) * self.frames[j] + lam * self.frames[j + 1]
        vt_grid = (self.frames[j + 1] - self.frames[j]) / dt
        vx_grid = np.gradient(vals, self.h)
        vxx_grid = np.empty_like(vals)
        vxx_grid[1:-1] = (vals[2:] - 2.0 * vals[1:-1] + vals[:-2]) / self.h ** 2
        vxx_grid[0] = vxx_grid[1]
        vxx_grid[-1] = vxx_grid[-2]
        v = np.interp(xhat, self.x, vals)
        vx = np.interp(xhat, self.x, vx_grid)
        vxx = np.interp(xhat, self.x, vxx_grid)
        vt = np.interp(xhat, self.x, vt_grid)
        return v, vx, vxx, vt

    def hess_sup(self):
        worst = 0.0
        for f in self.frames:
            d2 = np.abs(f[2:] - 2.0 * f[1:-1] + f[:-2]) / (self.h * self.h)
            worst = max(worst, float(np.max(d2)))
        return worst

    def max_abs(self):
        return float(np.max(np.abs(self.frames)))


def sup_barrier(v_result, s, sup_data, c=None, safety=1.1, gap=0.05):
    """Barrier pair +-(1/(v - x_n) + c t + sup_data) from a cap trajectory.

    ``v_result`` is a 1D interval flow whose values must stay strictly inside
    (-s, s).  Validity excludes the blow-up side by ``gap`` (in units of s)
    and the cap interval's ends.
    """
    v = CapInterpolant(v_result)
    s = float(s)
    if v.max_abs() >= s:
        raise ValueError("cap solution violates |v| < s (max %.6g)" % v.max_abs())
    hess = v.hess_sup()
    c_min = drift_constant(s, hess)
    if c is None:
        c = safety * c_min
    elif c < c_min:
        raise ValueError("supplied drift c = %.6g below admissible %.6g" % (c, c_min))
    a_b, b_b = float(v.x[0]), float(v.x[-1])
    K = float(sup_data)

    def w_raw(pts, t):
        pts = _pts2d(pts)
        xh, xn = pts[:, 0], pts[:, 1]
        vv = v(xh, t)
        den = vv - xn
        out = np.full(len(pts), np.inf)
        ok = den > 1e-12
        out[ok] = 1.0 / den[ok]
        return out

    def valid(pts, t):
        pts = _pts2d(pts)
        xh, xn = pts[:, 0], pts[:, 1]
        vv = v(xh, t)
        inside_x = (xh > a_b) & (xh < b_b)
        return inside_x & (np.abs(xn) < s) & (xn < vv - gap * s)

    def val_up(pts, t):
        return w_raw(pts, t) + c * t + K

    def val_dn(pts, t):
        return -(w_raw(pts, t) + c * t + K)

    def residual_fn(pts, t, vt_mode="pde"):
        """Analytic dW/dt - F(DW, D2W) for the upper barrier (lower is its
        negation); derivatives of the reciprocal are exact in terms of the
        cap state (v, v_x, v_xx, v_t).  The guaranteed lower bound is
        c - 4 s^2 ||D^2 v|| - 4 s >= 0 when the cap solves its own flow.

        vt_mode "pde" takes v_t = v_xx/(1 + v_x^2), the same stencil the
        time stepper integrates, so the cancellation between the reciprocal
        terms matches the trajectory to the stepper's O(dt); "frames" takes
        the inter-frame slope, which carries an O(frame spacing) error that
        gets amplified by 1/(v - x_n)^2 -- only useful with dense frames."""
        pts = _pts2d(pts)
        xh, xn = pts[:, 0], pts[:, 1]
        vv, vx, vxx, vt = v.state(xh, t)
        if vt_mode == "pde":
            vt = vxx / (1.0 + vx * vx)
        den = vv - xn
        w = np.where(den > 1e-12, 1.0 / np.maximum(den, 1e-12), np.inf)
        one_p = 1.0 + vx * vx
        lap = 2.0 * w ** 3 * one_p - w ** 2 * vxx
        quad = 2.0 * w ** 7 * one_p ** 2 - w ** 6 * vx * vx * vxx
        grad2 = w ** 4 * one_p
        return (-(w ** 2) * vt + c) - lap + quad / (1.0 + grad2)

    info = {"s": s, "c": c, "c_min": c_min, "hess_sup": hess,
            "sup_data": K, "cap": v, "gap": gap, "residual_fn": residual_fn}
    upper = Barrier("upper", "reciprocal-cap", 2, val_up, valid, info=info)
    lower = Barrier("lower", "reciprocal-cap", 2, val_dn, valid, info=info)
    return upper, lower, info


def residual_samples(barrier, pts, times, h_x=1e-4, h_t=1e-4):
    """FD residual dw/dt - F(Dw, D2w) at sample points (certification aid)."""
    out = np.empty(len(pts) * len(times))
    k = 0
    val = barrier.value
    for t in times:
        for x in np.atleast_2d(pts):
            n = len(x)
            wt = (val(x[None, :], t + h_t)[0] - val(x[None, :], max(t - h_t, 0.0))[0]) / (h_t + min(t, h_t))
            g = np.zeros(n)
            H = np.zeros((n, n))
            w0 = val(x[None, :], t)[0]
            for i in range(n):
                e = np.zeros(n); e[i] = h_x
                wp = val((x + e)[None, :], t)[0]
                wm = val((x - e)[None, :], t)[0]
                g[i] = (wp - wm) / (2 * h_x)
                H[i, i] = (wp - 2 * w0 + wm) / (h_x * h_x)
            for i in range(n):
                for j in range(i + 1, n):
                    ei = np.zeros(n); ei[i] = h_x
                    ej = np.zeros(n); ej[j] = h_x
                    wpp = val((x + ei + ej)[None, :], t)[0]
                    wpm = val((x + ei - ej)[None, :], t)[0]
                    wmp = val((x - ei + ej)[None, :], t)[0]
                    wmm = val((x - ei - ej)[None, :], t)[0]
                    H[i, j] = H[j, i] = (wpp - wpm - wmp + wmm) / (4 * h_x * h_x)
            out[k] = wt - graph_operator(g, H)
            k += 1
    return out


# --------------------------------------------------------------------------
# trajectory checking
# --------------------------------------------------------------------------

def check_barrier(result, barrier, tol=1e-8):
    """Worst signed violation of the barrier over a FlowResult.

    Positive violation means the trajectory crossed the barrier (above an
    upper one or below a lower one); report passes iff violation <= tol.
    """
    sgn = 1.0 if barrier.side == "upper" else -1.0
    worst = -np.inf
    worst_t, worst_x = None, None
    checked = 0
    for t, vals in zip(result.times, result.frames):
        if not (barrier.t_span[0] <= t <= barrier.t_span[1]):
            continue
        if result.kind == "graph2d":
            X, Y = result.coords
            pts = np.column_stack([X[result.inside], Y[result.inside]])
            uu = vals[result.inside]
        else:
            pts = result.coords
            uu = vals
        ok = np.asarray(barrier.valid(pts, t), dtype=bool) & np.isfinite(uu)
        if not np.any(ok):
            continue
        w = np.asarray(barrier.value(_pts2d(pts)[ok], t), dtype=float)
        diff = sgn * (uu[ok] - w)
        checked += int(np.sum(ok))
        i = int(np.argmax(diff))
        if diff[i] > worst:
            worst = float(diff[i])
            worst_t = float(t)
            worst_x = np.atleast_2d(_pts2d(pts)[ok])[i]
    if checked == 0:
        raise ValueError("barrier validity region never met the trajectory")
    return {"max_violation": worst, "passed": bool(worst <= tol),
            "t_worst": worst_t, "x_worst": worst_x,
            "n_checked": checked, "tol": tol, "label": barrier.label,
            "side": barrier.side}
