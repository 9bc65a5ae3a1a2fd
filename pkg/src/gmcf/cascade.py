"""Truncation cascade for unbounded data, shadow extraction, avoidance probes.

The pipeline approximates a flow with extended-real initial data by a
sequence of classical Dirichlet problems: clamp the height at R, replace the
domain by a smooth truncation inside the ball of radius 2R, solve, and grow
R along a schedule.  Convergence is judged cellwise through a compactifying
homeomorphism so that escape to infinity and stabilization at a finite value
are the same kind of event.  The shadow of the limiting graph is the region
where the values stay finite; its weak-flow behaviour is probed against
shrinking spheres, whose radius law is exact.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .cones import make_cone
from .domains import Ball, DomainSpec, FullSpace, interval, interval_extent
from .smoothing import (mollified_min_max_height, smooth_intersection,
                        validate_curvature, validate_inclusions)
from .solver import DEFAULT_H_CAP, solve_graph, solve_interval, solve_radial

__all__ = [
    "CascadeConfig", "CascadeProblem", "CascadeResult", "PreparedInitial",
    "ProbeSpec", "ProbeError", "ShadowTrace", "WeakSolutionReport",
    "arctan_compactify", "avoidance_probe", "convergence_rows",
    "extract_shadow", "prepare_initial", "probe_radius", "run_cascade",
    "truncate_domain",
    "STATUS_FINITE", "STATUS_ESCAPED", "STATUS_AMBIGUOUS", "STATUS_NAMES",
]

STATUS_FINITE = 0
STATUS_ESCAPED = 1
STATUS_AMBIGUOUS = 2
STATUS_NAMES = {STATUS_FINITE: "converged-finite",
                STATUS_ESCAPED: "escaped",
                STATUS_AMBIGUOUS: "ambiguous"}


def arctan_compactify(u):
    """Strictly increasing homeomorphism of [-inf, inf] onto [-1, 1]."""
    return (2.0 / np.pi) * np.arctan(u)


class ProbeError(ValueError):
    """An avoidance probe that does not satisfy its admissibility margin."""


@dataclass
class CascadeConfig:
    """Schedule and thresholds for one truncation cascade."""

    r_schedule: tuple
    eps: float = 0.2
    compactify: object = None          # None -> arctan_compactify
    stab_tol: float = 1e-3
    h_inf: float = 1e3
    h_cap: float = 1e9
    clamp_delta: float = 0.5

    def __post_init__(self):
        self.r_schedule = tuple(float(r) for r in self.r_schedule)
        if len(self.r_schedule) < 1:
            raise ValueError("empty R schedule")
        if any(b <= a for a, b in zip(self.r_schedule, self.r_schedule[1:])):
            raise ValueError("R schedule must be strictly increasing")
        if self.r_schedule[0] <= 1.0:
            raise ValueError("height cutoff needs R > 1 throughout the schedule")
        if not self.h_inf < self.h_cap:
            raise ValueError("finiteness threshold must sit below the solver cap "
                             "(h_inf=%g, h_cap=%g)" % (self.h_inf, self.h_cap))
        if self.compactify is None:
            self.compactify = arctan_compactify


@dataclass
class CascadeProblem:
    """One flow problem fed to the cascade.

    geometry "radial": u0 is a profile of r >= 0, omega a ball about the
    origin (or the full space); "interval": u0 a function of x on a 1D
    interval spec; "graph2d": u0 a function of (m, 2) point arrays on a
    bounded 2D spec.  Boundary data defaults to the prepared (clamped)
    initial data restricted to the boundary, constant in time, which is the
    auxiliary problem the cascade is built from; an explicit constant is
    clamped per stage the same way.
    """

    omega: DomainSpec
    u0: object
    t_end: float
    h: float = 1.0 / 256.0
    n_frames: int = 31
    geometry: str = "radial"
    dim: int = 2
    data: object = None
    sigma_cfl: float = None

    def __post_init__(self):
        if self.geometry not in ("radial", "interval", "graph2d"):
            raise ValueError("unknown geometry %r" % (self.geometry,))


@dataclass
class PreparedInitial:
    """Smooth bounded initial data for one cascade stage."""

    fn: object
    radius: float
    sup_err: float
    clamp_delta: float
    had_infinite: bool
    note: str = ""


@dataclass
class CascadeResult:
    stages: list
    r_values: tuple
    limit: object                       # finest-R FlowResult
    status: np.ndarray                  # (n_times, n_cells) int8
    flagged: list                       # non-monotone cells: (time idx, cell idx)
    values: np.ndarray                  # (n_stages, n_times, n_cells)
    cells: np.ndarray                   # cell coordinates, (n_cells,) or (n_cells, 2)
    geometry: str
    config: CascadeConfig
    prepared: list = dc_field(default_factory=list)
    truncation_reports: list = dc_field(default_factory=list)

    @property
    def times(self):
        return self.limit.times


@dataclass
class ShadowTrace:
    """Per-time footprint of the finite part of the limiting graph."""

    times: np.ndarray
    masks: np.ndarray                   # (n_times, n_cells) bool: |u| < H_inf
    ambiguous: np.ndarray               # large but not certified escaped
    coords: np.ndarray
    kind: str                           # "radial" | "interval" | "graph2d"
    spacing: float
    h_inf: float
    radius: np.ndarray = None           # radial only: shadow radius per time
    boundary_pts: list = dc_field(default_factory=list)


@dataclass
class ProbeSpec:
    """A shrinking sphere with the exact radius law r(t)^2 = r0^2 - 2(n-1)(t-t0)."""

    center: np.ndarray
    r0: float
    t0: float
    dim: int = 2

    def __post_init__(self):
        self.center = np.atleast_1d(np.asarray(self.center, dtype=float))
        if self.r0 <= 0:
            raise ValueError("probe radius must be positive")
        if self.dim < 2:
            raise ValueError("probes are spheres in dimension >= 2")

    @property
    def t_vanish(self):
        return self.t0 + self.r0 ** 2 / (2.0 * (self.dim - 1))


def probe_radius(probe, t):
    arg = probe.r0 ** 2 - 2.0 * (probe.dim - 1) * (np.asarray(t, dtype=float) - probe.t0)
    return np.sqrt(np.maximum(arg, 0.0))


@dataclass
class WeakSolutionReport:
    probes: list                        # (ProbeSpec, designation)
    results: list                       # dict per probe
    all_pass: bool

    def summary_lines(self):
        lines = ["avoidance probes: %d, all_pass=%s" % (len(self.probes), self.all_pass)]
        for (p, desig), r in zip(self.probes, self.results):
            lines.append("  %-7s c=%s r0=%.4g t0=%.4g -> %s (min margin %.4g)"
                         % (desig, np.array2string(p.center, precision=3), p.r0,
                            p.t0, "pass" if r["pass"] else "FAIL", r["min_margin"]))
        return lines


# --------------------------------------------------------------------------
# domain truncation
# --------------------------------------------------------------------------

def _bounded_inside(omega, R):
    if isinstance(omega, FullSpace):
        return False
    lo, hi = omega.bounding_box()
    corner = np.maximum(np.abs(lo), np.abs(hi))
    return float(np.linalg.norm(corner)) <= R


def truncate_domain(omega, R, eps, rng=None, n_check=4000):
    """Mean-convex truncation of omega between B_R and B_2R.

    Bounded specs already inside B_R come back unchanged.  Otherwise the
    result is the smoothed intersection of omega with ball(0, 2R), validated
    for the mean cone, and the sampled inclusion (omega cap B_R) inside the
    truncation is checked.  1D specs are truncated exactly (a boundary made
    of points has nothing to smooth).
    """
    rng = rng or np.random.default_rng(33)
    R = float(R)
    if _bounded_inside(omega, R):
        return omega
    if omega.dim == 1:
        if isinstance(omega, FullSpace):
            return interval(-2.0 * R, 2.0 * R)
        a, b = interval_extent(omega)
        return interval(max(a, -2.0 * R), min(b, 2.0 * R))

    cone = make_cone("mean")
    ball = Ball(np.zeros(omega.dim), 2.0 * R)
    if isinstance(omega, FullSpace):
        si = smooth_intersection(ball, Ball(np.zeros(omega.dim), 2.0 * R),
                                 eps, cone=cone, rng=rng)
    else:
        si = smooth_intersection(omega, ball, eps, cone=cone, rng=rng)

    rep_inc = validate_inclusions(si, n=n_check, rng=rng)
    if (rep_inc["violations_smoothed_in_intersection"]
            or rep_inc["violations_trimmed_in_smoothed"]):
        raise ValueError("truncation failed the inclusion check: %r" % (rep_inc,))
    rep_cur = validate_curvature(si, cone, n=min(n_check, 600), rng=rng)
    if rep_cur["min_margin"] < -1e-6:
        raise ValueError("truncated boundary leaves the mean cone "
                         "(min margin %.3g)" % rep_cur["min_margin"])

    # sampled inclusion omega cap B_R subset truncation
    lo = np.full(omega.dim, -R)
    hi = np.full(omega.dim, R)
    picked = []
    guard = 0
    while sum(len(p) for p in picked) < n_check and guard < 400:
        guard += 1
        cand = rng.uniform(lo, hi, size=(8192, omega.dim))
        keep = np.linalg.norm(cand, axis=1) < R
        keep &= omega.contains(cand)
        if np.any(keep):
            picked.append(cand[keep])
    pts = (np.concatenate(picked)[:n_check] if picked
           else np.zeros((0, omega.dim)))
    if len(pts):
        inside = np.atleast_1d(si.phi.values(pts)) > 0
        if not np.all(inside):
            raise ValueError("omega cap B_R escapes the truncation at %s"
                             % np.array2string(pts[~inside][0], precision=5))

    spec = si.as_spec()
    spec.truncation_report = {"inclusions": rep_inc, "curvature": rep_cur,
                              "R": R, "eps": eps, "n_inclusion_pts": int(len(pts))}
    return spec


# --------------------------------------------------------------------------
# initial data preparation
# --------------------------------------------------------------------------

_BUMP_NODES, _BUMP_W = leggauss(9)
_raw = np.exp(-1.0 / (1.0 - np.minimum(_BUMP_NODES ** 2, 1.0 - 1e-12)))
_BUMP_W = _BUMP_W * _raw
_BUMP_W = _BUMP_W / np.sum(_BUMP_W)


def _blur_1d(fn, radius, reflect_at_zero):
    if radius == 0.0:
        return fn

    def blurred(x):
        x = np.asarray(x, dtype=float)
        acc = np.zeros(x.shape, dtype=float)
        for node, w in zip(_BUMP_NODES, _BUMP_W):
            xs = x + radius * node
            if reflect_at_zero:
                xs = np.abs(xs)
            acc = acc + w * np.asarray(fn(xs), dtype=float)
        return acc

    return blurred


def _blur_nd(fn, radius, dim):
    if radius == 0.0:
        return fn
    shifts = np.array(np.meshgrid(*([_BUMP_NODES] * dim), indexing="ij"))
    shifts = shifts.reshape(dim, -1).T            # (9^dim, dim)
    wts = _BUMP_W
    for _ in range(dim - 1):
        wts = np.multiply.outer(wts, _BUMP_W)
    wts = wts.ravel()
    wts = wts / wts.sum()

    def blurred(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        acc = np.zeros(len(pts), dtype=float)
        for s, w in zip(shifts, wts):
            acc = acc + w * np.asarray(fn(pts + radius * s[None, :]), dtype=float)
        return acc

    return blurred


def prepare_initial(u0, R, omega_R=None, h=None, probe_pts=None, rng=None,
                    clamp_delta=0.5, geometry="radial", radius=None):
    """Height-clamp u0 into [-R, R], then mollify within the 1/R sup budget.

    The clamp maps +-inf exactly onto +-R and is the identity wherever
    |u0| <= R - 1.  The mollifier is a normalized compact bump of radius
    min(1/(2R), h); if the sampled sup deviation from the clamped function
    exceeds 1/R the radius is shrunk geometrically, collapsing to the
    identity when even the smallest representable radius is too coarse for
    the clamped function's steep regions (the clamp of smooth data is
    already smooth, so nothing is lost).

    An explicit ``radius`` skips the search; the cascade uses this to blur
    every stage with one shared kernel so the pointwise ordering of the
    clamped stages survives mollification exactly.
    """
    rng = rng or np.random.default_rng(44)
    R = float(R)
    clamped = mollified_min_max_height(u0, R, delta=clamp_delta)

    if probe_pts is None:
        if geometry == "radial":
            rad = 1.0 if omega_R is None else _domain_radius(omega_R)
            probe_pts = np.linspace(0.0, rad, 1500)
        elif geometry == "interval":
            lo, hi = omega_R.bounding_box()
            probe_pts = np.linspace(float(lo[0]), float(hi[0]), 1500)
        else:
            probe_pts = omega_R.sample_inside(1500, rng)

    with np.errstate(all="ignore"):
        raw = np.asarray(u0(probe_pts), dtype=float)
    had_infinite = bool(np.any(~np.isfinite(raw)))
    ref = clamped(probe_pts)

    if radius is not None:
        radius = float(radius)
        if radius <= 0.0:
            fn, err = clamped, 0.0
            note = "shared schedule radius (identity)"
        else:
            if geometry == "graph2d":
                fn = _blur_nd(clamped, radius, 2)
            else:
                fn = _blur_1d(clamped, radius,
                              reflect_at_zero=(geometry == "radial"))
            with np.errstate(all="ignore"):
                err = float(np.max(np.abs(np.asarray(fn(probe_pts)) - ref)))
            note = "shared schedule radius"
        return PreparedInitial(fn=fn, radius=radius, sup_err=err,
                               clamp_delta=clamp_delta,
                               had_infinite=had_infinite, note=note)

    radius = min(1.0 / (2.0 * R), h) if h else 1.0 / (2.0 * R)
    note = ""
    while True:
        if radius < 1e-13:
            radius = 0.0
            fn = clamped
            err = 0.0
            note = ("mollifier collapsed to the identity: the clamped data is "
                    "already smooth at the sampled resolution")
            break
        if geometry == "graph2d":
            fn = _blur_nd(clamped, radius, 2)
        else:
            fn = _blur_1d(clamped, radius, reflect_at_zero=(geometry == "radial"))
        with np.errstate(all="ignore"):
            err = float(np.max(np.abs(np.asarray(fn(probe_pts)) - ref)))
        if err < 1.0 / R:
            break
        radius *= 0.25

    return PreparedInitial(fn=fn, radius=radius, sup_err=err,
                           clamp_delta=clamp_delta, had_infinite=had_infinite,
                           note=note)


# --------------------------------------------------------------------------
# the cascade driver
# --------------------------------------------------------------------------

def _domain_radius(spec):
    """Radius of a radial domain along the +x ray (bisection on the field)."""
    if isinstance(spec, Ball):
        return float(spec.radius)
    f = spec.field()
    dim = spec.dim

    def val(r):
        x = np.zeros((1, dim))
        x[0, 0] = r
        return float(np.atleast_1d(f.values(x))[0])

    lo_r, hi_r = 0.0, 1.0
    if val(lo_r) <= 0:
        raise ValueError("radial domain does not contain the origin")
    while val(hi_r) > 0:
        hi_r *= 2.0
        if hi_r > 1e9:
            raise ValueError("radial domain appears unbounded")
    for _ in range(80):
        mid = 0.5 * (lo_r + hi_r)
        if val(mid) > 0:
            lo_r = mid
        else:
            hi_r = mid
    return 0.5 * (lo_r + hi_r)


def _stage_grid(problem, omega_R):
    """(solver grid, mollifier probe points) for a 1D stage; (None, None) in 2D."""
    if problem.geometry == "radial":
        rad = _domain_radius(omega_R)
        n = int(round(rad / problem.h)) + 1
        return np.linspace(0.0, rad, n), np.linspace(0.0, rad, max(4 * n, 1000))
    if problem.geometry == "interval":
        a, b = interval_extent(omega_R)
        n = int(round((b - a) / problem.h)) + 1
        return np.linspace(a, b, n), np.linspace(a, b, max(4 * n, 1000))
    return None, None


def _stage_prepare(problem, config, R, omega_R, radius=None):
    grid, probes = _stage_grid(problem, omega_R)
    if problem.geometry == "graph2d":
        if omega_R is not problem.omega:
            raise ValueError("2D cascade stages need a bounded domain "
                             "(use the radial path for unbounded ones)")
        prep = prepare_initial(problem.u0, R, omega_R, h=problem.h,
                               clamp_delta=config.clamp_delta,
                               geometry="graph2d", radius=radius)
    else:
        prep = prepare_initial(problem.u0, R, omega_R, h=problem.h,
                               probe_pts=probes, clamp_delta=config.clamp_delta,
                               geometry=problem.geometry, radius=radius)
    return grid, prep


def _stage_solve(problem, config, R, omega_R, grid, prep):
    """Solve one prepared stage; returns (FlowResult, cell coordinates)."""
    sigma = problem.sigma_cfl

    if problem.geometry == "radial":
        rad = float(grid[-1])
        n = len(grid)
        u0g = np.asarray(prep.fn(grid), dtype=float)
        if problem.data is None:
            bval = float(u0g[-1])
        else:
            clamp = mollified_min_max_height(lambda v: v, R, config.clamp_delta)
            bval = float(clamp(np.array([float(problem.data)]))[0])
        res = solve_radial(u0g, lambda t: bval, R=rad, n=n, dim=problem.dim,
                           t_end=problem.t_end, n_frames=problem.n_frames,
                           sigma_cfl=sigma if sigma else 0.9,
                           h_cap=config.h_cap)
        return res, grid
    if problem.geometry == "interval":
        a, b = float(grid[0]), float(grid[-1])
        n = len(grid)
        u0g = np.asarray(prep.fn(grid), dtype=float)
        if problem.data is None:
            lv, rv = float(u0g[0]), float(u0g[-1])
        else:
            clamp = mollified_min_max_height(lambda v: v, R, config.clamp_delta)
            lv = rv = float(clamp(np.array([float(problem.data)]))[0])
        res = solve_interval(u0g, lambda t: (lv, rv), a=a, b=b, n=n,
                             t_end=problem.t_end, n_frames=problem.n_frames,
                             sigma_cfl=sigma if sigma else 0.9,
                             h_cap=config.h_cap)
        return res, grid
    if problem.data is None:
        data = lambda pts, t: prep.fn(pts)
    else:
        clamp = mollified_min_max_height(lambda v: v, R, config.clamp_delta)
        dval = float(clamp(np.array([float(problem.data)]))[0])
        data = lambda pts, t: np.full(len(np.atleast_2d(pts)), dval)
    res = solve_graph(omega_R, prep.fn, data, h=problem.h,
                      t_end=problem.t_end, n_frames=problem.n_frames,
                      sigma_cfl=sigma if sigma else 0.2,
                      h_cap=config.h_cap)
    X, Y = res.coords
    cells = np.column_stack([X[res.inside], Y[res.inside]])
    return res, cells


def _stage_values(res):
    """Frames as a (n_times, n_cells) array."""
    if res.kind == "graph2d":
        return np.array([f[res.inside] for f in res.frames])
    return np.array(res.frames)


def run_cascade(problem, config, rng=None):
    """Solve the auxiliary problem along the R schedule and judge convergence.

    Per cell and output time, the compactified values across successive R
    either settle within the stabilization tolerance ("converged-finite", or
    "escaped" when they settle beyond the finiteness threshold) or stay
    "ambiguous".  Cells whose compactified increments change sign by more
    than the tolerance are flagged, not fatal.  The finest-R trajectory is
    the limit surrogate.
    """
    rng = rng or np.random.default_rng(101)
    omegas, grids, preps, reports = [], [], [], []
    for R in config.r_schedule:
        omega_R = truncate_domain(problem.omega, R, config.eps, rng=rng)
        omegas.append(omega_R)
        reports.append(getattr(omega_R, "truncation_report", None))
        grid, prep = _stage_prepare(problem, config, R, omega_R)
        grids.append(grid)
        preps.append(prep)

    # one mollifier kernel for the whole schedule: the pairwise comparison
    # across stages needs the prepared data pointwise ordered, which blurs at
    # per-stage radii would break.  The smallest searched radius always meets
    # every stage's 1/R budget (re-checked; shrink further on a breach).
    rho = min(p.radius for p in preps)
    while any(p.radius != rho for p in preps):
        redo = [_stage_prepare(problem, config, R, om, radius=rho)[1]
                for R, om in zip(config.r_schedule, omegas)]
        if rho > 0.0 and any(p.sup_err >= 1.0 / R
                             for p, R in zip(redo, config.r_schedule)):
            rho = rho * 0.25 if rho * 0.25 >= 1e-13 else 0.0
            continue
        preps = redo
        break

    stages, cell_sets = [], []
    for R, omega_R, grid, prep in zip(config.r_schedule, omegas, grids, preps):
        res, cells = _stage_solve(problem, config, R, omega_R, grid, prep)
        stages.append(res)
        cell_sets.append(cells)

    n_common = min(len(c) for c in cell_sets)
    fine_cells = cell_sets[-1]
    vals = np.array([_stage_values(r)[:, :n_common] for r in stages])
    comp = config.compactify(vals)
    n_times = vals.shape[1]
    n_fine = len(fine_cells)

    status = np.full((n_times, n_fine), STATUS_AMBIGUOUS, dtype=np.int8)
    flagged = []
    if len(stages) == 1:
        # nothing to compare against; a single bounded stage is its own limit
        fin = np.abs(vals[-1]) < config.h_inf
        status[:, :n_common][fin] = STATUS_FINITE
        status[:, :n_common][~fin] = STATUS_ESCAPED
    else:
        diffs = np.abs(np.diff(comp, axis=0))            # (n_stages-1, nt, nc)
        settled = diffs[-1] <= config.stab_tol
        escaped = settled & (np.abs(vals[-1]) >= config.h_inf)
        finite = settled & ~escaped
        status[:, :n_common][finite] = STATUS_FINITE
        status[:, :n_common][escaped] = STATUS_ESCAPED
        if len(stages) >= 3:
            inc = np.diff(comp, axis=0)                  # signed increments
            osc = np.any(inc[1:] * inc[:-1] < -config.stab_tol ** 2, axis=0)
            for ti, ci in zip(*np.nonzero(osc)):
                flagged.append((int(ti), int(ci)))

    return CascadeResult(stages=stages, r_values=config.r_schedule,
                         limit=stages[-1], status=status, flagged=flagged,
                         values=vals, cells=fine_cells,
                         geometry=problem.geometry, config=config,
                         prepared=preps, truncation_reports=reports)


def convergence_rows(result):
    """Rows (cell id, coordinate(s), t, value per R, status) for the table."""
    header = ["cell", "coord"] if result.cells.ndim == 1 else ["cell", "x", "y"]
    header = header + ["t"] + ["value_R%g" % r for r in result.r_values] + ["status"]
    rows = []
    n_common = result.values.shape[2]
    for ci in range(n_common):
        if result.cells.ndim == 1:
            coord = ["%.10g" % result.cells[ci]]
        else:
            coord = ["%.10g" % v for v in result.cells[ci]]
        for ti, t in enumerate(result.times):
            vals = ["%.10g" % result.values[si, ti, ci]
                    for si in range(len(result.r_values))]
            rows.append([str(ci)] + coord + ["%.10g" % t] + vals
                        + [STATUS_NAMES[int(result.status[ti, ci])]])
    return header, rows


# --------------------------------------------------------------------------
# the shadow
# --------------------------------------------------------------------------

def extract_shadow(result, h_inf=None):
    """Footprint masks {|u| < H_inf} of the limit trajectory.

    Escaped cells are excluded from the mask even if an individual frame
    dips under the threshold; cells that are large but not certified
    escaped are reported in the ambiguous mask.  For radial runs the shadow
    radius is the interpolated threshold crossing along the profile.
    """
    h_inf = float(h_inf if h_inf is not None else result.config.h_inf)
    limit = result.limit
    vals = _stage_values(limit)
    n_times, n_cells = vals.shape
    esc = result.status == STATUS_ESCAPED
    small = np.abs(vals) < h_inf
    masks = small & ~esc
    ambiguous = ~small & ~esc

    radius = None
    boundary_pts = []
    if limit.kind == "radial":
        rr = limit.coords
        radius = np.empty(n_times)
        for ti in range(n_times):
            a = np.abs(vals[ti])
            above = (a >= h_inf) | esc[ti]
            if above[0]:
                radius[ti] = 0.0
            elif not np.any(above):
                radius[ti] = rr[-1]
            else:
                j = int(np.argmax(above))                # first cell beyond
                lo_v, hi_v = a[j - 1], a[j]
                lam = (h_inf - lo_v) / (hi_v - lo_v) if hi_v > lo_v else 0.0
                radius[ti] = rr[j - 1] + lam * (rr[j] - rr[j - 1])
            boundary_pts.append(np.array([radius[ti]]))
    elif limit.kind == "interval":
        xx = limit.coords
        for ti in range(n_times):
            m = masks[ti]
            cross = np.nonzero(m[1:] != m[:-1])[0]
            boundary_pts.append(0.5 * (xx[cross] + xx[cross + 1]))
    else:
        for ti in range(n_times):
            boundary_pts.append(None)

    coords = (limit.coords if limit.kind != "graph2d"
              else result.cells)
    return ShadowTrace(times=limit.times, masks=masks, ambiguous=ambiguous,
                       coords=coords, kind=limit.kind, spacing=limit.spacing,
                       h_inf=h_inf, radius=radius, boundary_pts=boundary_pts)


# --------------------------------------------------------------------------
# avoidance probes
# --------------------------------------------------------------------------

def _shadow_margin(shadow, ti, probe, designation):
    rp = float(probe_radius(probe, shadow.times[ti]))
    c = probe.center
    if shadow.kind == "radial":
        rs = float(shadow.radius[ti])
        off = float(np.linalg.norm(c))
        if designation == "inside":
            return rs - off - rp
        return off - rs - rp
    # mask-based margin: distance from the probe to the offending cell set
    cells = shadow.coords if shadow.coords.ndim == 2 else shadow.coords[:, None]
    cpt = c[: cells.shape[1]]
    dist = np.linalg.norm(cells - cpt[None, :], axis=1)
    if designation == "inside":
        outside_cells = ~shadow.masks[ti]
        if not np.any(outside_cells):
            return float(np.inf)
        return float(np.min(dist[outside_cells])) - rp
    inside_cells = shadow.masks[ti]
    if not np.any(inside_cells):
        return float(np.inf)
    return float(np.min(dist[inside_cells])) - rp


def avoidance_probe(shadow, probe, designation, min_start_margin=None):
    """Track one shrinking-sphere probe against the shadow.

    "inside" probes must stay inside the mask until they vanish
    (supersolution test); "outside" probes must keep their closure in the
    complement (subsolution test).  The start margin must be at least twice
    the grid spacing, otherwise the probe is rejected as inadmissible.
    Returns per-time signed margins; pass means min margin >= 0.
    """
    if designation not in ("inside", "outside"):
        raise ValueError("designation must be 'inside' or 'outside'")
    if min_start_margin is None:
        min_start_margin = 2.0 * shadow.spacing
    times = shadow.times
    live = (times >= probe.t0) & (times <= probe.t_vanish)
    idx = np.nonzero(live)[0]
    if len(idx) == 0:
        raise ProbeError("probe lifetime misses every shadow time stamp")
    start_margin = _shadow_margin(shadow, int(idx[0]), probe, designation)
    if start_margin < min_start_margin:
        raise ProbeError("probe starts with margin %.4g < required %.4g"
                         % (start_margin, min_start_margin))
    margins = np.array([_shadow_margin(shadow, int(ti), probe, designation)
                        for ti in idx])
    return {"pass": bool(np.min(margins) >= 0.0),
            "min_margin": float(np.min(margins)),
            "margins": margins, "times": times[idx],
            "designation": designation, "start_margin": float(start_margin)}


def run_probe_battery(shadow, probes):
    """Evaluate (probe, designation) pairs; deterministic report order."""
    results = [avoidance_probe(shadow, p, desig) for p, desig in probes]
    return WeakSolutionReport(probes=list(probes), results=results,
                              all_pass=all(r["pass"] for r in results))
