import numpy as np
import pytest

from gmcf.cascade import (
    STATUS_AMBIGUOUS,
    STATUS_ESCAPED,
    STATUS_FINITE,
    STATUS_NAMES,
    CascadeConfig,
    CascadeProblem,
    ProbeError,
    ProbeSpec,
    arctan_compactify,
    avoidance_probe,
    convergence_rows,
    extract_shadow,
    prepare_initial,
    probe_radius,
    run_cascade,
    run_probe_battery,
    truncate_domain,
)
from gmcf.domains import Ball, FullSpace, Slab, interval, interval_extent


def test_arctan_compactify():
    assert abs(arctan_compactify(np.inf) - 1.0) < 1e-15
    assert abs(arctan_compactify(-np.inf) + 1.0) < 1e-15
    assert arctan_compactify(0.0) == 0.0
    u = np.linspace(-50, 50, 1001)
    c = arctan_compactify(u)
    assert np.all(np.diff(c) > 0)
    assert np.array_equal(arctan_compactify(-u), -c)


def test_config_validation():
    with pytest.raises(ValueError):
        CascadeConfig(r_schedule=())
    with pytest.raises(ValueError):
        CascadeConfig(r_schedule=(4.0, 4.0))
    with pytest.raises(ValueError):
        CascadeConfig(r_schedule=(0.5, 2.0))   # cutoff needs R > 1
    with pytest.raises(ValueError):
        CascadeConfig(r_schedule=(2.0,), h_inf=1e9, h_cap=1e3)
    cfg = CascadeConfig(r_schedule=(2, 4))
    assert cfg.r_schedule == (2.0, 4.0)
    assert cfg.compactify is arctan_compactify


def test_problem_validation():
    with pytest.raises(ValueError):
        CascadeProblem(omega=Ball(np.zeros(2), 1.0), u0=lambda r: r,
                       t_end=0.1, geometry="spherical")


def test_probe_spec_laws():
    p = ProbeSpec(center=np.zeros(2), r0=0.6, t0=0.1, dim=2)
    assert p.t_vanish == pytest.approx(0.1 + 0.36 / 2.0, rel=1e-15)
    p3 = ProbeSpec(center=np.zeros(3), r0=0.6, t0=0.1, dim=3)
    assert p3.t_vanish == pytest.approx(0.1 + 0.36 / 4.0, rel=1e-15)
    assert probe_radius(p, 0.1) == 0.6
    assert probe_radius(p, 0.18) == pytest.approx(np.sqrt(0.36 - 0.16), rel=1e-15)
    assert probe_radius(p, 5.0) == 0.0
    with pytest.raises(ValueError):
        ProbeSpec(center=np.zeros(2), r0=-1.0, t0=0.0)
    with pytest.raises(ValueError):
        ProbeSpec(center=np.zeros(1), r0=1.0, t0=0.0, dim=1)


def test_truncate_bounded_is_identity():
    disk = Ball(np.zeros(2), 1.0)
    assert truncate_domain(disk, 4.0, 0.2) is disk


def test_truncate_1d_exact():
    got = truncate_domain(FullSpace(1), 4.0, 0.2)
    assert interval_extent(got) == (-8.0, 8.0)
    wide = interval(-100.0, 5.0)
    a, b = interval_extent(truncate_domain(wide, 4.0, 0.2))
    assert (a, b) == (-8.0, 5.0)
    small = interval(0.1, 0.4)
    assert truncate_domain(small, 4.0, 0.2) is small


def test_truncate_full_plane():
    spec = truncate_domain(FullSpace(2), 3.0, 0.2, n_check=600)
    assert spec.truncation_report["R"] == 3.0
    assert spec.contains(np.array([[0.0, 0.0], [5.5, 0.0]])).all()
    assert not spec.contains(np.array([[6.05, 0.0]])).any()


def test_truncate_slab():
    slab = Slab(np.array([0.0, 1.0]), 0.0, 1.0, window=8.0)
    spec = truncate_domain(slab, 3.0, 0.2, n_check=600)
    rep = spec.truncation_report
    assert rep["inclusions"]["violations_smoothed_in_intersection"] == 0
    assert rep["curvature"]["min_margin"] >= -1e-6
    assert spec.contains(np.array([[0.0, 0.0], [3.0, 0.0]])).all()
    # outside the slab, and outside the 2R ball
    assert not spec.contains(np.array([[0.0, 1.5], [7.0, 0.0]])).any()


def test_prepare_initial_smooth():
    prep = prepare_initial(lambda r: 0.3 * np.cos(r), 4.0, h=1.0 / 64.0,
                           probe_pts=np.linspace(0.0, 1.0, 1500))
    assert prep.radius == 1.0 / 64.0
    assert prep.sup_err < 1e-3
    assert not prep.had_infinite
    assert prep.note == ""
    r = np.linspace(0.0, 1.0, 333)
    assert np.max(np.abs(prep.fn(r) - 0.3 * np.cos(r))) < 1e-3


def test_prepare_initial_collapses_on_a_jump():
    u0 = lambda r: np.where(np.asarray(r) <= 0.5, np.inf, 0.0)
    prep = prepare_initial(u0, 4.0, h=1.0 / 64.0,
                           probe_pts=np.linspace(0.0, 1.0, 1501))
    assert prep.had_infinite
    assert prep.radius == 0.0
    assert prep.sup_err == 0.0
    assert "identity" in prep.note
    # the clamp maps the infinite plateau exactly onto the height bound
    assert prep.fn(np.array([0.2]))[0] == 4.0
    assert prep.fn(np.array([0.9]))[0] == 0.0


@pytest.fixture(scope="module")
def radial_cascade():
    """Proper profile on the unit disk, two-stage schedule, coarse grid."""
    u0 = lambda r: 1.0 / np.maximum(1.0 - np.asarray(r) ** 2, 1e-300) - 1.0
    problem = CascadeProblem(omega=Ball(np.zeros(2), 1.0), u0=u0, t_end=0.2,
                             h=1.0 / 64.0, n_frames=9, geometry="radial", dim=2)
    config = CascadeConfig(r_schedule=(8.0, 16.0), h_inf=5.0, stab_tol=0.05,
                           h_cap=1e9)
    return run_cascade(problem, config)


def test_cascade_statuses(radial_cascade):
    res = radial_cascade
    assert res.values.shape == (2, 9, 65)
    assert res.flagged == []          # needs >= 3 stages to even look
    assert np.array_equal(res.times, res.limit.times)
    # the wall cell carries the clamp height: certified escaped at every time
    assert np.all(res.status[:, -1] == STATUS_ESCAPED)
    # the center stays finite
    assert np.all(res.status[:, 0] == STATUS_FINITE)
    names = {STATUS_NAMES[int(s)] for s in np.unique(res.status)}
    assert "converged-finite" in names and "escaped" in names


def test_cascade_monotone_in_height(radial_cascade):
    res = radial_cascade
    assert float(np.min(res.values[1] - res.values[0])) >= -1e-8


def test_cascade_prepared_and_rows(radial_cascade):
    res = radial_cascade
    assert len(res.prepared) == 2
    for prep in res.prepared:
        assert prep.sup_err <= 1.0 / 8.0
    header, rows = convergence_rows(res)
    assert header == ["cell", "coord", "t", "value_R8", "value_R16", "status"]
    assert len(rows) == 9 * 65
    assert all(r[-1] in STATUS_NAMES.values() for r in rows)


def test_shadow_radius(radial_cascade):
    shadow = extract_shadow(radial_cascade)
    assert shadow.kind == "radial"
    assert shadow.h_inf == 5.0
    # |u0| crosses 5 at r = sqrt(5/6): the t=0 shadow boundary
    assert abs(shadow.radius[0] - np.sqrt(5.0 / 6.0)) < 0.03
    assert shadow.radius[-1] < shadow.radius[0]
    assert shadow.radius[-1] > 0.5
    assert not shadow.masks[:, -1].any()       # escaped wall never counts
    for ti in range(len(shadow.times)):
        inside = shadow.coords < shadow.radius[ti] - shadow.spacing
        assert shadow.masks[ti, inside].all()


def test_avoidance_probes(radial_cascade):
    shadow = extract_shadow(radial_cascade)
    p_in = ProbeSpec(center=np.zeros(2), r0=0.4, t0=0.0)
    r = avoidance_probe(shadow, p_in, "inside")
    assert r["pass"] and r["min_margin"] > 0
    live = (shadow.times >= 0.0) & (shadow.times <= p_in.t_vanish)
    want = shadow.radius[live] - 0.0 - probe_radius(p_in, shadow.times[live])
    assert np.array_equal(r["margins"], want)

    p_out = ProbeSpec(center=np.array([2.0, 0.0]), r0=0.5, t0=0.0)
    r2 = avoidance_probe(shadow, p_out, "outside")
    assert r2["pass"]

    report = run_probe_battery(shadow, [(p_in, "inside"), (p_out, "outside")])
    assert report.all_pass
    lines = report.summary_lines()
    assert lines[0].startswith("avoidance probes: 2")
    assert all("pass" in ln for ln in lines[1:])


def test_probe_admissibility(radial_cascade):
    shadow = extract_shadow(radial_cascade)
    snug = ProbeSpec(center=np.zeros(2), r0=float(shadow.radius[0]) - 0.01,
                     t0=0.0)
    with pytest.raises(ProbeError):
        avoidance_probe(shadow, snug, "inside")
    late = ProbeSpec(center=np.zeros(2), r0=0.3, t0=10.0)
    with pytest.raises(ProbeError):
        avoidance_probe(shadow, late, "inside")
    with pytest.raises(ValueError):
        avoidance_probe(shadow, ProbeSpec(np.zeros(2), 0.3, 0.0), "sideways")


def test_interval_cascade_stage_consistency():
    """Bounded 1D data below every clamp level: stages are bitwise equal and
    everything converges finite."""
    omega = interval(0.1, np.pi - 0.1)
    u0 = lambda x: -np.log(np.sin(np.asarray(x)))
    problem = CascadeProblem(omega=omega, u0=u0, t_end=0.05, h=1.0 / 64.0,
                             n_frames=5, geometry="interval", dim=1)
    config = CascadeConfig(r_schedule=(8.0, 16.0), h_inf=5.0, stab_tol=0.05)
    res = run_cascade(problem, config)
    assert np.array_equal(res.values[0], res.values[1])
    assert np.all(res.status == STATUS_FINITE)
    shadow = extract_shadow(res)
    assert shadow.kind == "interval"
    assert shadow.radius is None
    assert shadow.masks.all()
    assert all(len(b) == 0 for b in shadow.boundary_pts)


def test_graph2d_cascade_single_stage():
    problem = CascadeProblem(omega=Ball(np.zeros(2), 1.0),
                             u0=lambda p: 0.2 * np.exp(-4 * np.sum(np.atleast_2d(p) ** 2, axis=1)),
                             t_end=0.01, h=1.0 / 16.0, n_frames=3,
                             geometry="graph2d", dim=2)
    config = CascadeConfig(r_schedule=(8.0,), h_inf=5.0)
    res = run_cascade(problem, config)
    assert np.all(res.status == STATUS_FINITE)
    assert res.cells.ndim == 2 and res.cells.shape[1] == 2
    header, rows = convergence_rows(res)
    assert header[:3] == ["cell", "x", "y"]

    shadow = extract_shadow(res)
    assert shadow.kind == "graph2d"
    assert shadow.radius is None
    # mask margins: an inside probe sees no outside cells (infinite margin),
    # an outside probe measures distance to the occupied cells
    r_in = avoidance_probe(shadow, ProbeSpec(np.zeros(2), 0.2, 0.0), "inside")
    assert r_in["pass"] and np.isinf(r_in["min_margin"])
    r_out = avoidance_probe(shadow, ProbeSpec(np.array([3.0, 0.0]), 0.3, 0.0),
                            "outside")
    assert r_out["pass"]
    assert r_out["min_margin"] == pytest.approx(2.0 - 0.3, abs=0.1)


def test_graph2d_cascade_needs_bounded_domain():
    problem = CascadeProblem(omega=FullSpace(2), u0=lambda p: np.zeros(len(np.atleast_2d(p))),
                             t_end=0.01, h=1.0 / 16.0, geometry="graph2d")
    config = CascadeConfig(r_schedule=(2.0,))
    with pytest.raises(ValueError):
        run_cascade(problem, config)
