import numpy as np
import pytest

from gmcf.cones import make_cone
from gmcf.domains import Ball, PerturbedBall, principal_curvatures
from gmcf.smoothing import (EPS_G_FEASIBLE, DegenerateLevelSetError,
                            FeasibilityError, MollifiedMin, altered_distance,
                            build_f, build_g, mollified_min_max_height,
                            mollified_min_values, reference_collar,
                            sample_zero_level, select_delta,
                            smooth_intersection, validate_curvature,
                            validate_inclusions)

# ---------------------------------------------------------------------------
# the profile f
# ---------------------------------------------------------------------------

def test_profile_exact_branches():
    f = build_f()
    assert f.value(-1.0) == -1.0
    assert f.value(1.0) == 0.0
    s = np.array([-7.0, -1.0, 1.0, 3.5])
    assert np.array_equal(f.value(s), np.minimum(s, 0.0))
    assert f.prime(-2.0) == 1.0 and f.prime(2.0) == 0.0
    assert f.second(-2.0) == 0.0 and f.second(2.0) == 0.0


def test_profile_sandwich():
    """min(s,0)-1 < f < min(s,0) inside the band.

    Strictness is only float-visible on the core: toward |s| = 1 both gaps
    shrink like exp(-2/(1-|s|)), below one ulp of s long before the edge.
    """
    rng = np.random.default_rng(2024)
    s = rng.uniform(-1.0, 1.0, 20000)
    f = build_f()
    fv = f.value(s)
    m = np.minimum(s, 0.0)
    assert np.all(fv <= m)
    assert np.all(fv >= m - 1.0)
    core = np.abs(s) <= 0.9
    assert np.all(fv[core] < m[core])
    assert np.all(fv[core] > m[core] - 1.0)


def test_profile_monotone_and_concave():
    rng = np.random.default_rng(5)
    s = rng.uniform(-1.5, 1.5, 10000)
    f = build_f()
    fp = f.prime(s)
    assert np.all(fp >= 0.0) and np.all(fp <= 1.0)
    assert np.all(f.second(s) <= 0.0)


def test_profile_derivatives_match_fd():
    f = build_f()
    s = np.linspace(-0.95, 0.95, 77)
    h = 1e-5
    fd1 = (f.value(s + h) - f.value(s - h)) / (2 * h)
    fd2 = (f.value(s + h) - 2 * f.value(s) + f.value(s - h)) / h ** 2
    assert np.max(np.abs(f.prime(s) - fd1)) < 1e-6
    assert np.max(np.abs(f.second(s) - fd2)) < 1e-4


# ---------------------------------------------------------------------------
# mollified min / max and the height cutoff
# ---------------------------------------------------------------------------

def test_mollified_min_sandwich_property():
    rng = np.random.default_rng(99)
    n = 20000
    p = rng.uniform(-5.0, 5.0, n)
    q = rng.uniform(-5.0, 5.0, n)
    delta = rng.uniform(0.05, 2.0, n)
    for i in range(0, n, 2000):
        sl = slice(i, i + 2000)
        d = float(delta[i])
        out = mollified_min_values(p[sl], q[sl], d)
        m = np.minimum(p[sl], q[sl])
        assert np.all(m - d < out)              # strict left
        assert np.all(out <= m)                 # non-strict right
        far = np.abs(p[sl] - q[sl]) >= d
        assert np.array_equal(out[far], m[far])  # bitwise-exact outside the band


def test_mollified_min_rejects_bad_delta():
    with pytest.raises(ValueError):
        mollified_min_values(1.0, 2.0, 0.0)


def test_height_cutoff_identity_and_saturation():
    clamp = mollified_min_max_height(lambda x: x, R=4.0, delta=0.5)
    v = np.array([-np.inf, -6.0, -3.0, 0.0, 2.9, 5.5, np.inf])
    out = clamp(v)
    assert out[0] == -4.0 and out[-1] == 4.0            # extended reals exact
    assert out[1] == -4.0 and out[5] == 4.0             # beyond R + 1
    assert out[2] == -3.0 and out[3] == 0.0 and out[4] == 2.9   # identity zone
    assert np.all(np.abs(clamp(np.array([1e300]))) <= 4.0)


def test_height_cutoff_array_form_and_guard():
    arr = mollified_min_max_height(np.array([0.0, 100.0]), R=2.0)
    assert arr[0] == 0.0 and arr[1] == 2.0
    with pytest.raises(ValueError):
        mollified_min_max_height(lambda x: x, R=1.0)


def test_height_cutoff_monotone():
    clamp = mollified_min_max_height(lambda x: x, R=3.0, delta=0.5)
    v = np.linspace(-6.0, 6.0, 4001)
    out = clamp(v)
    assert np.all(np.diff(out) >= 0.0)


# ---------------------------------------------------------------------------
# the alteration g
# ---------------------------------------------------------------------------

def test_g_band_conditions():
    C = 1.7
    g = build_g(C)
    assert g.g(0.0) == 0.0
    s = np.linspace(-g.eps_g, g.eps_g, 2001)
    gp = g.gp(s)
    assert np.all(gp >= 1.0) and np.all(gp <= 2.0)
    assert np.all(g.gpp(s) <= -C)


def test_g_derivatives_match_fd():
    g = build_g(0.8)
    s = np.linspace(-2.0, 2.0, 101)
    h = 1e-6
    fd1 = (g.g(s + h) - g.g(s - h)) / (2 * h)
    fd2 = (g.gp(s + h) - g.gp(s - h)) / (2 * h)
    assert np.max(np.abs(g.gp(s) - fd1)) < 1e-6
    assert np.max(np.abs(g.gpp(s) - fd2)) < 1e-6


def test_g_feasibility_guard():
    # 4 C eps_g must stay below log(1 + sqrt 2); the guard is exact
    with pytest.raises(FeasibilityError):
        build_g(1.0, eps_g=1.01 * EPS_G_FEASIBLE / 4.0)
    g = build_g(1.0, eps_g=0.99 * EPS_G_FEASIBLE / 4.0)
    assert g.gpp(g.eps_g) <= -1.0


def test_reference_collar_dominance():
    # on the collar the normal eigenvalue g'' dominates the tangential cost
    g = build_g(2.0)
    K = 1.0
    w = reference_collar(g, K, tubular_width=0.9)
    assert 0.0 < w <= g.eps_g
    d = np.linspace(0.0, w, 50)
    normal = -g.gpp(d)
    tangential = 2.0 * K / (1.0 - d * K)
    assert np.all(normal >= tangential - 1e-9)


def test_altered_distance_is_g_of_d():
    b = Ball(np.zeros(2), 1.0)
    g = build_g(1.0)
    a = altered_distance(b, g)
    rng = np.random.default_rng(12)
    pts = rng.uniform(-1.2, 1.2, size=(40, 2))
    d = np.atleast_1d(b.sdf().values(pts))
    assert np.allclose(np.atleast_1d(a.values(pts)), g.g(d), atol=1e-10)


# ---------------------------------------------------------------------------
# mollified min of fields, delta selection
# ---------------------------------------------------------------------------

def _lens_fields():
    sa = Ball(np.array([-0.5, 0.0]), 1.0)
    sb = Ball(np.array([0.5, 0.0]), 1.0)
    ga = build_g(2.3)
    a = altered_distance(sa, ga)
    b = altered_distance(sb, ga)
    return a, b


def test_mollified_min_field_matches_scalar_rule():
    a, b = _lens_fields()
    phi = MollifiedMin(a, b, 0.05)
    rng = np.random.default_rng(3)
    pts = rng.uniform(-1.0, 1.0, size=(200, 2))
    av = np.atleast_1d(a.values(pts))
    bv = np.atleast_1d(b.values(pts))
    expect = mollified_min_values(av, bv, 0.05)
    got = np.atleast_1d(phi.values(pts))
    assert np.allclose(got, expect, atol=1e-12)
    far = np.abs(av - bv) >= 0.05
    assert np.array_equal(got[far], np.minimum(av, bv)[far])


def test_mollified_min_grad_blend():
    a, b = _lens_fields()
    phi = MollifiedMin(a, b, 0.08)
    x = np.array([0.0, 0.91])        # near the rim: blending region
    h = 1e-6
    g = phi.grad(x)
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        fd = (phi.value(x + e) - phi.value(x - e)) / (2 * h)
        assert abs(g[k] - fd) < 1e-5


def test_select_delta_returns_regular_level():
    a, b = _lens_fields()
    rng = np.random.default_rng(77)
    bbox = (np.array([-0.6, -1.1]), np.array([0.6, 1.1]))
    delta, report = select_delta(a, b, 0.2, bbox, rng)
    assert 0.0 < delta <= 0.2
    assert report["schedule"][-1][-1] == "ok"


def test_sample_zero_level_lands_on_level():
    a, b = _lens_fields()
    phi = MollifiedMin(a, b, 0.05)
    rng = np.random.default_rng(8)
    pts = sample_zero_level(phi, (np.array([-0.6, -1.1]), np.array([0.6, 1.1])),
                            200, rng)
    assert len(pts) >= 100
    assert np.max(np.abs(np.atleast_1d(phi.values(pts)))) < 1e-9


# ---------------------------------------------------------------------------
# smoothed intersections end to end
# ---------------------------------------------------------------------------

def test_lens_smoothing_validates():
    sa = Ball(np.array([-0.5, 0.0]), 1.0)
    sb = Ball(np.array([0.5, 0.0]), 1.0)
    rng = np.random.default_rng(21)
    si = smooth_intersection(sa, sb, 0.2, cone=make_cone("mean"), rng=rng)
    rep = validate_inclusions(si, n=2000, rng=rng)
    assert rep["violations_smoothed_in_intersection"] == 0
    assert rep["violations_trimmed_in_smoothed"] == 0
    cur = validate_curvature(si, make_cone("mean"), n=300, rng=rng)
    assert cur["min_margin"] >= -1e-6
    assert cur["single_field_max_curvature_dev"] <= cur["single_field_tol"]
    assert cur["blend_outside_collars"] == 0


def test_lens_smoothing_preserves_convexity():
    # two balls are convex; the smoothed intersection must stay convex
    sa = Ball(np.array([-0.5, 0.0]), 1.0)
    sb = Ball(np.array([0.5, 0.0]), 1.0)
    rng = np.random.default_rng(22)
    si = smooth_intersection(sa, sb, 0.2, cone=make_cone("positive"), rng=rng)
    cur = validate_curvature(si, make_cone("positive"), n=250, rng=rng)
    assert cur["min_margin"] >= -1e-6


def test_smoothed_spec_is_usable_domain():
    sa = Ball(np.array([-0.5, 0.0]), 1.0)
    sb = Ball(np.array([0.5, 0.0]), 1.0)
    si = smooth_intersection(sa, sb, 0.25, rng=np.random.default_rng(4))
    spec = si.as_spec()
    rng = np.random.default_rng(5)
    inside = spec.sample_inside(50, rng)
    assert np.all(spec.contains(inside))
    bp = spec.boundary_points(20, rng)
    assert np.max(np.abs(np.atleast_1d(spec.field().values(bp)))) < 1e-8
    k = principal_curvatures(spec, bp[0])
    assert np.isfinite(k).all()


def test_supplied_delta_beyond_half_delta1_is_infeasible():
    sa = Ball(np.array([-0.5, 0.0]), 1.0)
    sb = Ball(np.array([0.5, 0.0]), 1.0)
    with pytest.raises(FeasibilityError):
        smooth_intersection(sa, sb, 0.2, delta=0.9,
                            rng=np.random.default_rng(1))


def test_disjoint_intersection_rejected():
    sa = Ball(np.array([-2.0, 0.0]), 0.5)
    sb = Ball(np.array([2.0, 0.0]), 0.5)
    with pytest.raises(ValueError):
        smooth_intersection(sa, sb, 0.1, rng=np.random.default_rng(1))


def test_wavy_lens_mean_cone():
    sa = Ball(np.zeros(2), 1.0)
    sb = PerturbedBall(np.zeros(2), 1.0, cos_coeffs=(0.0, 0.06),
                       sin_coeffs=(0.0, 0.0, 0.04))
    rng = np.random.default_rng(30)
    si = smooth_intersection(sa, sb, 0.2, cone=make_cone("mean"), rng=rng)
    rep = validate_inclusions(si, n=1200, rng=rng)
    assert rep["violations_smoothed_in_intersection"] == 0
    assert rep["violations_trimmed_in_smoothed"] == 0
    cur = validate_curvature(si, make_cone("mean"), n=200, rng=rng)
    assert cur["min_margin"] >= -1e-6
