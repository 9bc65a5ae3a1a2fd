import numpy as np
import pytest

from gmcf.domains import Ball, PerturbedBall
from gmcf.solver import residual, solve_graph, solve_interval, solve_radial


def reaper(x, t):
    return t - np.log(np.sin(x))


def test_translator_exactness_coarse():
    a, b = 0.1, np.pi - 0.1
    n = 257
    res = solve_interval(lambda x: reaper(x, 0.0),
                         lambda t: (reaper(a, t), reaper(b, t)),
                         a=a, b=b, n=n, t_end=0.1, n_frames=5)
    assert res.status == "done"
    err = residual(reaper, res)
    assert err < 2e-3, err


def test_translator_convergence_order():
    a, b = 0.1, np.pi - 0.1
    errs = []
    for n in (129, 257):
        res = solve_interval(lambda x: reaper(x, 0.0),
                             lambda t: (reaper(a, t), reaper(b, t)),
                             a=a, b=b, n=n, t_end=0.05, n_frames=3)
        errs.append(residual(reaper, res))
    order = np.log2(errs[0] / errs[1])
    assert order > 1.5, (errs, order)


def test_linear_profiles_are_stationary():
    # u = x on a dyadic grid: exact second differences vanish, so the frames
    # never change at all
    n = 65
    x = np.linspace(0.0, 1.0, n)
    res = solve_interval(x.copy(), (0.0, 1.0), a=0.0, b=1.0, n=n,
                         t_end=0.05, n_frames=4)
    for fr in res.frames:
        assert np.array_equal(fr, x)


def _fourier(rng, x, n_modes=3, amp=0.3):
    u = np.zeros_like(x)
    for k in range(1, n_modes + 1):
        u = u + rng.uniform(-amp, amp) * np.sin(k * np.pi * x)
    return u


def test_interval_maximum_principle():
    # smooth, boundary-compatible data: the explicit scheme is monotone and
    # the discrete max principle holds to rounding
    rng = np.random.default_rng(123)
    x = np.linspace(0.0, 1.0, 101)
    for trial in range(5):
        c0, c1 = rng.uniform(-1.0, 1.0, 2)
        u0 = c0 + (c1 - c0) * x + _fourier(rng, x)
        res = solve_interval(u0, (c0, c1), n=101, t_end=0.02, n_frames=4)
        lo, hi = float(np.min(u0)), float(np.max(u0))
        for fr in res.frames:
            assert np.min(fr) >= lo - 1e-12
            assert np.max(fr) <= hi + 1e-12


def test_interval_comparison_principle():
    """Ordered smooth initial data stay ordered under the same boundary data."""
    rng = np.random.default_rng(7)
    x = np.linspace(0.0, 1.0, 101)
    for trial in range(5):
        base = _fourier(rng, x)
        gap = rng.uniform(0.1, 0.5) * np.sin(np.pi * x) ** 2
        res_lo = solve_interval(base, (0.0, 0.0), n=101, t_end=0.02, n_frames=5)
        res_hi = solve_interval(base + gap, (0.0, 0.0), n=101, t_end=0.02,
                                n_frames=5)
        for flo, fhi in zip(res_lo.frames, res_hi.frames):
            assert np.min(fhi - flo) >= -1e-12


def test_radial_constant_is_stationary():
    res = solve_radial(np.full(65, 0.7), 0.7, R=1.0, n=65, t_end=0.05)
    for fr in res.frames:
        assert np.array_equal(fr, np.full(65, 0.7))


def test_radial_symmetry_at_origin():
    res = solve_radial(lambda r: 0.3 * np.exp(-8 * r ** 2), 0.0, R=1.0,
                       n=129, t_end=0.05, n_frames=5)
    assert res.status == "done"
    for fr in res.frames[1:]:
        assert np.isfinite(fr).all()
        # even symmetry: one-sided slope at r=0 vanishes to O(h)
        assert abs(fr[1] - fr[0]) < 5e-4


def test_radial_matches_graph2d_on_the_disk():
    """The same rotationally symmetric bump flowed radially and on the full
    2D grid must agree within discretization error."""
    u0 = lambda r: 0.3 * np.exp(-8.0 * r ** 2)
    rad = solve_radial(u0, 0.0, R=1.0, n=129, dim=2, t_end=0.03, n_frames=3)
    disk = Ball(np.zeros(2), 1.0)
    g2 = solve_graph(disk, lambda p: u0(np.linalg.norm(p, axis=1)), 0.0,
                     h=1.0 / 48.0, t_end=0.03, n_frames=3)
    assert g2.status == "done"
    X, Y = g2.coords
    rr = np.sqrt(X[g2.inside] ** 2 + Y[g2.inside] ** 2)
    want = np.interp(rr, rad.coords, rad.frames[-1])
    got = g2.frames[-1][g2.inside]
    err = np.max(np.abs(got - want)) / np.max(np.abs(rad.frames[-1]))
    assert err < 0.02, err


def test_radial_stop_when():
    res = solve_radial(lambda r: 1.0 - r ** 2, 0.0, R=1.0, n=65, t_end=1.0,
                       stop_when=lambda t, u: np.max(u) < 0.5, check_every=200)
    assert res.status == "stopped"
    assert res.times[-1] < 1.0
    assert np.max(res.frames[-1]) < 0.5


def test_rhs_cap_engages_on_walls():
    # a clamped wall profile drives the rhs far beyond a tiny cap
    wall = lambda r: np.minimum(-np.log1p(-np.minimum(r * r, 1.0 - 1e-12)), 8.0)
    capped = solve_radial(wall, 8.0, R=1.0, n=129, t_end=1e-3, h_cap=1.0)
    free = solve_radial(wall, 8.0, R=1.0, n=129, t_end=1e-3, h_cap=1e9)
    assert capped.clip_count > 0
    assert free.clip_count == 0
    # the profile grows toward the wall value; capping slows that growth
    assert np.mean(capped.frames[-1]) <= np.mean(free.frames[-1]) + 1e-12


def test_graph2d_decays_toward_data_level():
    disk = Ball(np.zeros(2), 1.0)
    res = solve_graph(disk, lambda p: 0.3 * np.exp(-8.0 * np.sum(p ** 2, axis=1)),
                      0.0, h=1.0 / 32.0, t_end=0.05, n_frames=6)
    assert res.status == "done"
    sup = [float(np.max(np.abs(fr[res.inside]))) for fr in res.frames]
    assert all(b <= a + 1e-9 for a, b in zip(sup, sup[1:]))
    assert sup[-1] < 0.9 * sup[0]


def test_graph2d_runs_on_perturbed_domain():
    wavy = PerturbedBall(np.zeros(2), 1.0, cos_coeffs=(0.0, 0.06),
                         sin_coeffs=(0.0, 0.0, 0.04))
    res = solve_graph(wavy, lambda p: 0.1 * np.exp(-4.0 * np.sum(p ** 2, axis=1)),
                      0.05, h=1.0 / 24.0, t_end=0.02, n_frames=3)
    assert res.status == "done"
    for fr in res.frames:
        assert np.isfinite(fr[res.inside]).all()


def test_graph2d_comparison_principle():
    disk = Ball(np.zeros(2), 1.0)
    lo = solve_graph(disk, lambda p: 0.1 * np.exp(-6.0 * np.sum(p ** 2, axis=1)),
                     0.0, h=1.0 / 24.0, t_end=0.02, n_frames=4)
    hi = solve_graph(disk, lambda p: 0.1 * np.exp(-6.0 * np.sum(p ** 2, axis=1))
                     + 0.2, 0.2, h=1.0 / 24.0, t_end=0.02, n_frames=4)
    for flo, fhi in zip(lo.frames, hi.frames):
        assert np.min((fhi - flo)[lo.inside]) >= -1e-12


def test_frame_times_cover_the_span():
    res = solve_interval(np.zeros(33), (0.0, 0.0), n=33, t_end=0.04, n_frames=6)
    assert res.times[0] == 0.0
    assert abs(res.times[-1] - 0.04) < 1e-12
    assert np.all(np.diff(res.times) > 0)
    assert len(res.times) == len(res.frames)
