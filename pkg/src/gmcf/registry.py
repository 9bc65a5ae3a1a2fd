"""Named built-in expressions and domains.

Runs are configured by ids from this closed registry instead of a runtime
expression parser, which keeps the verification surface fixed: every initial
profile, boundary constant, and domain a config can name is code in this
file.  Initial-data entries are tagged with the argument convention they
expect ("profile-r" takes radii, "profile-x" takes 1D abscissae, "pts2d"
takes (m, 2) arrays); extended-real values are legal and land on +-inf.
"""

import numpy as np

from .domains import Ball, FullSpace, PerturbedBall, Slab, interval

__all__ = ["EXPRESSIONS", "DOMAINS", "initial_data", "domain",
           "expression_names", "domain_names"]


def _zero(x):
    x = np.asarray(x, dtype=float)
    return np.zeros(x.shape[:-1] if x.ndim > 1 else x.shape)


def _grim_reaper_pair(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        v = -np.log(np.abs(np.sin(x)))
    return np.where(np.isfinite(v), v, np.inf)


def _proper_disk_profile(r):
    r = np.asarray(r, dtype=float)
    with np.errstate(all="ignore"):
        v = -np.log1p(-np.minimum(r * r, 1.0))
    return np.where(np.abs(r) < 1.0, v, np.inf)


def _gauss_bump(r):
    r = np.asarray(r, dtype=float)
    return 0.3 * np.exp(-8.0 * r * r)


def _cap_bump_2d(pts):
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    rho2 = np.einsum("ij,ij->i", pts, pts)
    return 0.05 + 0.30 * np.exp(-8.0 * rho2)


EXPRESSIONS = {
    "zero": {"fn": _zero, "args": "any",
             "doc": "identically zero initial or boundary data"},
    "grim_reaper_pair": {"fn": _grim_reaper_pair, "args": "profile-x",
                         "doc": "-log|sin x|: two translator arches with "
                                "poles at 0 and +-pi"},
    "proper_disk_profile": {"fn": _proper_disk_profile, "args": "profile-r",
                            "doc": "-log(1 - r^2): finite inside the unit "
                                   "disk, +inf at the rim and beyond"},
    "gauss_bump": {"fn": _gauss_bump, "args": "profile-r",
                   "doc": "0.3 exp(-8 r^2): smooth bounded bump profile"},
    "cap_bump_2d": {"fn": _cap_bump_2d, "args": "pts2d",
                    "doc": "0.05 + 0.3 exp(-8 |x|^2) on 2D points"},
}


def _make_domains():
    return {
        "unit_disk": lambda: Ball(np.zeros(2), 1.0),
        "unit_ball_3d": lambda: Ball(np.zeros(3), 1.0),
        "lens_left": lambda: Ball(np.array([-0.5, 0.0]), 1.0),
        "lens_right": lambda: Ball(np.array([0.5, 0.0]), 1.0),
        "wavy_disk": lambda: PerturbedBall(np.zeros(2), 1.0,
                                           cos_coeffs=(0.0, 0.06),
                                           sin_coeffs=(0.0, 0.0, 0.04)),
        "strip": lambda: Slab(np.array([0.0, 1.0]), 0.0, 1.0, window=12.0),
        "full_plane": lambda: FullSpace(2),
        "sym_interval_pi": lambda: interval(-np.pi, np.pi),
        "reaper_interval": lambda: interval(0.1, np.pi - 0.1),
        "unit_interval": lambda: interval(0.0, 1.0),
    }


DOMAINS = _make_domains()


def expression_names():
    return sorted(EXPRESSIONS)


def domain_names():
    return sorted(DOMAINS)


def initial_data(name):
    """Callable + argument convention for a named expression."""
    try:
        entry = EXPRESSIONS[name]
    except KeyError:
        raise KeyError("unknown expression %r; known: %s"
                       % (name, ", ".join(expression_names()))) from None
    return entry["fn"], entry["args"]


def domain(name):
    """Fresh DomainSpec for a named domain."""
    try:
        make = DOMAINS[name]
    except KeyError:
        raise KeyError("unknown domain %r; known: %s"
                       % (name, ", ".join(domain_names()))) from None
    return make()
