"""Symmetric convex curvature cones and membership tests with margins.

A cone is described by a concave, symmetric, componentwise-nondecreasing test
function f with f > 0 on the interior; membership is decided from the signed
margin f(kappa).  Open vs closed cones differ only in the tolerance sign:
margin > tol for open cones, margin >= -tol for closed ones.  Every query
returns the margin alongside the verdict so callers can aggregate worst cases
instead of booleans.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np


class ConeResult(NamedTuple):
    member: bool
    margin: float


class CurvatureCone:
    def __init__(self, name: str, test: Callable, open_: bool = False, tol: float = 1e-12):
        self.name = name
        self.test = test
        self.open_ = open_
        self.tol = float(tol)

    def margin(self, kappa) -> float:
        kappa = np.asarray(kappa, dtype=float)
        if kappa.ndim != 1:
            raise ValueError("curvature vector must be 1D")
        if kappa.size == 0:
            return 0.0  # 1D boundaries carry an empty curvature vector
        return float(self.test(kappa))

    def contains(self, kappa) -> ConeResult:
        m = self.margin(kappa)
        ok = (m > self.tol) if self.open_ else (m >= -self.tol)
        return ConeResult(bool(ok), m)

    def __repr__(self):
        return "CurvatureCone(%r, open=%s, tol=%g)" % (self.name, self.open_, self.tol)


def positive_cone(open_=False, tol=1e-12):
    return CurvatureCone("positive", lambda k: np.min(k), open_=open_, tol=tol)


def mean_cone(open_=False, tol=1e-12):
    return CurvatureCone("mean", lambda k: np.sum(k), open_=open_, tol=tol)


def custom_cone(name, test, open_=False, tol=1e-12):
    return CurvatureCone(name, test, open_=open_, tol=tol)


#: named cones reachable from config files
CONE_REGISTRY = {
    "positive": positive_cone,
    "mean": mean_cone,
    "minplus": lambda open_=False, tol=1e-12: custom_cone(
        "minplus", lambda k: np.min(k) + 0.5 * np.sum(k), open_=open_, tol=tol
    ),
}


def make_cone(name, open_=False, tol=1e-12):
    try:
        return CONE_REGISTRY[name](open_=open_, tol=tol)
    except KeyError:
        raise KeyError("unknown cone %r; registered: %s" % (name, sorted(CONE_REGISTRY))) from None


def cone_contains(cone: CurvatureCone, kappa) -> ConeResult:
    return cone.contains(kappa)


def matrix_in_cone(cone: CurvatureCone, M) -> ConeResult:
    """Membership of a symmetric matrix: eigenvalues tested as a curvature vector."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("need a square matrix")
    if not np.allclose(M, M.T, atol=1e-10 * max(1.0, float(np.abs(M).max()))):
        raise ValueError("matrix is not symmetric")
    lam = np.linalg.eigvalsh(M)
    return cone.contains(lam)
