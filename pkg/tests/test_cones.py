import numpy as np
import pytest

from gmcf.cones import (cone_contains, custom_cone, make_cone, matrix_in_cone,
                        mean_cone, positive_cone)


def test_positive_cone_margins():
    c = positive_cone()
    assert c.margin(np.array([0.5, 2.0])) == 0.5
    assert c.contains(np.array([0.1, 0.1])).member
    res = c.contains(np.array([-0.2, 5.0]))
    assert not res.member and res.margin == -0.2


def test_mean_cone_margins():
    c = mean_cone()
    assert c.margin(np.array([-1.0, 3.0])) == 2.0
    assert c.contains(np.array([-1.0, 0.5])).member is False


def test_open_vs_closed_at_the_boundary():
    k = np.array([0.0, 1.0])
    assert positive_cone(open_=False).contains(k).member
    assert not positive_cone(open_=True).contains(k).member


def test_empty_curvature_vector_is_member():
    # 1D boundaries carry no curvature; margin 0 belongs to every closed cone
    c = mean_cone()
    assert c.margin(np.zeros(0)) == 0.0
    assert c.contains(np.zeros(0)).member


def test_make_cone_registry():
    for name in ("positive", "mean", "minplus"):
        assert make_cone(name).name == name
    with pytest.raises(KeyError):
        make_cone("nope")


def test_matrix_membership_via_eigenvalues():
    c = positive_cone()
    M = np.array([[2.0, 1.0], [1.0, 2.0]])   # eigenvalues 1, 3
    res = matrix_in_cone(c, M)
    assert res.member and abs(res.margin - 1.0) < 1e-12
    with pytest.raises(ValueError):
        matrix_in_cone(c, np.array([[0.0, 1.0], [5.0, 0.0]]))
    with pytest.raises(ValueError):
        matrix_in_cone(c, np.ones((2, 3)))


def _random_in_cone_matrix(cone_name, n, rng):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    if cone_name == "positive":
        lam = rng.uniform(0.05, 2.0, n)
    elif cone_name == "mean":
        lam = rng.uniform(-0.5, 2.0, n)
        lam[-1] = abs(lam[:-1].sum()) + rng.uniform(0.05, 1.0)
    else:  # minplus: min + sum/2 >= 0
        lam = np.sort(rng.uniform(0.0, 2.0, n))
        lam[0] = rng.uniform(0.0, 0.5)
    return q @ np.diag(lam) @ q.T


@pytest.mark.parametrize("cone_name", ["positive", "mean", "minplus"])
def test_convex_combinations_stay_in_cone(cone_name):
    """Matrices with eigenvalues in a convex symmetric cone form a convex set."""
    cone = make_cone(cone_name, tol=1e-9)
    rng = np.random.default_rng(hash(cone_name) % 2 ** 32)
    for _ in range(30):
        A = _random_in_cone_matrix(cone_name, 3, rng)
        B = _random_in_cone_matrix(cone_name, 3, rng)
        assert matrix_in_cone(cone, A).member
        assert matrix_in_cone(cone, B).member
        for w in (0.25, 0.5, 0.75):
            res = matrix_in_cone(cone, w * A + (1.0 - w) * B)
            assert res.member, (cone_name, w, res.margin)


def test_symmetry_of_cone_test():
    # cone membership must not depend on the eigenvalue ordering
    c = make_cone("minplus")
    k = np.array([0.3, -0.1, 1.2])
    assert abs(c.margin(k) - c.margin(k[::-1])) < 1e-15


def test_custom_cone_callable():
    c = custom_cone("largest", lambda k: np.max(k))
    assert c.contains(np.array([-5.0, 0.2])).member
    assert not c.contains(np.array([-5.0, -0.2])).member
