import numpy as np
import pytest

from anisogeo import expr as ex
from anisogeo import spaces as sp

RANDERS = "sqrt((1 + x2^2)*y1^2 + y2^2) + 0.3*x1*y1 + 0.1*y2"
U = np.array([0.2, 0.4, 1.0, 0.7])


def fd(fn, u, k, h=1e-5):
    e = np.zeros_like(u)
    e[k] = h
    return (fn(u + e) - fn(u - e)) / (2 * h)


def base_christoffel(a_fn, x, h=1e-5):
    """Gamma^i_jk of a base metric by central differences."""
    n = len(x)
    a = a_fn(x)
    ainv = np.linalg.inv(a)
    da = np.stack([fd(a_fn, np.asarray(x, float), k, h) for k in range(n)], axis=-1)  # da[i, j, k] = d_k a_ij
    low = 0.5 * (da + da.transpose(0, 2, 1) - da.transpose(2, 0, 1))  # [l, j, k]
    return np.einsum("il,ljk->ijk", ainv, low)


def test_riemann_lift_metric_and_cartan_connection():
    comps = [["1 + x2^2", "0.2*x1"], ["0.2*x1", "exp(x1)"]]
    space = sp.riemann_space(comps, 2)
    g, h = space.metric.values(U)

    def a_fn(x):
        return np.array([[1 + x[1] ** 2, 0.2 * x[0]], [0.2 * x[0], np.exp(x[0])]])

    assert np.allclose(g, a_fn(U[:2]), atol=1e-13)
    assert np.allclose(h, g)
    gam = base_christoffel(a_fn, U[:2])
    # N^i_j = Gamma^i_jk y^k, stored as N[j, i]
    want = np.einsum("ijk,k->ji", gam, U[2:])
    assert np.allclose(space.nconn.value(U), want, atol=1e-8)


def test_riemann_components_must_be_base_only():
    with pytest.raises(sp.SpaceSpecError):
        sp.riemann_space([["1", "0"], ["0", "y1"]], 2)


def test_finsler_metric_euler_identities():
    g = sp.finsler_metric(RANDERS, U, 2)
    F = ex.parse(RANDERS, 2, 2)
    y = U[2:]
    Fval = ex.evaluate(F, U, 2, 2)
    assert y @ g @ y == pytest.approx(Fval**2, rel=1e-12)

    def E(v):
        return ex.evaluate(F, v, 2, 2) ** 2

    grad = np.array([fd(E, U, 2 + a) for a in range(2)])
    assert np.allclose(g @ y, 0.5 * grad, atol=1e-8)
    assert np.all(np.linalg.eigvalsh(g) > 0)


def test_homogeneity_residual():
    assert sp.finsler_homogeneity_residual(RANDERS, U, 2.5, 2) < 1e-12
    assert sp.finsler_homogeneity_residual("y1^2 + y2^2", U, 2.0, 2) > 0.1
    with pytest.raises(ValueError):
        sp.finsler_homogeneity_residual(RANDERS, U, -1.0, 2)


def test_degenerate_finsler_metric():
    with pytest.raises(sp.DegenerateMetricError):
        sp.finsler_metric("sqrt(y1^2)", U, 2)


def test_cartan_connection_is_spray_derivative():
    # N^i_j = d G^i / d y^j with 2 G^i = Gamma^i_jk(x, y) y^j y^k
    space = sp.finsler_space(RANDERS, 2)
    N = space.nconn.value(U)
    assert N.shape == (2, 2)
    # homogeneous of degree 1 in y
    V = U.copy()
    V[2:] *= 3.0
    assert np.allclose(space.nconn.value(V), 3.0 * N, atol=1e-12)


def test_lagrange_spray_reading_matches_finsler():
    fin = sp.finsler_space(RANDERS, 2)
    lag = sp.lagrange_space(RANDERS, 2)
    assert np.allclose(lag.nconn.value(U), fin.nconn.value(U), atol=1e-12)
    assert np.allclose(lag.metric.values(U)[0], fin.metric.values(U)[0], atol=1e-12)
    # g = 1/2 Hessian of L itself when L is already the square
    lagL = sp.lagrange_space(f"({RANDERS})^2", 2, hessian_of="L")
    assert np.allclose(lagL.metric.values(U)[0], fin.metric.values(U)[0], atol=1e-12)


def test_lagrange_printed_reading_on_flat_space():
    # The printed reading yields N = identity on flat space, unlike the spray reading.
    printed = sp.lagrange_nconnection("sqrt(y1^2 + y2^2)", U, 2, reading="printed")
    spray = sp.lagrange_nconnection("sqrt(y1^2 + y2^2)", U, 2)
    assert np.allclose(printed, np.eye(2))
    assert np.allclose(spray, 0.0)


def test_lagrange_option_validation():
    with pytest.raises(sp.SpaceSpecError):
        sp.lagrange_space("y1^2", 1, hessian_of="L3")
    with pytest.raises(sp.SpaceSpecError):
        sp.lagrange_space("y1^2", 1, reading="other")


def test_cartan_space_quadratic_matches_base_christoffel():
    K = "sqrt(exp(x1)*p1^2 + (1 + x2^2)*p2^2)"
    N = sp.cartan_space_nconnection(K, U, 2)

    def a_low(x):  # inverse of the contravariant metric
        return np.diag([np.exp(-x[0]), 1.0 / (1 + x[1] ** 2)])

    gam = base_christoffel(a_low, U[:2])
    assert np.allclose(N, np.einsum("kij,k->ij", gam, U[2:]), atol=1e-8)
    gup = sp.cartan_space_metric(K, U, 2)
    assert np.allclose(gup, np.diag([np.exp(0.2), 1.16]))


def test_hamilton_metric_reading_matches_cartan_space():
    K = "sqrt(exp(x1)*p1^2 + (1 + x2^2)*p2^2 + 0.2*p1*p2)"
    H = "exp(x1)*p1^2 + (1 + x2^2)*p2^2 + 0.2*p1*p2"
    assert np.allclose(sp.hamilton_nconnection(H, U, 2), sp.cartan_space_nconnection(K, U, 2), atol=1e-12)
    assert not np.allclose(sp.hamilton_nconnection(H, U, 2, reading="printed"),
                           sp.cartan_space_nconnection(K, U, 2), atol=1e-3)
    assert np.allclose(sp.hamilton_metric(H, U, 2), [[np.exp(0.2), 0.1], [0.1, 1.16]])


def test_covector_spaces_store_contravariant_fiber_metric():
    space = sp.hamilton_space("exp(x1)*p1^2 + p2^2", 2)
    g, h = space.metric.values(U)
    assert np.allclose(g @ h, np.eye(2))
    assert space.kind == "covector" and space.fiber_letter() == "p"


def test_general_space_dimensions():
    space = sp.general_space([["1 + x1^2"]], [["1", "0"], ["0", "2 + y2^2"]], 1, 2)
    g, h = space.metric.values([0.5, 0.1, 0.3])
    assert g.shape == (1, 1) and h.shape == (2, 2)
    assert np.allclose(space.nconn.value([0.5, 0.1, 0.3]), 0.0)


@pytest.mark.parametrize("kwargs, msg", [
    (dict(cls="nope", n=2, m=2), "unknown space class"),
    (dict(cls="finsler", n=2, m=3, fundamental="y1"), "requires m = n"),
    (dict(cls="finsler", n=2, m=2), "fundamental"),
    (dict(cls="riemann", n=2, m=2, fundamental="y1"), "metric components"),
    (dict(cls="finsler", n=0, m=0, fundamental="y1"), ">= 1"),
])
def test_space_spec_validation(kwargs, msg):
    with pytest.raises(sp.SpaceSpecError, match=msg):
        sp.SpaceSpec(**kwargs)


def test_build_space_with_explicit_nconnection():
    spec = sp.SpaceSpec(cls="glagrange", n=2, m=2, metric_components=[["1", "0"], ["0", "1 + y1^2"]],
                        n_connection=[["x1*y2", "0"], ["0", "y1"]])
    space = sp.build_space(spec)
    assert np.allclose(space.nconn.value(U), [[0.2 * 0.7, 0], [0, 1.0]])


def test_metric_eigen_range():
    space = sp.riemann_space([["2", "0"], ["0", "5"]], 2)
    r = sp.metric_eigen_range(space, U)
    assert r == {"g_min": 2.0, "g_max": 5.0, "h_min": 2.0, "h_max": 5.0}


def test_almost_complex_structure():
    v = np.array([1.0, 2.0, 3.0, 4.0])
    assert np.allclose(sp.almost_complex_apply(sp.almost_complex_apply(v)), -v)
    with pytest.raises(ValueError):
        sp.almost_complex_apply([1.0, 2.0, 3.0])


def test_kahler_two_form_antisymmetric_and_closed(rng):
    space = sp.finsler_space(RANDERS, 2)
    g, _ = space.metric.values(U)
    v1, v2 = rng.normal(size=(2, 4))
    assert sp.kahler_two_form(g, v1, v2) == pytest.approx(-sp.kahler_two_form(g, v2, v1))
    assert sp.kahler_closedness_residual(space, U) < 1e-7
