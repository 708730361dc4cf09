import numpy as np
import pytest

from anisogeo import geometry as geo
from anisogeo.geometry import ChartPoint, KindMismatchError, NConnection

N_EXPRS = [["x2*y1 + 0.3*y2^2", "sin(x1)*y2"], ["0.2*x1*x2", "y1*y2 - x2"]]


def fd_jacobian(fn, u, h=1e-6):
    u = np.asarray(u, float)
    cols = []
    for k in range(u.size):
        e = np.zeros_like(u)
        e[k] = h
        cols.append((fn(u + e) - fn(u - e)) / (2 * h))
    return np.stack(cols, axis=-1)


@pytest.mark.parametrize("kind", ["vector", "covector"])
def test_frame_duality_random(kind, rng):
    for _ in range(20):
        n, m = rng.integers(1, 5, size=2)
        N = rng.normal(size=(n, m)) * 3
        fr = geo.adapted_frame(NConnection.constant(N, kind), np.zeros(n + m))
        assert geo.frame_duality_residual(fr) < 1e-12
        assert np.allclose(fr.D @ fr.C, np.eye(n + m), atol=1e-12)


def test_adapted_basis_components():
    N = np.array([[1.0, 2.0], [3.0, 4.0]])
    fr = geo.adapted_frame(NConnection.constant(N), np.zeros(4))
    # delta_1 = d_x1 - N_1^a d_ya
    assert np.allclose(fr.D[:, 0], [1, 0, -1, -2])
    # delta y^1 = dy^1 + N_i^1 dx^i
    assert np.allclose(fr.C[2], [1, 3, 1, 0])
    covec = geo.adapted_frame(NConnection.constant(N, "covector"), np.zeros(4))
    # delta_1 = d_x1 + N_1a d^a on cotangent bundles
    assert np.allclose(covec.D[:, 0], [1, 0, 1, 2])


def test_kind_mismatch():
    N = NConnection.zero(1, 1, "vector")
    with pytest.raises(KindMismatchError):
        geo.adapted_frame(N, ChartPoint((0.0,), (1.0,), "covector"))
    with pytest.raises(KindMismatchError):
        geo.adapted_frame(N, [0.0, 1.0], kind="covector")


@pytest.mark.parametrize("kind", ["vector", "covector"])
def test_anholonomy_against_finite_difference_brackets(kind):
    exprs = N_EXPRS if kind == "vector" else [[e.replace("y", "p") for e in r] for r in N_EXPRS]
    N = NConnection.from_exprs(exprs, 2, 2, kind)
    u = np.array([0.4, -0.3, 0.8, 0.6])
    w = geo.anholonomy_coefficients(N, u)

    def D_of(v):
        return geo.frame_matrices(N.effective_jet(v, 0).value, 2, 2)[0]

    D = D_of(u)
    C = np.linalg.inv(D)
    dD = fd_jacobian(D_of, u)  # dD[mu, beta, nu] = d_nu D[mu, beta]
    for b in range(4):
        for c in range(4):
            bracket = dD[:, c, :] @ D[:, b] - dD[:, b, :] @ D[:, c]
            assert np.allclose(C @ bracket, w[:, b, c], atol=1e-7)


def test_anholonomy_blocks_match_nconn_curvature_and_fiber_derivative():
    N = NConnection.from_exprs(N_EXPRS, 2, 2)
    u = np.array([0.1, 0.7, -0.5, 1.2])
    w = geo.anholonomy_coefficients(N, u)
    omega = geo.nconn_curvature(N, u)
    assert np.allclose(w[2:, :2, :2], omega, atol=1e-13)
    assert np.allclose(omega, -omega.transpose(0, 2, 1))
    dN = N.jet(u, 1).grad(range(2, 4)).value  # dN[i, a, b] = d_b N_i^a
    # [delta_i, d_b] = (d_b N_i^a) d_a
    assert np.allclose(w[2:, :2, 2:], dN.transpose(1, 0, 2), atol=1e-13)
    assert np.allclose(w[:2], 0.0)
    assert np.allclose(w[2:, 2:, 2:], 0.0)


def test_integrable_connection_has_zero_curvature():
    # N = d_i of a potential along the fiber is flat when it depends on x only through a gradient
    N = NConnection.from_exprs([["x1", "0"], ["0", "x2"]], 2, 2)
    assert np.abs(geo.nconn_curvature(N, [0.3, 0.1, 1.0, 2.0])).max() == 0.0


def test_pointwise_connection_agrees_with_expressions():
    N = NConnection.from_exprs(N_EXPRS, 2, 2)
    P = NConnection.from_pointwise(lambda v: N.value(v), 2, 2)
    u = [0.2, 0.5, 0.9, -0.4]
    assert np.allclose(N.jet(u, 1).c, P.jet(u, 1).c, atol=1e-7)


def test_metric_roundtrip_through_coordinate_form(rng):
    n, m = 2, 3
    A = rng.normal(size=(n, n))
    g = A @ A.T + np.eye(n)
    B = rng.normal(size=(m, m))
    h = B @ B.T + np.eye(m)
    neff = rng.normal(size=(n, m))
    G = geo.assemble_metric(g, h, neff)
    assert np.allclose(G, G.T)
    assert np.allclose(geo.nconn_from_metric(G, n), neff)
    # the adapted basis is block orthogonal
    D, _ = geo.frame_matrices(neff, n, m)
    Gad = D.T @ G @ D
    assert np.allclose(Gad[:n, n:], 0, atol=1e-12)
    assert np.allclose(Gad[:n, :n], g) and np.allclose(Gad[n:, n:], h)


def test_osc2_dual_matrices(rng):
    for _ in range(10):
        N1, N2 = rng.normal(size=(2, 3, 3))
        Nhat, Mhat = geo.osc2_frame_matrices(N1, N2)
        assert np.abs(Mhat @ Nhat - np.eye(9)).max() < 1e-12
    with pytest.raises(ValueError):
        geo.osc2_dual_coefficients(np.eye(2), np.eye(3))


def test_osc2_metric_is_block_diagonal_in_adapted_frame(rng):
    N1, N2 = rng.normal(size=(2, 2, 2))
    g, h1, h2 = np.diag([1.0, 2.0]), np.diag([3.0, 4.0]), np.diag([5.0, 6.0])
    G = geo.osc2_metric(g, h1, h2, N1, N2)
    Nhat, _ = geo.osc2_frame_matrices(N1, N2)
    assert np.allclose(Nhat.T @ G @ Nhat, np.diag([1, 2, 3, 4, 5, 6.0]))


def test_non_finite_point_rejected():
    with pytest.raises(ValueError):
        geo.as_point([0.0, float("inf")])
