import math

import numpy as np
import pytest

from anisogeo.jet import MAX_ORDER, DegenerateMatrixError, Jet, JetDomainError, einsum, inv


def scalar(x, order=4):
    return Jet.variables([x], order)[0]


def test_variable_and_constant():
    x, y = Jet.variables([0.5, -1.0], 3)
    assert x.value == 0.5 and y.value == -1.0
    assert x.partial((1, 0)) == 1.0 and x.partial((0, 1)) == 0.0
    c = Jet.constant(np.eye(2), 2, 3)
    assert c.shape == (2, 2)
    assert np.all(c.partial((1, 0)) == 0)


def test_univariate_taylor_coefficients():
    # d^k/dx^k exp(2x) = 2^k exp(2x)
    x = scalar(0.3, 6)
    f = (x * 2.0).exp()
    for k in range(7):
        assert f.partial((k,)) == pytest.approx(2.0**k * math.exp(0.6), rel=1e-12)


@pytest.mark.parametrize("fn, exact", [
    (lambda j: j.sin(), lambda x, k: math.sin(x + k * math.pi / 2)),
    (lambda j: j.cos(), lambda x, k: math.cos(x + k * math.pi / 2)),
])
def test_trig_derivatives(fn, exact):
    x0 = 0.7
    f = fn(scalar(x0, 5))
    for k in range(6):
        assert f.partial((k,)) == pytest.approx(exact(x0, k), abs=1e-12)


def test_log_sqrt_power():
    x0 = 1.7
    x = scalar(x0, 4)
    # d^k log x = (-1)^(k-1) (k-1)! / x^k
    L = x.log()
    for k in range(1, 5):
        assert L.partial((k,)) == pytest.approx((-1) ** (k - 1) * math.factorial(k - 1) / x0**k, rel=1e-12)
    s = x.sqrt()
    assert s.partial((2,)) == pytest.approx(-0.25 * x0**-1.5, rel=1e-12)
    p = x.power(-2.5)
    assert p.partial((3,)) == pytest.approx(-2.5 * -3.5 * -4.5 * x0**-5.5, rel=1e-12)


def test_mixed_partials_of_product():
    x, y = Jet.variables([0.4, 1.3], 4)
    f = (x * y).sin() * y
    # d^2 f / dx dy = d/dy [y^2 cos(xy)] = 2y cos(xy) - x y^2 sin(xy)
    x0, y0 = 0.4, 1.3
    want = 2 * y0 * math.cos(x0 * y0) - x0 * y0**2 * math.sin(x0 * y0)
    assert f.partial((1, 1)) == pytest.approx(want, rel=1e-12)


def test_division_and_reciprocal():
    x, y = Jet.variables([2.0, 3.0], 3)
    f = x / y
    assert f.partial((0, 2)) == pytest.approx(2 * 2.0 / 27.0, rel=1e-12)
    g = 1.0 / x
    assert g.partial((2, 0)) == pytest.approx(2 / 8.0, rel=1e-12)


def test_domain_errors():
    with pytest.raises(JetDomainError):
        scalar(-1.0).log()
    with pytest.raises(JetDomainError):
        scalar(0.0).sqrt()
    with pytest.raises(JetDomainError):
        scalar(-2.0).power(0.5)


def test_grad_and_derivative_drop_order():
    x, y = Jet.variables([0.2, 0.9], 3)
    f = x * x * y
    g = f.grad([0, 1])
    assert g.shape == (2,) and g.order == 2
    assert np.allclose(g.value, [2 * 0.2 * 0.9, 0.04])
    assert f.d(0).order == 2


def test_truncate_and_order_bounds():
    x = scalar(0.1, 4)
    assert x.truncate(2).order == 2
    with pytest.raises(ValueError):
        x.truncate(5)
    with pytest.raises(ValueError):
        Jet.variables([0.0], MAX_ORDER + 1)


def test_einsum_matches_numpy_on_values(rng):
    A = rng.normal(size=(3, 3))
    B = rng.normal(size=(3, 3))
    x, = Jet.variables([0.5], 2)
    JA = Jet.constant(A, 1, 2) * x
    JB = Jet.constant(B, 1, 2) * x
    C = einsum("ij,jk->ik", JA, JB)
    assert np.allclose(C.value, 0.25 * A @ B)
    # d^2/dx^2 (x^2 AB) = 2 AB
    assert np.allclose(C.partial((2,)), 2 * A @ B)


def test_inverse_jet(rng):
    x, y = Jet.variables([0.3, -0.2], 3)
    M = Jet.from_nested([[x.exp() + 1.0, x * y], [x * y, y.cos() + 2.0]])
    Mi = inv(M)
    prod = einsum("ij,jk->ik", M, Mi)
    eye = Jet.constant(np.eye(2), 2, 3)
    assert np.abs((prod - eye).c).max() < 1e-12
    with pytest.raises(DegenerateMatrixError):
        inv(Jet.constant(np.zeros((2, 2)), 2, 1))


def test_transpose_acts_on_leading_axes(rng):
    A = rng.normal(size=(2, 3, 4))
    J = Jet.constant(A, 1, 1)
    assert J.transpose(2, 0, 1).shape == (4, 2, 3)
    assert np.allclose(J.swapaxes(0, 2).value, A.swapaxes(0, 2))
