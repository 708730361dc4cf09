import itertools

import numpy as np
import pytest

from anisogeo.clifford import sigma as sg


def test_printed_dimension_table():
    assert {n: sg.sigma_dimension(n) for n in range(1, 7)} == {1: 1, 2: 2, 3: 2, 4: 4, 5: 4, 6: 8}
    with pytest.raises(ValueError):
        sg.sigma_dimension(0)


@pytest.mark.parametrize("s, t", [(s, d - s) for d in range(1, 9) for s in range(d + 1)])
def test_systems_are_exact_and_minimal(s, t):
    # s generators with sigma^2 = +I (metric -1), t with sigma^2 = -I (metric +1)
    metric = (-1,) * s + (1,) * t
    S = sg.sigma_system(metric)
    assert S.anticommutation_residual() == 0
    assert S.N == sg.real_module_dimension(s, t)
    for m in S.matrices:
        assert m.dtype.kind == "i"


@pytest.mark.parametrize("n", range(1, 9))
def test_standard_metric_needs_no_escalation(n):
    S = sg.sigma_system(sg.standard_metric(n))
    assert S.N == sg.sigma_dimension(n)
    assert S.escalations == []


def test_escalation_is_reported():
    S = sg.sigma_system((1, 1, 1))  # all sigma^2 = -I: needs a quaternionic module
    assert S.N == 4 > sg.sigma_dimension(3)
    assert S.escalations and "escalated to N=4" in S.escalations[0]


def test_relation_sign_convention():
    S = sg.sigma_system((-1, 1))
    a, b = S.matrices
    assert np.array_equal(a @ a, np.eye(S.N, dtype=int))  # G = -1 gives sigma^2 = +I
    assert np.array_equal(b @ b, -np.eye(S.N, dtype=int))


def test_multiblock_system():
    S = sg.sigma_system([(-1, -1), (-1, -1, 1)])
    assert S.block_sizes == [2, 2] and S.N == 4 and S.n == 5
    assert S.anticommutation_residual() == 0
    assert S.block_of(0) == 0 and S.block_of(4) == 1
    # matrices of different blocks have disjoint support
    assert not (S.matrices[0] @ S.matrices[3]).any()
    assert len(S.block_matrices(1)) == 3


def test_invalid_metrics():
    with pytest.raises(ValueError):
        sg.sigma_system((2, 1))
    with pytest.raises(ValueError):
        sg.sigma_system([()])


@pytest.mark.parametrize("n", [2, 4, 6])
def test_epsilon_factorization_even(n):
    rep = sg.epsilon_objects(sg.sigma_system(sg.standard_metric(n)))
    assert rep.sign == 1
    assert rep.rank_residual < 1e-10
    assert rep.factor_residual < 1e-10
    # eps_lower and eps_upper are mutually inverse up to sign conventions: both invertible
    assert abs(np.linalg.det(rep.eps_lower)) > 1e-8


@pytest.mark.parametrize("n", [1, 3, 5, 7])
def test_odd_vanishing_rule(n):
    rep = sg.epsilon_objects(sg.sigma_system(sg.standard_metric(n)))
    vanish = sg.printed_vanishing(n)
    assert rep.vanishing[vanish] is True
    assert rep.vanishing[-vanish] is False
    assert rep.sign == -vanish
    assert rep.rank_residual < 1e-10


def test_epsilon_single_block_only():
    with pytest.raises(ValueError):
        sg.epsilon_objects(sg.sigma_system([(-1,), (-1,)]))


@pytest.mark.parametrize("n, q, label", [
    (1, 0, "symmetric"), (3, 0, "antisymmetric"), (3, 1, "symmetric"), (5, 0, "antisymmetric"),
    (7, 0, "symmetric"), (4, 0, "antisymmetric"), (4, 2, "symmetric"), (2, 0, "mixed-pairing"),
    (6, 1, "antisymmetric"),
])
def test_symmetry_class_table(n, q, label):
    assert sg.symmetry_class(n, q) == label


def test_mixed_pairing_sign():
    assert sg.mixed_pairing_sign(2, 0) == -1
    assert sg.mixed_pairing_sign(2, 2) == 1
    with pytest.raises(ValueError):
        sg.mixed_pairing_sign(4, 0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_symmetry_cross_check(n):
    rows = sg.symmetry_cross_check(n)
    assert len(rows) == n + 1
    assert all(r["match"] for r in rows), rows


@pytest.mark.parametrize("n", range(1, 7))
def test_random_spinors_are_fundamental(n, rng):
    S = sg.sigma_system(sg.standard_metric(n))
    size = S.N // 2 if n % 2 == 0 else S.N
    rep = sg.fundamental_spinor_check(n, rng.normal(size=size))
    assert rep.fundamental and not rep.degenerate
    assert set(rep.nonvanishing_q) <= set(rep.allowed_q)


def test_zero_spinor_is_degenerate():
    rep = sg.fundamental_spinor_check(4, np.zeros(2))
    assert rep.degenerate and not rep.fundamental
    with pytest.raises(ValueError):
        sg.fundamental_spinor_check(4, np.zeros(3))
    with pytest.raises(ValueError):
        sg.fundamental_spinor_check(9, np.zeros(16))


def test_sigma_products_count():
    S = sg.sigma_system(sg.standard_metric(3))
    prods = sg.sigma_products(S)
    assert len(prods) == 2**3
    assert set(prods) == {I for q in range(4) for I in itertools.combinations(range(3), q)}
