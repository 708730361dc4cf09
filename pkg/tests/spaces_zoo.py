"""Shared test spaces and sampling helpers."""

import numpy as np

from anisogeo import spaces as sp

RANDERS = "sqrt((1 + x2^2)*y1^2 + y2^2) + 0.3*x1*y1 + 0.1*y2"
SPHERE = "sqrt(y1^2 + sin(x1)^2*y2^2)"


def flat():
    return sp.finsler_space("sqrt(y1^2 + y2^2)", 2)


def exp_conformal():
    return sp.finsler_space("exp(0.3*x1 - 0.2*x2)*sqrt(y1^2 + y2^2)", 2)


def sphere():
    return sp.finsler_space(SPHERE, 2)


def randers():
    return sp.finsler_space(RANDERS, 2)


def covector_quadratic():
    return sp.hamilton_space("exp(x1)*p1^2 + (1 + x2^2)*p2^2 + 0.2*p1*p2", 2)


def lagrange():
    return sp.lagrange_space("y1^2 + exp(x2)*y2^2 + 0.1*x1*y1^3*y2", 2, hessian_of="L")


def general():
    return sp.general_space(
        [["1 + x1^2", "0.1*y1"], ["0.1*y1", "2 + sin(x2)"]],
        [["1 + y2^2", "0", "0.2*x1"], ["0", "1.5", "0"], ["0.2*x1", "0", "1 + 0.1*y3^2"]],
        2, 3, nconn=None,
    )


def general_with_n():
    from anisogeo.geometry import NConnection
    N = NConnection.from_exprs([["0.1*x2*y1", "y2*x1", "0"], ["0", "0.3*y3", "x1*y1*0.2"]], 2, 3)
    return sp.general_space(
        [["1 + x1^2", "0.1*y1"], ["0.1*y1", "2 + sin(x2)"]],
        [["1 + y2^2", "0", "0.2*x1"], ["0", "1.5", "0"], ["0.2*x1", "0", "1 + 0.1*y3^2"]],
        2, 3, nconn=N,
    )


def random_points(rng, count, dim, lo=-0.8, hi=0.8, fiber_shift=0.0):
    """Chart points with fibers kept away from the zero section."""
    pts = rng.uniform(lo, hi, size=(count, dim))
    half = dim // 2
    pts[:, half:] += np.sign(pts[:, half:] + 1e-9) * (0.4 + fiber_shift)
    return pts


def sphere_points(rng, count):
    pts = random_points(rng, count, 4)
    pts[:, 0] = rng.uniform(0.4, 2.6, count)  # stay away from the poles
    return pts
