"""Independent finite-difference Riemannian oracle (plain numpy, no jets).

Both levels use the five-point fourth-order central stencil.
"""

import numpy as np


def _d(fn, x, k, h):
    e = np.zeros_like(x)
    e[k] = h
    return (-fn(x + 2 * e) + 8 * fn(x + e) - 8 * fn(x - e) + fn(x - 2 * e)) / (12 * h)


def christoffel(metric_fn, x, h=1e-3):
    """Gamma[i, j, k] = Gamma^i_{jk} of metric_fn at x."""
    x = np.asarray(x, float)
    n = x.size
    ginv = np.linalg.inv(metric_fn(x))
    dg = np.stack([_d(metric_fn, x, k, h) for k in range(n)])  # dg[k, i, j] = d_k g_ij
    low = 0.5 * (np.einsum("klj->ljk", dg) + np.einsum("jlk->ljk", dg) - np.einsum("ljk->ljk", dg))
    return np.einsum("il,ljk->ijk", ginv, low)


def riemann(metric_fn, x, h=1e-2):
    """Classical R^i_{jkl} = d_k Gamma^i_{lj} - d_l Gamma^i_{kj} + Gamma^i_{km} Gamma^m_{lj} - Gamma^i_{lm} Gamma^m_{kj}."""
    x = np.asarray(x, float)
    n = x.size
    G = christoffel(metric_fn, x)
    dG = np.stack([_d(lambda v: christoffel(metric_fn, v), x, k, h) for k in range(n)])
    R = (np.einsum("kilj->ijkl", dG) - np.einsum("likj->ijkl", dG)
         + np.einsum("ikm,mlj->ijkl", G, G) - np.einsum("ilm,mkj->ijkl", G, G))
    return R


def ricci(R):
    return np.einsum("ijil->jl", R)


def scalar(R, g):
    return float(np.einsum("jl,jl->", np.linalg.inv(g), ricci(R)))
