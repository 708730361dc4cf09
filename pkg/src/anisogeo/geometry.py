"""N-connections, adapted frames, anholonomy and N-connection curvature.

Covector bundles are handled by a kind flag. Internally every formula works on
the *effective* coefficients ``N_eff`` defined so that the adapted frame always
reads ``delta_i = d_i - N_eff[i, a] d_a``; for a vector bundle ``N_eff = N`` and
for a covector bundle ``N_eff = -N_check`` (the elongation signs are inverted).
Likewise the fiber metric block ``h`` is ``h_ab`` for vector bundles and the
contravariant ``h^ab`` for covector bundles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import expr as ex
from .jet import Jet, einsum, inv

KINDS = ("vector", "covector")


class KindMismatchError(ValueError):
    pass


def _check_kind(kind: str) -> str:
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    return kind


@dataclass(frozen=True)
class ChartPoint:
    x: tuple
    fiber: tuple
    fiber_kind: str = "vector"

    def __post_init__(self):
        _check_kind(self.fiber_kind)
        if not np.all(np.isfinite(self.x)) or not np.all(np.isfinite(self.fiber)):
            raise ValueError("chart point coordinates must be finite")

    @property
    def u(self) -> np.ndarray:
        return np.array(tuple(self.x) + tuple(self.fiber), dtype=float)


def as_point(u) -> np.ndarray:
    if isinstance(u, ChartPoint):
        return u.u
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError("chart point coordinates must be finite")
    return u


def _pointwise_jet(fn: Callable[[np.ndarray], np.ndarray], u: np.ndarray, order: int, h: float) -> Jet:
    """Central-difference jet (order <= 2) of a pointwise-only field."""
    if order > 2:
        raise ValueError("pointwise fields support derivative order <= 2")
    nv = len(u)
    f0 = np.asarray(fn(u), dtype=float)
    out = Jet.constant(f0, nv, order)
    if order == 0:
        return out
    from .jet import _space

    sp = _space(nv, order)
    eye = np.eye(nv)
    fp = [np.asarray(fn(u + h * eye[k]), dtype=float) for k in range(nv)]
    fm = [np.asarray(fn(u - h * eye[k]), dtype=float) for k in range(nv)]
    for k in range(nv):
        out.c[..., sp.index[tuple(eye[k].astype(int))]] = (fp[k] - fm[k]) / (2 * h)
    if order == 2:
        for k in range(nv):
            for l in range(k, nv):
                alpha = tuple((eye[k] + eye[l]).astype(int))
                if k == l:
                    d2 = (fp[k] - 2 * f0 + fm[k]) / h**2
                    out.c[..., sp.index[alpha]] = d2 / 2
                else:
                    pp = np.asarray(fn(u + h * (eye[k] + eye[l])), dtype=float)
                    pm = np.asarray(fn(u + h * (eye[k] - eye[l])), dtype=float)
                    mp = np.asarray(fn(u - h * (eye[k] - eye[l])), dtype=float)
                    mm = np.asarray(fn(u - h * (eye[k] + eye[l])), dtype=float)
                    out.c[..., sp.index[alpha]] = (pp - pm - mp + mm) / (4 * h * h)
    return out


class NConnection:
    """Nonlinear connection field ``N_i^a`` (vector) or ``N_ia`` (covector).

    ``jet_fn(u, order)`` must return an ``(n, m)`` Jet of at least ``order``.
    """

    def __init__(self, n: int, m: int, kind: str, jet_fn: Callable[[np.ndarray, int], Jet], label: str = ""):
        self.n, self.m = n, m
        self.kind = _check_kind(kind)
        self._jet_fn = jet_fn
        self.label = label

    # factories ---------------------------------------------------------
    @classmethod
    def from_exprs(cls, exprs, n: int, m: int, kind: str = "vector") -> "NConnection":
        """From an n x m nested list of expression strings or ASTs."""
        parsed = [[ex.parse(e, n, m, kind) if isinstance(e, str) else e for e in row] for row in exprs]
        if len(parsed) != n or any(len(r) != m for r in parsed):
            raise ValueError(f"n_connection must be {n}x{m}")
        return cls(n, m, kind, lambda u, k: ex.eval_jet_array(parsed, u, k, n, m), label="expressions")

    @classmethod
    def constant(cls, matrix, kind: str = "vector") -> "NConnection":
        mat = np.atleast_2d(np.asarray(matrix, dtype=float))
        n, m = mat.shape
        return cls(n, m, kind, lambda u, k: Jet.constant(mat, n + m, k), label="constant")

    @classmethod
    def zero(cls, n: int, m: int, kind: str = "vector") -> "NConnection":
        return cls.constant(np.zeros((n, m)), kind)

    @classmethod
    def from_pointwise(cls, fn, n: int, m: int, kind: str = "vector", h: float = 1e-5) -> "NConnection":
        """Field known only pointwise; partials by central differences."""
        return cls(n, m, kind, lambda u, k: _pointwise_jet(fn, u, k, h), label="pointwise")

    # evaluation --------------------------------------------------------
    def jet(self, u, order: int) -> Jet:
        """Coefficients in the declared layout (N_i^a or N_ia), as an (n, m) Jet."""
        j = self._jet_fn(as_point(u), order)
        if j.shape != (self.n, self.m):
            raise ValueError(f"N-connection returned shape {j.shape}, expected {(self.n, self.m)}")
        return j.truncate(order)

    def effective_jet(self, u, order: int) -> Jet:
        j = self.jet(u, order)
        return j if self.kind == "vector" else -j

    def value(self, u) -> np.ndarray:
        return self.jet(u, 0).value


# ---------------------------------------------------------------------------
# frames


@dataclass(frozen=True)
class AdaptedFrame:
    D: np.ndarray  # columns: adapted basis vectors in the coordinate basis
    C: np.ndarray  # rows: adapted coframe in the coordinate coframe


def frame_matrices(neff, n: int, m: int):
    """(D, C) as arrays or Jets from effective coefficients ``neff[i, a]``."""
    if isinstance(neff, Jet):
        D = np.zeros((n + m, n + m, neff.c.shape[-1]))
        C = np.zeros_like(D)
        D[..., 0] = np.eye(n + m)
        C[..., 0] = np.eye(n + m)
        D[n:, :n] = -np.swapaxes(neff.c, 0, 1)
        C[n:, :n] = np.swapaxes(neff.c, 0, 1)
        return Jet(D, neff.nvars, neff.order), Jet(C, neff.nvars, neff.order)
    neff = np.asarray(neff, dtype=float)
    D = np.eye(n + m)
    C = np.eye(n + m)
    D[n:, :n] = -neff.T
    C[n:, :n] = neff.T
    return D, C


def adapted_frame(N: NConnection, u, kind: str | None = None) -> AdaptedFrame:
    """Adapted basis ``delta_alpha`` and coframe ``delta^alpha`` at ``u``."""
    if kind is not None and kind != N.kind:
        raise KindMismatchError(f"point kind {kind!r} does not match N-connection kind {N.kind!r}")
    if isinstance(u, ChartPoint) and u.fiber_kind != N.kind:
        raise KindMismatchError(f"point kind {u.fiber_kind!r} does not match N-connection kind {N.kind!r}")
    D, C = frame_matrices(N.effective_jet(u, 0).value, N.n, N.m)
    return AdaptedFrame(D, C)


def frame_duality_residual(frame: AdaptedFrame) -> float:
    return float(np.abs(frame.C @ frame.D - np.eye(frame.D.shape[0])).max())


def anholonomy_jet(neff: Jet, n: int, m: int) -> Jet:
    """``w[alpha, beta, gamma]`` with ``[e_beta, e_gamma] = w^alpha_{beta gamma} e_alpha``."""
    D, C = frame_matrices(neff, n, m)
    dD = D.grad(range(n + m))  # dD[mu, gamma, nu] = d_nu D[mu, gamma]
    t = einsum("nb,mcn->mbc", D, dD)
    comm = t - t.swapaxes(1, 2)
    return einsum("am,mbc->abc", C, comm)


def anholonomy_coefficients(N: NConnection, u) -> np.ndarray:
    return anholonomy_jet(N.effective_jet(u, 1), N.n, N.m).value


def delta_h(f: Jet, neff: Jet, n: int) -> Jet:
    """Adapted h-derivatives: result[..., k] = d_k f - N_eff[k, a] d_a f."""
    m = neff.shape[1]
    dx = f.grad(range(n))
    dy = f.grad(range(n, n + m))
    return dx - _contract_last(dy, neff)


def _contract_last(dy: Jet, neff: Jet) -> Jet:
    lead = "".join("ABCDEFGH"[: dy.ndim - 1])
    return einsum(f"{lead}a,ka->{lead}k", dy, neff)


def delta_v(f: Jet, n: int, m: int) -> Jet:
    """Fiber derivatives: result[..., c] = d f / d(fiber_c)."""
    return f.grad(range(n, n + m))


def nconn_curvature_jet(neff: Jet, n: int) -> Jet:
    """``Omega[a, i, j] = delta_j N_i^a - delta_i N_j^a`` (effective layout)."""
    dn = delta_h(neff, neff, n)  # dn[i, a, j] = delta_j N_i^a
    t = dn.transpose(1, 0, 2)  # t[a, i, j]
    return t - t.swapaxes(1, 2)


def nconn_curvature(N: NConnection, u) -> np.ndarray:
    return nconn_curvature_jet(N.effective_jet(u, 1), N.n).value


# ---------------------------------------------------------------------------
# metric compatibility


def nconn_from_metric(G, n: int) -> np.ndarray:
    """Effective ``N[i, b] = h^{ab} G[i, n+a]`` for a full symmetric metric G."""
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape[0] <= n:
        raise ValueError("G must be square with size > n")
    h = G[n:, n:]
    det = np.linalg.det(h)
    if abs(det) < 1e-12:
        raise np.linalg.LinAlgError("singular fiber block of the metric")
    return np.linalg.solve(h, G[n:, :n]).T


def assemble_metric(g, h, neff) -> np.ndarray:
    """Coordinate-basis metric of ``g dx dx + h delta y delta y``."""
    g, h, neff = (np.asarray(a, dtype=float) for a in (g, h, neff))
    n, m = g.shape[0], h.shape[0]
    _, C = frame_matrices(neff, n, m)
    B = np.zeros((n + m, n + m))
    B[:n, :n] = g
    B[n:, n:] = h
    return C.T @ B @ C


# ---------------------------------------------------------------------------
# second-order osculator bundle


def osc2_dual_coefficients(N1, N2):
    """Dual coefficients ``M1 = N1``, ``M2 = N2 + N1 N1`` (index layout ``[j, i]``)."""
    N1 = np.atleast_2d(np.asarray(N1, dtype=float))
    N2 = np.atleast_2d(np.asarray(N2, dtype=float))
    if N1.shape != N2.shape or N1.shape[0] != N1.shape[1]:
        raise ValueError("N1 and N2 must be square matrices of equal size")
    return N1.copy(), N2 + N1 @ N1


def osc2_frame_matrices(N1, N2):
    """Frame matrix N-hat (basis) and coframe matrix M-hat (dual).

    Basis ``delta_x = d_x - N1 d_y1 - N2 d_y2``, ``delta_y1 = d_y1 - N1 d_y2``,
    ``d_y2``; coframe ``dx``, ``delta y1 = dy1 + M1 dx``,
    ``delta y2 = dy2 + N1 dy1 + M2 dx``. Columns/rows use the layout
    ``[j, i] -> N_j^i``.
    """
    N1 = np.atleast_2d(np.asarray(N1, dtype=float))
    N2 = np.atleast_2d(np.asarray(N2, dtype=float))
    M1, M2 = osc2_dual_coefficients(N1, N2)
    n = N1.shape[0]
    I = np.eye(n)
    Z = np.zeros((n, n))
    Nhat = np.block([[I, Z, Z], [-N1.T, I, Z], [-N2.T, -N1.T, I]])
    Mhat = np.block([[I, Z, Z], [M1.T, I, Z], [M2.T, N1.T, I]])
    return Nhat, Mhat


def osc2_metric(g, h1, h2, N1, N2) -> np.ndarray:
    """Coordinate metric of ``g dx dx + h1 dy1 dy1 + h2 dy2 dy2`` in adapted coframe."""
    _, Mhat = osc2_frame_matrices(N1, N2)
    n = np.asarray(g).shape[0]
    B = np.zeros((3 * n, 3 * n))
    B[:n, :n] = g
    B[n:2 * n, n:2 * n] = h1
    B[2 * n:, 2 * n:] = h2
    return Mhat.T @ B @ Mhat
