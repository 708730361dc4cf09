"""d-torsions, d-curvatures, Ricci/Einstein/Phi/Weyl d-tensors, Bianchi residuals.

Curvature block layouts (direction indices last)::

    R_h[i, h, j, k] = R^i_{h.jk}     R_v[a, b, j, k] = R^a_{b.jk}
    P_h[i, j, k, c] = P^i_{j.kc}     P_v[a, b, k, c] = P^a_{b.kc}
    S_h[i, j, b, c] = S^i_{j.bc}     S_v[a, b, c, d] = S^a_{b.cd}

On the flattened adapted frame (h indices first) this is the array
``R[alpha, beta, gamma, delta]`` with
``R = e_delta Gamma^alpha_{beta gamma} - e_gamma Gamma^alpha_{beta delta} + ...``;
for the unit sphere this gives ``R_h[0, 1, 1, 0] = sin^2 theta``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connections import ConnectionJets, DConnection, Valence, connection_jets
from .geometry import anholonomy_jet, delta_h, delta_v, frame_matrices, nconn_curvature_jet
from .jet import Jet, einsum


# ---------------------------------------------------------------------------
# torsion


@dataclass(frozen=True)
class TorsionBlocks:
    T_h: np.ndarray  # T^i_{jk}
    T_v: np.ndarray  # T^a_{ij}
    P_h: np.ndarray  # P^i_{jb}
    P_v: np.ndarray  # P^a_{bi}
    S_v: np.ndarray  # S^a_{bc}

    def max_norm(self) -> float:
        return max(float(np.abs(getattr(self, k)).max(initial=0.0)) for k in ("T_h", "T_v", "P_h", "P_v", "S_v"))


def torsion_jets(cj: ConnectionJets) -> dict:
    omega = nconn_curvature_jet(cj.neff, cj.n)
    return {
        "T_h": cj.L_h - cj.L_h.swapaxes(1, 2),
        "T_v": omega,
        "P_h": cj.C_h,
        "P_v": cj.dN.transpose(1, 2, 0) - cj.L_v,
        "S_v": cj.C_v - cj.C_v.swapaxes(1, 2),
    }


def dtorsion(cj: ConnectionJets) -> TorsionBlocks:
    t = torsion_jets(cj)
    return TorsionBlocks(**{k: v.value for k, v in t.items()})


# ---------------------------------------------------------------------------
# curvature


@dataclass(frozen=True)
class CurvatureBlocks:
    R_h: np.ndarray
    R_v: np.ndarray
    P_h: np.ndarray
    P_v: np.ndarray
    S_h: np.ndarray
    S_v: np.ndarray

    NAMES = ("R_h", "R_v", "P_h", "P_v", "S_h", "S_v")

    @property
    def n(self) -> int:
        return self.R_h.shape[0]

    @property
    def m(self) -> int:
        return self.S_v.shape[0]

    def full(self) -> np.ndarray:
        return full_curvature(self, self.n, self.m)


def curvature_jets(cj: ConnectionJets) -> dict:
    """The six blocks as jets (one order lower than the connection)."""
    n, m = cj.n, cj.m
    neff = cj.neff
    Lh, Lv, Ch, Cv = cj.L_h, cj.L_v, cj.C_h, cj.C_v
    omega = nconn_curvature_jet(neff, n)  # [a, j, k]
    dN = cj.dN  # [k, a, c] = d_c N_k^a

    def anti(x):
        return x - x.swapaxes(2, 3)

    # R blocks: X[., ., j, k] then antisymmetrize in (j, k)
    x = delta_h(Lh, neff, n) + einsum("mhj,imk->ihjk", Lh, Lh) + einsum("iha,ajk->ihjk", Ch, omega) * 0.5
    R_h = anti(x)
    x = delta_h(Lv, neff, n) + einsum("cbj,ack->abjk", Lv, Lv) + einsum("abc,cjk->abjk", Cv, omega) * 0.5
    R_v = anti(x)

    P_h = (delta_v(Lh, n, m) - delta_h(Ch, neff, n).swapaxes(2, 3)
           + einsum("mjk,imc->ijkc", Lh, Ch) - einsum("mjc,imk->ijkc", Ch, Lh)
           + einsum("ija,kac->ijkc", Ch, dN))
    P_v = (delta_v(Lv, n, m) - delta_h(Cv, neff, n).swapaxes(2, 3)
           + einsum("dbk,adc->abkc", Lv, Cv) - einsum("dbc,adk->abkc", Cv, Lv)
           + einsum("abd,kdc->abkc", Cv, dN))

    x = delta_v(Ch, n, m) + einsum("mjb,imc->ijbc", Ch, Ch)
    S_h = x - x.swapaxes(2, 3)
    x = delta_v(Cv, n, m) + einsum("ebc,aed->abcd", Cv, Cv)
    S_v = x - x.swapaxes(2, 3)
    return {"R_h": R_h, "R_v": R_v, "P_h": P_h, "P_v": P_v, "S_h": S_h, "S_v": S_v}


def dcurvature(cj: ConnectionJets) -> CurvatureBlocks:
    return CurvatureBlocks(**{k: v.value for k, v in curvature_jets(cj).items()})


def _assemble_full(blocks: dict, n: int, m: int, zeros):
    """Scatter the six blocks into the flattened frame array."""
    h, v = slice(0, n), slice(n, n + m)
    R = zeros((n + m,) * 4)
    R[h, h, h, h] = blocks["R_h"]
    R[v, v, h, h] = blocks["R_v"]
    R[h, h, h, v] = blocks["P_h"]
    R[h, h, v, h] = -np.swapaxes(blocks["P_h"], 2, 3)
    R[v, v, h, v] = blocks["P_v"]
    R[v, v, v, h] = -np.swapaxes(blocks["P_v"], 2, 3)
    R[h, h, v, v] = blocks["S_h"]
    R[v, v, v, v] = blocks["S_v"]
    return R


def full_curvature(blocks: CurvatureBlocks, n: int, m: int) -> np.ndarray:
    return _assemble_full({k: getattr(blocks, k) for k in CurvatureBlocks.NAMES}, n, m, np.zeros)


def full_curvature_jet(cjets: dict, n: int, m: int) -> Jet:
    any_jet = cjets["R_h"]
    order = min(j.order for j in cjets.values())
    size = any_jet.truncate(order).c.shape[-1]
    c = np.zeros(((n + m),) * 4 + (size,))
    raw = {k: v.truncate(order).c for k, v in cjets.items()}
    _assemble_full(raw, n, m, lambda shape: c)
    return Jet(c, any_jet.nvars, order)


def full_connection_jet(cj: ConnectionJets) -> Jet:
    """Gamma[alpha, beta, gamma] jet on the flattened adapted frame."""
    n, m = cj.n, cj.m
    order = cj.order
    blocks = [b.truncate(order) for b in (cj.L_h, cj.L_v, cj.C_h, cj.C_v)]
    c = np.zeros(((n + m),) * 3 + (blocks[0].c.shape[-1],))
    h, v = slice(0, n), slice(n, n + m)
    c[h, h, h] = blocks[0].c
    c[v, v, h] = blocks[1].c
    c[h, h, v] = blocks[2].c
    c[v, v, v] = blocks[3].c
    return Jet(c, cj.L_h.nvars, order)


def frame_derivative(f: Jet, neff: Jet, n: int, m: int) -> Jet:
    """``result[..., delta] = e_delta f`` for the adapted basis."""
    D, _ = frame_matrices(neff, n, m)
    lead = "abcdefgh"[: f.ndim]
    return einsum(f"{lead}m,mq->{lead}q", f.grad(range(n + m)), D)


def generic_curvature_jet(cj: ConnectionJets) -> Jet:
    """Frame-formula curvature on the flattened index; independent of the block formulas."""
    n, m = cj.n, cj.m
    G = full_connection_jet(cj)
    w = anholonomy_jet(cj.neff, n, m)
    dG = frame_derivative(G, cj.neff, n, m)  # [a, b, c, d] = e_d Gamma^a_bc
    # B[a, b, c, d] = e_d G[a,b,c] + G[u,b,c] G[a,u,d] - 1/2 w[u,d,c] G[a,b,u]; R = B - B^T(c,d)
    B = dG + einsum("ubc,aud->abcd", G, G) - einsum("udc,abu->abcd", w, G) * 0.5
    return B - B.swapaxes(2, 3)


# ---------------------------------------------------------------------------
# Ricci and friends


@dataclass(frozen=True)
class RicciBlocks:
    R_hh: np.ndarray  # R_ij
    R_hv: np.ndarray  # R_ia
    R_vh: np.ndarray  # R_ai
    R_vv: np.ndarray  # R_ab

    def full(self) -> np.ndarray:
        return np.block([[self.R_hh, self.R_hv], [self.R_vh, self.R_vv]])


def ricci(C: CurvatureBlocks) -> RicciBlocks:
    return RicciBlocks(
        R_hh=np.einsum("kijk->ij", C.R_h),
        R_hv=-np.einsum("kika->ia", C.P_h),
        R_vh=np.einsum("baib->ai", C.P_v),
        R_vv=np.einsum("cabc->ab", C.S_v),
    )


def scalar_curvature(ric: RicciBlocks, g, h):
    """``(R, S, R + S)`` with ``R = g^{ij} R_ij`` and ``S = h^{ab} S_ab``."""
    R = float(np.einsum("ij,ij->", np.linalg.inv(g), ric.R_hh))
    S = float(np.einsum("ab,ab->", np.linalg.inv(h), ric.R_vv))
    return R, S, R + S


def block_metric(g, h) -> np.ndarray:
    g, h = np.asarray(g, float), np.asarray(h, float)
    n, m = g.shape[0], h.shape[0]
    G = np.zeros((n + m, n + m))
    G[:n, :n] = g
    G[n:, n:] = h
    return G


def einstein_dtensor(ric: RicciBlocks, G_block, total_scalar: float) -> np.ndarray:
    return ric.full() - 0.5 * total_scalar * np.asarray(G_block)


def phi_tensor(ric: RicciBlocks, G_block, total_scalar: float, n: int, m: int) -> np.ndarray:
    return -0.5 * (ric.full() - total_scalar * np.asarray(G_block) / (n + m))


def mixed_trace(T, G_block) -> float:
    return float(np.einsum("ab,ab->", np.linalg.inv(G_block), T))


def weyl_dtensor(R_full, G_block, n: int, m: int) -> np.ndarray:
    """Mixed-position ``C^{gamma delta}_{alpha beta}`` from a flattened curvature.

    ``R_full[d, e, a, b] = R^d_{e.ab}``; Ricci is ``R_full[d, e, a, d]``.
    """
    N = n + m
    if N < 3:
        raise ValueError("the Weyl d-tensor needs n + m >= 3")
    R_full = np.asarray(R_full, float)
    Ginv = np.linalg.inv(G_block)
    W = np.einsum("ge,deab->gdab", Ginv, R_full)
    ric = np.einsum("dead->ea", R_full)
    Rm = Ginv @ ric  # Rm[g, a] = G^{ge} R_ea
    scal = float(np.trace(Rm))
    I = np.eye(N)

    def anti2(X):  # antisymmetrize X[g, d, a, b] in (g, d) and (a, b)
        X = 0.5 * (X - X.transpose(1, 0, 2, 3))
        return 0.5 * (X - X.transpose(0, 1, 3, 2))

    Q = anti2(np.einsum("ga,db->gdab", Rm, I))
    E = anti2(np.einsum("ga,db->gdab", I, I))
    return W - 4.0 / (N - 2) * Q + 2.0 * scal / ((N - 1) * (N - 2)) * E


def weyl_traces(C) -> dict:
    """Max-norm of the four single traces (upper index against lower index)."""
    return {
        "gamma,alpha": float(np.abs(np.einsum("gdgb->db", C)).max()),
        "gamma,beta": float(np.abs(np.einsum("gdag->da", C)).max()),
        "delta,alpha": float(np.abs(np.einsum("gdda->ga", C)).max()),
        "delta,beta": float(np.abs(np.einsum("gdad->ga", C)).max()),
    }


# ---------------------------------------------------------------------------
# Bianchi identities


def _frame_cov(T: Jet, slots: str, G: Jet, dT: Jet) -> np.ndarray:
    """Values of ``(D_x T)`` with the direction appended; slots is a string of 'u'/'l'."""
    letters = "abcdefgh"[: len(slots)]
    out = dT.value
    Tv, Gv = T.value, G.value
    for p, s in enumerate(slots):
        src = letters[:p] + "r" + letters[p + 1:]
        if s == "u":
            out = out + np.einsum(f"{src},{letters[p]}rx->{letters}x", Tv, Gv)
        else:
            out = out - np.einsum(f"{src},r{letters[p]}x->{letters}x", Tv, Gv)
    return out


def _cyclic(X: np.ndarray, axes=(0, 1, 2)) -> np.ndarray:
    """Sum of X over cyclic permutations of three of its axes."""
    i, j, k = axes
    perm1 = list(range(X.ndim))
    perm1[i], perm1[j], perm1[k] = j, k, i
    perm2 = list(range(X.ndim))
    perm2[i], perm2[j], perm2[k] = k, i, j
    return X + X.transpose(perm1) + X.transpose(perm2)


def bianchi_from_jets(cj: ConnectionJets) -> tuple:
    """(first, second) identity residuals; ``cj`` must be of order >= 2."""
    if cj.order < 2:
        raise ValueError("Bianchi residuals need connection jets of order >= 2")
    n, m = cj.n, cj.m
    G = full_connection_jet(cj)
    w = anholonomy_jet(cj.neff, n, m).truncate(G.order)
    Rb = full_curvature_jet(curvature_jets(cj), n, m)  # order - 1
    Rt = Rb.swapaxes(2, 3)  # Rt[a, z, x, y] = R(e_x, e_y) e_z
    Tt = G.swapaxes(1, 2) - G - w  # Tt[a, x, y] = T(e_x, e_y)
    Tt1 = Tt.truncate(1)
    Rt1 = Rt.truncate(1)
    G1 = G.truncate(1)

    dTt = frame_derivative(Tt1, cj.neff.truncate(1), n, m)
    DT = _frame_cov(Tt1, "ull", G1, dTt)  # DT[a, y, z, x] = (D_x T)^a_{yz}
    Rv, Tv = Rt1.value, Tt1.value
    # first identity, free index a, cyclic over (x, y, z)
    X = (np.einsum("azxy->axyz", Rv) - np.einsum("amz,mxy->axyz", Tv, Tv) - np.einsum("ayzx->axyz", DT))
    first = _cyclic(X, (1, 2, 3))

    dRt = frame_derivative(Rt1, cj.neff.truncate(1), n, m)
    DR = _frame_cov(Rt1, "ulll", G1, dRt)  # DR[a, b, y, z, x] = (D_x R)^a_{b}(e_y, e_z)
    Y = np.einsum("abyzx->abxyz", DR) + np.einsum("mxy,abmz->abxyz", Tv, Rv)
    second = _cyclic(Y, (2, 3, 4))
    return float(np.abs(first).max()), float(np.abs(second).max())


def bianchi_residuals(conn: DConnection, u) -> tuple:
    return bianchi_from_jets(conn.jets(u, 2))


# ---------------------------------------------------------------------------
# point aggregator


@dataclass
class PointResult:
    u: np.ndarray
    g: np.ndarray
    h: np.ndarray
    N: np.ndarray
    connection: object
    torsion: TorsionBlocks
    curvature: CurvatureBlocks
    ricci: RicciBlocks
    scalars: tuple
    einstein: np.ndarray
    phi: np.ndarray
    weyl: np.ndarray | None
    cj: ConnectionJets


def evaluate_point(conn: DConnection, u, order: int = 1) -> PointResult:
    """Full d-geometry at one chart point from connection jets of ``order`` (>= 1)."""
    cj = conn.jets(u, max(order, 1))
    tors = dtorsion(cj)
    curv = dcurvature(cj)
    ric = ricci(curv)
    g, h = cj.g.value, cj.h.value
    sc = scalar_curvature(ric, g, h)
    Gb = block_metric(g, h)
    weyl = weyl_dtensor(curv.full(), Gb, cj.n, cj.m) if cj.n + cj.m >= 3 else None
    return PointResult(
        u=np.asarray(u, float), g=g, h=h, N=conn.nconn.jet(u, 0).value, connection=cj.blocks(),
        torsion=tors, curvature=curv, ricci=ric, scalars=sc,
        einstein=einstein_dtensor(ric, Gb, sc[2]), phi=phi_tensor(ric, Gb, sc[2], cj.n, cj.m),
        weyl=weyl, cj=cj,
    )
