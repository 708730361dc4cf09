"""Distinguished connections: Christoffel d-symbols, Berwald, canonical.

Block conventions (last index is always the differentiation direction)::

    L_h[i, j, k] = L^i_{jk}    L_v[a, b, k] = L^a_{bk}
    C_h[i, j, c] = C^i_{jc}    C_v[a, b, c] = C^a_{bc}

so that ``D_{delta_k} delta_j = L^i_{jk} delta_i`` and so on. Covector bundles
use the same arrays in the effective layout described in :mod:`geometry`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import NConnection, as_point, delta_h, delta_v
from .jet import Jet, einsum, inv
from .spaces import DegenerateMetricError, DSpace, MetricField

FAMILIES = ("canonical", "berwald", "christoffel", "kahler")


@dataclass(frozen=True)
class DConnectionBlocks:
    L_h: np.ndarray
    L_v: np.ndarray
    C_h: np.ndarray
    C_v: np.ndarray
    kind: str = "vector"

    def __post_init__(self):
        for name in ("L_h", "L_v", "C_h", "C_v"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite entries in {name}")

    @property
    def n(self) -> int:
        return self.L_h.shape[0]

    @property
    def m(self) -> int:
        return self.C_v.shape[0]

    def __sub__(self, other: "DConnectionBlocks") -> "DConnectionBlocks":
        return deformation_tensor(self, other)

    def __add__(self, other: "DConnectionBlocks") -> "DConnectionBlocks":
        _check_same(self, other)
        return DConnectionBlocks(self.L_h + other.L_h, self.L_v + other.L_v, self.C_h + other.C_h,
                                 self.C_v + other.C_v, self.kind)

    def full(self) -> np.ndarray:
        """Gamma[alpha, beta, gamma] over the flattened n + m index."""
        n, m = self.n, self.m
        G = np.zeros((n + m,) * 3)
        G[:n, :n, :n] = self.L_h
        G[n:, n:, :n] = self.L_v
        G[:n, :n, n:] = self.C_h
        G[n:, n:, n:] = self.C_v
        return G


@dataclass
class ConnectionJets:
    """Everything a d-connection pipeline needs at one point, as jets."""

    n: int
    m: int
    kind: str
    g: Jet
    h: Jet
    ginv: Jet
    hinv: Jet
    neff: Jet
    dN: Jet  # dN[i, a, b] = d N_eff[i, a] / d fiber_b
    L_h: Jet
    L_v: Jet
    C_h: Jet
    C_v: Jet

    def blocks(self) -> DConnectionBlocks:
        return DConnectionBlocks(self.L_h.value, self.L_v.value, self.C_h.value, self.C_v.value, self.kind)

    @property
    def order(self) -> int:
        return min(j.order for j in (self.L_h, self.L_v, self.C_h, self.C_v))


def _safe_inv(a: Jet, what: str) -> Jet:
    try:
        return inv(a)
    except ValueError as exc:
        raise DegenerateMetricError(f"singular {what} block: {exc}") from None


def _christoffel_from_derivs(dg: Jet, ginv: Jet) -> Jet:
    """``0.5 g^{ir} (d_k g_jr + d_j g_kr - d_r g_jk)`` given ``dg[j, r, k] = d_k g_jr``."""
    t1 = dg.transpose(0, 2, 1)  # [j, k, r] -> d_k g_jr
    t2 = dg.transpose(2, 0, 1)  # [j, k, r] -> dg[k, r, j] = d_j g_kr
    t3 = dg.transpose(0, 1, 2)  # [j, k, r] -> dg[j, k, r] = d_r g_jk
    low = (t1 + t2 - t3) * 0.5
    return einsum("ir,jkr->ijk", ginv, low)


def connection_jets(family: str, metric: MetricField, nconn: NConnection, u, order: int = 0) -> ConnectionJets:
    """Coefficient jets of the chosen d-connection family, valid to ``order``."""
    if family not in FAMILIES:
        raise ValueError(f"unknown connection family {family!r}; expected one of {FAMILIES}")
    if metric.kind != nconn.kind:
        raise ValueError("metric and N-connection kinds differ")
    u = as_point(u)
    n, m = nconn.n, nconn.m
    g, h = metric.jets(u, order + 1)
    neff = nconn.effective_jet(u, order + 1)
    ginv = _safe_inv(g, "h-metric")
    hinv = _safe_inv(h, "v-metric")
    dN = delta_v(neff, n, m)

    dg_h = delta_h(g, neff, n)  # [j, r, k] = delta_k g_jr
    dh_v = delta_v(h, n, m)  # [b, d, c] = d_c h_bd
    L_h = _christoffel_from_derivs(dg_h, ginv)
    C_v = _christoffel_from_derivs(dh_v, hinv)
    zero_Lv = Jet.constant(np.zeros((m, m, n)), n + m, order)
    zero_Ch = Jet.constant(np.zeros((n, n, m)), n + m, order)

    if family == "christoffel":
        L_v, C_h = zero_Lv, zero_Ch
    elif family == "berwald":
        L_v = dN.transpose(1, 2, 0)  # [a, b, k] = d_b N_k^a
        C_h = zero_Ch
    elif family == "canonical":
        dh_h = delta_h(h, neff, n)  # [b, c, i] = delta_i h_bc
        t = einsum("idb,dc->bci", dN, h)  # t[b, c, i] = d_b N_i^d h_dc
        corr = (dh_h - t - t.transpose(1, 0, 2)) * 0.5
        L_v = dN.transpose(1, 2, 0) + einsum("ac,bci->abi", hinv, corr)
        dg_v = delta_v(g, n, m)  # [j, k, c] = d_c g_jk
        C_h = einsum("ik,jkc->ijc", ginv, dg_v) * 0.5
    else:  # kahler: (L, L, C, C) built from g on a tangent bundle
        if n != m:
            raise ValueError("the Kahler-type connection needs m = n")
        dg_v = delta_v(g, n, m)
        C_g = _christoffel_from_derivs(dg_v, ginv)
        L_v, C_h, C_v = L_h, C_g, C_g
    return ConnectionJets(n, m, nconn.kind, g, h, ginv, hinv, neff, dN, L_h, L_v, C_h, C_v)


class DConnection:
    """A d-connection field of a given family over a space."""

    def __init__(self, family: str, metric: MetricField, nconn: NConnection):
        if family not in FAMILIES:
            raise ValueError(f"unknown connection family {family!r}")
        self.family = family
        self.metric = metric
        self.nconn = nconn

    @classmethod
    def on(cls, space: DSpace, family: str = "canonical") -> "DConnection":
        return cls(family, space.metric, space.nconn)

    @property
    def n(self) -> int:
        return self.nconn.n

    @property
    def m(self) -> int:
        return self.nconn.m

    @property
    def kind(self) -> str:
        return self.nconn.kind

    def jets(self, u, order: int = 0) -> ConnectionJets:
        return connection_jets(self.family, self.metric, self.nconn, u, order)

    def at(self, u) -> DConnectionBlocks:
        return self.jets(u, 0).blocks()


def christoffel_dsymbols(metric: MetricField, nconn: NConnection, u) -> DConnectionBlocks:
    return DConnection("christoffel", metric, nconn).at(u)


def berwald_dconnection(metric: MetricField, nconn: NConnection, u) -> DConnectionBlocks:
    return DConnection("berwald", metric, nconn).at(u)


def canonical_dconnection(metric: MetricField, nconn: NConnection, u) -> DConnectionBlocks:
    return DConnection("canonical", metric, nconn).at(u)


def _check_same(a: DConnectionBlocks, b: DConnectionBlocks) -> None:
    if a.kind != b.kind:
        raise ValueError("connection kinds differ")
    for name in ("L_h", "L_v", "C_h", "C_v"):
        if getattr(a, name).shape != getattr(b, name).shape:
            raise ValueError(f"shape mismatch in block {name}")


def deformation_tensor(g1: DConnectionBlocks, g2: DConnectionBlocks) -> DConnectionBlocks:
    """Blockwise ``P = Gamma1 - Gamma2`` so that ``Gamma2 + P = Gamma1``."""
    _check_same(g1, g2)
    return DConnectionBlocks(g1.L_h - g2.L_h, g1.L_v - g2.L_v, g1.C_h - g2.C_h, g1.C_v - g2.C_v, g1.kind)


# ---------------------------------------------------------------------------
# covariant derivatives of d-tensors

_LETTERS = "abcdefghij"


@dataclass(frozen=True)
class Valence:
    """Counts of (upper h, upper v, lower h, lower v) indices, in axis order."""

    up_h: int = 0
    up_v: int = 0
    low_h: int = 0
    low_v: int = 0

    @property
    def rank(self) -> int:
        return self.up_h + self.up_v + self.low_h + self.low_v

    def slots(self):
        return (["uh"] * self.up_h + ["uv"] * self.up_v + ["lh"] * self.low_h + ["lv"] * self.low_v)

    def shape(self, n: int, m: int):
        return tuple(n if s.endswith("h") else m for s in self.slots())


class DTensorField:
    """Component field of a d-tensor; ``jet_fn(u, order)`` returns a Jet."""

    def __init__(self, valence: Valence, jet_fn: Callable, nconn: NConnection):
        self.valence = valence
        self._jet_fn = jet_fn
        self.nconn = nconn

    def jet(self, u, order: int) -> Jet:
        j = self._jet_fn(as_point(u), order).truncate(order)
        expected = self.valence.shape(self.nconn.n, self.nconn.m)
        if j.shape != expected:
            raise ValueError(f"tensor components have shape {j.shape}, valence requires {expected}")
        return j

    def adapted_derivatives(self, u):
        """(value, delta_k T, d_c T) with the direction as the last axis."""
        j = self.jet(u, 1)
        neff = self.nconn.effective_jet(u, 1)
        n, m = self.nconn.n, self.nconn.m
        return j.value, delta_h(j, neff, n).value, delta_v(j, n, m).value


def _connection_terms(T, slots, blocks_h, blocks_v, dirs: int, tensor_mod):
    """Sum of +Gamma T (upper) and -Gamma T (lower) terms, direction last."""
    rank = len(slots)
    sub = _LETTERS[:rank]
    out = None
    for p, s in enumerate(slots):
        blk = blocks_h if s.endswith("h") else blocks_v
        src = sub[:p] + "r" + sub[p + 1:]
        if s.startswith("u"):
            term = tensor_mod(f"{src},{sub[p]}rk->{sub}k", T, blk)
        else:
            term = -tensor_mod(f"{src},r{sub[p]}k->{sub}k", T, blk)
        out = term if out is None else out + term
    return out


def covariant_derivative_jet(valence: Valence, T: Jet, cj: ConnectionJets):
    """Jets of ``D_k T`` and ``D_c T`` (direction appended as last axis)."""
    slots = valence.slots()
    base_h = delta_h(T, cj.neff, cj.n)
    base_v = delta_v(T, cj.n, cj.m)
    if not slots:
        return base_h, base_v
    Dh = base_h + _connection_terms(T, slots, cj.L_h, cj.L_v, cj.n, einsum)
    Dv = base_v + _connection_terms(T, slots, cj.C_h, cj.C_v, cj.m, einsum)
    return Dh, Dv


def dcovariant_derivative(gamma: DConnectionBlocks, T: DTensorField, u):
    """``(D_k T, D_c T)`` from point blocks and the field's adapted derivatives."""
    value, dh, dv = T.adapted_derivatives(u)
    slots = T.valence.slots()
    if gamma.kind != T.nconn.kind:
        raise ValueError("connection and tensor kinds differ")
    if value.shape != T.valence.shape(gamma.n, gamma.m):
        raise ValueError("tensor shape does not match connection dimensions")
    if not slots:
        return dh, dv
    Dh = dh + _connection_terms(value, slots, gamma.L_h, gamma.L_v, gamma.n, np.einsum)
    Dv = dv + _connection_terms(value, slots, gamma.C_h, gamma.C_v, gamma.m, np.einsum)
    return Dh, Dv


def metricity_residuals(cj: ConnectionJets) -> dict:
    """Max-norm of D_k g, D_c g, D_k h, D_c h."""
    Dg_h, Dg_v = covariant_derivative_jet(Valence(low_h=2), cj.g, cj)
    Dh_h, Dh_v = covariant_derivative_jet(Valence(low_v=2), cj.h, cj)
    return {
        "D_h g": float(np.abs(Dg_h.value).max()),
        "D_v g": float(np.abs(Dg_v.value).max()),
        "D_h h": float(np.abs(Dh_h.value).max()),
        "D_v h": float(np.abs(Dh_v.value).max()),
    }


# Which metricity conditions each family satisfies by construction.
CLAIMED_METRICITY = {
    "canonical": ("D_h g", "D_v g", "D_h h", "D_v h"),
    "kahler": ("D_h g", "D_v g", "D_h h", "D_v h"),
    "berwald": ("D_h g", "D_v h"),
    "christoffel": ("D_h g", "D_v h"),
}
