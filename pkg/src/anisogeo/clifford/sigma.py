"""Sigma-matrix systems, epsilon objects and the mod-8 symmetry table.

Convention: ``sigma_a sigma_b + sigma_b sigma_a = -G_ab I``. A metric entry
``G = -1`` therefore needs ``sigma^2 = +I`` and ``G = +1`` needs ``sigma^2 = -I``.
All matrices are real and integer-valued.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np

MAX_SIGMA_N = 8

_X = np.array([[0, 1], [1, 0]], dtype=np.int64)
_Z = np.array([[1, 0], [0, -1]], dtype=np.int64)
_E = _X @ _Z  # squares to -I


def sigma_dimension(n: int) -> int:
    """Printed minimal dimension: ``2^((n-1)/2)`` for odd ``n``, ``2^(n/2)`` for even ``n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 2 ** ((n - 1) // 2) if n % 2 else 2 ** (n // 2)


def real_module_dimension(s: int, t: int) -> int:
    """Dimension of an irreducible real module: ``s`` generators squaring to +1, ``t`` to -1."""
    d = s + t
    r = (s - t) % 8
    if r in (0, 2):
        return 2 ** (d // 2)
    if r == 1:
        return 2 ** ((d - 1) // 2)
    if r in (3, 7, 5):
        return 2 ** ((d + 1) // 2)
    return 2 ** ((d + 2) // 2)  # r in (4, 6)


_FACTORS = {"I": np.eye(2, dtype=np.int64), "X": _X, "Z": _Z, "E": _E}
_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "E": (1, 1)}


def _anticommute(u: str, v: str) -> bool:
    flips = 0
    for a, b in zip(u, v):
        (x1, z1), (x2, z2) = _BITS[a], _BITS[b]
        flips += x1 * z2 + z1 * x2
    return flips % 2 == 1


def _string_matrix(word: str) -> np.ndarray:
    m = np.eye(1, dtype=np.int64)
    for ch in word:
        m = np.kron(m, _FACTORS[ch])
    return m


def _search(s: int, t: int, k: int):
    """Mutually anticommuting strings of length k: s squaring to +I, t to -I."""
    words = ["".join(w) for w in itertools.product("IXZE", repeat=k)][1:]
    plus = [w for w in words if w.count("E") % 2 == 0]
    minus = [w for w in words if w.count("E") % 2 == 1]
    need = [plus] * s + [minus] * t
    chosen: List[str] = []

    def extend(pos: int) -> bool:
        if pos == len(need):
            return True
        start = 0
        if pos > 0 and need[pos] is need[pos - 1]:
            start = need[pos].index(chosen[-1]) + 1  # canonical order within a square class
        for w in need[pos][start:]:
            if all(_anticommute(w, c) for c in chosen):
                chosen.append(w)
                if extend(pos + 1):
                    return True
                chosen.pop()
        return False

    return list(chosen) if extend(0) else None


@lru_cache(maxsize=None)
def _rep(s: int, t: int):
    """(N, matrices): the first s square to +I, the remaining t to -I."""
    if s == 0 and t == 0:
        return (1, ())
    k = max(real_module_dimension(s, t).bit_length() - 1, 0)
    while True:
        words = _search(s, t, k) if k > 0 else None
        if words is not None:
            return (2 ** k, tuple(_freeze(_string_matrix(w)) for w in words))
        if k == 0 and t == 0 and s == 1:
            return (1, (((1,),),))
        k += 1


def _freeze(m) -> tuple:
    return tuple(tuple(int(x) for x in row) for row in np.asarray(m))


@dataclass
class SigmaSystem:
    """Real sigma matrices for one or more metric blocks.

    ``blocks`` lists the metric diagonals; ``matrices[k]`` acts on the full
    block-diagonal spinor space (size ``sum(block_sizes)``).
    """

    blocks: List[Tuple[int, ...]]
    block_sizes: List[int]
    matrices: List[np.ndarray]
    printed_sizes: List[int]
    escalations: List[str] = field(default_factory=list)

    @property
    def metric(self) -> Tuple[int, ...]:
        return tuple(g for b in self.blocks for g in b)

    @property
    def N(self) -> int:
        return sum(self.block_sizes)

    @property
    def n(self) -> int:
        return len(self.metric)

    def block_of(self, k: int) -> int:
        acc = 0
        for i, b in enumerate(self.blocks):
            acc += len(b)
            if k < acc:
                return i
        raise IndexError(k)

    def block_matrices(self, i: int) -> List[np.ndarray]:
        lo = sum(self.block_sizes[:i])
        hi = lo + self.block_sizes[i]
        start = sum(len(b) for b in self.blocks[:i])
        return [self.matrices[k][lo:hi, lo:hi] for k in range(start, start + len(self.blocks[i]))]

    def anticommutation_residual(self) -> int:
        """Max integer deviation from the defining relation (0 means exact).

        Within a block: ``s_a s_b + s_b s_a = -G_ab I_block``; across blocks the
        products vanish identically.
        """
        worst = 0
        G = self.metric
        for a in range(self.n):
            for b in range(a, self.n):
                A, B = self.matrices[a], self.matrices[b]
                ac = A @ B + B @ A
                ba = self.block_of(a)
                if ba == self.block_of(b):
                    lo = sum(self.block_sizes[:ba])
                    target = np.zeros_like(ac)
                    if a == b:
                        idx = np.arange(lo, lo + self.block_sizes[ba])
                        target[idx, idx] = -2 * G[a]
                    worst = max(worst, int(np.abs(ac - target).max()))
                else:
                    worst = max(worst, int(np.abs(A @ B).max()), int(np.abs(B @ A).max()))
        return worst


def _single_block(metric: Tuple[int, ...]):
    s = sum(1 for g in metric if g == -1)
    t = len(metric) - s
    N, ms = _rep(s, t)
    ms = [np.array(m, dtype=np.int64) for m in ms]
    pos = [m for m in ms if (m @ m)[0, 0] == 1]
    neg = [m for m in ms if (m @ m)[0, 0] == -1]
    return N, [pos.pop(0) if g == -1 else neg.pop(0) for g in metric]


def sigma_system(metric_diag: Sequence[int] | Sequence[Sequence[int]]) -> SigmaSystem:
    """Build a system for a metric diagonal, or for a list of diagonals (distinguished blocks)."""
    if len(metric_diag) and not isinstance(metric_diag[0], (int, np.integer)):
        blocks = [tuple(int(g) for g in b) for b in metric_diag]
    else:
        blocks = [tuple(int(g) for g in metric_diag)]
    for b in blocks:
        if not b:
            raise ValueError("empty metric block")
        if any(g not in (-1, 1) for g in b):
            raise ValueError("metric diagonal entries must be +1 or -1")
        if len(b) > MAX_SIGMA_N:
            raise ValueError(f"block dimension {len(b)} exceeds the engine bound {MAX_SIGMA_N}")
    sizes, mats_per_block, printed, notes = [], [], [], []
    for b in blocks:
        N, ms = _single_block(b)
        sizes.append(N)
        mats_per_block.append(ms)
        pN = sigma_dimension(len(b))
        printed.append(pN)
        if N > pN:
            notes.append(f"metric {b}: no real system at N={pN}; escalated to N={N}")
    total = sum(sizes)
    mats = []
    lo = 0
    for N, ms in zip(sizes, mats_per_block):
        for m in ms:
            big = np.zeros((total, total), dtype=np.int64)
            big[lo:lo + N, lo:lo + N] = m
            mats.append(big)
        lo += N
    return SigmaSystem(blocks, sizes, mats, printed, notes)


def standard_metric(n: int) -> Tuple[int, ...]:
    """A metric diagonal whose real system has the printed minimal size."""
    table = {1: (-1,), 2: (-1, -1), 3: (-1, -1, 1), 4: (-1, -1, -1, 1), 5: (-1, -1, -1, 1, 1),
             6: (-1, -1, -1, -1, 1, 1), 7: (-1, -1, -1, -1, 1, 1, 1), 8: (-1, -1, -1, -1, -1, 1, 1, 1)}
    if n not in table:
        raise ValueError("standard metrics are tabulated for 1 <= n <= 8")
    return table[n]


# ---------------------------------------------------------------------------
# antisymmetrized products and epsilon objects


def sigma_products(S: SigmaSystem) -> dict:
    """``{I: sigma_{i1} ... sigma_{iq}}`` for increasing index tuples (includes the identity)."""
    if len(S.blocks) != 1:
        raise ValueError("expected a single-block system")
    n, N = S.n, S.N
    out = {}
    for q in range(n + 1):
        for I in itertools.combinations(range(n), q):
            A = np.eye(N, dtype=np.int64)
            for i in I:
                A = A @ S.matrices[i]
            out[I] = A
    return out


def epsilon_sum(S: SigmaSystem, sign: int) -> np.ndarray:
    """``E[k, i, m, j] = sum_q sign^q sum_I (sigma_I)^k_i (sigma^I)^m_j`` (indices raised with G)."""
    G = S.metric
    N = S.N
    E = np.zeros((N, N, N, N), dtype=np.int64)
    for I, A in sigma_products(S).items():
        B = A * int(np.prod([G[i] for i in I])) if I else A
        E += (sign ** len(I)) * np.einsum("ki,mj->kimj", A, B)
    return E


@dataclass
class EpsilonReport:
    n: int
    N: int
    vanishing: dict  # sign -> bool
    sign: Optional[int] = None
    eps_lower: Optional[np.ndarray] = None  # eps_{km}
    eps_upper: Optional[np.ndarray] = None  # eps^{ij}
    rank_residual: Optional[float] = None
    factor_residual: Optional[float] = None
    notes: List[str] = field(default_factory=list)


def _factor(E: np.ndarray, N: int):
    M = E.transpose(0, 2, 1, 3).reshape(N * N, N * N).astype(float)  # rows (k, m), cols (i, j)
    U, s, Vt = np.linalg.svd(M)
    if s[0] == 0:
        return None
    scale = np.sqrt(s[0] / N)
    lo = U[:, 0].reshape(N, N) * scale
    up = Vt[0].reshape(N, N) * scale
    # fix the overall sign so the largest entry of eps_lower is positive
    k = np.unravel_index(np.argmax(np.abs(lo)), lo.shape)
    if lo[k] < 0:
        lo, up = -lo, -up
    rank_res = float(s[1] / s[0]) if len(s) > 1 else 0.0
    recon = N * np.einsum("km,ij->kimj", lo, up)
    fac_res = float(np.abs(recon - E).max() / max(1.0, np.abs(E).max()))
    return lo, up, rank_res, fac_res


def epsilon_objects(S: SigmaSystem) -> EpsilonReport:
    """Evaluate both sign choices of the epsilon sum and factor the nonvanishing one.

    Even ``n`` uses the (+) sum. Odd ``n`` reports which of (+)/(-) vanish; the
    printed rule is (+)E = 0 for n = 1 (mod 4) and (-)E = 0 for n = 3 (mod 4).
    """
    if len(S.blocks) != 1:
        raise ValueError("epsilon objects are defined per single block")
    n, N = S.n, S.N
    sums = {1: epsilon_sum(S, 1), -1: epsilon_sum(S, -1)}
    vanishing = {sg: bool(not E.any()) for sg, E in sums.items()}
    rep = EpsilonReport(n, N, vanishing)
    if S.escalations:
        rep.notes.extend(S.escalations)
    if n % 2 == 0:
        sg = 1
    else:
        live = [sg for sg in (1, -1) if not vanishing[sg]]
        if len(live) != 1:
            rep.notes.append(f"expected exactly one nonvanishing sum for odd n, found {len(live)}")
            return rep
        sg = live[0]
    f = _factor(sums[sg], N)
    if f is None:
        rep.notes.append("epsilon sum vanishes identically")
        return rep
    rep.sign = sg
    rep.eps_lower, rep.eps_upper, rep.rank_residual, rep.factor_residual = f
    if rep.rank_residual > 1e-10:
        rep.notes.append(f"factorization rank > 1 (relative second singular value {rep.rank_residual:.3g})")
    return rep


def printed_vanishing(n: int) -> Optional[int]:
    """Which sign sum the printed odd-n rule says vanishes (None for even n)."""
    if n % 2 == 0:
        return None
    return 1 if n % 4 == 1 else -1


# ---------------------------------------------------------------------------
# mod-8 symmetry classification


def symmetry_class(n: int, q: int) -> str:
    """Printed symmetry of ``(sigma_{i...j})^{kl}`` with ``q`` lower indices.

    Odd ``n``: symmetric for n-2q = 1, 7 (mod 8), antisymmetric for 3, 5.
    Even ``n``: symmetric on same-chirality pairs for 0, antisymmetric for 4,
    otherwise a pairing between opposite chiralities (``mixed-pairing``).
    """
    if not 0 <= q <= n:
        raise ValueError("need 0 <= q <= n")
    r = (n - 2 * q) % 8
    if n % 2:
        return "symmetric" if r in (1, 7) else "antisymmetric"
    if r == 0:
        return "symmetric"
    if r == 4:
        return "antisymmetric"
    return "mixed-pairing"


def mixed_pairing_sign(n: int, q: int) -> int:
    """``+1`` when ``n + 2q = 6 (mod 8)``, ``-1`` when ``n + 2q = 2 (mod 8)``."""
    r = (n + 2 * q) % 8
    if r == 6:
        return 1
    if r == 2:
        return -1
    raise ValueError("not a mixed-pairing case")


def _chiral_bases(S: SigmaSystem):
    """Complex eigenbases (V_plus, V_minus) of the chirality operator."""
    N = S.N
    w = np.eye(N, dtype=np.int64)
    for m in S.matrices:
        w = w @ m
    wc = w.astype(complex)
    if (w @ w)[0, 0] < 0:
        wc = 1j * wc
    ev, V = np.linalg.eig(wc)
    return V[:, ev.real > 0], V[:, ev.real < 0]


def _sym_label(B: np.ndarray, tol: float = 1e-9) -> str:
    if np.abs(B).max(initial=0.0) < tol:
        return "zero"
    if np.abs(B - B.T).max() < tol:
        return "symmetric"
    if np.abs(B + B.T).max() < tol:
        return "antisymmetric"
    return "none"


def observed_symmetry(S: SigmaSystem, q: int, eps: Optional[np.ndarray] = None) -> Tuple[str, Optional[int]]:
    """Symmetry of ``eps @ sigma_I`` over all ``|I| = q`` from explicit arrays.

    Returns (label, pairing sign); label ``inconsistent`` if the index sets
    disagree or the pattern is not one of the printed ones.
    """
    n = S.n
    if eps is None:
        rep = epsilon_objects(S)
        if rep.eps_upper is None:
            raise ValueError("no nonvanishing epsilon object for this system")
        eps = rep.eps_upper
    prods = sigma_products(S)
    labels, signs = set(), set()
    if n % 2 == 0:
        Vp, Vm = _chiral_bases(S)
    for I, A in prods.items():
        if len(I) != q:
            continue
        B = eps @ A
        if n % 2:
            labels.add(_sym_label(B))
            continue
        Bpp, Bmm = Vp.T @ B @ Vp, Vm.T @ B @ Vm
        Bpm, Bmp = Vp.T @ B @ Vm, Vm.T @ B @ Vp
        off = max(np.abs(Bpm).max(), np.abs(Bmp).max())
        diag = max(np.abs(Bpp).max(), np.abs(Bmm).max())
        if off < 1e-9:
            lp, lm = _sym_label(Bpp), _sym_label(Bmm)
            labels.add(lp if lp == lm else "inconsistent")
        elif diag < 1e-9:
            labels.add("mixed-pairing")
            if np.abs(Bpm - Bmp.T).max() < 1e-9:
                signs.add(1)
            elif np.abs(Bpm + Bmp.T).max() < 1e-9:
                signs.add(-1)
            else:
                signs.add(0)
        else:
            labels.add("inconsistent")
    if len(labels) != 1:
        return "inconsistent", None
    label = labels.pop()
    sign = signs.pop() if len(signs) == 1 else None
    return label, sign


def symmetry_cross_check(n: int, metric: Optional[Sequence[int]] = None) -> List[dict]:
    """Compare the printed table with explicit symmetrization for every ``q <= n``."""
    S = sigma_system(tuple(metric) if metric is not None else standard_metric(n))
    rep = epsilon_objects(S)
    rows = []
    for q in range(n + 1):
        printed = symmetry_class(n, q)
        label, sign = observed_symmetry(S, q, rep.eps_upper)
        ok = label == printed
        expected_sign = mixed_pairing_sign(n, q) if printed == "mixed-pairing" else None
        if ok and expected_sign is not None:
            ok = sign == expected_sign
        rows.append({"n": n, "q": q, "printed": printed, "observed": label, "pairing_sign": sign,
                     "expected_sign": expected_sign, "match": ok})
    return rows


# ---------------------------------------------------------------------------
# fundamental spinors


def _special_q(n: int) -> set:
    return {(n - 1) // 2, (n + 1) // 2} if n % 2 else {n // 2}


@dataclass
class FundamentalReport:
    n: int
    bilinears: dict  # q -> max |xi xi sigma_I|
    allowed_q: List[int]
    nonvanishing_q: List[int]
    fundamental: bool
    degenerate: bool


def fundamental_spinor_check(n: int, candidate, chirality: int = 1, metric: Optional[Sequence[int]] = None,
                             tol: float = 1e-10) -> FundamentalReport:
    """Evaluate the bilinears ``xi xi (sigma^{i...j})`` for every ``q``.

    Odd ``n``: ``candidate`` has ``N`` components. Even ``n``: it is a chiral
    spinor with ``N/2`` components in the ``chirality`` eigenspace.
    A spinor is fundamental when every bilinear vanishes except at the allowed
    ``q`` (``n - 2q = 0, 1, 7 mod 8`` intersected with ``q = (n +- 1)/2`` or
    ``n/2``) and at least one allowed bilinear is nonzero.
    """
    if not 1 <= n <= 6:
        raise ValueError("fundamental_spinor_check supports 1 <= n <= 6")
    S = sigma_system(tuple(metric) if metric is not None else standard_metric(n))
    rep = epsilon_objects(S)
    if rep.eps_lower is None:
        raise ValueError("no epsilon object for this system")
    xi = np.asarray(candidate, dtype=complex).ravel()
    if n % 2 == 0:
        Vp, Vm = _chiral_bases(S)
        V = Vp if chirality > 0 else Vm
        if xi.size != V.shape[1]:
            raise ValueError(f"chiral spinor needs {V.shape[1]} components")
        full = V @ xi
    else:
        if xi.size != S.N:
            raise ValueError(f"spinor needs {S.N} components")
        full = xi
    scale = max(1.0, float(np.abs(full).max()) ** 2)
    bil = {}
    for I, A in sigma_products(S).items():
        val = abs(full @ (rep.eps_lower @ A) @ full)
        bil[len(I)] = max(bil.get(len(I), 0.0), float(val))
    allowed = sorted(q for q in _special_q(n) if (n - 2 * q) % 8 in (0, 1, 7) and 0 <= q <= n)
    nonzero = sorted(q for q, v in bil.items() if v > tol * scale)
    degenerate = not nonzero
    fundamental = (not degenerate) and set(nonzero) <= set(allowed)
    return FundamentalReport(n, bil, allowed, nonzero, fundamental, degenerate)
