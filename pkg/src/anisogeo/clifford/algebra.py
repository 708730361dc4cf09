"""Clifford algebras over diagonal quadratic forms, with exact coefficients.

Blades are bit masks over the generators (bit ``k`` is generator ``e_{k+1}``)
stored in ascending generator order. Coefficients may be ``int``,
``fractions.Fraction`` or ``float``; integer/rational inputs stay exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Number
from typing import Dict, Iterable, Sequence, Tuple

import numpy as np

MAX_GENERATORS = 12


class SignatureMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    """Squares of the generators, in generator order (each ``-1`` or ``+1``).

    ``Signature.pq(p, q)`` puts ``p`` generators squaring to ``-1`` first.
    """

    squares: Tuple[int, ...]

    def __post_init__(self):
        sq = tuple(int(s) for s in self.squares)
        if any(s not in (-1, 1) for s in sq):
            raise ValueError("generator squares must be +1 or -1")
        if len(sq) > MAX_GENERATORS:
            raise ValueError(f"at most {MAX_GENERATORS} generators are supported")
        object.__setattr__(self, "squares", sq)

    @classmethod
    def pq(cls, p: int, q: int) -> "Signature":
        if p < 0 or q < 0:
            raise ValueError("p and q must be non-negative")
        return cls((-1,) * p + (1,) * q)

    @property
    def d(self) -> int:
        return len(self.squares)

    @property
    def p(self) -> int:
        return self.squares.count(-1)

    @property
    def q(self) -> int:
        return self.squares.count(1)

    @property
    def dim(self) -> int:
        return 1 << self.d

    def __add__(self, other: "Signature") -> "Signature":
        """Orthogonal direct sum: generators of ``other`` follow ours."""
        return Signature(self.squares + other.squares)

    def blades(self) -> range:
        return range(self.dim)


def grade(mask: int) -> int:
    return bin(mask).count("1")


def reorder_sign(a: int, b: int) -> int:
    """Sign from moving the generators of blade ``b`` past those of ``a``."""
    a >>= 1
    swaps = 0
    while a:
        swaps += grade(a & b)
        a >>= 1
    return -1 if swaps & 1 else 1


@lru_cache(maxsize=None)
def _metric_sign_table(squares: Tuple[int, ...]) -> Tuple[int, ...]:
    out = []
    for mask in range(1 << len(squares)):
        s = 1
        for k, sq in enumerate(squares):
            if mask >> k & 1 and sq < 0:
                s = -s
        out.append(s)
    return tuple(out)


def blade_product(sig: Signature, a: int, b: int) -> Tuple[int, int]:
    """``e_a e_b = sign * e_{a xor b}``."""
    return reorder_sign(a, b) * _metric_sign_table(sig.squares)[a & b], a ^ b


@lru_cache(maxsize=None)
def sign_table(squares: Tuple[int, ...]) -> np.ndarray:
    """Dense ``sign[a, b]`` for all blade pairs (int8)."""
    sig = Signature(squares)
    n = sig.dim
    t = np.empty((n, n), dtype=np.int8)
    for a in range(n):
        for b in range(n):
            t[a, b] = blade_product(sig, a, b)[0]
    return t


def _clean(x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x.numerator)
    return x


class CliffordElement:
    """Multivector: sparse map blade mask -> coefficient."""

    __slots__ = ("sig", "terms")

    def __init__(self, sig: Signature, terms: Dict[int, Number] | None = None):
        self.sig = sig
        clean = {}
        for k, v in (terms or {}).items():
            if not 0 <= k < sig.dim:
                raise ValueError(f"blade {k:#b} outside the signature")
            if v != 0:
                clean[int(k)] = _clean(v)
        self.terms = clean

    # construction -------------------------------------------------------
    @classmethod
    def scalar(cls, sig: Signature, value=1) -> "CliffordElement":
        return cls(sig, {0: value})

    @classmethod
    def generator(cls, sig: Signature, k: int, coeff=1) -> "CliffordElement":
        """Generator ``e_k`` with 1-based ``k``."""
        if not 1 <= k <= sig.d:
            raise ValueError("generator index out of range")
        return cls(sig, {1 << (k - 1): coeff})

    @classmethod
    def blade(cls, sig: Signature, indices: Iterable[int], coeff=1) -> "CliffordElement":
        """Product ``e_{i1} e_{i2} ...`` of 1-based generators in the given order."""
        out = cls.scalar(sig, coeff)
        for k in indices:
            out = out * cls.generator(sig, k)
        return out

    @classmethod
    def vector(cls, sig: Signature, coeffs: Sequence) -> "CliffordElement":
        if len(coeffs) != sig.d:
            raise ValueError("vector needs one coefficient per generator")
        return cls(sig, {1 << k: c for k, c in enumerate(coeffs)})

    @classmethod
    def from_dense(cls, sig: Signature, arr) -> "CliffordElement":
        return cls(sig, {k: v for k, v in enumerate(arr) if v != 0})

    def dense(self, dtype=float) -> np.ndarray:
        out = np.zeros(self.sig.dim, dtype=dtype)
        for k, v in self.terms.items():
            out[k] = v
        return out

    # comparisons --------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, Number):
            other = CliffordElement.scalar(self.sig, other)
        if not isinstance(other, CliffordElement):
            return NotImplemented
        return self.sig == other.sig and self.terms == other.terms

    def __hash__(self):
        return hash((self.sig, tuple(sorted(self.terms.items()))))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms, key=lambda m: (grade(m), m)):
            name = "e" + "".join(str(i + 1) for i in range(self.sig.d) if k >> i & 1) if k else "1"
            parts.append(f"{self.terms[k]}*{name}")
        return " + ".join(parts)

    def coefficient(self, mask: int):
        return self.terms.get(mask, 0)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(v) <= tol for v in self.terms.values())

    def max_abs(self) -> float:
        return max((abs(float(v)) for v in self.terms.values()), default=0.0)

    # algebra ------------------------------------------------------------
    def _check(self, other: "CliffordElement"):
        if self.sig != other.sig:
            raise SignatureMismatchError("elements belong to different signatures")

    def __add__(self, other):
        if isinstance(other, Number):
            other = CliffordElement.scalar(self.sig, other)
        self._check(other)
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, 0) + v
        return CliffordElement(self.sig, t)

    __radd__ = __add__

    def __neg__(self):
        return CliffordElement(self.sig, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return CliffordElement(self.sig, {k: v * other for k, v in self.terms.items()})
        return geometric_product(self, other)

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def grade_part(self, k: int) -> "CliffordElement":
        return CliffordElement(self.sig, {m: v for m, v in self.terms.items() if grade(m) == k})

    def even_part(self):
        return CliffordElement(self.sig, {m: v for m, v in self.terms.items() if grade(m) % 2 == 0})

    def odd_part(self):
        return CliffordElement(self.sig, {m: v for m, v in self.terms.items() if grade(m) % 2 == 1})

    def scalar_part(self):
        return self.terms.get(0, 0)


def geometric_product(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    a._check(b)
    sig = a.sig
    metric = _metric_sign_table(sig.squares)
    out: Dict[int, Number] = {}
    for ka, va in a.terms.items():
        for kb, vb in b.terms.items():
            s = reorder_sign(ka, kb) * metric[ka & kb]
            k = ka ^ kb
            out[k] = out.get(k, 0) + (va * vb if s > 0 else -(va * vb))
    return CliffordElement(sig, out)


def dense_product(sig: Signature, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of dense coefficient vectors (exact for integer dtypes).

    Leading axes broadcast, so a stack of products runs in one call.
    """
    t = sign_table(sig.squares)
    idx = np.arange(sig.dim)
    x = idx[:, None] ^ idx[None, :]
    # c_k = sum_i a_i b_{i^k} t[i, i^k]
    return np.einsum("...i,...ik,ik->...k", a, np.asarray(b)[..., x], t[idx[:, None], x])


def left_matrix(a: CliffordElement) -> np.ndarray:
    """Float matrix of ``x -> a x`` on the blade basis."""
    sig = a.sig
    M = np.zeros((sig.dim, sig.dim))
    metric = _metric_sign_table(sig.squares)
    for ka, va in a.terms.items():
        fa = float(va)
        for kb in range(sig.dim):
            M[ka ^ kb, kb] += reorder_sign(ka, kb) * metric[ka & kb] * fa
    return M


# ---------------------------------------------------------------------------
# grading and involutions


def grading(a: CliffordElement) -> str:
    """``even``, ``odd`` or ``mixed`` (zero counts as even)."""
    parities = {grade(k) % 2 for k in a.terms}
    if parities <= {0}:
        return "even"
    if parities == {1}:
        return "odd"
    return "mixed"


def reversal(a: CliffordElement) -> CliffordElement:
    """Reverse generator order in each blade: sign ``(-1)^{k(k-1)/2}``."""
    return CliffordElement(a.sig, {m: (v if (grade(m) * (grade(m) - 1) // 2) % 2 == 0 else -v)
                                   for m, v in a.terms.items()})


def grade_involution(a: CliffordElement) -> CliffordElement:
    return CliffordElement(a.sig, {m: (-v if grade(m) % 2 else v) for m, v in a.terms.items()})


def spinor_norm(a: CliffordElement) -> CliffordElement:
    """``S(u) = reversal(grade_involution(u)) * u``."""
    return reversal(grade_involution(a)) * a


def quadratic_form(v: CliffordElement):
    """``v * v`` as a scalar for a grade-1 element."""
    if any(grade(k) != 1 for k in v.terms):
        raise ValueError("quadratic_form expects a vector (grade-1 element)")
    return sum(_metric_sign_table(v.sig.squares)[k] * c * c for k, c in v.terms.items())


# ---------------------------------------------------------------------------
# inverse and twisted group


def inverse(a: CliffordElement, cond_limit: float = 1e12) -> CliffordElement | None:
    """Float inverse by solving ``a x = 1``; ``None`` when singular."""
    M = left_matrix(a)
    if not np.all(np.isfinite(M)) or np.linalg.cond(M) > cond_limit:
        return None
    rhs = np.zeros(a.sig.dim)
    rhs[0] = 1.0
    x = np.linalg.solve(M, rhs)
    return CliffordElement.from_dense(a.sig, x)


def twisted_group_membership(u: CliffordElement, tol: float = 1e-10, reject: float = 1e-6) -> str:
    """``member`` / ``not_member`` / ``inconclusive`` for the twisted Clifford group.

    Membership means ``grade_involution(u) e_i u^{-1}`` is a vector for every
    generator. Residuals between ``tol`` and ``reject`` are inconclusive.
    """
    uinv = inverse(u)
    if uinv is None:
        return "not_member"
    ubar = grade_involution(u)
    worst = 0.0
    scale = 1.0
    for k in range(1, u.sig.d + 1):
        w = ubar * CliffordElement.generator(u.sig, k) * uinv
        off = [abs(float(v)) for m, v in w.terms.items() if grade(m) != 1]
        worst = max(worst, max(off, default=0.0))
        scale = max(scale, w.max_abs())
    worst /= scale
    if worst <= tol:
        return "member"
    if worst >= reject:
        return "not_member"
    return "inconclusive"


# ---------------------------------------------------------------------------
# graded tensor products and the Chevalley map


class GradedTensor:
    """Element of ``A (x)^ B``: map (mask_A, mask_B) -> coefficient.

    Product rule ``(a (x) b)(c (x) d) = (-1)^{|b||c|} ac (x) bd``.
    """

    __slots__ = ("sa", "sb", "terms")

    def __init__(self, sa: Signature, sb: Signature, terms=None):
        self.sa, self.sb = sa, sb
        self.terms = {k: _clean(v) for k, v in (terms or {}).items() if v != 0}

    @classmethod
    def pure(cls, a: CliffordElement, b: CliffordElement) -> "GradedTensor":
        return cls(a.sig, b.sig, {(ka, kb): va * vb for ka, va in a.terms.items() for kb, vb in b.terms.items()})

    def __add__(self, other):
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, 0) + v
        return GradedTensor(self.sa, self.sb, t)

    def __sub__(self, other):
        return self + GradedTensor(other.sa, other.sb, {k: -v for k, v in other.terms.items()})

    def __mul__(self, other: "GradedTensor") -> "GradedTensor":
        if (self.sa, self.sb) != (other.sa, other.sb):
            raise SignatureMismatchError("graded tensor factors differ")
        ma = _metric_sign_table(self.sa.squares)
        mb = _metric_sign_table(self.sb.squares)
        out = {}
        for (a, b), v1 in self.terms.items():
            for (c, d), v2 in other.terms.items():
                s = reorder_sign(a, c) * ma[a & c] * reorder_sign(b, d) * mb[b & d]
                if grade(b) % 2 and grade(c) % 2:
                    s = -s
                k = (a ^ c, b ^ d)
                out[k] = out.get(k, 0) + (v1 * v2 if s > 0 else -(v1 * v2))
        return GradedTensor(self.sa, self.sb, out)

    def __eq__(self, other):
        return isinstance(other, GradedTensor) and (self.sa, self.sb, self.terms) == (other.sa, other.sb, other.terms)

    def max_abs(self) -> float:
        return max((abs(float(v)) for v in self.terms.values()), default=0.0)


def graded_tensor_product(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    """Image of ``a (x) b`` in the Clifford algebra of the direct sum."""
    return upsilon(GradedTensor.pure(a, b))


def zeta(u: CliffordElement, sa: Signature, sb: Signature) -> GradedTensor:
    """Chevalley map ``C(A + B) -> C(A) (x)^ C(B)`` on blades."""
    if u.sig != sa + sb:
        raise SignatureMismatchError("element does not live on the direct sum signature")
    low = (1 << sa.d) - 1
    return GradedTensor(sa, sb, {(k & low, k >> sa.d): v for k, v in u.terms.items()})


def upsilon(t: GradedTensor) -> CliffordElement:
    """Inverse map ``a (x) b -> a b`` into ``C(A + B)``."""
    sig = t.sa + t.sb
    return CliffordElement(sig, {a | (b << t.sa.d): v for (a, b), v in t.terms.items()})


def random_element(sig: Signature, rng: np.random.Generator, terms: int | None = None,
                   lo: int = -5, hi: int = 5, rational: bool = False) -> CliffordElement:
    """Random element with small integer (or rational) coefficients."""
    k = sig.dim if terms is None else min(terms, sig.dim)
    blades = rng.choice(sig.dim, size=k, replace=False)
    coeffs = {}
    for b in blades:
        c = int(rng.integers(lo, hi + 1))
        coeffs[int(b)] = Fraction(c, int(rng.integers(1, 4))) if rational else c
    return CliffordElement(sig, coeffs)


@dataclass
class ChevalleyReport:
    signatures: Tuple[Signature, ...]
    dimension_lhs: int
    dimension_rhs: int
    multiplicativity_residual: float
    generator_roundtrip_exact: bool
    trials: int

    @property
    def ok(self) -> bool:
        return (self.dimension_lhs == self.dimension_rhs and self.multiplicativity_residual == 0
                and self.generator_roundtrip_exact)


def chevalley_isomorphism_check(sig_h: Signature, sig_v, trials: int = 50, seed: int = 0,
                                terms: int | None = 6, rational: bool = False) -> ChevalleyReport:
    """Check ``zeta(uv) = zeta(u) zeta(v)`` with exact coefficients.

    ``sig_v`` may be a single signature or a list (several fibre blocks); the
    blocks are folded left to right, ``C(g) (x)^ C(h1) (x)^ C(h2) ...``.
    """
    blocks = [sig_v] if isinstance(sig_v, Signature) else list(sig_v)
    sigs = (sig_h,) + tuple(blocks)
    total = sum(s.d for s in sigs)
    if total > MAX_GENERATORS:
        raise ValueError("combined dimension exceeds the engine bound")
    rng = np.random.default_rng(seed)
    worst = 0.0
    roundtrip = True
    left = sig_h
    for right in blocks:
        full = left + right
        for _ in range(trials):
            u = random_element(full, rng, terms, rational=rational)
            v = random_element(full, rng, terms, rational=rational)
            diff = zeta(u * v, left, right) - zeta(u, left, right) * zeta(v, left, right)
            worst = max(worst, diff.max_abs())
        for k in range(1, full.d + 1):
            e = CliffordElement.generator(full, k)
            roundtrip &= upsilon(zeta(e, left, right)) == e
            if k <= left.d:
                img = GradedTensor.pure(CliffordElement.generator(left, k), CliffordElement.scalar(right))
            else:
                img = GradedTensor.pure(CliffordElement.scalar(left), CliffordElement.generator(right, k - left.d))
            roundtrip &= zeta(e, left, right) == img
        left = full
    dim_rhs = 1
    for s in sigs:
        dim_rhs *= s.dim
    return ChevalleyReport(sigs, 1 << total, dim_rhs, worst, bool(roundtrip), trials)


# ---------------------------------------------------------------------------
# small-signature classification


def _center_dimension(sig: Signature) -> int:
    rows = []
    for k in range(sig.dim):
        e = CliffordElement(sig, {k: 1})
        rows.append(left_matrix(e) - _right_matrix(e))
    A = np.vstack(rows)
    return sig.dim - np.linalg.matrix_rank(A)


def _right_matrix(a: CliffordElement) -> np.ndarray:
    sig = a.sig
    M = np.zeros((sig.dim, sig.dim))
    for ka, va in a.terms.items():
        for kb in range(sig.dim):
            s, k = blade_product(sig, kb, ka)
            M[k, kb] += s * float(va)
    return M


def classify_small(sig: Signature) -> str:
    """``R``, ``C``, ``R+R``, ``H`` or ``M2(R)`` for ``p + q <= 2``."""
    if sig.d > 2:
        raise ValueError("classify_small handles p + q <= 2 only")
    if sig.d == 0:
        return "R"
    zdim = _center_dimension(sig)
    if zdim == sig.dim and sig.d == 1:
        # commutative 2-dim algebra: split iff a nontrivial idempotent exists
        e = CliffordElement.generator(sig, 1)
        sq = (e * e).scalar_part()
        if sq > 0:
            half = Fraction(1, 2)
            idem = CliffordElement(sig, {0: half, 1: half})
            return "R+R" if idem * idem == idem else "C"
        return "C"
    # central simple of dimension 4: definite reduced norm means division algebra
    e1, e2 = CliffordElement.generator(sig, 1), CliffordElement.generator(sig, 2)
    a, b = (e1 * e1).scalar_part(), (e2 * e2).scalar_part()
    e12 = e1 * e2
    c = (e12 * e12).scalar_part()
    # norm form x0^2 - a x1^2 - b x2^2 - c x3^2 of x = x0 + x1 e1 + x2 e2 + x3 e12
    coeffs = [1, -a, -b, -c]
    definite = all(x > 0 for x in coeffs) or all(x < 0 for x in coeffs)
    return "H" if definite else "M2(R)"
