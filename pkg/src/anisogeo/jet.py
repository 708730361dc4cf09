"""Truncated multivariate Taylor arithmetic (forward-mode jets).

A :class:`Jet` stores, for every multi-index ``alpha`` with ``|alpha| <= order``,
the scaled coefficient ``d^alpha f / alpha!`` in a trailing array axis. Leading
axes hold independent components, so a whole matrix of functions is one Jet and
linear algebra broadcasts over it.

Monomials are listed in graded order (all degree-0, then degree-1, ...), which
makes truncation to a lower order a prefix slice.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Sequence

import numpy as np

MAX_ORDER = 8


class JetDomainError(ValueError):
    """A unary function was applied outside its domain."""


class DegenerateMatrixError(ValueError):
    """A jet-valued matrix has a singular constant term."""


@lru_cache(maxsize=None)
def _space(nvars: int, order: int) -> "_JetSpace":
    return _JetSpace(nvars, order)


class _JetSpace:
    def __init__(self, nvars: int, order: int):
        if order < 0 or order > MAX_ORDER:
            raise ValueError(f"jet order {order} outside 0..{MAX_ORDER}")
        self.nvars = nvars
        self.order = order
        monos = []
        for d in range(order + 1):
            for combo in itertools.combinations_with_replacement(range(nvars), d):
                alpha = [0] * nvars
                for v in combo:
                    alpha[v] += 1
                monos.append(tuple(alpha))
        self.monos = monos
        self.size = len(monos)
        self.index = {a: k for k, a in enumerate(monos)}
        self.degree = np.array([sum(a) for a in monos])
        self.factorial = np.array([math.prod(math.factorial(e) for e in a) for a in monos], dtype=float)

        ii, jj, ll = [], [], []
        for i, a in enumerate(monos):
            da = sum(a)
            for j, b in enumerate(monos):
                if da + sum(b) > order:
                    continue
                ii.append(i)
                jj.append(j)
                ll.append(self.index[tuple(x + y for x, y in zip(a, b))])
        perm = np.argsort(np.array(ll), kind="stable")
        self.mul_i = np.array(ii)[perm]
        self.mul_j = np.array(jj)[perm]
        ll_sorted = np.array(ll)[perm]
        self.mul_starts = np.flatnonzero(np.r_[True, ll_sorted[1:] != ll_sorted[:-1]])

    @lru_cache(maxsize=None)
    def deriv_table(self, v: int):
        """Source indices and factors for d/dx_v (result has order - 1)."""
        lower = _space(self.nvars, self.order - 1)
        src = np.empty(lower.size, dtype=int)
        fac = np.empty(lower.size)
        for k, b in enumerate(lower.monos):
            a = list(b)
            a[v] += 1
            src[k] = self.index[tuple(a)]
            fac[k] = a[v]
        return src, fac


def _coerce(a, nvars, order):
    if isinstance(a, Jet):
        return a
    return Jet.constant(np.asarray(a, dtype=float), nvars, order)


class Jet:
    """Array of truncated Taylor polynomials in ``nvars`` variables."""

    __slots__ = ("c", "nvars", "order")
    __array_priority__ = 1000

    def __init__(self, coeffs: np.ndarray, nvars: int, order: int):
        sp = _space(nvars, order)
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[-1] != sp.size:
            raise ValueError("coefficient axis does not match jet space")
        self.c = coeffs
        self.nvars = nvars
        self.order = order

    # construction -------------------------------------------------------
    @classmethod
    def constant(cls, value, nvars: int, order: int) -> "Jet":
        value = np.asarray(value, dtype=float)
        sp = _space(nvars, order)
        c = np.zeros(value.shape + (sp.size,))
        c[..., 0] = value
        return cls(c, nvars, order)

    @classmethod
    def variable(cls, v: int, value: float, nvars: int, order: int) -> "Jet":
        j = cls.constant(value, nvars, order)
        if order >= 1:
            e = [0] * nvars
            e[v] = 1
            j.c[_space(nvars, order).index[tuple(e)]] = 1.0
        return j

    @classmethod
    def variables(cls, point: Sequence[float], order: int) -> list["Jet"]:
        n = len(point)
        return [cls.variable(k, float(point[k]), n, order) for k in range(n)]

    @classmethod
    def stack(cls, jets: Sequence["Jet"], axis: int = 0) -> "Jet":
        order = min(j.order for j in jets)
        nv = jets[0].nvars
        parts = [j.truncate(order).c for j in jets]
        ax = axis if axis >= 0 else axis - 1
        return cls(np.stack(parts, axis=ax), nv, order)

    @classmethod
    def from_nested(cls, rows) -> "Jet":
        """Build an array jet from nested lists of scalar jets."""
        if isinstance(rows, Jet):
            return rows
        return cls.stack([cls.from_nested(r) for r in rows], axis=0)

    # basic properties ---------------------------------------------------
    @property
    def shape(self):
        return self.c.shape[:-1]

    @property
    def ndim(self):
        return self.c.ndim - 1

    @property
    def value(self) -> np.ndarray:
        return self.c[..., 0].copy()

    def partial(self, alpha: Sequence[int]) -> np.ndarray:
        """Unscaled partial derivative d^alpha f at the expansion point."""
        sp = _space(self.nvars, self.order)
        alpha = tuple(int(a) for a in alpha)
        if sum(alpha) > self.order:
            raise ValueError("multi-index exceeds jet order")
        k = sp.index[alpha]
        return self.c[..., k] * sp.factorial[k]

    def truncate(self, order: int) -> "Jet":
        if order == self.order:
            return self
        if order > self.order:
            raise ValueError("cannot raise jet order")
        sp = _space(self.nvars, order)
        return Jet(self.c[..., : sp.size], self.nvars, order)

    def __getitem__(self, idx) -> "Jet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        if any(i is Ellipsis for i in idx):
            idx = idx + (slice(None),)
        return Jet(self.c[idx], self.nvars, self.order)

    def transpose(self, *axes) -> "Jet":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        return Jet(self.c.transpose(tuple(axes) + (self.ndim,)), self.nvars, self.order)

    @property
    def T(self) -> "Jet":
        return self.transpose()

    def swapaxes(self, a: int, b: int) -> "Jet":
        return Jet(np.swapaxes(self.c, a, b), self.nvars, self.order)

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return Jet(self.c.reshape(tuple(shape) + (self.c.shape[-1],)), self.nvars, self.order)

    def sum(self, axis=None) -> "Jet":
        if axis is None:
            axis = tuple(range(self.ndim))
        return Jet(self.c.sum(axis=axis), self.nvars, self.order)

    def __repr__(self):
        return f"Jet(shape={self.shape}, nvars={self.nvars}, order={self.order})"

    # arithmetic ---------------------------------------------------------
    def _align(self, other):
        other = _coerce(other, self.nvars, self.order)
        k = min(self.order, other.order)
        return self.truncate(k), other.truncate(k)

    def __add__(self, other):
        if not isinstance(other, Jet):
            c = self.c.copy()
            c[..., 0] = c[..., 0] + np.asarray(other, dtype=float)
            return Jet(c, self.nvars, self.order)
        a, b = self._align(other)
        return Jet(a.c + b.c, a.nvars, a.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.nvars, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            o = np.asarray(other, dtype=float)
            return Jet(self.c * o[..., None], self.nvars, self.order)
        a, b = self._align(other)
        sp = _space(a.nvars, a.order)
        prod = a.c[..., sp.mul_i] * b.c[..., sp.mul_j]
        return Jet(np.add.reduceat(prod, sp.mul_starts, axis=-1), a.nvars, a.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            o = np.asarray(other, dtype=float)
            return Jet(self.c / o[..., None], self.nvars, self.order)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, exponent):
        return self.power(float(exponent))

    # derivatives --------------------------------------------------------
    def d(self, v: int) -> "Jet":
        """Partial derivative with respect to variable ``v`` (order drops by 1)."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        src, fac = _space(self.nvars, self.order).deriv_table(v)
        return Jet(self.c[..., src] * fac, self.nvars, self.order - 1)

    def grad(self, variables: Sequence[int]) -> "Jet":
        """Stack of partials along a new trailing component axis."""
        return Jet.stack([self.d(v) for v in variables], axis=-1)

    # unary functions ----------------------------------------------------
    def _series(self, coeffs: list[np.ndarray]) -> "Jet":
        """Evaluate sum_r coeffs[r] * (self - self0)^r by Horner's rule."""
        dev = Jet(self.c.copy(), self.nvars, self.order)
        dev.c[..., 0] = 0.0
        out = Jet.constant(coeffs[-1], self.nvars, self.order)
        for r in range(len(coeffs) - 2, -1, -1):
            out = dev * out + coeffs[r]
        return out

    def exp(self) -> "Jet":
        e0 = np.exp(self.c[..., 0])
        return self._series([e0 / math.factorial(r) for r in range(self.order + 1)])

    def log(self) -> "Jet":
        b0 = self.c[..., 0]
        if np.any(b0 <= 0):
            raise JetDomainError("log of non-positive argument")
        coeffs = [np.log(b0)]
        coeffs += [(-1.0) ** (r + 1) / (r * b0**r) for r in range(1, self.order + 1)]
        return self._series(coeffs)

    def power(self, p: float) -> "Jet":
        b0 = self.c[..., 0]
        is_nonneg_int = float(p).is_integer() and p >= 0
        if not is_nonneg_int:
            if float(p).is_integer():
                if np.any(b0 == 0):
                    raise JetDomainError("negative power of zero")
            elif np.any(b0 <= 0):
                raise JetDomainError("non-integer power of non-positive argument")
        coeffs = []
        binom = 1.0
        for r in range(self.order + 1):
            if is_nonneg_int and r > p:
                coeffs.append(np.zeros_like(b0))
            else:
                coeffs.append(binom * b0 ** (p - r))
            binom *= (p - r) / (r + 1)
        return self._series(coeffs)

    def sqrt(self) -> "Jet":
        if np.any(self.c[..., 0] <= 0):
            raise JetDomainError("sqrt of non-positive argument")
        return self.power(0.5)

    def reciprocal(self) -> "Jet":
        if np.any(self.c[..., 0] == 0):
            raise JetDomainError("division by zero")
        return self.power(-1.0)

    def sin(self) -> "Jet":
        b0 = self.c[..., 0]
        cyc = [np.sin(b0), np.cos(b0), -np.sin(b0), -np.cos(b0)]
        return self._series([cyc[r % 4] / math.factorial(r) for r in range(self.order + 1)])

    def cos(self) -> "Jet":
        b0 = self.c[..., 0]
        cyc = [np.cos(b0), -np.sin(b0), -np.cos(b0), np.sin(b0)]
        return self._series([cyc[r % 4] / math.factorial(r) for r in range(self.order + 1)])


# ---------------------------------------------------------------------------
# tensor helpers


def einsum(spec: str, *operands) -> Jet:
    """``np.einsum`` over leading axes with truncated-product semantics.

    Operands may mix Jets and plain arrays; at least one must be a Jet. The
    result order is the minimum of the Jet operand orders. Subscripts ``Y``
    and ``Z`` are reserved for the coefficient axis.
    """
    ins, out = spec.replace(" ", "").split("->")
    terms = ins.split(",")
    if len(terms) != len(operands):
        raise ValueError("einsum operand count mismatch")
    jets = [(t, o) for t, o in zip(terms, operands) if isinstance(o, Jet)]
    arrays = [(t, np.asarray(o, dtype=float)) for t, o in zip(terms, operands) if not isinstance(o, Jet)]
    if not jets:
        raise ValueError("einsum needs at least one Jet operand")
    nv = jets[0][1].nvars
    order = min(j.order for _, j in jets)
    jets = [(t, j.truncate(order)) for t, j in jets]
    # fold plain arrays into the first jet
    t0, j0 = jets[0]
    if arrays:
        sub = ",".join([t0 + "Z"] + [t for t, _ in arrays])
        keep = "".join(ch for ch in dict.fromkeys(t0 + "".join(t for t, _ in arrays)) if ch in out or any(ch in t for t, _ in jets[1:]))
        c = np.einsum(f"{sub}->{keep}Z", j0.c, *[a for _, a in arrays])
        t0, j0 = keep, Jet(c, nv, order)
    acc_t, acc = t0, j0
    for idx, (t, j) in enumerate(jets[1:], start=1):
        rest = "".join(tt for tt, _ in jets[idx + 1:])
        keep = "".join(ch for ch in dict.fromkeys(acc_t + t) if ch in out or ch in rest)
        sp = _space(nv, order)
        prod = np.einsum(f"{acc_t}Y,{t}Y->{keep}Y", acc.c[..., sp.mul_i], j.c[..., sp.mul_j])
        acc = Jet(np.add.reduceat(prod, sp.mul_starts, axis=-1), nv, order)
        acc_t = keep
    c = np.einsum(f"{acc_t}Z->{out}Z", acc.c)
    return Jet(c, nv, order)


def matmul(a, b) -> Jet:
    return einsum("ij,jk->ik", a, b)


def inv(a: Jet, det_tol: float = 1e-12) -> Jet:
    """Inverse of a square jet matrix via a truncated Neumann series."""
    a0 = a.c[..., 0]
    det = np.linalg.det(a0)
    if not np.all(np.isfinite(det)) or np.any(np.abs(det) < det_tol):
        raise DegenerateMatrixError(f"singular matrix (|det| = {abs(float(np.min(np.abs(det)))):.3g})")
    a0inv = np.linalg.inv(a0)
    n = a0.shape[-1]
    dev = Jet(a.c.copy(), a.nvars, a.order)
    dev.c[..., 0] = 0.0
    e = einsum("ij,jk->ik", a0inv, dev)
    eye = np.eye(n)
    s = Jet.constant(eye, a.nvars, a.order)
    for _ in range(a.order):
        s = einsum("ij,jk->ik", e, s) * -1.0 + eye
    return einsum("ij,jk->ik", s, a0inv)


def symmetrize(a: Jet) -> Jet:
    """Symmetrize the last two component axes."""
    return (a + a.swapaxes(a.ndim - 2, a.ndim - 1)) * 0.5


def as_jet(x, nvars: int, order: int) -> Jet:
    return _coerce(x, nvars, order)
