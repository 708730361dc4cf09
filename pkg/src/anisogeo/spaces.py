"""Metrics and canonical N-connections of the generalized Finsler space classes.

Every construction produces a :class:`DSpace`: a metric field ``(g, h)`` and an
N-connection, both able to return jets of any order at a chart point. The
fundamental function is evaluated once per request at ``order + loss`` where
``loss`` is the number of derivatives the construction consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import expr as ex
from .geometry import NConnection, as_point, frame_matrices
from .jet import DegenerateMatrixError, Jet, einsum, inv, symmetrize

CLASSES = ("finsler", "lagrange", "glagrange", "cartan", "hamilton", "ghamilton", "riemann")
COVECTOR_CLASSES = ("cartan", "hamilton", "ghamilton")


class DegenerateMetricError(ValueError):
    pass


class SpaceSpecError(ValueError):
    pass


def _inv(a: Jet, what: str) -> Jet:
    try:
        return inv(a)
    except DegenerateMatrixError as exc:
        raise DegenerateMetricError(f"degenerate {what}: {exc}") from None


def _fiber_hessian(E: Jet, n: int, m: int) -> Jet:
    d1 = E.grad(range(n, n + m))
    return symmetrize(d1.grad(range(n, n + m)))


def _fiber_vars(u: np.ndarray, n: int, m: int, order: int) -> Jet:
    nv = n + m
    return Jet.stack([Jet.variable(n + a, u[n + a], nv, order) for a in range(m)])


class MetricField:
    """Block d-metric ``(g, h)``; ``jet_fn(u, order) -> (g, h)``."""

    def __init__(self, n: int, m: int, kind: str, jet_fn: Callable[[np.ndarray, int], tuple], label: str = ""):
        self.n, self.m, self.kind = n, m, kind
        self._jet_fn = jet_fn
        self.label = label

    @classmethod
    def constant(cls, g, h, kind: str = "vector") -> "MetricField":
        g = np.atleast_2d(np.asarray(g, dtype=float))
        h = np.atleast_2d(np.asarray(h, dtype=float))
        n, m = g.shape[0], h.shape[0]
        return cls(n, m, kind, lambda u, k: (Jet.constant(g, n + m, k), Jet.constant(h, n + m, k)), "constant")

    @classmethod
    def from_exprs(cls, g_exprs, h_exprs, n: int, m: int, kind: str = "vector") -> "MetricField":
        pg = [[ex.parse(e, n, m, kind) if isinstance(e, str) else e for e in row] for row in g_exprs]
        ph = [[ex.parse(e, n, m, kind) if isinstance(e, str) else e for e in row] for row in h_exprs]

        def fn(u, k):
            return (symmetrize(ex.eval_jet_array(pg, u, k, n, m)), symmetrize(ex.eval_jet_array(ph, u, k, n, m)))

        return cls(n, m, kind, fn, "expressions")

    def jets(self, u, order: int):
        g, h = self._jet_fn(as_point(u), order)
        return g.truncate(order), h.truncate(order)

    def values(self, u):
        g, h = self.jets(u, 0)
        return g.value, h.value


@dataclass
class DSpace:
    """A bundle chart with d-metric and N-connection."""

    n: int
    m: int
    kind: str
    metric: MetricField
    nconn: NConnection
    label: str = ""
    fundamental: Optional[ex.Expr] = None
    options: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.n + self.m

    def fiber_letter(self) -> str:
        return "y" if self.kind == "vector" else "p"


# ---------------------------------------------------------------------------
# Finsler / Riemann


def _christoffel_x(g: Jet, ginv: Jet, n: int) -> Jet:
    """gamma[i, j, k] from x-partials of a (possibly fiber-dependent) metric."""
    dg = g.grad(range(n))  # dg[i, j, k] = d_k g_ij
    low = (dg + dg.transpose(0, 2, 1) - dg.transpose(2, 0, 1)) * 0.5  # low[l, j, k]
    return einsum("il,ljk->ijk", ginv, low)


def _finsler_jets(E: ex.Expr, u: np.ndarray, order: int, n: int, want_n: bool):
    k = order + (4 if want_n else 2)
    Ej = ex.eval_jet(E, u, k, n, n)
    g = _fiber_hessian(Ej, n, n) * 0.5
    if not want_n:
        return g, None
    ginv = _inv(g, "Finsler metric")
    gam = _christoffel_x(g, ginv, n)
    y = _fiber_vars(u, n, n, k)
    G = einsum("ijk,j,k->i", gam, y, y)
    neff = G.grad(range(n, 2 * n)).transpose(1, 0) * 0.5  # neff[j, i]
    return g, neff


def finsler_square(F: ex.Expr) -> ex.Expr:
    return ex.Pow(F, 2.0)


def finsler_space(F, n: int, *, squared: bool = False) -> DSpace:
    """Finsler space from ``F`` (or directly from ``F^2`` when ``squared``)."""
    Fe = ex.parse(F, n, n, "vector") if isinstance(F, str) else F
    E = Fe if squared else finsler_square(Fe)

    def metric_fn(u, k):
        g, _ = _finsler_jets(E, u, k, n, False)
        return g, g

    metric = MetricField(n, n, "vector", metric_fn, "finsler")
    nconn = NConnection(n, n, "vector", lambda u, k: _finsler_jets(E, u, k, n, True)[1], "cartan")
    return DSpace(n, n, "vector", metric, nconn, "finsler", fundamental=Fe if not squared else None, options={"E": E})


def riemann_space(components, n: int) -> DSpace:
    """Lift of a base metric ``a_ij(x)`` with ``F^2 = a_ij y^i y^j``."""
    parsed = [[ex.parse(c, n, n, "vector") if isinstance(c, str) else c for c in row] for row in components]
    for row in parsed:
        for c in row:
            if any(v.kind != "x" for v in ex.variables(c)):
                raise SpaceSpecError("riemann metric components must depend on x only")
    sp = finsler_space(ex.quadratic_form(parsed), n, squared=True)
    sp.label = "riemann"
    return sp


def finsler_metric(F, u, n: int) -> np.ndarray:
    Fe = ex.parse(F, n, n) if isinstance(F, str) else F
    g, _ = _finsler_jets(finsler_square(Fe), as_point(u), 0, n, False)
    g = g.value
    if abs(np.linalg.det(g)) < 1e-12:
        raise DegenerateMetricError("degenerate Finsler metric")
    return g


def cartan_nconnection(F, u, n: int) -> np.ndarray:
    """Cartan N-connection, layout ``N[j, i] = N^i_j``."""
    Fe = ex.parse(F, n, n) if isinstance(F, str) else F
    return _finsler_jets(finsler_square(Fe), as_point(u), 0, n, True)[1].value


def finsler_homogeneity_residual(F, u, lam: float, n: int) -> float:
    Fe = ex.parse(F, n, n) if isinstance(F, str) else F
    u = as_point(u)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    v = u.copy()
    v[n:] *= lam
    return abs(ex.evaluate(Fe, v, n, n) - lam * ex.evaluate(Fe, u, n, n))


# ---------------------------------------------------------------------------
# Lagrange


def _lagrange_jets(L: ex.Expr, u, order, n, hessian_of, reading, want_n):
    E = ex.Pow(L, 2.0) if hessian_of == "L2" else L
    k = order + (3 if want_n else 2)
    Ej = ex.eval_jet(E, u, k, n, n)
    g = _fiber_hessian(Ej, n, n) * 0.5
    if not want_n:
        return g, None
    ginv = _inv(g, "Lagrange metric")
    y = _fiber_vars(u, n, n, k)
    dEx = Ej.grad(range(n))
    if reading == "spray":
        mixed = Ej.grad(range(n, 2 * n)).grad(range(n))  # mixed[k, h] = d_yk d_xh E
        bracket = einsum("kh,h->k", mixed, y) - dEx
        V = einsum("ik,k->i", ginv, bracket)
        neff = V.grad(range(n, 2 * n)).transpose(1, 0) * 0.25
    else:
        hess = Ej.grad(range(n, 2 * n)).grad(range(n, 2 * n))
        dLx = ex.eval_jet(L, u, k, n, n).grad(range(n))
        bracket = einsum("kh,h->k", hess, y) - dLx
        V = einsum("ik,k->i", ginv, bracket)
        neff = V.grad(range(n, 2 * n)).transpose(1, 0) * 0.5
    return g, neff


def lagrange_space(L, n: int, *, hessian_of: str = "L2", reading: str = "spray") -> DSpace:
    if hessian_of not in ("L2", "L"):
        raise SpaceSpecError("hessian_of must be 'L2' or 'L'")
    if reading not in ("spray", "printed"):
        raise SpaceSpecError("lagrange_n must be 'spray' or 'printed'")
    Le = ex.parse(L, n, n) if isinstance(L, str) else L

    def metric_fn(u, k):
        g, _ = _lagrange_jets(Le, u, k, n, hessian_of, reading, False)
        return g, g

    metric = MetricField(n, n, "vector", metric_fn, "lagrange")
    nconn = NConnection(n, n, "vector", lambda u, k: _lagrange_jets(Le, u, k, n, hessian_of, reading, True)[1], "lagrange")
    return DSpace(n, n, "vector", metric, nconn, "lagrange", fundamental=Le,
                  options={"hessian_of": hessian_of, "lagrange_n": reading})


def lagrange_metric(L, u, n: int, hessian_of: str = "L2") -> np.ndarray:
    Le = ex.parse(L, n, n) if isinstance(L, str) else L
    g = _lagrange_jets(Le, as_point(u), 0, n, hessian_of, "spray", False)[0].value
    if abs(np.linalg.det(g)) < 1e-12:
        raise DegenerateMetricError("rank-deficient Lagrange Hessian")
    return g


def lagrange_nconnection(L, u, n: int, hessian_of: str = "L2", reading: str = "spray") -> np.ndarray:
    Le = ex.parse(L, n, n) if isinstance(L, str) else L
    return _lagrange_jets(Le, as_point(u), 0, n, hessian_of, reading, True)[1].value


# ---------------------------------------------------------------------------
# Cartan spaces (covector)


def _cartan_space_jets(K: ex.Expr, u, order, n, want_n):
    k = order + (3 if want_n else 2)
    Ej = ex.eval_jet(ex.Pow(K, 2.0), u, k, n, n)
    gup = _fiber_hessian(Ej, n, n) * 0.5  # g^{ij}
    glow = symmetrize(_inv(gup, "Cartan-space metric"))
    if not want_n:
        return glow, gup, None
    gam = _christoffel_x(glow, gup, n)  # gam[k, i, j]
    p = _fiber_vars(u, n, n, k)
    pup = einsum("lk,k->l", gup, p)
    dgp = glow.grad(range(n, 2 * n))  # dgp[i, j, s] = d g_ij / d p_s
    term1 = einsum("kij,k->ij", gam, p)
    term2 = einsum("ksl,k,l,ijs->ij", gam, p, pup, dgp) * 0.5
    return glow, gup, term1 - term2


def cartan_space(K, n: int) -> DSpace:
    Ke = ex.parse(K, n, n, "covector") if isinstance(K, str) else K

    def metric_fn(u, k):
        glow, gup, _ = _cartan_space_jets(Ke, u, k, n, False)
        return glow, gup

    metric = MetricField(n, n, "covector", metric_fn, "cartan")
    nconn = NConnection(n, n, "covector", lambda u, k: _cartan_space_jets(Ke, u, k, n, True)[2], "cartan-space")
    return DSpace(n, n, "covector", metric, nconn, "cartan", fundamental=Ke)


def cartan_space_metric(K, u, n: int) -> np.ndarray:
    """Contravariant metric ``g^{ij} = 1/2 d^2 K^2 / dp_i dp_j``."""
    Ke = ex.parse(K, n, n, "covector") if isinstance(K, str) else K
    return _cartan_space_jets(Ke, as_point(u), 0, n, False)[1].value


def cartan_space_nconnection(K, u, n: int) -> np.ndarray:
    Ke = ex.parse(K, n, n, "covector") if isinstance(K, str) else K
    return _cartan_space_jets(Ke, as_point(u), 0, n, True)[2].value


# ---------------------------------------------------------------------------
# Hamilton spaces (covector)

HAMILTON_COEFF = {"metric": 0.25, "printed": 0.5}


def _hamilton_jets(H: ex.Expr, u, order, n, reading, want_n):
    k = order + (3 if want_n else 2)
    Hj = ex.eval_jet(H, u, k, n, n)
    gup = _fiber_hessian(Hj, n, n) * 0.5
    glow = symmetrize(_inv(gup, "Hamilton metric"))
    if not want_n:
        return glow, gup, None
    dHx = Hj.grad(range(n))
    dHp = Hj.grad(range(n, 2 * n))
    dgp = glow.grad(range(n, 2 * n))
    dgx = glow.grad(range(n))
    bracket = einsum("ijl,l->ij", dgp, dHx) - einsum("l,ijl->ij", dHp, dgx)
    mixed = dHp.grad(range(n))  # mixed[k, j] = d^2 H / dp_k dx^j
    t = einsum("ik,kj->ij", glow, mixed)
    c = HAMILTON_COEFF[reading]
    return glow, gup, bracket * 0.25 - (t + t.T) * c


def hamilton_space(H, n: int, *, reading: str = "metric") -> DSpace:
    if reading not in HAMILTON_COEFF:
        raise SpaceSpecError("hamilton_n must be 'metric' or 'printed'")
    He = ex.parse(H, n, n, "covector") if isinstance(H, str) else H

    def metric_fn(u, k):
        glow, gup, _ = _hamilton_jets(He, u, k, n, reading, False)
        return glow, gup

    metric = MetricField(n, n, "covector", metric_fn, "hamilton")
    nconn = NConnection(n, n, "covector", lambda u, k: _hamilton_jets(He, u, k, n, reading, True)[2], "hamilton")
    return DSpace(n, n, "covector", metric, nconn, "hamilton", fundamental=He, options={"hamilton_n": reading})


def hamilton_metric(H, u, n: int) -> np.ndarray:
    He = ex.parse(H, n, n, "covector") if isinstance(H, str) else H
    return _hamilton_jets(He, as_point(u), 0, n, "metric", False)[1].value


def hamilton_nconnection(H, u, n: int, reading: str = "metric") -> np.ndarray:
    He = ex.parse(H, n, n, "covector") if isinstance(H, str) else H
    return _hamilton_jets(He, as_point(u), 0, n, reading, True)[2].value


# ---------------------------------------------------------------------------
# generalized classes with explicit metric components


def glagrange_space(components, n: int, nconn: Optional[NConnection] = None) -> DSpace:
    metric = MetricField.from_exprs(components, components, n, n, "vector")
    N = nconn or NConnection.zero(n, n, "vector")
    return DSpace(n, n, "vector", metric, N, "glagrange")


def ghamilton_space(components, n: int, nconn: Optional[NConnection] = None) -> DSpace:
    """``components`` are the contravariant ``g^{ij}(x, p)``."""
    pg = [[ex.parse(c, n, n, "covector") if isinstance(c, str) else c for c in row] for row in components]

    def fn(u, k):
        gup = symmetrize(ex.eval_jet_array(pg, u, k, n, n))
        return symmetrize(_inv(gup, "generalized Hamilton metric")), gup

    metric = MetricField(n, n, "covector", fn, "ghamilton")
    N = nconn or NConnection.zero(n, n, "covector")
    return DSpace(n, n, "covector", metric, N, "ghamilton")


def general_space(g_exprs, h_exprs, n: int, m: int, kind: str = "vector", nconn=None) -> DSpace:
    """Arbitrary d-metric ``(g, h)`` over an ``n + m`` chart."""
    metric = MetricField.from_exprs(g_exprs, h_exprs, n, m, kind)
    N = nconn or NConnection.zero(n, m, kind)
    return DSpace(n, m, kind, metric, N, "general")


# ---------------------------------------------------------------------------
# spec-driven construction


@dataclass
class SpaceSpec:
    cls: str
    n: int
    m: int
    fundamental: Optional[str] = None
    metric_components: Optional[list] = None
    fiber_metric_components: Optional[list] = None
    n_connection: Optional[list] = None
    hessian_of: str = "L2"
    lagrange_n: str = "spray"
    hamilton_n: str = "metric"

    def __post_init__(self):
        if self.cls not in CLASSES and self.cls != "general":
            raise SpaceSpecError(f"unknown space class {self.cls!r}")
        if self.n < 1 or self.m < 1:
            raise SpaceSpecError("dimensions must be >= 1")
        if self.cls != "general" and self.m != self.n:
            raise SpaceSpecError(f"class {self.cls!r} requires m = n")
        has_f = self.fundamental is not None
        has_g = self.metric_components is not None
        needs_f = self.cls in ("finsler", "lagrange", "cartan", "hamilton")
        if needs_f and (not has_f or has_g):
            raise SpaceSpecError(f"class {self.cls!r} needs a fundamental function and no metric components")
        if not needs_f and (has_f or not has_g):
            raise SpaceSpecError(f"class {self.cls!r} needs metric components and no fundamental function")

    @property
    def kind(self) -> str:
        return "covector" if self.cls in COVECTOR_CLASSES else "vector"


def build_space(spec: SpaceSpec) -> DSpace:
    n, m, kind = spec.n, spec.m, spec.kind
    explicit = NConnection.from_exprs(spec.n_connection, n, m, kind) if spec.n_connection else None
    if spec.cls == "finsler":
        sp = finsler_space(spec.fundamental, n)
    elif spec.cls == "lagrange":
        sp = lagrange_space(spec.fundamental, n, hessian_of=spec.hessian_of, reading=spec.lagrange_n)
    elif spec.cls == "cartan":
        sp = cartan_space(spec.fundamental, n)
    elif spec.cls == "hamilton":
        sp = hamilton_space(spec.fundamental, n, reading=spec.hamilton_n)
    elif spec.cls == "riemann":
        sp = riemann_space(spec.metric_components, n)
    elif spec.cls == "glagrange":
        return glagrange_space(spec.metric_components, n, explicit)
    elif spec.cls == "ghamilton":
        return ghamilton_space(spec.metric_components, n, explicit)
    else:
        h = spec.fiber_metric_components
        if h is None:
            raise SpaceSpecError("class 'general' needs fiber_metric components")
        return general_space(spec.metric_components, h, n, m, kind, explicit)
    if explicit is not None:
        sp.nconn = explicit
    return sp


# ---------------------------------------------------------------------------
# diagnostics and almost complex structure


def metric_eigen_range(space: DSpace, u) -> dict:
    g, h = space.metric.values(u)
    eg = np.linalg.eigvalsh(g)
    eh = np.linalg.eigvalsh(h)
    return {"g_min": float(eg[0]), "g_max": float(eg[-1]), "h_min": float(eh[0]), "h_max": float(eh[-1])}


def almost_complex_apply(v) -> np.ndarray:
    """``J(delta_i) = -dot d_i``, ``J(dot d_i) = delta_i`` on adapted components."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size % 2:
        raise ValueError("d-vector must have 2n adapted components (tangent bundle, m = n)")
    n = v.size // 2
    return np.concatenate([v[n:], -v[:n]])


def kahler_two_form(g, v1, v2) -> float:
    """``theta(v1, v2) = g_ij (dy^i(v1) dx^j(v2) - dy^i(v2) dx^j(v1))`` in adapted components."""
    g = np.asarray(g, dtype=float)
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    n = g.shape[0]
    if v1.size != 2 * n or v2.size != 2 * n:
        raise ValueError("d-vectors must have 2n components (tangent bundle, m = n)")
    return float(v1[n:] @ g @ v2[:n] - v2[n:] @ g @ v1[:n])


def _theta_coordinate(space: DSpace, u) -> np.ndarray:
    n = space.n
    g, _ = space.metric.values(u)
    neff = space.nconn.effective_jet(u, 0).value
    _, C = frame_matrices(neff, n, space.m)
    A = np.zeros((2 * n, 2 * n))
    A[:, :n] = C[n:, :].T @ g
    return A - A.T


def kahler_closedness_residual(space: DSpace, u, h: float = 1e-4) -> float:
    """Max |d theta| by central differences of the coordinate 2-form."""
    if space.m != space.n or space.kind != "vector":
        raise ValueError("almost Kahler structure needs a tangent bundle (m = n)")
    u = as_point(u)
    dim = 2 * space.n
    d = np.zeros((dim, dim, dim))  # d[l, mu, nu] = d_l omega_{mu nu}
    for l in range(dim):
        e = np.zeros(dim)
        e[l] = h
        d[l] = (_theta_coordinate(space, u + e) - _theta_coordinate(space, u - e)) / (2 * h)
    cyc = d + d.transpose(1, 2, 0) + d.transpose(2, 0, 1)
    return float(np.abs(cyc).max())
