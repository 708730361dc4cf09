"""Spec-file loading and validation.

A spec file is UTF-8 TOML. Expressions are quoted strings in the grammar of
:mod:`anisogeo.expr`. See README.md for the full key reference.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import expr as ex
from .connections import FAMILIES
from .spaces import CLASSES, COVECTOR_CLASSES, SpaceSpec, SpaceSpecError

SCHEMA_VERSION = 1

SUITES = (
    "frame_duality",
    "metricity",
    "torsion_antisymmetry",
    "nconn_torsion",
    "curvature_antisymmetry",
    "phi_trace",
    "weyl_trace",
    "bianchi",
)
DEFAULT_SUITES = ("frame_duality", "metricity", "torsion_antisymmetry", "curvature_antisymmetry", "phi_trace", "bianchi")

_SPACE_KEYS = {
    "class", "n", "m", "fundamental", "metric", "fiber_metric", "n_connection",
    "hessian_of", "lagrange_n", "hamilton_n", "connection",
}
_TOP_KEYS = {"schema_version", "space", "points", "grid", "checks", "clifford"}


class SpecFileError(ValueError):
    """The spec file is malformed or inconsistent (CLI exit status 2)."""


@dataclass(frozen=True)
class GridAxis:
    coordinate: str
    slot: int
    start: float
    stop: float
    count: int

    def values(self) -> list[float]:
        if self.count == 1:
            return [self.start]
        step = (self.stop - self.start) / (self.count - 1)
        vals = [self.start + k * step for k in range(self.count)]
        vals[-1] = self.stop
        return vals


@dataclass(frozen=True)
class GridSpec:
    base: tuple
    axes: tuple

    def points(self) -> list[tuple]:
        """Cartesian product in lexicographic index order (first axis slowest)."""
        out = []
        for combo in itertools.product(*(ax.values() for ax in self.axes)):
            u = list(self.base)
            for ax, v in zip(self.axes, combo):
                u[ax.slot] = v
            out.append(tuple(u))
        return out


@dataclass(frozen=True)
class CliffordSpec:
    p: Optional[int] = None
    q: Optional[int] = None
    sigma_n: Optional[int] = None
    metric_diag: Optional[tuple] = None
    chevalley_split: Optional[tuple] = None


@dataclass
class SpecFile:
    schema_version: int
    space: Optional[SpaceSpec]
    connection: str = "canonical"
    points: list = field(default_factory=list)
    grid: Optional[GridSpec] = None
    checks: tuple = DEFAULT_SUITES
    clifford: Optional[CliffordSpec] = None
    raw: dict = field(default_factory=dict)

    @property
    def fiber_letter(self) -> str:
        return "p" if self.space is not None and self.space.kind == "covector" else "y"

    def coordinate_names(self) -> list[str]:
        if self.space is None:
            return []
        f = self.fiber_letter
        return [f"x{i + 1}" for i in range(self.space.n)] + [f"{f}{a + 1}" for a in range(self.space.m)]


def _int(v: Any, what: str, lo: int = 0) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise SpecFileError(f"{what} must be an integer")
    if v < lo:
        raise SpecFileError(f"{what} must be >= {lo}")
    return v


def _float(v: Any, what: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SpecFileError(f"{what} must be a number")
    v = float(v)
    if not math.isfinite(v):
        raise SpecFileError(f"{what} must be finite")
    return v


def _str(v: Any, what: str) -> str:
    if not isinstance(v, str):
        raise SpecFileError(f"{what} must be a quoted string")
    return v


def _matrix(v: Any, rows: int, cols: int, what: str) -> list:
    if not isinstance(v, list) or len(v) != rows or any(not isinstance(r, list) or len(r) != cols for r in v):
        raise SpecFileError(f"{what} must be a {rows}x{cols} array of expression strings")
    return [[_str(c, what) for c in r] for r in v]


def _unknown(d: dict, allowed: set, where: str) -> None:
    extra = sorted(set(d) - allowed)
    if extra:
        raise SpecFileError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _space(d: dict) -> tuple[SpaceSpec, str]:
    if not isinstance(d, dict):
        raise SpecFileError("[space] must be a table")
    _unknown(d, _SPACE_KEYS, "[space]")
    cls = _str(d.get("class"), "space.class")
    if cls not in CLASSES and cls != "general":
        raise SpecFileError(f"unknown space class {cls!r}")
    n = _int(d.get("n"), "space.n", 1)
    m = _int(d.get("m", n), "space.m", 1)
    kind = "covector" if cls in COVECTOR_CLASSES else "vector"
    fund = d.get("fundamental")
    fund = None if fund is None else _str(fund, "space.fundamental")
    g = None if d.get("metric") is None else _matrix(d["metric"], n, n, "space.metric")
    h = None if d.get("fiber_metric") is None else _matrix(d["fiber_metric"], m, m, "space.fiber_metric")
    N = None if d.get("n_connection") is None else _matrix(d["n_connection"], n, m, "space.n_connection")
    connection = _str(d.get("connection", "canonical"), "space.connection")
    if connection not in FAMILIES:
        raise SpecFileError(f"unknown connection {connection!r}; expected one of {', '.join(FAMILIES)}")
    try:
        spec = SpaceSpec(
            cls=cls, n=n, m=m, fundamental=fund, metric_components=g, fiber_metric_components=h,
            n_connection=N,
            hessian_of=_str(d.get("hessian_of", "L2"), "space.hessian_of"),
            lagrange_n=_str(d.get("lagrange_n", "spray"), "space.lagrange_n"),
            hamilton_n=_str(d.get("hamilton_n", "metric"), "space.hamilton_n"),
        )
    except SpaceSpecError as e:
        raise SpecFileError(str(e)) from None
    if connection == "kahler" and n != m:
        raise SpecFileError("the kahler connection needs m = n")
    # Parse every expression now so errors surface at load time with offsets.
    exprs = ([fund] if fund else []) + [c for M in (g, h, N) if M for r in M for c in r]
    for text in exprs:
        ex.parse(text, n, m, kind)
    return spec, connection


def _point(v: Any, dim: int, what: str) -> tuple:
    if not isinstance(v, list) or len(v) != dim:
        raise SpecFileError(f"{what} must list {dim} coordinates")
    return tuple(_float(c, what) for c in v)


def _grid(d: dict, names: list[str]) -> GridSpec:
    if not isinstance(d, dict):
        raise SpecFileError("[grid] must be a table")
    _unknown(d, {"base", "axes"}, "[grid]")
    base = _point(d.get("base"), len(names), "grid.base")
    axes = d.get("axes")
    if not isinstance(axes, list) or not axes:
        raise SpecFileError("grid needs at least one [[grid.axes]] entry")
    out, seen = [], set()
    for k, ax in enumerate(axes):
        where = f"grid.axes[{k}]"
        if not isinstance(ax, dict):
            raise SpecFileError(f"{where} must be a table")
        _unknown(ax, {"coordinate", "start", "stop", "count"}, where)
        coord = _str(ax.get("coordinate"), f"{where}.coordinate")
        if coord not in names:
            raise SpecFileError(f"{where}.coordinate {coord!r} is not one of {', '.join(names)}")
        if coord in seen:
            raise SpecFileError(f"{where}.coordinate {coord!r} is swept twice")
        seen.add(coord)
        out.append(GridAxis(coord, names.index(coord), _float(ax.get("start"), f"{where}.start"),
                            _float(ax.get("stop"), f"{where}.stop"), _int(ax.get("count"), f"{where}.count", 1)))
    return GridSpec(base, tuple(out))


def _clifford(d: dict) -> CliffordSpec:
    if not isinstance(d, dict):
        raise SpecFileError("[clifford] must be a table")
    _unknown(d, {"p", "q", "sigma_n", "metric_diag", "chevalley_split"}, "[clifford]")
    p = d.get("p")
    q = d.get("q")
    if (p is None) != (q is None):
        raise SpecFileError("clifford.p and clifford.q go together")
    if p is not None:
        p, q = _int(p, "clifford.p"), _int(q, "clifford.q")
        if p + q > 12:
            raise SpecFileError("clifford signature dimension p + q must be <= 12")
    sn = d.get("sigma_n")
    diag = d.get("metric_diag")
    if sn is not None:
        sn = _int(sn, "clifford.sigma_n", 1)
    if diag is not None:
        if not isinstance(diag, list) or any(x not in (1, -1) or isinstance(x, bool) for x in diag) or not diag:
            raise SpecFileError("clifford.metric_diag must be a non-empty list of +1/-1")
        if sn is not None and sn != len(diag):
            raise SpecFileError("clifford.sigma_n disagrees with the length of metric_diag")
        diag = tuple(int(x) for x in diag)
    split = d.get("chevalley_split")
    if split is not None:
        if not isinstance(split, list) or len(split) < 2:
            raise SpecFileError("clifford.chevalley_split must list at least two [p, q] blocks")
        blocks = []
        for b in split:
            if not isinstance(b, list) or len(b) != 2:
                raise SpecFileError("each chevalley_split block is [p, q]")
            blocks.append((_int(b[0], "chevalley_split p"), _int(b[1], "chevalley_split q")))
        if sum(a + b for a, b in blocks) > 12:
            raise SpecFileError("chevalley_split blocks exceed 12 generators")
        split = tuple(blocks)
    if p is None and sn is None and diag is None and split is None:
        raise SpecFileError("[clifford] needs p/q, sigma_n, metric_diag or chevalley_split")
    return CliffordSpec(p, q, sn, diag, split)


def loads(text: str) -> SpecFile:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise SpecFileError(f"malformed spec file: {e}") from None
    _unknown(raw, _TOP_KEYS, "spec file")
    if "schema_version" not in raw:
        raise SpecFileError("schema_version is required")
    if _int(raw["schema_version"], "schema_version") != SCHEMA_VERSION:
        raise SpecFileError(f"unsupported schema_version {raw['schema_version']}; expected {SCHEMA_VERSION}")
    space, connection = (None, "canonical")
    if "space" in raw:
        space, connection = _space(raw["space"])
    out = SpecFile(SCHEMA_VERSION, space, connection, raw=raw)
    names = out.coordinate_names()
    if "points" in raw or "grid" in raw:
        if space is None:
            raise SpecFileError("points and grid need a [space] section")
    if "points" in raw:
        pts = raw["points"]
        if not isinstance(pts, dict):
            raise SpecFileError("[points] must be a table with a coords array")
        _unknown(pts, {"coords"}, "[points]")
        coords = pts.get("coords", [])
        if not isinstance(coords, list):
            raise SpecFileError("points.coords must be an array of coordinate vectors")
        out.points = [_point(c, len(names), f"points.coords[{k}]") for k, c in enumerate(coords)]
    if "grid" in raw:
        out.grid = _grid(raw["grid"], names)
    if "checks" in raw:
        chk = raw["checks"]
        if not isinstance(chk, dict):
            raise SpecFileError("[checks] must be a table with a suites array")
        _unknown(chk, {"suites"}, "[checks]")
        suites = chk.get("suites", list(DEFAULT_SUITES))
        if not isinstance(suites, list):
            raise SpecFileError("checks.suites must be an array of suite names")
        for s in suites:
            if s not in SUITES:
                raise SpecFileError(f"unknown check suite {s!r}; expected one of {', '.join(SUITES)}")
        out.checks = tuple(dict.fromkeys(suites))
    if "clifford" in raw:
        out.clifford = _clifford(raw["clifford"])
    return out


def load(path: str) -> SpecFile:
    """Read and validate a spec file. ``OSError`` propagates for I/O failures."""
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise SpecFileError(f"spec file is not valid UTF-8 (byte {e.start})") from None
    return loads(text)
