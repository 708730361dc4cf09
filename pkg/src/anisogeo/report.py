"""Report assembly and deterministic serialization (json, csv-grid, text)."""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

FORMATS = ("json", "csv-grid", "text")


class UnsupportedFormatError(ValueError):
    pass


def empty_report() -> dict:
    return {"diagnostics": {}, "points": [], "residuals": {}}


def tensor_table(indices: str, arr) -> dict:
    """Named block with explicit index labels, e.g. ``tensor_table("i,j,k", L)``."""
    a = np.asarray(arr, dtype=float)
    if a.ndim != len(indices.split(",")) and not (a.ndim == 0 and indices == ""):
        raise ValueError(f"index labels {indices!r} do not match array rank {a.ndim}")
    return {"indices": indices, "shape": list(a.shape), "values": a.tolist()}


def residual(value: float, tolerance: float, **extra) -> dict:
    value = float(value)
    out = {"value": value, "tolerance": float(tolerance), "pass": bool(value <= tolerance)}
    out.update(extra)
    return out


def all_pass(report: dict) -> bool:
    return all(r["pass"] for r in report.get("residuals", {}).values())


# ---------------------------------------------------------------------------
# serialization


def _float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    if x == 0:
        return "0"  # also folds -0.0
    return format(x, ".17g")


def _compact(v: Any) -> str:
    if isinstance(v, np.ndarray):
        v = v.tolist()
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_compact(x) for x in v) + "]"
    return _json(v, 0)


def _json(v: Any, indent: int) -> str:
    pad = "  " * indent
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _float(float(v))
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, np.ndarray):
        return _json(v.tolist(), indent)
    if isinstance(v, (list, tuple)):
        if not v:
            return "[]"
        if all(not isinstance(x, (dict, list, tuple, np.ndarray)) for x in v):
            return "[" + ", ".join(_json(x, indent) for x in v) + "]"
        inner = ",\n".join(pad + "  " + _json(x, indent + 1) for x in v)
        return "[\n" + inner + "\n" + pad + "]"
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = sorted(v.items(), key=lambda kv: str(kv[0]))
        inner = ",\n".join(f"{pad}  {json.dumps(str(k), ensure_ascii=False)}: {_json(x, indent + 1)}" for k, x in items)
        return "{\n" + inner + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def to_json(report: dict) -> str:
    return _json(report, 0) + "\n"


def _text_lines(v: Any, path: str, out: list) -> None:
    if isinstance(v, dict):
        if not v:
            out.append(f"{path} = {{}}")
        for k in sorted(v, key=str):
            _text_lines(v[k], f"{path}.{k}" if path else str(k), out)
    elif isinstance(v, (list, tuple)) and any(isinstance(x, dict) for x in v):
        for k, x in enumerate(v):
            _text_lines(x, f"{path}[{k}]", out)
    else:
        out.append(f"{path} = {_compact(v)}")


def to_text(report: dict) -> str:
    lines: list[str] = []
    res = report.get("residuals", {})
    if res:
        lines.append("residuals:")
        width = max(len(k) for k in res)
        for k in sorted(res):
            r = res[k]
            status = "PASS" if r["pass"] else "FAIL"
            lines.append(f"  {status}  {k:<{width}}  value={_float(r['value'])}  tolerance={_float(r['tolerance'])}")
    rest = {k: v for k, v in report.items() if k != "residuals"}
    _text_lines(rest, "", lines)
    return "\n".join(lines) + "\n"


def to_csv_grid(report: dict) -> str:
    grid = report.get("grid")
    if not grid:
        raise UnsupportedFormatError("csv-grid output needs a grid report (run the grid command)")
    rows = [",".join(grid["columns"])]
    for r in grid["rows"]:
        rows.append(",".join(_float(float(x)).replace("null", "nan") for x in r))
    return "\n".join(rows) + "\n"


def emit_report(report: dict, fmt: str = "json") -> bytes:
    if fmt == "json":
        s = to_json(report)
    elif fmt == "text":
        s = to_text(report)
    elif fmt == "csv-grid":
        s = to_csv_grid(report)
    else:
        raise UnsupportedFormatError(f"unsupported format {fmt!r}; expected one of {', '.join(FORMATS)}")
    return s.encode("utf-8")
