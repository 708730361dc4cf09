"""Command-line interface: ``anisogeo <command> --spec <path>``.

Exit status: 0 ok, 1 identity failure, 2 parse/usage error, 3 evaluation
domain error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
import time
from typing import Callable, Optional

import numpy as np

from . import expr as ex
from .clifford import algebra as cl
from .clifford import sigma as sg
from .connections import CLAIMED_METRICITY, DConnection, metricity_residuals
from .curvature import bianchi_from_jets, block_metric, evaluate_point, mixed_trace, weyl_traces
from .geometry import adapted_frame, anholonomy_coefficients, frame_duality_residual
from .jet import DegenerateMatrixError, JetDomainError
from .report import UnsupportedFormatError, all_pass, emit_report, empty_report, residual, tensor_table
from .spaces import DegenerateMetricError, SpaceSpecError, build_space, metric_eigen_range
from .specfile import SpecFile, SpecFileError, load

COMMANDS = ("inspect", "eval", "check", "grid", "clifford")

EXIT_OK, EXIT_IDENTITY, EXIT_PARSE, EXIT_DOMAIN, EXIT_IO = 0, 1, 2, 3, 4

# Base tolerances; --tolerance-scale multiplies every one of them.
TOLERANCES = {
    "frame_duality": 1e-12,
    "metricity": 1e-8,
    "torsion_antisymmetry": 1e-12,
    "nconn_torsion": 1e-10,
    "curvature_antisymmetry": 1e-12,
    "phi_trace": 1e-10,
    "weyl_trace": 1e-8,
    "bianchi": 1e-5,
    "anticommutation": 0.0,
    "associativity": 0.0,
    "chevalley": 0.0,
    "epsilon_rank": 1e-10,
}

TORSION_LABELS = {"T_h": "i,j,k", "T_v": "a,i,j", "P_h": "i,j,b", "P_v": "a,b,i", "S_v": "a,b,c"}
CURVATURE_LABELS = {"R_h": "i,h,j,k", "R_v": "a,b,j,k", "P_h": "i,j,k,c", "P_v": "a,b,k,c",
                    "S_h": "i,j,b,c", "S_v": "a,b,c,d"}
CONNECTION_LABELS = {"L_h": "i,j,k", "L_v": "a,b,k", "C_h": "i,j,c", "C_v": "a,b,c"}
GRID_FIELDS = ("scalar_curvature", "h_scalar_curvature", "v_scalar_curvature",
               "torsion_T_h", "torsion_T_v", "torsion_P_h", "torsion_P_v", "torsion_S_v")


class CLIError(Exception):
    def __init__(self, message: str, status: int):
        super().__init__(message)
        self.status = status


# ---------------------------------------------------------------------------
# helpers


def _connection(spec: SpecFile):
    if spec.space is None:
        raise CLIError("this command needs a [space] section", EXIT_PARSE)
    space = build_space(spec.space)
    return space, DConnection.on(space, spec.connection)


def _space_echo(spec: SpecFile) -> dict:
    s = spec.space
    kind = s.kind

    def canon(text):
        return ex.to_string(ex.parse(text, s.n, s.m, kind))

    def mat(M):
        return None if M is None else [[canon(c) for c in r] for r in M]

    out = {
        "class": s.cls, "n": s.n, "m": s.m, "kind": kind, "connection": spec.connection,
        "coordinates": spec.coordinate_names(),
    }
    if s.fundamental is not None:
        out["fundamental"] = canon(s.fundamental)
    for key, M in (("metric", s.metric_components), ("fiber_metric", s.fiber_metric_components),
                   ("n_connection", s.n_connection)):
        if M is not None:
            out[key] = mat(M)
    if s.cls == "lagrange":
        out["hessian_of"] = s.hessian_of
        out["lagrange_n"] = s.lagrange_n
    if s.cls == "hamilton":
        out["hamilton_n"] = s.hamilton_n
    return out


def _eval_points(spec: SpecFile) -> list:
    pts = list(spec.points)
    if not pts and spec.grid is not None:
        pts = spec.grid.points()
    if not pts:
        raise CLIError("no evaluation points: add [points] coords or a [grid]", EXIT_PARSE)
    return pts


def _fmt_point(u) -> str:
    return "(" + ", ".join(format(float(x), ".17g") for x in u) + ")"


def _at(u, fn: Callable):
    try:
        return fn()
    except (ex.DomainError, JetDomainError, DegenerateMetricError, DegenerateMatrixError, np.linalg.LinAlgError) as e:
        raise CLIError(f"domain error at point {_fmt_point(u)}: {e}", EXIT_DOMAIN) from None


def _eigen_summary(per_point: list) -> dict:
    return {k: (min if k.endswith("min") else max)(d[k] for d in per_point)
            for k in ("g_min", "g_max", "h_min", "h_max")}


# ---------------------------------------------------------------------------
# commands


def cmd_inspect(spec: SpecFile, opts) -> dict:
    rep = empty_report()
    rep["spec"] = {"schema_version": spec.schema_version}
    if spec.space is not None:
        rep["spec"]["space"] = _space_echo(spec)
    if spec.points:
        rep["spec"]["points"] = [list(p) for p in spec.points]
    if spec.grid is not None:
        rep["spec"]["grid"] = {
            "base": list(spec.grid.base),
            "axes": [{"coordinate": a.coordinate, "start": a.start, "stop": a.stop, "count": a.count}
                     for a in spec.grid.axes],
            "point_count": len(spec.grid.points()),
        }
    rep["spec"]["checks"] = list(spec.checks)
    if spec.clifford is not None:
        c = spec.clifford
        rep["spec"]["clifford"] = {k: (list(v) if isinstance(v, tuple) else v)
                                   for k, v in vars(c).items() if v is not None}
    return rep


def _point_tables(res) -> dict:
    t = {
        "g": tensor_table("i,j", res.g),
        "h": tensor_table("a,b", res.h),
        "N": tensor_table("i,a", res.N),
    }
    for k, lab in CONNECTION_LABELS.items():
        t[f"connection.{k}"] = tensor_table(lab, getattr(res.connection, k))
    for k, lab in TORSION_LABELS.items():
        t[f"torsion.{k}"] = tensor_table(lab, getattr(res.torsion, k))
    for k, lab in CURVATURE_LABELS.items():
        t[f"curvature.{k}"] = tensor_table(lab, getattr(res.curvature, k))
    for k, lab in (("R_hh", "i,j"), ("R_hv", "i,a"), ("R_vh", "a,i"), ("R_vv", "a,b")):
        t[f"ricci.{k}"] = tensor_table(lab, getattr(res.ricci, k))
    t["einstein"] = tensor_table("alpha,beta", res.einstein)
    t["phi"] = tensor_table("alpha,beta", res.phi)
    if res.weyl is not None:
        t["weyl"] = tensor_table("gamma,delta,alpha,beta", res.weyl)
    return t


def cmd_eval(spec: SpecFile, opts) -> dict:
    space, conn = _connection(spec)
    rep = empty_report()
    eig = []
    for u in _eval_points(spec):
        res = _at(u, lambda: evaluate_point(conn, u))
        e = _at(u, lambda: metric_eigen_range(space, u))
        eig.append(e)
        R, S, total = res.scalars
        rep["points"].append({
            "coordinates": dict(zip(spec.coordinate_names(), map(float, u))),
            "scalars": {"scalar_curvature": total, "h_scalar_curvature": R, "v_scalar_curvature": S},
            "metric_eigen_range": e,
            "tensors": _point_tables(res),
        })
    rep["diagnostics"]["metric_eigen_range"] = _eigen_summary(eig)
    rep["diagnostics"]["connection"] = spec.connection
    return rep


def _suite_values(conn: DConnection, family: str, u, suites) -> dict:
    """Raw residual values of the requested suites at one point."""
    out: dict = {}
    res = evaluate_point(conn, u, order=2 if "bianchi" in suites else 1)
    cj = res.cj
    if "frame_duality" in suites:
        out["frame_duality"] = frame_duality_residual(adapted_frame(conn.nconn, u))
    if "metricity" in suites:
        mr = metricity_residuals(cj)
        claimed = CLAIMED_METRICITY[family]
        out[f"metricity_{family}"] = max(mr[k] for k in claimed)
    if "torsion_antisymmetry" in suites:
        T = res.torsion
        out["torsion_antisymmetry"] = max(
            float(np.abs(x + x.swapaxes(1, 2)).max(initial=0.0)) for x in (T.T_h, T.T_v, T.S_v))
    if "nconn_torsion" in suites:
        n = conn.n
        w = anholonomy_coefficients(conn.nconn, u)[n:, :n, :n]
        out["nconn_torsion"] = float(np.abs(res.torsion.T_v - w).max(initial=0.0))
    if "curvature_antisymmetry" in suites:
        C = res.curvature
        out["curvature_antisymmetry"] = max(
            float(np.abs(getattr(C, k) + getattr(C, k).swapaxes(2, 3)).max(initial=0.0))
            for k in ("R_h", "R_v", "S_h", "S_v"))
    if "phi_trace" in suites:
        out["phi_trace"] = abs(mixed_trace(res.phi, block_metric(res.g, res.h)))
    if "weyl_trace" in suites and res.weyl is not None:
        tr = weyl_traces(res.weyl)
        keys = ["delta,alpha", "delta,beta"]
        if family in ("canonical", "kahler"):
            keys += ["gamma,alpha", "gamma,beta"]
        out["weyl_trace"] = max(tr[k] for k in keys)
    if "bianchi" in suites:
        first, second = bianchi_from_jets(cj)
        scale = max(1.0, float(np.abs(res.curvature.full()).max(initial=0.0)),
                    float(np.abs(cj.blocks().full()).max(initial=0.0)) ** 2)
        out["bianchi_first"] = (first, scale)
        out["bianchi_second"] = (second, scale)
    return out


def cmd_check(spec: SpecFile, opts) -> dict:
    space, conn = _connection(spec)
    rep = empty_report()
    worst: dict = {}
    eig = []
    for u in _eval_points(spec):
        vals = _at(u, lambda: _suite_values(conn, spec.connection, u, spec.checks))
        eig.append(_at(u, lambda: metric_eigen_range(space, u)))
        for k, v in vals.items():
            val, scale = v if isinstance(v, tuple) else (v, 1.0)
            base = k.split("_")[0] if k.startswith(("metricity", "bianchi")) else k
            tol = TOLERANCES[base] * scale * opts.tolerance_scale
            if k not in worst or val - tol > worst[k][0] - worst[k][1]:
                worst[k] = (val, tol)
    for k, (val, tol) in worst.items():
        rep["residuals"][k] = residual(val, tol)
    rep["diagnostics"]["metric_eigen_range"] = _eigen_summary(eig)
    rep["diagnostics"]["connection"] = spec.connection
    rep["diagnostics"]["point_count"] = len(eig)
    rep["diagnostics"]["suites"] = list(spec.checks)
    return rep


def cmd_grid(spec: SpecFile, opts) -> dict:
    if spec.grid is None:
        raise CLIError("the grid command needs a [grid] section", EXIT_PARSE)
    space, conn = _connection(spec)
    rep = empty_report()
    names = spec.coordinate_names()
    rows = []
    for u in spec.grid.points():
        res = _at(u, lambda: evaluate_point(conn, u))
        R, S, total = res.scalars
        T = res.torsion
        norms = [float(np.abs(getattr(T, k)).max(initial=0.0)) for k in ("T_h", "T_v", "P_h", "P_v", "S_v")]
        rows.append([float(x) for x in u] + [total, R, S] + norms)
    rep["grid"] = {"columns": names + list(GRID_FIELDS), "rows": rows}
    rep["diagnostics"]["connection"] = spec.connection
    rep["diagnostics"]["point_count"] = len(rows)
    return rep


def _associativity(sig: cl.Signature, trials: int, rng) -> int:
    worst = 0
    for _ in range(trials):
        a, b, c = (rng.integers(-3, 4, sig.dim).astype(np.int64) for _ in range(3))
        lhs = cl.dense_product(sig, cl.dense_product(sig, a, b), c)
        rhs = cl.dense_product(sig, a, cl.dense_product(sig, b, c))
        worst = max(worst, int(np.abs(lhs - rhs).max()))
    return worst


def cmd_clifford(spec: SpecFile, opts) -> dict:
    c = spec.clifford
    if c is None:
        raise CLIError("the clifford command needs a [clifford] section", EXIT_PARSE)
    rep = empty_report()
    tol = opts.tolerance_scale
    if c.p is not None:
        sig = cl.Signature.pq(c.p, c.q)
        info = {"p": c.p, "q": c.q, "dimension": sig.dim, "squares": list(sig.squares)}
        if sig.d <= 2:
            info["classification"] = cl.classify_small(sig)
        rep["algebra"] = info
        rng = np.random.default_rng(0)
        rep["residuals"]["associativity"] = residual(_associativity(sig, 100, rng), TOLERANCES["associativity"] * tol)
    if c.chevalley_split is not None:
        sigs = [cl.Signature.pq(p, q) for p, q in c.chevalley_split]
        ch = cl.chevalley_isomorphism_check(sigs[0], sigs[1:], trials=50, seed=0)
        rep["chevalley"] = {
            "blocks": [list(b) for b in c.chevalley_split],
            "dimension_lhs": ch.dimension_lhs, "dimension_rhs": ch.dimension_rhs,
            "generator_roundtrip_exact": ch.generator_roundtrip_exact, "trials": ch.trials,
        }
        rep["residuals"]["chevalley_multiplicativity"] = residual(ch.multiplicativity_residual,
                                                                  TOLERANCES["chevalley"] * tol)
    if c.sigma_n is not None or c.metric_diag is not None:
        metric = c.metric_diag if c.metric_diag is not None else sg.standard_metric(c.sigma_n)
        n = len(metric)
        S = sg.sigma_system(metric)
        rep["sigma"] = {
            "n": n, "metric_diag": list(metric), "N": S.N, "printed_N": sg.sigma_dimension(n),
            "matrices": [m.tolist() for m in S.matrices],
        }
        rep["diagnostics"]["escalations"] = list(S.escalations)
        rep["residuals"]["anticommutation"] = residual(S.anticommutation_residual(), TOLERANCES["anticommutation"] * tol)
        eps = sg.epsilon_objects(S)
        e = {"vanishing": {("+" if k > 0 else "-"): v for k, v in eps.vanishing.items()},
             "sign": eps.sign, "notes": list(eps.notes)}
        if n % 2:
            e["printed_vanishing"] = "+" if sg.printed_vanishing(n) > 0 else "-"
        if eps.eps_lower is not None:
            e["eps_lower"] = tensor_table("k,m", eps.eps_lower)
            e["eps_upper"] = tensor_table("i,j", eps.eps_upper)
            e["factor_residual"] = eps.factor_residual
            rep["residuals"]["epsilon_rank"] = residual(eps.rank_residual, TOLERANCES["epsilon_rank"] * tol)
        rep["sigma"]["epsilon"] = e
        rows = sg.symmetry_cross_check(n, metric)
        rep["sigma"]["symmetry_table"] = rows
        rep["residuals"]["symmetry_table_mismatches"] = residual(sum(not r["match"] for r in rows), 0.0)
    return rep


RUNNERS = {"inspect": cmd_inspect, "eval": cmd_eval, "check": cmd_check, "grid": cmd_grid, "clifford": cmd_clifford}


# ---------------------------------------------------------------------------
# entry points


def run(spec_path: str, command: str, output_path: Optional[str] = None, fmt: str = "json",
        tolerance_scale: float = 1.0, timing: bool = False, stdout=None, stderr=None) -> int:
    """Execute one command and write the report; returns the exit status."""
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    opts = argparse.Namespace(tolerance_scale=tolerance_scale)
    t0 = time.perf_counter()
    try:
        if command not in RUNNERS:
            raise CLIError(f"unknown command {command!r}", EXIT_PARSE)
        if not (tolerance_scale > 0):
            raise CLIError("--tolerance-scale must be positive", EXIT_PARSE)
        try:
            spec = load(spec_path)
        except OSError as e:
            raise CLIError(f"cannot read spec file: {e}", EXIT_IO) from None
        rep = RUNNERS[command](spec, opts)
        if timing:
            rep["diagnostics"]["timing_seconds"] = time.perf_counter() - t0
        data = emit_report(rep, fmt)
    except CLIError as e:
        print(f"anisogeo: error: {e}", file=stderr)
        return e.status
    except (SpecFileError, ex.ParseError, SpaceSpecError, UnsupportedFormatError) as e:
        print(f"anisogeo: error: {e}", file=stderr)
        return EXIT_PARSE
    except (ex.DomainError, JetDomainError, DegenerateMetricError, DegenerateMatrixError) as e:
        print(f"anisogeo: error: {e}", file=stderr)
        return EXIT_DOMAIN
    try:
        if output_path is None or output_path == "-":
            out = getattr(stdout, "buffer", None)
            if out is not None:
                out.write(data)
                out.flush()
            else:
                stdout.write(data.decode("utf-8"))
        else:
            with open(output_path, "wb") as fh:
                fh.write(data)
    except OSError as e:
        print(f"anisogeo: error: cannot write output: {e}", file=stderr)
        return EXIT_IO
    if command == "check" or command == "clifford":
        return EXIT_OK if all_pass(rep) else EXIT_IDENTITY
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors share the parse-error status
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="anisogeo", description="Geometry of anisotropic spaces: d-connections, curvature, "
                                              "identity checks and Clifford reports from a spec file.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--spec", required=True, help="path to the TOML spec file")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--format", default="json", choices=("json", "csv-grid", "text"))
    p.add_argument("--tolerance-scale", type=float, default=1.0, help="multiply every check tolerance")
    p.add_argument("--timing", action="store_true", help="add wall-clock timing to diagnostics "
                                                        "(makes the report non-reproducible)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.spec, args.command, args.out, args.format, args.tolerance_scale, args.timing)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
