"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 numerical failure, 4 inconclusive
classification.
"""
from __future__ import annotations

import argparse
import ast
import cmath
import logging
import math
import operator
import sys
import time
import warnings

import numpy as np

from . import ptb
from .deformation import (
    DegenerateEvaluation,
    EquationSystem,
    NoConvergence,
    Outcome,
    SolverError,
    SolverOptions,
    continue_filling,
    holonomy,
    solve_complete_with_history,
    tangent_spectrum,
    volume,
)
from .report import RunReport, encode_complex, encode_degeneration, encode_root, encode_shapes
from .roots import ROOT_TOL
from .sl2 import BranchDegeneracy, BranchDegeneracyWarning
from .triangulation import TriangulationError, compute_edge_classes, load_triangulation

log = logging.getLogger("idealpoints")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_INCONCLUSIVE = 0, 2, 3, 4


class InputError(Exception):
    pass


# -- safe complex expressions -----------------------------------------------

_NAMES = {"i": 1j, "j": 1j, "pi": math.pi, "e": math.e}
_FUNCS = {"sqrt": cmath.sqrt, "exp": cmath.exp, "log": cmath.log, "cos": cmath.cos, "sin": cmath.sin}
_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def _eval_node(node) -> complex:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
        return complex(node.value)
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return complex(_NAMES[node.id])
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return complex(_BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right)))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        return _UNOPS[type(node.op)](_eval_node(node.operand))
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _FUNCS
        and len(node.args) == 1
        and not node.keywords
    ):
        return complex(_FUNCS[node.func.id](_eval_node(node.args[0])))
    raise InputError(f"unsupported expression: {ast.unparse(node)!r}")


def parse_complex_list(text: str) -> list[complex]:
    """Comma-separated complex expressions, optionally wrapped in parentheses,
    e.g. ``"(1/2+i/2, 1+i, 1/2+i/2, 1+i)"`` or ``"exp(i*pi/6)/sqrt(3),1,1,0"``."""
    try:
        tree = ast.parse(text.strip(), mode="eval").body
    except SyntaxError as exc:
        raise InputError(f"cannot parse {text!r}: {exc.msg}") from None
    nodes = tree.elts if isinstance(tree, ast.Tuple) else [tree]
    try:
        return [_eval_node(n) for n in nodes]
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        raise InputError(f"cannot evaluate {text!r}: {exc}") from None


def parse_orders(text: str) -> list[int]:
    try:
        orders = sorted({int(x) for x in text.split(",") if x.strip()})
    except ValueError:
        raise InputError(f"bad --orders {text!r}; expected integers like 2,3") from None
    if not orders or orders[0] < 1:
        raise InputError("--orders must list positive integers")
    return orders


# -- commands ---------------------------------------------------------------


def _options(args) -> SolverOptions:
    kw = {}
    if args.tol is not None:
        kw["tol"] = args.tol
    if args.max_steps is not None:
        kw["max_steps"] = args.max_steps
    return SolverOptions(**kw)


def _load(path: str):
    try:
        return load_triangulation(path)
    except TriangulationError as exc:
        raise InputError(str(exc)) from None
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def _system(tri, mode: str) -> EquationSystem:
    try:
        return EquationSystem.from_triangulation(tri, mode)
    except (ValueError, KeyError) as exc:
        raise InputError(str(exc)) from None


def _seed(args, tri, sys: EquationSystem):
    if args.seed is not None:
        z = parse_complex_list(args.seed)
    elif tri.seed is not None:
        z = list(tri.seed)
    else:
        return None
    if len(z) != sys.num_shapes:
        raise InputError(f"seed has {len(z)} shapes, expected {sys.num_shapes}")
    # seeds are written in the file's explicit labeling
    return sys.from_explicit(z) if sys.slots is not None else z


def _holonomies(sys: EquationSystem, s) -> dict:
    out = {}
    for label in sorted(sys.curve_labels):
        try:
            out[label] = encode_complex(holonomy(sys, label, s))
        except DegenerateEvaluation:
            out[label] = "indeterminate"
    return out


def cmd_validate(args, opts: SolverOptions) -> tuple[dict, int]:
    tri = _load(args.path)
    classes = compute_edge_classes(tri)
    result = {
        "name": tri.name,
        "tetrahedra": tri.num_tets,
        "edge_classes": len(classes),
        "edge_class_sizes": [len(c) for c in classes],
        "curves": sorted(c.label for c in tri.curves),
        "explicit_equations": len(tri.equations),
    }
    if tri.equations:
        derived = _system(tri, "derived")
        result["derived_slots"] = list(derived.slots)
    return result, EXIT_OK


def _solve(args, opts: SolverOptions, tri, sys: EquationSystem):
    try:
        return solve_complete_with_history(sys, _seed(args, tri, sys), opts)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_solve(args, opts: SolverOptions) -> tuple[dict, int]:
    tri = _load(args.path)
    sys = _system(tri, args.mode)
    s, history = _solve(args, opts, tri, sys)
    result = {
        "mode": args.mode,
        "shapes": encode_shapes(s),
        "volume": volume(s, opts.degeneracy),
        "holonomies": _holonomies(sys, s),
        "iterations": len(history) - 1,
        "residual_history": [float(r) for r in history],
    }
    if sys.slots is not None:
        result["shapes_explicit"] = encode_shapes(sys.to_explicit(s))
    return result, EXIT_OK


def _fill_one(sys, start, curve: str, n: int, opts: SolverOptions):
    try:
        return continue_filling(sys, curve, n, start, opts)
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from None
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_fill(args, opts: SolverOptions) -> tuple[dict, int]:
    tri = _load(args.path)
    sys = _system(tri, args.mode)
    start, _ = _solve(args, opts, tri, sys)
    rep = _fill_one(sys, start, args.curve, args.n, opts)
    result = {"mode": args.mode, "start_shapes": encode_shapes(start), **encode_degeneration(rep, sys)}
    code = EXIT_INCONCLUSIVE if rep.outcome is Outcome.INCONCLUSIVE else EXIT_OK
    return result, code


def cmd_search(args, opts: SolverOptions) -> tuple[dict, int]:
    tri = _load(args.path)
    sys = _system(tri, args.mode)
    orders = parse_orders(args.orders)
    curves = sorted(args.curves.split(",")) if args.curves else sorted(sys.curve_labels)
    for c in curves:
        if c not in sys.curve_labels:
            raise InputError(f"no curve named {c!r}; have {sorted(sys.curve_labels)}")
    start, _ = _solve(args, opts, tri, sys)
    rows = []
    for curve in curves:
        for n in orders:
            row = {"curve": curve, "n": n}
            try:
                rep = continue_filling(sys, curve, n, start, opts)
            except (SolverError, ArithmeticError, np.linalg.LinAlgError) as exc:
                row.update(outcome=None, error=f"{type(exc).__name__}: {exc}")
            else:
                row.update(
                    outcome=rep.outcome.value,
                    root_of_unity=encode_root(rep.root_of_unity),
                    root_curve=rep.root_curve,
                    volume=rep.volume,
                    t_reached=rep.t_reached,
                    error=None,
                )
            log.info("search %s n=%d: %s", curve, n, row.get("outcome") or row["error"])
            rows.append(row)
    ideal = [r for r in rows if r["outcome"] == Outcome.IDEAL_POINT_DEGENERATION.value]
    result = {"mode": args.mode, "orders": orders, "curves": curves, "rows": rows, "ideal_point_rows": len(ideal)}
    return result, EXIT_OK


def cmd_tangent(args, opts: SolverOptions) -> tuple[dict, int]:
    tri = _load(args.path)
    sys = _system(tri, args.mode)
    z = parse_complex_list(args.at)
    if len(z) != sys.num_shapes:
        raise InputError(f"--at has {len(z)} shapes, expected {sys.num_shapes}")
    s = sys.from_explicit(z) if sys.slots is not None else z
    sv = tangent_spectrum(sys, s)
    scale = sv[0] if len(sv) and sv[0] > 0 else 1.0
    rank = int(np.sum(sv > args.rank_tol * scale))
    n = sys.num_shapes
    if 0 < rank < len(sv):
        gap = float(sv[rank - 1] / sv[rank]) if sv[rank] > 0 else math.inf
    else:
        gap = None
    result = {
        "mode": args.mode,
        "at": encode_shapes(z),
        "singular_values": [float(x) for x in sv],
        "rank": rank,
        "nullity": n - rank,
        "gap_ratio": gap if gap is None or math.isfinite(gap) else "inf",
        "rank_tol": args.rank_tol,
    }
    return result, EXIT_OK


def _ptb_sample(gamma: complex, tol: float) -> dict:
    row: dict = {"gamma": encode_complex(gamma)}
    try:
        p = ptb.x0_point(gamma)
        r = ptb.build_representation(p)
    except (ptb.ExcludedLocus, ptb.WrongComponentOrReducible, ptb.ComponentMismatch, ValueError) as exc:
        row.update(error=f"{type(exc).__name__}: {exc}", passed=False)
        return row
    rel = r.relation_residuals()
    star = ptb.verify_star_system(p, r)
    try:
        plane = ptb.plane_curve_check(p, r)
    except BranchDegeneracy as exc:
        plane, row["plane_curve_note"] = None, str(exc)
    a2t = ptb.trace_a2t(r)
    a2t_res = min(abs(a2t - 2j), abs(a2t + 2j))
    signs = ptb.component_signs(p, r)
    checks = list(rel.values()) + list(star.values()) + [a2t_res] + ([plane] if plane is not None else [])
    row.update(
        alpha=encode_complex(p.alpha),
        beta=encode_complex(p.beta),
        tau=encode_complex(p.tau),
        trA2T=encode_complex(a2t),
        relations={k: float(v) for k, v in sorted(rel.items())},
        star_system={k: float(v) for k, v in sorted(star.items())},
        plane_curve=plane,
        a2t_residual=a2t_res,
        component_signs={k: float(v) for k, v in sorted(signs.items())},
        nullspace_gap=r.nullspace_gap if math.isfinite(r.nullspace_gap) else "inf",
        passed=bool(max(checks) < tol),
        error=None,
    )
    return row


def _encode_limit(rep: "ptb.IdealPointReport") -> dict:
    return {
        "direction": rep.direction.value,
        "rows": [{k: encode_complex(v) for k, v in row.items()} for row in rep.rows],
        "finite_slope": rep.finite_slope,
        "finite_trace_limit": encode_complex(rep.finite_trace_limit),
        "pole_slope": rep.pole_slope,
        "projective_limit": [encode_complex(c) for c in rep.projective_limit],
        "expected_point": list(rep.expected_point),
        "projective_error": max(abs(a - b) for a, b in zip(rep.projective_limit, rep.expected_point)),
        "root_of_unity": encode_root(rep.root),
    }


def cmd_ptb(args, opts: SolverOptions) -> tuple[dict, int]:
    check = args.check_tol
    if args.gamma:
        gammas = [parse_complex_list(g)[0] for g in args.gamma]
    else:
        if args.samples < 1:
            raise InputError("--samples must be positive")
        gammas = ptb.random_gammas(args.samples, seed=args.seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BranchDegeneracyWarning)
        samples = [_ptb_sample(g, check) for g in gammas]
    limits = []
    for d in ptb.Direction:
        try:
            limits.append(_encode_limit(ptb.ideal_point_limits(d)))
        except ptb.InconclusiveLimit as exc:
            limits.append({"direction": d.value, "error": str(exc)})
    complete = [
        {
            "gamma": encode_complex(p.gamma),
            "alpha_squared": encode_complex(p.alpha**2),
            "trL": encode_complex(p.trL),
            "tau": encode_complex(p.tau),
        }
        for p in ptb.find_complete_character()
    ]
    limits_ok = all(
        "error" not in lim and lim["root_of_unity"]["order"] == 4 and lim["projective_error"] < 1e-6 for lim in limits
    )
    passed = all(s["passed"] for s in samples) and limits_ok
    result = {
        "check_tol": check,
        "seed": args.seed,
        "samples": samples,
        "ideal_limits": limits,
        "complete_characters": complete,
        "surfaces": [dict(s) for s in ptb.SURFACES],
        "passed": passed,
    }
    return result, EXIT_OK if passed else EXIT_NUMERIC


COMMANDS = {
    "validate": cmd_validate,
    "solve": cmd_solve,
    "fill": cmd_fill,
    "search": cmd_search,
    "tangent": cmd_tangent,
    "ptb": cmd_ptb,
}


# -- output -----------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, dict) and set(v) == {"re", "im"}:
        z = complex(v["re"], v["im"])
        return f"{z.real:.12g}{z.imag:+.12g}i"
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, list) and all(not isinstance(x, (list, dict)) or set(x) == {"re", "im"} for x in v if x is not None):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _text_lines(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    items = obj.items() if isinstance(obj, dict) else enumerate(obj)
    for k, v in items:
        simple = not isinstance(v, (dict, list)) or (isinstance(v, dict) and set(v) == {"re", "im"})
        if isinstance(v, list) and _fmt(v).startswith("["):
            simple = True
        if simple:
            lines.append(f"{pad}{k}: {_fmt(v)}")
        else:
            lines.append(f"{pad}{k}:")
            lines.extend(_text_lines(v, indent + 1))
    return lines


def render(report: RunReport, fmt: str) -> str:
    if fmt == "json":
        return report.to_json()
    head = [f"command: {report.command}", f"input: {report.input}"]
    tol = ", ".join(f"{k}={v:g}" for k, v in sorted(report.tolerances.items()))
    return "\n".join(head + [f"tolerances: {tol}"] + _text_lines(report.result) + [f"wall_time_s: {report.wall_time_s:.3f}"])


# -- argument parsing -------------------------------------------------------


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = {"default": argparse.SUPPRESS} if suppress else {}
    p.add_argument("--output", choices=("json", "text"), help="report format (default json)", **d)
    p.add_argument("--tol", type=float, help="Newton residual tolerance", **d)
    p.add_argument("--max-steps", type=int, help="continuation step budget", **d)
    p.add_argument("--quiet", action="store_true", help="suppress progress messages", **d)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="idealpoints", description="Gluing-equation deformation and ideal-point search.")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    def file_cmd(name: str, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help)
        p.add_argument("path", help="triangulation file, or a bundled name such as m137")
        return p

    file_cmd("validate", "parse a file and summarize its edge classes")
    for name, help in (("solve", "solve for the complete structure"), ("fill", "continue toward 1/n orbifold filling"),
                       ("search", "run fillings over curves and orders"), ("tangent", "tangent-space nullity at a point")):
        p = file_cmd(name, help)
        p.add_argument("--mode", choices=("explicit", "derived"), default="explicit")
        if name != "tangent":
            p.add_argument("--seed", help="starting shapes, e.g. '0.5+0.9i, ...' (explicit labeling)")
        if name == "fill":
            p.add_argument("--curve", required=True)
            p.add_argument("--n", type=int, required=True)
        if name == "search":
            p.add_argument("--orders", default="2,3")
            p.add_argument("--curves", help="comma-separated curve labels (default all)")
        if name == "tangent":
            p.add_argument("--at", required=True, help="point, e.g. '(exp(i*pi/6)/sqrt(3), 1, 1, 0)'")
            p.add_argument("--rank-tol", type=float, default=1e-9)

    p = sub.add_parser("ptb", parents=[common], help="verification suite for the punctured-torus bundle")
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma", action="append", help="explicit gamma value (repeatable); overrides --samples")
    p.add_argument("--check-tol", type=float, default=1e-8)
    return parser


def run(argv=None) -> tuple[RunReport | None, int, str]:
    """Parse ``argv`` and run the command; returns (report, exit code, output format)."""
    parser = build_parser()
    args = parser.parse_args(argv)
    args.output = getattr(args, "output", None) or "json"
    for name in ("tol", "max_steps"):
        if not hasattr(args, name):
            setattr(args, name, None)
    args.quiet = getattr(args, "quiet", False)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s", stream=sys.stderr)
    opts = _options(args)
    source = "builtin:ptb" if args.command == "ptb" else args.path
    tolerances = {"newton": opts.tol, "degeneracy": opts.degeneracy, "root": ROOT_TOL}
    start = time.perf_counter()
    try:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            result, code = COMMANDS[args.command](args, opts)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None, EXIT_INPUT, args.output
    except SolverError as exc:
        result = {"error": f"{type(exc).__name__}: {exc}"}
        if isinstance(exc, NoConvergence):
            result["residual_history"] = [float(r) for r in exc.residuals]
        code = EXIT_NUMERIC
    report = RunReport(args.command, source, tolerances, result, time.perf_counter() - start)
    return report, code, args.output


def main(argv=None) -> int:
    report, code, fmt = run(argv)
    if report is not None:
        print(render(report, fmt))
    return code


if __name__ == "__main__":
    sys.exit(main())
