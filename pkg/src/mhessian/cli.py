"""Command-line front end: ``mhessian {trace, solve, verify, plotdata}``.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
3 convexity-gate refusal, 4 solver divergence.
"""
import argparse
import json
import logging
import os
import sys

import numpy as np

from . import serialize
from .domain import Domain
from .errors import ArgumentError, ConvergenceError, ConvexityGateError, DomainError
from .harness import SUITES, Settings, run_suites
from .integrals import hessian_integral
from .solver import (GRID_TOL, RADIAL_TOL, DirichletProblem, quadratic_coefficient,
                     solve_grid_newton, solve_radial_ode)
from .symfunc import cone_membership, m_trace_gradient, sym_matrix, traces

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_GATE, EXIT_DIVERGED = 0, 1, 2, 3, 4

log = logging.getLogger("mhessian")


# ---------------------------------------------------------------------------
# commands

def _load_matrix(src):
    text = src
    if os.path.exists(src):
        with open(src) as fh:
            text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArgumentError(f"matrix is not valid JSON: {exc}") from None
    try:
        return sym_matrix(data)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ArgumentError):
            raise
        raise ArgumentError(f"matrix must be a JSON array of numeric rows: {exc}") from None


def cmd_trace(args):
    S = _load_matrix(args.matrix)
    n = S.shape[0]
    m = n if args.m is None else args.m
    if not 1 <= m <= n:
        raise ArgumentError(f"m={m} outside [1, {n}]")
    tr = traces(S, args.method)
    verdict = cone_membership(S, m)
    out = {
        "schema_version": serialize.SCHEMA_VERSION,
        "n": n,
        "m": m,
        "traces": tr.tolist(),
        "m_trace": float(tr[m]),
        "gradient": m_trace_gradient(S, m).tolist(),
        "cone": {"member": verdict.member, "first_failure": verdict.first_failure,
                 "margin": verdict.margin, "threshold": verdict.threshold},
    }
    text = serialize.dumps(out)
    if args.out:
        serialize.write_atomic(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK


def _domain(args):
    kind = args.domain or ("disc" if args.n == 2 else "ball")
    R = 1.0 if args.radius is None else args.radius
    if kind == "ball":
        if args.n is None:
            raise ArgumentError("--n is required for a ball")
        return Domain.ball(args.n, R) if args.n != 2 else Domain.disc(R)
    if kind == "disc":
        if args.n not in (None, 2):
            raise ArgumentError("a disc needs --n 2")
        return Domain.disc(R)
    if kind == "ellipse":
        a, b = args.axes or (1.5, 1.0)
        return Domain.ellipse(a, b)
    raise ArgumentError(f"unknown domain {kind!r}")


def cmd_solve(args):
    dom = _domain(args)
    n = dom.n
    if args.m is None:
        raise ArgumentError("--m is required")
    if not 1 <= args.m <= n:
        raise ArgumentError(f"m={args.m} outside [1, {n}]")
    problem = DirichletProblem(dom, args.m, args.l, args.psi)
    radial = (args.domain or ("disc" if args.n == 2 else "ball")) == "ball"
    if radial:
        sol = solve_radial_ode(n, args.m, args.psi, dom.R, args.grid or 129, args.l,
                               tol=args.tol or RADIAL_TOL)
    else:
        N = args.grid or 64
        sol = solve_grid_newton(problem, N, N, tol=args.tol or GRID_TOL)
    w = sol.w
    table = {str(p): hessian_integral(w, p) for p in range(args.m + 1)}
    scale = dom.R if dom.is_round else 1.0
    summary = dict(sol.summary())
    summary.update(domain=dom.to_dict(), m=args.m, l=args.l, psi=args.psi,
                   a_estimate=-2.0 * float(w.values.flat[0]) / scale ** 2 if dom.is_round else None,
                   a_closed_form=quadratic_coefficient(n, args.m, args.l, args.psi) if dom.is_round else None,
                   hessian_integrals=table, worst_node=list(sol.admissibility.worst_node))
    os.makedirs(args.out, exist_ok=True)
    record = serialize.function_to_dict(w)
    record["solution"] = summary
    serialize.write_json(os.path.join(args.out, "solution.json"), record)
    header, rows = serialize.function_rows(w)
    serialize.write_csv(os.path.join(args.out, "solution.csv"), header, rows)
    print(f"domain      {dom.kind} n={n}  m={args.m} l={args.l}")
    print(f"residual    {sol.residual_inf:.3e}")
    print(f"iterations  {sol.iterations}")
    print(f"admissible  {sol.admissibility.admissible}")
    if summary["a_estimate"] is not None:
        print(f"a           {summary['a_estimate']:.10f} (closed form {summary['a_closed_form']:.10f})")
    for p, v in table.items():
        print(f"I_{p}         {v:.10e}")
    print(f"wrote       {os.path.join(args.out, 'solution.json')}")
    return EXIT_OK


def _settings(args):
    kw = {"seed": args.seed}
    if args.n is not None:
        kw["dims"] = (args.n,)
        kw["property_dims"] = (args.n,)
    elif args.domain in ("disc", "ellipse"):
        kw["dims"] = (2,)
        kw["property_dims"] = (2,)
    if args.domain:
        kw["domain"] = args.domain
    if args.radius is not None:
        kw["radius"] = args.radius
    if args.axes:
        kw["axes"] = tuple(args.axes)
    if args.grid:
        kw["grid"] = args.grid
        kw["radial_nodes"] = args.grid
    if args.samples is not None:
        if args.samples < 1:
            raise ArgumentError("--samples must be positive")
        kw["samples"] = args.samples
        kw["property_samples"] = args.samples
    return Settings(**kw)


def cmd_verify(args):
    names = args.suite
    if isinstance(names, str):
        names = [names]
    if not names:
        raise ArgumentError("name at least one suite, or 'all'")
    if "all" in names and len(names) > 1:
        raise ArgumentError("'all' cannot be combined with other suites")
    settings = _settings(args)
    reports = run_suites(names, settings)
    failed = [r for r in reports if not r.passed]
    os.makedirs(args.out, exist_ok=True)
    json_path = os.path.join(args.out, "report.json")
    csv_path = os.path.join(args.out, "report.csv")
    payload = {
        "suites": names,
        "settings": {k: getattr(settings, k) for k in settings.__dataclass_fields__},
        "summary": {"total": len(reports), "failed": len(failed)},
        "reports": [r.to_dict() for r in reports],
    }
    serialize.write_json(json_path, payload)
    rows = [(r.name, r.m, r.l, r.lhs, r.rhs, r.margin, r.verdict) for r in reports]
    serialize.write_csv(csv_path, ["name", "m", "l", "lhs", "rhs", "margin", "verdict"], rows)
    by_name = {}
    for r in reports:
        tot, bad, worst = by_name.get(r.name, (0, 0, np.inf))
        by_name[r.name] = (tot + 1, bad + (not r.passed), min(worst, r.margin))
    for name, (tot, bad, worst) in by_name.items():
        print(f"{name:<14} {tot:5d} checks  {bad:3d} failed  worst margin {worst: .3e}")
    if failed:
        print(f"FAIL: {len(failed)} of {len(reports)} checks failed; see {json_path}")
        return EXIT_FAIL
    print(f"PASS: {len(reports)} checks; report in {json_path}")
    return EXIT_OK


def cmd_plotdata(args):
    data = serialize.read_json(args.input)
    if "reports" in data:
        header = ["index", "name", "m", "l", "margin"]
        rows = [(i, r["name"], r["m"], r["l"], r["margin"]) for i, r in enumerate(data["reports"])]
    elif data.get("kind") in ("radial", "polar"):
        u = serialize.function_from_dict(data)
        header, rows = serialize.function_rows(u)
    else:
        raise ArgumentError(f"{args.input}: neither a solution nor a report")
    text = serialize.csv_text(header, rows)
    if args.out:
        serialize.write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def _common(p, out_default=None):
    p.add_argument("--config", help="JSON file whose keys mirror the long flags")
    p.add_argument("--domain", choices=("ball", "disc", "ellipse"))
    p.add_argument("--n", type=int, help="space dimension")
    p.add_argument("--m", type=int, help="operator order")
    p.add_argument("--l", type=int, default=0, help="lower order of the quotient")
    p.add_argument("--radius", type=float, help="ball or disc radius")
    p.add_argument("--axes", type=float, nargs=2, metavar=("A", "B"), help="ellipse semi-axes")
    p.add_argument("--grid", type=int, help="nodes per direction")
    p.add_argument("--tol", type=float, help="Newton residual tolerance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, help="random inputs per configuration")
    p.add_argument("--out", default=out_default)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser(config=None):
    parser = argparse.ArgumentParser(prog="mhessian", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", help="m-traces, gradient and cone verdict of a matrix")
    p.add_argument("matrix", help="JSON array of rows, or a file containing one")
    p.add_argument("--m", type=int)
    p.add_argument("--method", choices=("eig", "faddeev"), default="eig")
    p.add_argument("--out")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("solve", help="solve T_m[w] = psi T_l[w] with zero boundary data")
    _common(p, "mhessian-solve")
    p.add_argument("--psi", type=float, default=1.0, help="constant right-hand side")
    p.set_defaults(func=cmd_solve, **(config or {}))

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("suite", nargs="*", help=f"'all' or any of: {', '.join(SUITES)}")
    _common(p, "mhessian-verify")
    p.set_defaults(func=cmd_verify, **(config or {}))

    p = sub.add_parser("plotdata", help="CSV columns from a solution or report JSON")
    p.add_argument("input")
    p.add_argument("--out")
    p.set_defaults(func=cmd_plotdata)
    return parser


CONFIG_KEYS = {"domain", "n", "m", "l", "radius", "axes", "grid", "tol", "seed", "samples",
               "out", "psi", "suite", "verbose"}


def _load_config(argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    cfg = serialize.read_json(known.config)
    cfg.pop("schema_version", None)
    unknown = sorted(set(cfg) - CONFIG_KEYS)
    if unknown:
        raise ArgumentError(f"{known.config}: unknown keys {', '.join(unknown)}")
    return cfg


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = _load_config(argv)
    except ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser = build_parser(cfg)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    logging.basicConfig(level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if getattr(args, "tol", None) is not None and not args.tol > 0:
            raise ArgumentError("--tol must be positive")
        return args.func(args)
    except ConvexityGateError as exc:
        print(f"error: convexity gate: {exc}", file=sys.stderr)
        return EXIT_GATE
    except ConvergenceError as exc:
        print(f"error: solver diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ArgumentError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
