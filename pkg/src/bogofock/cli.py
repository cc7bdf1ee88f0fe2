"""Command-line front end.

    bogofock demo NAME [--out FILE]
    bogofock check FILE [--tol NAME=VALUE] [--out FILE]
    bogofock flow FILE [--t-grid LIST] [--format csv|report] [--out FILE]
    bogofock verify FILE [--n-max N] [--sector-cap C] [--t-grid LIST]
                         [--tol NAME=VALUE]... [--seed S] [--out FILE]

Exit codes: 0 pass, 1 verification failure, 2 input error, 3 internal error.
Reports are JSON lines: a header record, one record per check, a summary.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import traceback

from bogofock import __version__
from bogofock.errors import DimensionError, DomainError, PreconditionError
from bogofock.problem import DEMOS, ProblemError, demo, dump_problem, read_problem
from bogofock.suites import (
    DEFAULT_FLOW_GRID,
    DEFAULT_VERIFY_GRID,
    ConfigError,
    Entry,
    RunConfig,
    check_flow_norm,
    default_n_max,
    default_sector_cap,
    flow_rows,
    run_check,
    run_verify,
)

__all__ = ["main", "REPORT_SCHEMA"]

REPORT_SCHEMA = "bogofock-report/1"
EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3
FLOW_COLUMNS = ("t", "norm_b11", "norm_b12", "norm_b21", "norm_b22", "k_norm", "k_hs", "tau", "theta")

INPUT_ERRORS = (ProblemError, ConfigError, DimensionError, DomainError, PreconditionError)


class InputError(Exception):
    pass


def fmt(x) -> str:
    """Stable text for a float: 10 significant digits."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x + 0.0, ".10g")


def _num(x):
    # JSON-friendly rounded value; non-finite values become strings
    x = float(x)
    return float(fmt(x)) if math.isfinite(x) else fmt(x)


def _record(e: Entry) -> dict:
    return {
        "record": "check",
        "suite": e.suite,
        "name": e.name,
        "t": None if e.t is None else _num(e.t),
        "residual": _num(e.residual),
        "tolerance": _num(e.tolerance),
        "pass": bool(e.passed),
        "n_max": int(e.n_max),
        "sector_cap": int(e.sector_cap),
    }


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(", ", ": "))


def render_report(command: str, entries: list[Entry], config: dict) -> str:
    failed = sum(not e.passed for e in entries)
    lines = [_dumps({"record": "header", "schema": REPORT_SCHEMA, "command": command, "config": config})]
    lines += [_dumps(_record(e)) for e in entries]
    lines.append(_dumps({"record": "summary", "checks": len(entries), "failed": failed}))
    return "\n".join(lines) + "\n"


def summary_lines(entries: list[Entry]) -> list[str]:
    out = []
    for e in entries:
        when = "" if e.t is None else f" t={fmt(e.t)}"
        status = "PASS" if e.passed else "FAIL"
        out.append(f"{status} {e.suite}:{e.name}{when} residual={fmt(e.residual)} tol={fmt(e.tolerance)}")
    failed = sum(not e.passed for e in entries)
    out.append(f"{len(entries) - failed}/{len(entries)} checks passed")
    return out


def parse_grid(text: str) -> tuple[float, ...]:
    try:
        grid = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise InputError(f"bad t grid {text!r}") from None
    if not grid:
        raise InputError("t grid is empty")
    return grid


def parse_tols(items) -> dict:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"--tol expects NAME=VALUE, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise InputError(f"bad tolerance value in {item!r}") from None
    return out


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        try:
            with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise InputError(f"cannot write {out_path}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


def cmd_demo(args) -> int:
    _emit(dump_problem(demo(args.name)), args.out)
    return EXIT_PASS


def cmd_check(args) -> int:
    problem = read_problem(args.problem)
    entries = run_check(problem, parse_tols(args.tol))
    if args.out:
        _emit(render_report("check", entries, {"kind": problem.kind, "d": problem.d}), args.out)
    print("\n".join(summary_lines(entries)))
    return EXIT_PASS if all(e.passed for e in entries) else EXIT_FAIL


def cmd_flow(args) -> int:
    problem = read_problem(args.problem)
    if problem.kind != "generator":
        raise InputError("flow needs a problem of kind 'generator'")
    if not _validated(problem):
        return EXIT_FAIL
    g = problem.generator()
    grid = parse_grid(args.t_grid) if args.t_grid else DEFAULT_FLOW_GRID
    check_flow_norm(g, grid)
    rows = flow_rows(g, grid)
    if args.format == "csv":
        lines = [",".join(FLOW_COLUMNS)]
        lines += [",".join(fmt(row[c]) for c in FLOW_COLUMNS) for row in rows]
    else:
        lines = [_dumps({"record": "header", "schema": REPORT_SCHEMA, "command": "flow", "config": {"t_grid": [_num(t) for t in grid]}})]
        lines += [_dumps({"record": "flow", **{c: _num(row[c]) for c in FLOW_COLUMNS}}) for row in rows]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_PASS


def build_config(args, d: int) -> RunConfig:
    n_max = default_n_max(d) if args.n_max is None else args.n_max
    cap = default_sector_cap(d) if args.sector_cap is None else args.sector_cap
    grid = parse_grid(args.t_grid) if args.t_grid else DEFAULT_VERIFY_GRID
    return RunConfig(n_max, cap, grid, parse_tols(args.tol), args.seed, args.out)


def cmd_verify(args) -> int:
    problem = read_problem(args.problem)
    cfg = build_config(args, problem.d)
    if not _validated(problem):
        return EXIT_FAIL
    if problem.kind == "generator":
        check_flow_norm(problem.generator(), cfg.t_grid + (sum(cfg.t_grid[:2]),))
    try:
        entries = run_verify(problem, cfg)
    except Exception as exc:
        raise SuiteFailure(exc) from exc
    if args.format == "csv":
        text = render_csv(entries)
    else:
        config = {
            "kind": problem.kind,
            "d": problem.d,
            "n_max": cfg.n_max,
            "sector_cap": cfg.sector_cap,
            "t_grid": [_num(t) for t in cfg.t_grid],
            "tolerances": {k: _num(v) for k, v in sorted(cfg.tolerances.items())},
            "seed": cfg.seed,
        }
        text = render_report("verify", entries, config)
    if args.out:
        _emit(text, args.out)
        print("\n".join(summary_lines(entries)))
    else:
        sys.stdout.write(text)
    return EXIT_PASS if all(e.passed for e in entries) else EXIT_FAIL


def _validated(problem) -> bool:
    """Run the membership checks; print failures and return False if any."""
    entries = run_check(problem)
    bad = [e for e in entries if not e.passed]
    if bad:
        print("\n".join(summary_lines(bad)[:-1]), file=sys.stderr)
        print("error: problem failed validation", file=sys.stderr)
    return not bad


def render_csv(entries: list[Entry]) -> str:
    lines = ["suite,name,t,residual,tolerance,pass,n_max,sector_cap"]
    for e in entries:
        t = "" if e.t is None else fmt(e.t)
        cells = (e.suite, e.name, t, fmt(e.residual), fmt(e.tolerance), str(e.passed).lower(), str(e.n_max), str(e.sector_cap))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


class SuiteFailure(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bogofock", description="Bogoliubov transformations on truncated Fock spaces.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log warnings from the numerical core")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("demo", help="write a builtin problem file")
    d.add_argument("name", help=f"one of: {', '.join(DEMOS)}")
    d.add_argument("--out")
    d.set_defaults(func=cmd_demo)

    c = sub.add_parser("check", help="membership checks for a generator or element")
    c.add_argument("problem")
    c.add_argument("--tol", action="append", metavar="NAME=VALUE")
    c.add_argument("--out")
    c.set_defaults(func=cmd_check)

    f = sub.add_parser("flow", help="tabulate the flow of a generator")
    f.add_argument("problem")
    f.add_argument("--t-grid", help="comma-separated times")
    f.add_argument("--format", choices=("csv", "report"), default="csv")
    f.add_argument("--out")
    f.set_defaults(func=cmd_flow)

    v = sub.add_parser("verify", help="run the full verification battery")
    v.add_argument("problem")
    v.add_argument("--n-max", type=int)
    v.add_argument("--sector-cap", type=int)
    v.add_argument("--t-grid", help="comma-separated times")
    v.add_argument("--tol", action="append", metavar="NAME=VALUE")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--format", choices=("report", "csv"), default="report")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, *INPUT_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SuiteFailure as exc:
        print(f"internal error: {type(exc.__cause__).__name__}: {exc.__cause__}", file=sys.stderr)
        traceback.print_exception(exc.__cause__, file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        traceback.print_exc(file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
