"""tsgronwall command line.

Exit codes: 0 success, 1 hypothesis or validation failure, 2 usage or parse
error. Failures print a single ``tag: message`` line on stderr.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import harness, scenario
from .bounds import THEOREMS, compute_bound
from .dynamics import verify_application
from .errors import GronwallError, UsageError
from .expr import PROPERTIES, PROPERTY_ALIASES, ScalarMap, check_properties


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tsgronwall", description="Gronwall-Bihari bounds on finite time scales.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    for name, text in (("bound", "compute a bound report"),
                       ("verify", "extremal domination check"),
                       ("solve", "solve the integro-dynamic IVP and check its estimate"),
                       ("sweep", "randomized domination sweep"),
                       ("converge", "refinement study")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("file", help="scenario JSON file")
        sp.add_argument("-o", "--output", help="CSV path (default: scenario 'output' or stdout)")
    cf = sub.add_parser("check-fn", help="sample structural properties of a nonlinearity")
    cf.add_argument("expr", help='expression in x, e.g. "sqrt(x)"')
    cf.add_argument("--props", default=",".join(PROPERTIES),
                    help="comma list: nondec, pos, sub, submul, classS (default: all)")
    cf.add_argument("--hi", type=float, default=10.0, help="sample (0, HI] (default 10)")
    cf.add_argument("--samples", type=int, default=200)
    cf.add_argument("--seed", type=int, default=0)
    return p


@contextlib.contextmanager
def _sink(path: Optional[str], stdout):
    if path is None:
        yield stdout
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        yield fh


def _output_path(args, sc) -> Optional[str]:
    return args.output or sc.get("output")


def _cmd_bound(args, stdout, stderr) -> int:
    sc = scenario.load(args.file, "bound")
    rep = compute_bound(sc.instance())
    with _sink(_output_path(args, sc), stdout) as out:
        harness.write_csv(out, harness.REPORT_COLUMNS, rep.rows())
    if not rep.all_in_domain:
        first = rep.t[~rep.in_domain][0]
        print(f"note: bound undefined from t={float(first)!r} on (side condition fails)", file=stderr)
    return 0


def _cmd_verify(args, stdout, stderr) -> int:
    sc = scenario.load(args.file, "verify")
    inst = sc.instance()
    u = harness.synthesize_u_equality(inst)
    rep = harness.verify_domination(inst, u)
    with _sink(_output_path(args, sc), stdout) as out:
        harness.write_csv(out, harness.REPORT_COLUMNS, rep.rows())
    if not rep.passed:
        print(f"domination-failed: {rep.violations} point(s) exceed the bound", file=stderr)
        return 1
    return 0


def _cmd_solve(args, stdout, stderr) -> int:
    sc = scenario.load(args.file, "solve")
    spec = sc.ivp()
    rep = verify_application(spec, x0=float(sc.get("x0", 1.0)))
    with _sink(_output_path(args, sc), stdout) as out:
        harness.write_csv(out, harness.REPORT_COLUMNS, rep.rows())
    if not rep.passed:
        print("estimate-failed: |u| exceeds the a-priori estimate", file=stderr)
        return 1
    return 0


def _cmd_sweep(args, stdout, stderr) -> int:
    sc = scenario.load(args.file, "sweep")
    seed = int(sc.get("seed", 0))
    count = int(sc.get("count", 10))
    if count < 1:
        raise scenario.ScenarioError("count must be positive")
    theorems = [str(t).upper() for t in sc.get("theorems", THEOREMS)]
    bad = [t for t in theorems if t not in THEOREMS]
    if bad:
        raise scenario.ScenarioError(f"unknown theorems {bad}")
    specs = sc.get("scales")
    if specs is not None:
        for s in specs:
            sc._keyed("scales", harness.build_timescale, s)
    res = harness.sweep(range(seed, seed + count), theorems, specs)
    with _sink(_output_path(args, sc), stdout) as out:
        harness.write_csv(out, harness.SWEEP_COLUMNS, (r.as_tuple() for r in res.rows))
    print(f"checked={res.checked} violations={res.violations} overflow_skipped={res.skipped}",
          file=stderr)
    return 1 if res.violations else 0


def _cmd_converge(args, stdout, stderr) -> int:
    sc = scenario.load(args.file, "converge")
    sc.require("scale", "factors")
    quantity = sc.get("quantity", "bound")
    if quantity not in ("exp", "p", "bound"):
        raise scenario.ScenarioError(f"quantity must be exp, p or bound, got {quantity!r}")
    functions = {k: scenario._expr_text(sc.get(k)) for k in ("a", "f", "Phi", "W", "k", "h", "b", "g")
                 if k in sc.data}
    rows = sc._keyed("scale", harness.convergence_study, sc.get("scale"), sc.get("factors"), quantity,
                     functions, sc.get("theorem"), float(sc.get("x0", 1.0)),
                     float(sc.get("delta0", 1.0)))
    with _sink(_output_path(args, sc), stdout) as out:
        harness.write_csv(out, harness.CONVERGENCE_COLUMNS, (r.as_tuple() for r in rows))
    return 0


def _cmd_check_fn(args, stdout, stderr) -> int:
    props = [p.strip() for p in args.props.split(",") if p.strip()]
    unknown = [p for p in props if PROPERTY_ALIASES.get(p, p) not in PROPERTIES]
    if unknown:
        raise UsageError(f"unknown properties {unknown}; use nondec, pos, sub, submul, classS")
    m = ScalarMap(args.expr, "m")
    try:
        certs = check_properties(m, args.hi, args.samples, args.seed, props)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for cert in certs.values():
        print(cert, file=stdout)
    return 0 if all(c.passed for c in certs.values()) else 1


COMMANDS = {
    "bound": _cmd_bound,
    "verify": _cmd_verify,
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "converge": _cmd_converge,
    "check-fn": _cmd_check_fn,
}


def _describe(exc: GronwallError, args) -> str:
    msg = " ".join(str(exc).split())
    key = getattr(exc, "key", None)
    file = getattr(args, "file", None) if args is not None else None
    if file and (key or exc.exit_code == 1):
        try:
            sc = scenario.Scenario({}, "", Path(file), Path(file).read_text(encoding="utf-8"))
            msg += f" [{sc.where(key)}]"
        except OSError:
            pass
    return f"{exc.tag}: {msg}"


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = None
    try:
        args = _parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: " + ", ".join(COMMANDS))
        return COMMANDS[args.command](args, stdout, stderr)
    except GronwallError as exc:
        print(_describe(exc, args), file=stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"io: {exc}", file=stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
