"""Command-line front end: ``pdlsat check|model|trace|bench|selftest``.

Exit codes: 0 satisfiable, 1 unsatisfiable, 2 bad input or exhausted
budget, 3 a self-verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .engine import (
    DEFAULT_TIME_BUDGET, BudgetExceeded, InvariantViolation, SolverConfig, Verdict, solve,
)
from .bench import FAMILIES, rows_to_csv, run_family
from .model import check_hintikka, model_check
from .suites import SUITES, run_suite
from .syntax import Formula, ParseError, parse
from .trace import to_dot, to_json

EXIT_SAT, EXIT_UNSAT, EXIT_ERROR, EXIT_VERIFY = 0, 1, 2, 3
MODES = ("check", "model", "trace", "bench", "selftest")


@dataclass
class RunConfig:
    mode: str
    node_budget: Optional[int] = None  # None defers to the environment / default
    time_budget: float = DEFAULT_TIME_BUDGET
    seed: int = 0
    trace_format: str = "dot"

    def __post_init__(self):
        if self.node_budget is not None and self.node_budget <= 0:
            raise ValueError("--nodes must be positive")
        if self.time_budget <= 0:
            raise ValueError("--time must be positive")

    def solver(self, **kwargs) -> SolverConfig:
        if self.node_budget is not None:
            kwargs["node_budget"] = self.node_budget
        return SolverConfig.from_env(time_budget=self.time_budget, **kwargs)


@dataclass
class RunReport:
    verdict: Verdict
    nodes_expanded: int
    max_hcr_len: int
    wall_time: float

    @property
    def label(self) -> str:
        return "SAT" if self.verdict else "UNSAT"

    @property
    def exit_code(self) -> int:
        return EXIT_SAT if self.verdict else EXIT_UNSAT

    def line(self) -> str:
        return (f"{self.label} nodes={self.nodes_expanded} max_hcr={self.max_hcr_len} "
                f"time={self.wall_time * 1000:.3f}ms")


class InputError(Exception):
    pass


def _run(f: Formula, cfg: SolverConfig):
    start = time.perf_counter()
    res = solve(f, cfg)
    elapsed = time.perf_counter() - start
    return res, RunReport(res.verdict, res.stats.nodes, res.stats.max_hcr_len, elapsed)


def read_formula(args) -> Formula:
    if args.file is not None and args.formula is not None:
        raise InputError("give either FORMULA or -f FILE, not both")
    if args.file is not None:
        try:
            text = sys.stdin.read() if args.file == "-" else Path(args.file).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {args.file}: {exc.strerror}") from exc
    elif args.formula is not None:
        text = args.formula
    else:
        raise InputError("no formula given")
    try:
        return parse(text)
    except ParseError as exc:
        raise InputError(f"parse error at {exc}") from exc


def cmd_check(f: Formula, rc: RunConfig, out=None) -> int:
    out = out or sys.stdout
    _, report = _run(f, rc.solver())
    print(report.line(), file=out)
    return report.exit_code


def cmd_model(f: Formula, rc: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    res, report = _run(f, rc.solver(want_model=True))
    if not res.verdict:
        print(report.line(), file=out)
        return EXIT_UNSAT
    h = res.verdict.model
    m = h.model
    if not model_check(m, m.designated, res.formula):
        print("error: extracted model fails model_check at the designated world", file=err)
        return EXIT_VERIFY
    hint = check_hintikka(h, res.formula)
    if not hint:
        print(f"error: extracted structure is not a Hintikka structure: {hint}", file=err)
        return EXIT_VERIFY
    print(json.dumps(m.to_json()), file=out)
    print(report.line(), file=err)
    return EXIT_SAT


def cmd_trace(f: Formula, rc: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    res, report = _run(f, rc.solver(keep_tree=True, check_invariants=True))
    if rc.trace_format == "json":
        out.write(to_json(res.root, res.formula, report.label))
    else:
        out.write(to_dot(res.root, res.formula))
    print(report.line(), file=err)
    return report.exit_code


def parse_sizes(text: str) -> list[int]:
    """``"1-5"``, ``"2,4,8"`` or a mix; empty text gives no sizes."""
    sizes = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        lo, sep, hi = part.partition("-")
        try:
            sizes += list(range(int(lo), int(hi) + 1)) if sep else [int(lo)]
        except ValueError:
            raise InputError(f"bad size range {part!r}") from None
    if any(s < 1 for s in sizes):
        raise InputError("sizes must be positive")
    return sizes


def cmd_bench(families: Sequence[str], sizes: Sequence[int], rc: RunConfig, csv_path=None,
              plot_path=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    cfg = rc.solver()
    rows = []
    for fam in families:
        rows += run_family(fam, sizes, cfg)
    text = rows_to_csv(rows)
    if csv_path:
        Path(csv_path).write_text(text, encoding="utf-8")
        if plot_path is None:
            plot_path = Path(csv_path).with_suffix(".png")
    else:
        out.write(text)
    if plot_path:
        from .plotting import plot_node_counts
        plot_node_counts(rows, plot_path)
        print(f"plot written to {plot_path}", file=err)
    return EXIT_SAT


def cmd_selftest(rc: RunConfig, suites: Sequence[str], oracle_depth: int = 3, count: int = 500,
                 out=None) -> int:
    out = out or sys.stdout
    cfg = rc.solver()
    extra = {"oracle": {"depth": oracle_depth}, "extraction": {"seed": rc.seed, "count": count}}
    all_ok = True
    for name in suites:
        res = run_suite(name, cfg, **extra.get(name, {}))
        print(res.summary(), file=out)
        for what in res.failures[:10]:
            print(f"  FAIL {what}", file=out)
        if len(res.failures) > 10:
            print(f"  ... {len(res.failures) - 10} more", file=out)
        all_ok &= res.ok
    print("selftest passed" if all_ok else "selftest FAILED", file=out)
    return EXIT_SAT if all_ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--nodes", type=int, metavar="N",
                        help="node budget (default: $PDLSAT_BUDGET_NODES or 10^7)")
    common.add_argument("--time", type=float, default=DEFAULT_TIME_BUDGET, metavar="S",
                        help="time budget per run in seconds (default: %(default)s)")
    common.add_argument("--seed", type=int, default=0, metavar="K", help="generator seed")
    common.add_argument("--format", choices=("dot", "json"), default="dot", help="trace format")

    with_formula = argparse.ArgumentParser(add_help=False)
    with_formula.add_argument("formula", nargs="?", metavar="FORMULA")
    with_formula.add_argument("-f", dest="file", metavar="FILE", help="read the formula from FILE ('-' for stdin)")

    p = argparse.ArgumentParser(prog="pdlsat", description="Satisfiability checking for PDL formulas.")
    sub = p.add_subparsers(dest="mode", required=True)
    sub.add_parser("check", parents=[common, with_formula], help="decide satisfiability")
    sub.add_parser("model", parents=[common, with_formula], help="print a verified model as JSON")
    sub.add_parser("trace", parents=[common, with_formula], help="dump the tableau as DOT or JSON")

    b = sub.add_parser("bench", parents=[common], help="node counts for formula families, as CSV")
    b.add_argument("--family", action="append", choices=sorted(FAMILIES),
                   help="family to run (repeatable; default: all)")
    b.add_argument("--sizes", default="1-6", help="sizes, e.g. 1-6 or 1,2,4 (default: %(default)s)")
    b.add_argument("--out", metavar="CSV", help="write CSV here instead of stdout (plot goes alongside)")
    b.add_argument("--plot", metavar="PNG", help="write a node-count plot")

    s = sub.add_parser("selftest", parents=[common], help="run the built-in suites")
    s.add_argument("--list", action="store_true", help="list suite names and exit")
    s.add_argument("--suite", action="append", choices=list(SUITES), help="suite to run (repeatable)")
    s.add_argument("--oracle-depth", type=int, default=3, help="formula depth for the oracle suite")
    s.add_argument("--count", type=int, default=500, help="formulas in the extraction suite")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rc = RunConfig(args.mode, args.nodes, args.time, args.seed, args.format)
        if args.mode == "selftest":
            if args.list:
                print("\n".join(SUITES))
                return EXIT_SAT
            return cmd_selftest(rc, args.suite or list(SUITES), args.oracle_depth, args.count)
        if args.mode == "bench":
            return cmd_bench(args.family or list(FAMILIES), parse_sizes(args.sizes), rc, args.out, args.plot)
        f = read_formula(args)
        return {"check": cmd_check, "model": cmd_model, "trace": cmd_trace}[args.mode](f, rc)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except InvariantViolation as exc:
        print(f"error: invariant violated: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
