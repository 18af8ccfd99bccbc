"""Parametrised formula families and a node-count benchmark harness."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .engine import BudgetExceeded, SolverConfig, solve
from .syntax import And, Atom, Atomic, Box, Diamond, Formula, Not, Seq, Star


def _chain(k: int):
    prog = Atomic("a")
    for _ in range(k - 1):
        prog = Seq(Atomic("a"), prog)
    return prog


def seq_family(n: int) -> Formula:
    """<a;a;...;a>p with ``n`` steps."""
    return Diamond(_chain(n), Atom("p"))


def nested_star_family(n: int) -> Formula:
    """<(..(a*)*..)*>p with ``n`` stars."""
    prog = Atomic("a")
    for _ in range(n):
        prog = Star(prog)
    return Diamond(prog, Atom("p"))


def blocked_family(n: int) -> Formula:
    """[a*]p & <(a;..;a)*>~p with ``n`` steps inside the star."""
    return And(Box(Star(Atomic("a")), Atom("p")), Diamond(Star(_chain(n)), Not(Atom("p"))))


FAMILIES: dict[str, Callable[[int], Formula]] = {
    "seq": seq_family,
    "nested-star": nested_star_family,
    "blocked": blocked_family,
}

CSV_FIELDS = ("family", "size", "verdict", "nodes", "max_hcr", "time", "status")


@dataclass
class BenchRow:
    family: str
    size: int
    verdict: Optional[str]
    nodes: int
    max_hcr: int
    time: float
    status: str  # "ok" or "budget:<kind>"

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "size": self.size,
            "verdict": self.verdict or "",
            "nodes": self.nodes,
            "max_hcr": self.max_hcr,
            "time": f"{self.time:.6f}",
            "status": self.status,
        }


def run_family(family: str, sizes: Iterable[int], config: Optional[SolverConfig] = None) -> list[BenchRow]:
    if family not in FAMILIES:
        raise KeyError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    cfg = config or SolverConfig()
    build = FAMILIES[family]
    rows = []
    for n in sizes:
        f = build(n)
        start = time.perf_counter()
        try:
            res = solve(f, cfg)
        except BudgetExceeded as exc:
            rows.append(BenchRow(family, n, None, exc.nodes, 0, time.perf_counter() - start, f"budget:{exc.kind}"))
            continue
        verdict = "SAT" if res.verdict else "UNSAT"
        rows.append(BenchRow(family, n, verdict, res.stats.nodes, res.stats.max_hcr_len,
                             time.perf_counter() - start, "ok"))
    return rows


def rows_to_csv(rows: Iterable[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r.as_dict())
    return buf.getvalue()


def is_monotone(rows: list[BenchRow]) -> bool:
    counts = [r.nodes for r in sorted(rows, key=lambda r: r.size) if r.status == "ok"]
    return all(a <= b for a, b in zip(counts, counts[1:]))
