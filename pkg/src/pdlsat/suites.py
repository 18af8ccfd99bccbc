"""Built-in self-test suites shared by ``pdlsat selftest`` and the tests."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from .engine import BudgetExceeded, Rule, SolverConfig, Status, solve
from .generators import dedup_nnf, enumerate_formulas, gen_formulas
from .model import bounded_model_search, check_hintikka, model_check
from .syntax import Formula, neg, parse, render
from .trace import nodes_in_order

BARRED_EXAMPLE = "<(q?)*>(p & ~p)"
BLOCKED_EXAMPLE = "[a*]p & <(a;a)*>~p"
BARRED_RULES = [Rule.DIAMOND_STAR_1, Rule.AND, Rule.ID, Rule.DIAMOND_TEST, Rule.DIAMOND_STAR_2]

# Decomposition equivalences with p, q for formulas and a, b for programs,
# the star rows again for two compound programs, and the induction axiom.
VALIDITIES = [
    ("and", "p & q <-> p & q"),
    ("box-choice", "[a+b]p <-> [a]p & [b]p"),
    ("box-star", "[a*]p <-> p & [a][a*]p"),
    ("diamond-test", "<q?>p <-> p & q"),
    ("diamond-seq", "<a;b>p <-> <a><b>p"),
    ("box-seq", "[a;b]p <-> [a][b]p"),
    ("or", "p | q <-> p | q"),
    ("diamond-choice", "<a+b>p <-> <a>p | <b>p"),
    ("diamond-star", "<a*>p <-> p | <a><a*>p"),
    ("box-test", "[q?]p <-> p | ~q"),
    ("induction", "[a*](p -> [a]p) -> (p -> [a*]p)"),
    ("box-star-seq", "[(a;b)*]p <-> p & [a;b][(a;b)*]p"),
    ("diamond-star-choice", "<(a+b)*>p <-> p | <a+b><(a+b)*>p"),
    ("diamond-star-seq", "<(a;b)*>p <-> p | <a;b><(a;b)*>p"),
    ("box-star-choice", "[(a+b)*]p <-> p & [a+b][(a+b)*]p"),
]


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    total: int = 0
    failures: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def record(self, ok: bool, what: str):
        self.total += 1
        if ok:
            self.passed += 1
        else:
            self.failures.append(what)

    def summary(self) -> str:
        return f"{self.name}: {self.passed}/{self.total} passed ({self.elapsed:.2f}s)"


def _traced(text: str, cfg: SolverConfig):
    return solve(parse(text), replace(cfg, keep_tree=True, check_invariants=True))


def barred_findings(res) -> list[str]:
    """Mismatches between a traced run of the barred example and its
    expected shape; empty when it matches."""
    problems = []
    nodes = nodes_in_order(res.root)
    if res.verdict:
        problems.append("verdict is SAT")
    if len(nodes) != 5:
        problems.append(f"{len(nodes)} nodes, expected 5")
    if [n.rule for n in nodes] != BARRED_RULES:
        problems.append("rules " + "/".join(n.rule.value for n in nodes))
    if res.root.stat is not Status.BARRED:
        problems.append(f"root is {res.root.stat.value}")
    return problems


def blocked_findings(res) -> list[str]:
    problems = []
    nodes = nodes_in_order(res.root)
    if res.verdict:
        problems.append("verdict is SAT")
    blocked_one = [n for n in nodes if n.rule is Rule.STATE and n.blocked
                   and any(j == 1 for _, j in n.blocked)
                   and any(v == 1 for (c1, _), v in n.uev.items() if c1 in {d for d, _ in n.blocked})]
    if not blocked_one:
        problems.append("no state blocked at level 1 with uev value 1")
    lower = [n for n in nodes if n.rule is Rule.STATE and len(n.hcr) == 0 and n.closed_by == "loops-lower"]
    if not lower:
        problems.append("no state with empty hcr closed by loops-lower")
    return problems


def run_examples(cfg: SolverConfig) -> SuiteResult:
    out = SuiteResult("examples")
    for text, check in ((BARRED_EXAMPLE, barred_findings), (BLOCKED_EXAMPLE, blocked_findings)):
        try:
            problems = check(_traced(text, cfg))
        except BudgetExceeded as exc:
            problems = [str(exc)]
        out.record(not problems, f"{text}: {'; '.join(problems)}")
    return out


def axiom_formulas() -> list[tuple[str, Formula]]:
    return [(name, parse(text)) for name, text in VALIDITIES]


def run_axioms(cfg: SolverConfig) -> SuiteResult:
    out = SuiteResult("axioms")
    for name, f in axiom_formulas():
        try:
            ok = not solve(neg(f), cfg).verdict
            what = f"{name}: negation is satisfiable"
        except BudgetExceeded as exc:
            ok, what = False, f"{name}: {exc}"
        out.record(ok, what)
    return out


def verify_extraction(f: Formula, cfg: SolverConfig) -> Optional[str]:
    """None when ``f`` is UNSAT or its extracted model checks out, else a
    description of the failure."""
    res = solve(f, replace(cfg, want_model=True))
    if not res.verdict:
        return None
    h = res.verdict.model
    m = h.model
    if not model_check(m, m.designated, res.formula):
        return f"{render(f)}: model_check fails at the designated world"
    report = check_hintikka(h, res.formula)
    if not report:
        return f"{render(f)}: {report}"
    if res.formula not in h.labels[m.designated]:
        return f"{render(f)}: designated world does not carry the formula"
    return None


def run_extraction(cfg: SolverConfig, seed: int = 0, count: int = 500, depth: int = 5) -> SuiteResult:
    out = SuiteResult("extraction")
    for f in gen_formulas(seed, count, depth, 2, 2):
        try:
            problem = verify_extraction(f, cfg)
        except BudgetExceeded as exc:
            problem = f"{render(f)}: {exc}"
        out.record(problem is None, problem or "")
    return out


def oracle_corpus(depth: int = 3) -> list[Formula]:
    return dedup_nnf(enumerate_formulas(depth, 1, 1))


def run_oracle(cfg: SolverConfig, depth: int = 3, max_worlds: int = 3) -> SuiteResult:
    out = SuiteResult("oracle")
    for f in oracle_corpus(depth):
        try:
            found = bounded_model_search(f, max_worlds)
            ok = found is None or bool(solve(f, cfg).verdict)
            what = f"{render(f)}: has a {len(found[0].worlds)}-world model but tableau says UNSAT" if found else ""
        except BudgetExceeded as exc:
            ok, what = False, f"{render(f)}: {exc}"
        out.record(ok, what)
    return out


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "axioms": run_axioms,
    "examples": run_examples,
    "oracle": run_oracle,
    "extraction": run_extraction,
}


def run_suite(name: str, cfg: SolverConfig, **kwargs) -> SuiteResult:
    start = time.perf_counter()
    res = SUITES[name](cfg, **kwargs)
    res.elapsed = time.perf_counter() - start
    return res
