"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line
that is repeated in the terminal summary."""

import random
import time

from pdlsat.bench import FAMILIES, is_monotone, run_family
from pdlsat.cli import main
from pdlsat.engine import SolverConfig, check_uev_domain, min_bot, solve
from pdlsat.generators import gen_formulas
from pdlsat.model import bounded_model_search, check_hintikka, model_check
from pdlsat.suites import (
    BARRED_EXAMPLE, BLOCKED_EXAMPLE, axiom_formulas, barred_findings, blocked_findings, oracle_corpus,
)
from pdlsat.syntax import neg, nnf, parse, render
from pdlsat.trace import nodes_in_order

TRACED = SolverConfig(keep_tree=True, check_invariants=True)
EXTRACTION_SEED = 2024
TERMINATION = [("<(a*)*>p", True), ("<((a+b)*)*>(p & ~p)", False), ("<(a*;b*)*>p", True)]


def traced(f, cfg=TRACED):
    """Solve with the tree kept and invariants asserted, then re-check the
    uev domain on every node; returns (result, node count)."""
    res = solve(f, cfg)
    nodes = nodes_in_order(res.root)
    for n in nodes:
        check_uev_domain(n)
    return res, len(nodes)


def best_time(f, repeat=7):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        solve(f)
        times.append(time.perf_counter() - start)
    return min(times)


def test_criterion_1_barred_example(verdict_line, capsys):
    code = main(["check", BARRED_EXAMPLE])
    capsys.readouterr()
    res, _ = traced(parse(BARRED_EXAMPLE))
    problems = barred_findings(res)
    t = best_time(parse(BARRED_EXAMPLE))
    ok = code == 1 and not problems and t < 0.010
    verdict_line(1, ok, f"check exit={code}, trace {len(nodes_in_order(res.root))} nodes "
                        f"{'/'.join(n.rule.value for n in nodes_in_order(res.root))}, root {res.root.stat.value}, "
                        f"{t * 1000:.2f} ms" + (f"; {problems}" if problems else ""))
    assert ok


def test_criterion_2_blocked_example(verdict_line, capsys):
    code = main(["check", BLOCKED_EXAMPLE])
    capsys.readouterr()
    res, _ = traced(parse(BLOCKED_EXAMPLE))
    problems = blocked_findings(res)
    t = best_time(parse(BLOCKED_EXAMPLE))
    ok = code == 1 and not problems and t < 0.010
    verdict_line(2, ok, f"check exit={code}, blocked state uev=1 and loops-lower at hcr 0 "
                        f"{'found' if not problems else problems}, {t * 1000:.2f} ms")
    assert ok


def test_criterion_3_axioms(verdict_line):
    slow, sat = [], []
    for name, f in axiom_formulas():
        res, _ = traced(neg(f))
        if res.verdict:
            sat.append(name)
        if best_time(neg(f), 3) >= 0.100:
            slow.append(name)
    n = len(axiom_formulas())
    ok = n >= 13 and not sat and not slow
    verdict_line(3, ok, f"{n} negated validities, {n - len(sat)} UNSAT, {len(slow)} over 100 ms"
                        + (f"; satisfiable: {sat}" if sat else ""))
    assert ok


def test_criterion_4_extraction_soundness(verdict_line):
    start = time.perf_counter()
    failures, n_sat = [], 0
    cfg = SolverConfig(keep_tree=True, check_invariants=True, want_model=True)
    for f in gen_formulas(EXTRACTION_SEED, 500, 5, 2, 2):
        res, _ = traced(f, cfg)
        if not res.verdict:
            continue
        n_sat += 1
        h = res.verdict.model
        m = h.model
        if not model_check(m, m.designated, res.formula):
            failures.append(f"{render(f)}: model_check")
            continue
        report = check_hintikka(h, res.formula)
        if not report or res.formula not in h.labels[m.designated]:
            failures.append(f"{render(f)}: {report}")
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 300
    verdict_line(4, ok, f"500 formulas, {n_sat} SAT, {len(failures)} extraction failures, {elapsed:.1f} s")
    assert ok, failures[:5]


def test_criterion_5_oracle_agreement(verdict_line):
    start = time.perf_counter()
    corpus = oracle_corpus(3)
    disagreements, found, extra_sat = [], 0, 0
    for f in corpus:
        witness = bounded_model_search(f, 3)
        res, _ = traced(f)
        if witness is not None:
            found += 1
            if not res.verdict:
                disagreements.append(render(f))
        elif res.verdict:
            extra_sat += 1
    elapsed = time.perf_counter() - start
    ok = not disagreements and elapsed < 600
    verdict_line(5, ok, f"{len(corpus)} formulas, {found} with a model of at most 3 worlds, "
                        f"{len(disagreements)} disagreements ({extra_sat} SAT without such a model), "
                        f"{elapsed:.1f} s")
    assert ok, disagreements[:5]


def test_criterion_6_termination(verdict_line):
    results = []
    default = SolverConfig(keep_tree=True, check_invariants=True, want_model=True)
    for text, want in TERMINATION:
        res, n = traced(parse(text), default)
        good = bool(res.verdict) is want
        if res.verdict:
            m = res.verdict.model.model
            good &= model_check(m, m.designated, res.formula) and bool(check_hintikka(res.verdict.model, res.formula))
        results.append((text, good, n))
    ok = all(g for _, g, _ in results)
    verdict_line(6, ok, ", ".join(f"{t} {'ok' if g else 'WRONG'} ({n} nodes)" for t, g, n in results))
    assert ok


def test_criterion_7_bench_monotone(verdict_line):
    cfg = SolverConfig()
    parts, ok = [], True
    for fam in FAMILIES:
        rows = run_family(fam, range(1, 9), cfg)
        within = all(r.status == "ok" and r.nodes <= cfg.node_budget for r in rows)
        mono = is_monotone(rows)
        ok &= within and mono
        parts.append(f"{fam} {[r.nodes for r in rows]}{'' if mono and within else ' NOT OK'}")
    verdict_line(7, ok, "; ".join(parts))
    assert ok


def test_criterion_8_algebra(verdict_line):
    rng = random.Random(8)
    fs = [parse(t) for t in ("<a>p", "<b>q", "<a><a*>p", "<a;b>p", "<a*>p")]
    stars = [parse(t) for t in ("<a*>p", "<b*>q", "<(a;a)*>p")]

    def uev():
        return {(rng.choice(fs), rng.choice(stars)): rng.randint(1, 6) for _ in range(rng.randint(0, 6))}

    algebra_bad = 0
    for _ in range(10_000):
        f, g, h = uev(), uev(), uev()
        if min_bot(f, g) != min_bot(g, f) or min_bot(f, f) != f \
                or min_bot(min_bot(f, g), h) != min_bot(f, min_bot(g, h)):
            algebra_bad += 1

    nnf_bad = 0
    for f in gen_formulas(88, 10_000, 5, 2, 2):
        g = nnf(f)
        if nnf(g) != g or neg(neg(f)) != g:
            nnf_bad += 1

    # uev domain on every node of the traced runs behind criteria 1 to 6
    runs = [parse(BARRED_EXAMPLE), parse(BLOCKED_EXAMPLE)] + [neg(f) for _, f in axiom_formulas()]
    runs += gen_formulas(EXTRACTION_SEED, 500, 5, 2, 2) + oracle_corpus(3)
    runs += [parse(t) for t, _ in TERMINATION]
    checked = sum(traced(f)[1] for f in runs)

    ok = algebra_bad == 0 and nnf_bad == 0
    verdict_line(8, ok, f"min_bot laws {10_000 - algebra_bad}/10000, nnf/neg laws {10_000 - nnf_bad}/10000, "
                        f"uev domain held on {checked} nodes over {len(runs)} traced runs")
    assert ok
