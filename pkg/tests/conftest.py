import hypothesis.strategies as st
import pytest

from pdlsat.syntax import And, Atom, Atomic, Box, Choice, Diamond, Not, Or, Seq, Star, Test as Tst


def programs(formula, depth):
    leaf = st.sampled_from([Atomic("a"), Atomic("b")])
    if depth <= 0:
        return leaf
    sub = programs(formula, depth - 1)
    return st.one_of(
        leaf,
        st.builds(Seq, sub, sub),
        st.builds(Choice, sub, sub),
        st.builds(Star, sub),
        st.builds(Tst, formula(depth - 1)),
    )


def formulas(depth=4):
    """Hypothesis strategy for formulas over p, q and a, b."""
    leaf = st.sampled_from([Atom("p"), Atom("q")])
    if depth <= 0:
        return leaf
    sub = formulas(depth - 1)
    prog = programs(formulas, depth - 1)
    return st.one_of(
        leaf,
        st.builds(Not, sub),
        st.builds(And, sub, sub),
        st.builds(Or, sub, sub),
        st.builds(Diamond, prog, sub),
        st.builds(Box, prog, sub),
    )


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict_line():
    """Record a one-line PASS/FAIL verdict for the terminal summary."""
    def record(criterion, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
