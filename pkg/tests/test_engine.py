import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import formulas
from pdlsat.engine import (
    BudgetExceeded, HistoryEntry, Rule, SolverConfig, Status, TableauNode, apply_alpha, apply_beta,
    apply_diamond, bl, check_uev_domain, expand, is_sat, min_bot, select_rule, solve, tst,
)
from pdlsat.bench import seq_family
from pdlsat.generators import gen_formulas
from pdlsat.model import bounded_model_search
from pdlsat.syntax import parse, render
from pdlsat.trace import nodes_in_order

P = parse


def node(*texts, **kw):
    return TableauNode([P(t) for t in texts], **kw)


def rendered(n):
    return [render(g) for g in n.gamma]


def leaf(stat, uev=None):
    n = TableauNode([])
    n.stat, n.uev = stat, uev or {}
    return n


def test_tst_and_bl():
    assert tst(P("<a;b>p")) == P("<a;b>p")
    assert tst(P("<a>p")) is None
    assert tst(P("p")) is None
    assert bl(P("<a*>p"), {P("<b*>q")}) == {P("<b*>q")}
    assert bl(P("<a>p"), {P("<b*>q")}) == frozenset()


uev_keys = st.sampled_from([(P("<a>p"), P("<a*>p")), (P("<b>q"), P("<b*>q")), (P("<a*>p"), P("<a*>p"))])
uevs = st.dictionaries(uev_keys, st.integers(1, 5))


@given(uevs, uevs, uevs)
def test_min_bot_laws(f, g, h):
    assert min_bot(f, g) == min_bot(g, f)
    assert min_bot(min_bot(f, g), h) == min_bot(f, min_bot(g, h))
    assert min_bot(f, f) == f
    assert min_bot(f, {}) == {}


def test_min_bot_values():
    k1, k2 = (P("<a>p"), P("<a*>p")), (P("<b>q"), P("<b*>q"))
    assert min_bot({k1: 3, k2: 1}, {k1: 2}) == {k1: 2}


class TestRuleSelection:
    def test_clash_first(self):
        assert select_rule(node("<a;b>p", "q", "~q")) == (Rule.ID, None)

    def test_nx_forces_rule(self):
        n = node("p & q", "<a;b>p", nx=P("<a;b>p"))
        assert select_rule(n) == (Rule.DIAMOND_SEQ, P("<a;b>p"))

    def test_star_in_bd_is_terminal(self):
        n = node("p & q", "<a*>p", bd={P("<a*>p")})
        assert select_rule(n) == (Rule.DIAMOND_STAR_2, P("<a*>p"))

    def test_alpha_before_beta(self):
        assert select_rule(node("p | q", "[a*]p")) == (Rule.BOX_STAR, P("[a*]p"))
        assert select_rule(node("p | q", "<a+b>p")) == (Rule.OR, P("p | q"))

    def test_state(self):
        assert select_rule(node("p", "<a>q", "[a]r"))[0] is Rule.STATE


class TestLinearRules:
    def test_seq_diamond(self):
        # a node of the blocked example and its child
        n = node("p", "[a][a*]p", "<a;a><(a;a)*>~p", nx=P("<a;a><(a;a)*>~p"))
        child, _ = apply_alpha(n, Rule.DIAMOND_SEQ, P("<a;a><(a;a)*>~p"))
        assert set(rendered(child)) == {"p", "[a][a*]p", "<a><a><(a;a)*>~p"}
        assert child.nx is None and child.bd == frozenset()

    def test_box_star_unfolds_once(self):
        n = node("[a*]p", "q")
        child, _ = apply_alpha(n, Rule.BOX_STAR, P("[a*]p"))
        assert set(rendered(child)) == {"p", "[a][a*]p", "q"}
        assert child.bb == {P("[a*]p")}

        again = node("[a*]p", bb={P("[a*]p")})
        child, _ = apply_alpha(again, Rule.BOX_STAR, P("[a*]p"))
        assert child.gamma == ()

    def test_test_diamond_sets_nx(self):
        n = node("<q?><(q?)*>(p & ~p)", bd={P("<(q?)*>(p & ~p)")})
        child, _ = apply_alpha(n, Rule.DIAMOND_TEST, P("<q?><(q?)*>(p & ~p)"))
        assert set(rendered(child)) == {"q", "<(q?)*>(p & ~p)"}
        assert child.nx == P("<(q?)*>(p & ~p)")
        assert child.bd == {P("<(q?)*>(p & ~p)")}

    def test_uev_remapped_to_principal(self):
        f = P("<a;a><(a;a)*>~p")
        src = P("<a><a><(a;a)*>~p")
        chi = P("<(a;a)*>~p")
        n = node("q", "<a;a><(a;a)*>~p")
        child, combine = apply_alpha(n, Rule.DIAMOND_SEQ, f)
        child.stat, child.uev = Status.OPEN, {(src, chi): 1}
        stat, uev = combine([child])
        assert stat is Status.OPEN and uev == {(f, chi): 1}


class TestBranchingRules:
    def test_star_diamond_children(self):
        f = P("<(q?)*>(p & ~p)")
        children, _ = apply_beta(node("<(q?)*>(p & ~p)"), Rule.DIAMOND_STAR_1, f)
        left, right = children
        assert rendered(left) == ["p & ~p"]
        assert rendered(right) == ["<q?><(q?)*>(p & ~p)"]
        assert right.nx == P("<q?><(q?)*>(p & ~p)")
        assert right.bd == {f}
        assert left.nx is None and left.bd == frozenset()

    def test_box_test_children(self):
        children, _ = apply_beta(node("[q?]p"), Rule.BOX_TEST, P("[q?]p"))
        assert [rendered(c) for c in children] == [["~q"], ["p"]]

    @pytest.mark.parametrize("s1, s2, expected", [
        (Status.UNSAT, Status.UNSAT, Status.UNSAT),
        (Status.UNSAT, Status.BARRED, Status.BARRED),
        (Status.BARRED, Status.BARRED, Status.BARRED),
        (Status.UNSAT, Status.OPEN, Status.OPEN),
        (Status.OPEN, Status.BARRED, Status.OPEN),
    ])
    def test_status_combination(self, s1, s2, expected):
        _, combine = apply_beta(node("p | q"), Rule.OR, P("p | q"))
        stat, uev = combine([leaf(s1), leaf(s2)])
        assert stat is expected
        if expected is not Status.OPEN:
            assert uev == {}

    def test_open_child_uev_inherited(self):
        f = P("<a*>~p")
        key = (P("<a><a*>~p"), f)
        _, combine = apply_beta(node("<a*>~p", "[a]p"), Rule.DIAMOND_STAR_1, f)
        stat, uev = combine([leaf(Status.UNSAT), leaf(Status.OPEN, {key: 1})])
        assert stat is Status.OPEN and uev == {(f, f): 1}

    def test_left_child_fulfils(self):
        f = P("<a*>p")
        _, combine = apply_beta(node("<a*>p"), Rule.DIAMOND_STAR_1, f)
        stat, uev = combine([leaf(Status.OPEN, {(P("p"), f): 1}), leaf(Status.UNSAT)])
        assert stat is Status.OPEN and uev == {}


class TestStateRule:
    def test_no_diamonds(self):
        n = node("p")
        plan = apply_diamond(n)
        assert plan.children == [] and plan.blocked == []
        assert plan.combine([]) == (Status.OPEN, {})

    def test_children_and_blocking(self):
        entry = HistoryEntry(P("p"), frozenset({P("p"), P("q")}))
        n = node("<a>p", "[a]q", "<b>p", "[b]r", hcr=(entry,))
        plan = apply_diamond(n)
        assert plan.blocked == [(P("<a>p"), 1)]
        ((d, child),) = plan.unblocked
        assert d == P("<b>p")
        assert rendered(child) == ["p", "r"]
        assert child.hcr == (entry, HistoryEntry(P("p"), frozenset({P("p"), P("r")})))

    def test_blocked_diamond_reports_level(self):
        entry = HistoryEntry(P("<a*>p"), frozenset({P("<a*>p")}))
        d = P("<a><a*>p")
        n = TableauNode([d], hcr=(entry,))
        plan = apply_diamond(n)
        assert plan.blocked == [(d, 1)]
        stat, uev = plan.combine([])
        assert stat is Status.OPEN
        assert uev == {(d, P("<a*>p")): 1}

    def test_loops_lower(self):
        d = P("<a><a*>p")
        n = TableauNode([d])
        plan = apply_diamond(n)
        (_, child), = plan.unblocked
        child.stat, child.uev = Status.OPEN, {(P("<a*>p"), P("<a*>p")): 1}
        assert plan.closes(0, child) == "loops-lower"
        assert plan.combine([child]) == (Status.UNSAT, {})
        assert n.closed_by == "loops-lower"


@pytest.mark.parametrize("text, sat", [
    ("p & ~p", False),
    ("<(q?)*>(p & ~p)", False),
    ("<a*>p", True),
    ("p", True),
    ("[a*]p & <(a;a)*>~p", False),
    ("<a*>~p & [a*]p", False),
    ("[a*]<a>p", True),
    ("<a*>p & [a*]~p", False),
    ("[a*](p -> <a>~p) & [a*](~p -> <a>p) & <a*>q & [a*]~q", False),
    ("<a>p & [a]~p", False),
    ("<a>p & <a>~p & [a]q", True),
    ("<(a+b)*>p & ~p & [a+b][(a+b)*]~p", False),
    ("<(p?;a)*>~p & p & [a]p", True),
    ("<(p?;a)*>~p & p & [a*]p", False),
    ("<(a*)*>p", True),
    ("<((a;a)*)*>p", True),
    ("<((a+b)*)*>(p & ~p)", False),
    ("<(a*;b*)*>p", True),
    ("[(a;b)*]~p & <(a;b)*>p", False),
])
def test_verdicts(text, sat):
    res = solve(P(text), SolverConfig(keep_tree=True, check_invariants=True))
    assert bool(res.verdict) is sat
    for n in nodes_in_order(res.root):
        check_uev_domain(n)
    if not sat:
        assert bounded_model_search(P(text), 3) is None


def test_first_example_tree():
    res = solve(P("<(q?)*>(p & ~p)"), SolverConfig(keep_tree=True))
    assert res.root.stat is Status.BARRED
    nodes = nodes_in_order(res.root)
    assert [n.stat for n in nodes] == [Status.BARRED, Status.UNSAT, Status.UNSAT, Status.BARRED, Status.BARRED]


def test_second_example_tree():
    res = solve(P("[a*]p & <(a;a)*>~p"), SolverConfig(keep_tree=True))
    assert res.root.stat is Status.UNSAT
    nodes = nodes_in_order(res.root)
    lower = [n for n in nodes if n.closed_by == "loops-lower"]
    assert len(lower) == 1 and len(lower[0].hcr) == 0
    blocked = [n for n in nodes if n.blocked]
    assert len(blocked) == 1
    (b,) = blocked
    assert b.blocked == [(P("<a><a><(a;a)*>~p"), 1)]
    assert b.uev == {(P("<a><a><(a;a)*>~p"), P("<(a;a)*>~p")): 1}


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded) as info:
        is_sat(P("<(a*;b*)*>p"), SolverConfig(node_budget=5))
    assert info.value.kind == "node" and info.value.nodes == 5


def test_config_validation(monkeypatch):
    with pytest.raises(ValueError):
        SolverConfig(node_budget=0)
    with pytest.raises(ValueError):
        SolverConfig(time_budget=-1)
    monkeypatch.setenv("PDLSAT_BUDGET_NODES", "42")
    assert SolverConfig.from_env().node_budget == 42
    assert SolverConfig.from_env(node_budget=7).node_budget == 7


def test_default_mode_releases_tree():
    res = solve(P("<a>p & <a*>q"))
    assert res.root.children is None


def test_model_attached_on_request():
    v = is_sat(P("<a>p"), SolverConfig(want_model=True))
    assert v.model is not None and len(v.model.model.worlds) == 2
    assert is_sat(P("<a>p")).model is None


def test_deterministic():
    f = P("<(a*;b*)*>p & [b*](p | <a>q)")
    runs = [solve(f, SolverConfig(keep_tree=True)) for _ in range(2)]
    assert runs[0].stats.nodes == runs[1].stats.nodes
    assert [repr(n) for n in nodes_in_order(runs[0].root)] == [repr(n) for n in nodes_in_order(runs[1].root)]


def test_eager_close_same_verdict():
    for f in gen_formulas(5, 150, 4):
        lazy = solve(f, SolverConfig(eager_state_close=False)).verdict
        assert bool(lazy) == bool(is_sat(f))


@given(formulas(3))
@settings(max_examples=150, deadline=None)
def test_invariants_hold(f):
    res = solve(f, SolverConfig(keep_tree=True, check_invariants=True))
    for n in nodes_in_order(res.root):
        assert n.stat is not None
        if n.stat is not Status.OPEN:
            assert n.uev == {}


def test_long_branch():
    # the branch is about twice as long as the chain, past the default recursion limit
    res = solve(seq_family(600))
    assert res.verdict and res.stats.nodes == 1200


def test_expand_returns_root():
    root = TableauNode.root(P("p"))
    assert expand(root) is root and root.stat is Status.OPEN
