"""One-pass tableau for PDL satisfiability.

Nodes carry a formula set plus histories passed downwards (``hcr``, ``nx``,
``bd``, ``bb``) and two variables passed upwards once the children are
finished (``stat`` and ``uev``).  ``uev`` maps a pair (diamond formula,
star-diamond formula) to the 1-based ``hcr`` level of the ancestor that a
possibly unfulfilled eventuality loops back to; a state whose child reports
a level deeper than its own history is closed ("loops lower").

Expansion is depth-first, left to right, on an explicit work stack.  Unless
the tree is kept for tracing or model extraction, finished subtrees are
dropped as soon as their parent has combined them.
"""

from __future__ import annotations

import enum
import os
import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Union

from .closure import (
    fischer_ladner, in_pre, is_complex_diamond, is_star_diamond, star_suffixes,
)
from .syntax import (
    And, Atom, Atomic, Box, Choice, Diamond, Formula, Not, Or, Seq, Star, Test, neg, nnf,
)

DEFAULT_NODE_BUDGET = 10_000_000
DEFAULT_TIME_BUDGET = 60.0


class Status(enum.Enum):
    UNSAT = "unsat"
    OPEN = "open"
    BARRED = "barred"


class Rule(enum.Enum):
    ID = "id"
    DIAMOND_STAR_2 = "<*>2"
    AND = "&"
    BOX_CHOICE = "[+]"
    BOX_SEQ = "[;]"
    BOX_STAR = "[*]"
    DIAMOND_SEQ = "<;>"
    DIAMOND_TEST = "<?>"
    OR = "|"
    BOX_TEST = "[?]"
    DIAMOND_CHOICE = "<+>"
    DIAMOND_STAR_1 = "<*>1"
    STATE = "<>"

    @property
    def linear(self) -> bool:
        return self in _LINEAR

    @property
    def branching(self) -> bool:
        return self in _BRANCHING


_LINEAR = frozenset({Rule.AND, Rule.BOX_CHOICE, Rule.BOX_SEQ, Rule.BOX_STAR,
                     Rule.DIAMOND_SEQ, Rule.DIAMOND_TEST})
_BRANCHING = frozenset({Rule.OR, Rule.BOX_TEST, Rule.DIAMOND_CHOICE, Rule.DIAMOND_STAR_1})


class HistoryEntry(NamedTuple):
    core: Formula
    label: frozenset


Uev = dict  # (Formula, Formula) -> int, keys absent where undefined

EMPTY: frozenset = frozenset()


class BudgetExceeded(RuntimeError):
    def __init__(self, kind: str, limit, nodes: int):
        self.kind = kind
        self.limit = limit
        self.nodes = nodes
        super().__init__(f"{kind} budget of {limit} exceeded after {nodes} nodes")


class InvariantViolation(AssertionError):
    pass


@dataclass
class SolverConfig:
    node_budget: int = DEFAULT_NODE_BUDGET
    time_budget: float = DEFAULT_TIME_BUDGET
    keep_tree: bool = False
    check_invariants: bool = False
    want_model: bool = False
    # stop expanding a state's remaining children once one of them closes it
    eager_state_close: bool = True

    def __post_init__(self):
        if self.node_budget <= 0 or self.time_budget <= 0:
            raise ValueError("budgets must be positive")

    @classmethod
    def from_env(cls, **kwargs) -> "SolverConfig":
        env = os.environ.get("PDLSAT_BUDGET_NODES")
        if env and "node_budget" not in kwargs:
            kwargs["node_budget"] = int(env)
        return cls(**kwargs)


@dataclass
class ExpansionStats:
    nodes: int = 0
    max_hcr_len: int = 0
    elapsed: float = 0.0


class TableauNode:
    """A tableau node; ``stat``/``uev``/``rule`` are filled in by
    :func:`expand`, ``children`` only when the tree is kept."""

    __slots__ = ("gamma", "members", "hcr", "nx", "bd", "bb", "stat", "uev", "rule",
                 "principal", "children", "blocked", "closed_by", "serial")

    def __init__(self, gamma, hcr=(), nx=None, bd=EMPTY, bb=EMPTY):
        self.gamma: tuple = tuple(dict.fromkeys(gamma))
        self.members: frozenset = frozenset(self.gamma)
        self.hcr: tuple = tuple(hcr)
        self.nx: Optional[Formula] = nx
        self.bd: frozenset = frozenset(bd)
        self.bb: frozenset = frozenset(bb)
        self.stat: Optional[Status] = None
        self.uev: Uev = {}
        self.rule: Optional[Rule] = None
        self.principal: Optional[Formula] = None
        self.children: Optional[list] = None
        self.blocked: list = []  # (diamond, 1-based hcr level) at states
        self.closed_by: Optional[str] = None
        self.serial: int = -1

    @classmethod
    def root(cls, f: Formula) -> "TableauNode":
        return cls((f,))

    def __repr__(self):
        from .syntax import render
        body = ", ".join(render(g) for g in self.gamma)
        return f"<TableauNode #{self.serial} {{{body}}} {self.rule and self.rule.value} {self.stat and self.stat.value}>"


# ----------------------------------------------------------------- helpers


def tst(chi: Formula) -> Optional[Formula]:
    """``chi`` if it is a diamond with a non-atomic program, else ``None``."""
    return chi if is_complex_diamond(chi) else None


def bl(chi: Formula, gamma) -> frozenset:
    return frozenset(gamma) if is_complex_diamond(chi) else EMPTY


def min_bot(f: Uev, g: Uev) -> Uev:
    """Pointwise minimum, defined only where both maps are defined."""
    if len(g) < len(f):
        f, g = g, f
    return {k: min(v, g[k]) for k, v in f.items() if k in g}


def _carry(uev: Uev, rest: frozenset, principal=None, source=None, skip_self=False) -> Uev:
    """Parent uev from a child's: keep entries about side formulas and move
    entries about ``source`` (the principal's decomposition) over to
    ``principal``.  Pairs outside the prefix relation are dropped."""
    out = {}
    for key, v in uev.items():
        c1, c2 = key
        if c1 in rest:
            out[key] = v
        if c1 == source and not (skip_self and c2 == principal) and in_pre(principal, c2):
            out[(principal, c2)] = v
    return out


def _child(node: TableauNode, new, drop, nx=None, bd=EMPTY, bb=None) -> TableauNode:
    gamma = list(new) + [g for g in node.gamma if g != drop]
    return TableauNode(gamma, node.hcr, nx, bd, node.bb if bb is None else bb)


# ----------------------------------------------------------------- rule selection


def _alpha_eligible(f: Formula) -> Optional[Rule]:
    if isinstance(f, And):
        return Rule.AND
    if isinstance(f, Box):
        p = f.prog
        if isinstance(p, Choice):
            return Rule.BOX_CHOICE
        if isinstance(p, Seq):
            return Rule.BOX_SEQ
        if isinstance(p, Star):
            return Rule.BOX_STAR
    elif isinstance(f, Diamond):
        if isinstance(f.prog, Seq):
            return Rule.DIAMOND_SEQ
        if isinstance(f.prog, Test):
            return Rule.DIAMOND_TEST
    return None


def _beta_eligible(f: Formula, bd: frozenset) -> Optional[Rule]:
    if isinstance(f, Or):
        return Rule.OR
    if isinstance(f, Box) and isinstance(f.prog, Test):
        return Rule.BOX_TEST
    if isinstance(f, Diamond):
        if isinstance(f.prog, Choice):
            return Rule.DIAMOND_CHOICE
        if isinstance(f.prog, Star) and f not in bd:
            return Rule.DIAMOND_STAR_1
    return None


def _diamond_rule(f: Diamond, bd: frozenset) -> Rule:
    p = f.prog
    if isinstance(p, Star):
        return Rule.DIAMOND_STAR_2 if f in bd else Rule.DIAMOND_STAR_1
    if isinstance(p, Seq):
        return Rule.DIAMOND_SEQ
    if isinstance(p, Test):
        return Rule.DIAMOND_TEST
    return Rule.DIAMOND_CHOICE


def has_clash(node: TableauNode) -> bool:
    m = node.members
    return any(isinstance(g, Not) and g.inner in m for g in node.gamma)


def select_rule(node: TableauNode) -> tuple[Rule, Optional[Formula]]:
    """Deterministic rule choice: ``id`` first, then the terminal star rule,
    then the rule forced by ``nx``, then linear before branching rules (first
    eligible formula in ``gamma`` order), and the state rule last."""
    if has_clash(node):
        return Rule.ID, None
    if node.nx is not None:
        return _diamond_rule(node.nx, node.bd), node.nx
    if node.bd:
        for g in node.gamma:
            if is_star_diamond(g) and g in node.bd:
                return Rule.DIAMOND_STAR_2, g
    for g in node.gamma:
        rule = _alpha_eligible(g)
        if rule is not None:
            return rule, g
    for g in node.gamma:
        rule = _beta_eligible(g, node.bd)
        if rule is not None:
            return rule, g
    return Rule.STATE, None


# ----------------------------------------------------------------- rules

Combine = Callable[[list], tuple]


def apply_alpha(node: TableauNode, rule: Rule, f: Formula) -> tuple[TableauNode, Combine]:
    rest = node.members - {f}
    source = None
    if rule is Rule.AND:
        child = _child(node, (f.left, f.right), f)
    elif rule is Rule.BOX_CHOICE:
        child = _child(node, (Box(f.prog.left, f.body), Box(f.prog.right, f.body)), f)
    elif rule is Rule.BOX_SEQ:
        child = _child(node, (Box(f.prog.left, Box(f.prog.right, f.body)),), f)
    elif rule is Rule.BOX_STAR:
        bb = node.bb | {f}
        if f in node.bb:
            child = _child(node, (), f, bb=bb)
        else:
            child = _child(node, (f.body, Box(f.prog.inner, f)), f, bb=bb)
    elif rule is Rule.DIAMOND_SEQ:
        source = Diamond(f.prog.left, Diamond(f.prog.right, f.body))
        child = _child(node, (source,), f, nx=tst(source), bd=bl(source, node.bd))
    elif rule is Rule.DIAMOND_TEST:
        source = f.body
        child = _child(node, (f.prog.condition, source), f, nx=tst(source), bd=bl(source, node.bd))
    else:
        raise ValueError(f"{rule} is not a linear rule")

    def combine(done):
        (c,) = done
        if c.stat is not Status.OPEN:
            return c.stat, {}
        return c.stat, _carry(c.uev, rest, f, source)

    return child, combine


def apply_beta(node: TableauNode, rule: Rule, f: Formula) -> tuple[list, Combine]:
    rest = node.members - {f}
    s1 = s2 = None
    skip_left = False
    if rule is Rule.OR:
        c1 = _child(node, (f.left,), f)
        c2 = _child(node, (f.right,), f)
    elif rule is Rule.BOX_TEST:
        c1 = _child(node, (neg(f.prog.condition),), f)
        c2 = _child(node, (f.body,), f)
    elif rule is Rule.DIAMOND_CHOICE:
        s1, s2 = Diamond(f.prog.left, f.body), Diamond(f.prog.right, f.body)
        c1 = _child(node, (s1,), f, nx=tst(s1), bd=bl(s1, node.bd))
        c2 = _child(node, (s2,), f, nx=tst(s2), bd=bl(s2, node.bd))
    elif rule is Rule.DIAMOND_STAR_1:
        s1, s2 = f.body, Diamond(f.prog.inner, f)
        blocked = node.bd | {f}
        c1 = _child(node, (s1,), f, nx=tst(s1), bd=bl(s1, blocked))
        c2 = _child(node, (s2,), f, nx=tst(s2), bd=bl(s2, blocked))
        # the left child fulfils the eventuality itself
        skip_left = True
    else:
        raise ValueError(f"{rule} is not a branching rule")

    def combine(done):
        left, right = done
        st1, st2 = left.stat, right.stat
        if st1 is Status.UNSAT and st2 is Status.UNSAT:
            return Status.UNSAT, {}
        if st1 is not Status.OPEN and st2 is not Status.OPEN:
            return Status.BARRED, {}
        u1 = _carry(left.uev, rest, f, s1, skip_left) if st1 is Status.OPEN else None
        u2 = _carry(right.uev, rest, f, s2) if st2 is Status.OPEN else None
        if u1 is None:
            return Status.OPEN, u2
        if u2 is None:
            return Status.OPEN, u1
        return Status.OPEN, min_bot(u1, u2)

    return [c1, c2], combine


class StatePlan:
    """Children and blocked diamonds of a state (the existential rule)."""

    def __init__(self, node: TableauNode):
        self.node = node
        boxes: dict[str, list] = {}
        diamonds = []
        for g in node.gamma:
            if isinstance(g, Box) and isinstance(g.prog, Atomic):
                boxes.setdefault(g.prog.name, []).append(g.body)
            elif isinstance(g, Diamond) and isinstance(g.prog, Atomic):
                diamonds.append(g)
        level = {entry: j for j, entry in enumerate(node.hcr, 1)}
        self.unblocked: list[tuple[Formula, TableauNode]] = []
        self.blocked: list[tuple[Formula, int]] = []
        for d in diamonds:
            label = tuple(dict.fromkeys([d.body] + boxes.get(d.prog.name, [])))
            entry = HistoryEntry(d.body, frozenset(label))
            j = level.get(entry)
            if j is None:
                child = TableauNode(label, node.hcr + (entry,), tst(d.body), EMPTY, EMPTY)
                self.unblocked.append((d, child))
            else:
                self.blocked.append((d, j))

    @property
    def children(self) -> list:
        return [c for _, c in self.unblocked]

    def closes(self, index: int, child: TableauNode) -> Optional[str]:
        if child.stat is not Status.OPEN:
            return "child"
        core = self.unblocked[index][0].body
        depth = len(self.node.hcr)
        for (c1, _c2), v in child.uev.items():
            if c1 == core and v > depth:
                return "loops-lower"
        return None

    def combine(self, done: list) -> tuple:
        for i, child in enumerate(done):
            reason = self.closes(i, child)
            if reason:
                self.node.closed_by = reason
                return Status.UNSAT, {}
        uev = {}
        for (d, _), child in zip(self.unblocked, done):
            for (c1, c2), v in child.uev.items():
                if c1 == d.body and in_pre(d, c2):
                    uev[(d, c2)] = v
        for d, j in self.blocked:
            for c2 in star_suffixes(d):
                uev[(d, c2)] = j
        return Status.OPEN, uev


def apply_diamond(node: TableauNode) -> StatePlan:
    return StatePlan(node)


# ----------------------------------------------------------------- expansion


class _Invariants:
    def __init__(self, root: TableauNode):
        self.closure = fischer_ladner(root.gamma[0]) if len(root.gamma) == 1 else frozenset().union(
            *(fischer_ladner(g) for g in root.gamma))

    def created(self, node: TableauNode):
        if not node.members <= self.closure:
            raise InvariantViolation(f"node #{node.serial} leaves the closure")
        if node.nx is not None and not (node.nx in node.members and is_complex_diamond(node.nx)):
            raise InvariantViolation(f"node #{node.serial} has a bad nx")
        if len(set(node.hcr)) != len(node.hcr):
            raise InvariantViolation(f"node #{node.serial} repeats a history entry")
        for core, label in node.hcr:
            if core not in label:
                raise InvariantViolation(f"node #{node.serial} history core not in label")

    def child(self, parent: TableauNode, child: TableauNode):
        n = len(parent.hcr)
        if child.hcr[:n] != parent.hcr or len(child.hcr) - n > 1:
            raise InvariantViolation(f"node #{child.serial} history does not extend its parent's")

    def finished(self, node: TableauNode):
        check_uev_domain(node)


def check_uev_domain(node: TableauNode):
    if node.stat is not Status.OPEN and node.uev:
        raise InvariantViolation(f"node #{node.serial} is {node.stat.value} with a defined uev")
    for (c1, c2), v in node.uev.items():
        if not (c1 in node.members and is_star_diamond(c2) and in_pre(c1, c2) and v >= 1):
            raise InvariantViolation(f"node #{node.serial} has uev entry outside its domain")


class _Frame:
    __slots__ = ("node", "pending", "done", "combine", "closes")

    def __init__(self, node, pending, combine, closes=None):
        self.node = node
        self.pending = list(reversed(pending))
        self.done: list = []
        self.combine = combine
        self.closes = closes


def expand(root: TableauNode, config: Optional[SolverConfig] = None,
           stats: Optional[ExpansionStats] = None) -> TableauNode:
    """Expand ``root`` fully and return it with ``stat``/``uev`` set.

    Raises :class:`BudgetExceeded` when the node or time budget runs out.
    """
    cfg = config or SolverConfig()
    st = stats if stats is not None else ExpansionStats()
    start = time.monotonic()
    deadline = start + cfg.time_budget
    checker = _Invariants(root) if cfg.check_invariants else None
    keep = cfg.keep_tree or cfg.want_model

    def finish(node, stat, uev):
        node.stat = stat
        node.uev = uev if stat is Status.OPEN else {}
        if checker:
            checker.finished(node)

    def visit(node) -> Optional[_Frame]:
        if st.nodes >= cfg.node_budget:
            raise BudgetExceeded("node", cfg.node_budget, st.nodes)
        if (st.nodes & 1023) == 0 and time.monotonic() > deadline:
            raise BudgetExceeded("time", cfg.time_budget, st.nodes)
        node.serial = st.nodes
        st.nodes += 1
        if len(node.hcr) > st.max_hcr_len:
            st.max_hcr_len = len(node.hcr)
        if checker:
            checker.created(node)
        rule, principal = select_rule(node)
        node.rule, node.principal = rule, principal
        if rule is Rule.ID:
            finish(node, Status.UNSAT, {})
            return None
        if rule is Rule.DIAMOND_STAR_2:
            finish(node, Status.BARRED, {})
            return None
        if rule is Rule.STATE:
            plan = apply_diamond(node)
            node.blocked = plan.blocked
            closes = plan.closes if cfg.eager_state_close else None
            return _Frame(node, plan.children, plan.combine, closes)
        if rule.linear:
            child, combine = apply_alpha(node, rule, principal)
            return _Frame(node, [child], combine)
        children, combine = apply_beta(node, rule, principal)
        return _Frame(node, children, combine)

    def deliver(frame: _Frame, child: TableauNode):
        if checker:
            checker.child(frame.node, child)
        frame.done.append(child)
        if frame.closes is not None and frame.closes(len(frame.done) - 1, child):
            frame.pending.clear()

    try:
        top = visit(root)
        if top is None:
            return root
        stack = [top]
        while stack:
            frame = stack[-1]
            if frame.pending:
                child = frame.pending.pop()
                sub = visit(child)
                if sub is None:
                    deliver(frame, child)
                else:
                    stack.append(sub)
                continue
            stack.pop()
            stat, uev = frame.combine(frame.done)
            finish(frame.node, stat, uev)
            if keep:
                frame.node.children = frame.done
            if stack:
                deliver(stack[-1], frame.node)
        return root
    finally:
        st.elapsed = time.monotonic() - start


# ----------------------------------------------------------------- verdicts


@dataclass(frozen=True)
class Satisfiable:
    model: Optional[object] = None  # LabelledStructure when requested
    satisfiable = True

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Unsatisfiable:
    satisfiable = False

    def __bool__(self):
        return False


Verdict = Union[Satisfiable, Unsatisfiable]


@dataclass
class Result:
    formula: Formula  # the NNF input the tableau ran on
    verdict: Verdict
    root: TableauNode
    stats: ExpansionStats = field(default_factory=ExpansionStats)


def solve(f: Formula, config: Optional[SolverConfig] = None) -> Result:
    cfg = config or SolverConfig()
    f0 = nnf(f)
    root = TableauNode.root(f0)
    stats = ExpansionStats()
    expand(root, cfg, stats)
    if root.stat is Status.OPEN:
        model = None
        if cfg.want_model:
            from .model import extract_model
            model = extract_model(root, f0)
        verdict: Verdict = Satisfiable(model)
    else:
        verdict = Unsatisfiable()
    return Result(f0, verdict, root, stats)


def is_sat(f: Formula, config: Optional[SolverConfig] = None) -> Verdict:
    """Decide satisfiability of ``f`` (converted to NNF first)."""
    return solve(f, config).verdict
