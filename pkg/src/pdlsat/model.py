"""Kripke models: extraction from an open tableau, Hintikka-condition
checking, a model checker, and a brute-force bounded satisfiability oracle.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np

from .closure import AtomicBox, AtomicDiamond, Alpha, Beta, Literal, classify, in_pre
from .engine import BudgetExceeded, Status, TableauNode
from .syntax import (
    And, Atom, Atomic, Box, Choice, Diamond, Formula, Not, Or, Seq, Star, Test,
    atoms_of, programs_of, render,
)


@dataclass(frozen=True, eq=False)
class KripkeModel:
    worlds: tuple
    relations: Mapping[str, frozenset]  # program -> {(w, v)}
    valuation: Mapping[str, frozenset]  # atom -> {w}
    designated: int = 0

    def __post_init__(self):
        ws = set(self.worlds)
        if self.designated not in ws:
            raise ValueError(f"designated world {self.designated} not in model")
        for a, pairs in self.relations.items():
            if any(w not in ws or v not in ws for w, v in pairs):
                raise ValueError(f"relation {a} leaves the world set")
        for p, members in self.valuation.items():
            if not set(members) <= ws:
                raise ValueError(f"valuation of {p} leaves the world set")

    def __eq__(self, other):
        return isinstance(other, KripkeModel) and self.to_json() == other.to_json()

    def successors(self, prog: str, w) -> list:
        return sorted(v for u, v in self.relations.get(prog, ()) if u == w)

    def to_json(self) -> dict:
        """Stable-key-order dict for ``json.dumps``."""
        return {
            "worlds": sorted(self.worlds),
            "relations": {a: sorted([list(e) for e in self.relations[a]]) for a in sorted(self.relations)},
            "valuation": {p: sorted(self.valuation[p]) for p in sorted(self.valuation)},
            "designated": self.designated,
        }

    @classmethod
    def from_json(cls, data: dict) -> "KripkeModel":
        return cls(
            worlds=tuple(data["worlds"]),
            relations={a: frozenset(tuple(e) for e in es) for a, es in data["relations"].items()},
            valuation={p: frozenset(ws) for p, ws in data["valuation"].items()},
            designated=data["designated"],
        )


@dataclass
class LabelledStructure:
    model: KripkeModel
    labels: dict  # world -> frozenset of formulas
    nodes: dict = field(default_factory=dict)  # world -> tableau node serial

    @property
    def worlds(self):
        return self.model.worlds


# ----------------------------------------------------------------- model checking


class _Evaluator:
    """Extensions of formulas and programs over a finite model, as bitsets
    indexed by world position."""

    def __init__(self, m: KripkeModel):
        self.idx = {w: i for i, w in enumerate(m.worlds)}
        self.n = len(m.worlds)
        self.full = (1 << self.n) - 1
        self.rel = {}
        for a, pairs in m.relations.items():
            succ = [0] * self.n
            for w, v in pairs:
                succ[self.idx[w]] |= 1 << self.idx[v]
            self.rel[a] = succ
        self.val = {p: sum(1 << self.idx[w] for w in ws) for p, ws in m.valuation.items()}
        self._f: dict = {}
        self._p: dict = {}

    def formula(self, f: Formula) -> int:
        hit = self._f.get(f)
        if hit is None:
            hit = self._f[f] = self._formula(f)
        return hit

    def _formula(self, f) -> int:
        if isinstance(f, Atom):
            return self.val.get(f.name, 0)
        if isinstance(f, Not):
            return self.full & ~self.formula(f.inner)
        if isinstance(f, And):
            return self.formula(f.left) & self.formula(f.right)
        if isinstance(f, Or):
            return self.formula(f.left) | self.formula(f.right)
        succ = self.program(f.prog)
        body = self.formula(f.body)
        out = 0
        if isinstance(f, Diamond):
            for w, s in enumerate(succ):
                if s & body:
                    out |= 1 << w
        else:
            for w, s in enumerate(succ):
                if not s & ~body:
                    out |= 1 << w
        return out

    def program(self, p) -> list:
        hit = self._p.get(p)
        if hit is None:
            hit = self._p[p] = self._program(p)
        return hit

    def _program(self, p) -> list:
        if isinstance(p, Atomic):
            return self.rel.get(p.name, [0] * self.n)
        if isinstance(p, Choice):
            return [x | y for x, y in zip(self.program(p.left), self.program(p.right))]
        if isinstance(p, Seq):
            return _compose(self.program(p.left), self.program(p.right))
        if isinstance(p, Test):
            ext = self.formula(p.condition)
            return [(1 << w) & ext for w in range(self.n)]
        step = self.program(p.inner)
        closure = [1 << w for w in range(self.n)]
        while True:
            nxt = [c | d for c, d in zip(closure, _compose(closure, step))]
            if nxt == closure:
                return closure
            closure = nxt


def _compose(first: list, second: list) -> list:
    out = []
    for mask in first:
        acc = 0
        while mask:
            low = mask & -mask
            acc |= second[low.bit_length() - 1]
            mask ^= low
        out.append(acc)
    return out


def model_check(m: KripkeModel, w, f: Formula) -> bool:
    """Whether ``f`` holds at world ``w`` of ``m``."""
    ev = _Evaluator(m)
    if w not in ev.idx:
        raise KeyError(f"unknown world {w!r}")
    return bool(ev.formula(f) >> ev.idx[w] & 1)


def extension(m: KripkeModel, f: Formula) -> frozenset:
    ev = _Evaluator(m)
    ext = ev.formula(f)
    return frozenset(w for w, i in ev.idx.items() if ext >> i & 1)


# ----------------------------------------------------------------- extraction


def extract_model(root: TableauNode, f0: Formula) -> LabelledStructure:
    """Build a structure from an expanded open tableau whose tree was kept.

    Worlds are the open states.  A state reaches, for each of its atomic
    diamonds, every state obtained by saturating the diamond's successor
    core-node (or, for a blocked diamond, the ancestor core-node standing in
    for it) through open non-state nodes.  A state's label collects the
    formulas on the path from its core-node down to it.
    """
    if root.stat is not Status.OPEN:
        raise ValueError("model extraction needs an open root")
    if root.children is None:
        raise ValueError("tableau tree was not kept; expand with keep_tree=True")

    world_of: dict[int, int] = {}  # id(node) -> world
    states: list[TableauNode] = []
    labels: list[frozenset] = []
    succ: list[list] = []  # per world: [(program, successor node)]

    # (node, label so far, core-nodes by level, parent is a state)
    stack = [(root, frozenset(), (), True)]
    while stack:
        node, acc, cores, after_state = stack.pop()
        if after_state:
            acc = node.members
        else:
            acc = acc | node.members
        if len(node.hcr) > len(cores):
            cores = cores + (node,)
        is_state = node.rule.value == "<>"
        if is_state:
            world_of[id(node)] = len(states)
            states.append(node)
            labels.append(acc)
            edges = []
            kids = iter(node.children or ())
            blocked = dict(node.blocked)
            for g in node.gamma:
                if isinstance(g, Diamond) and isinstance(g.prog, Atomic):
                    if g in blocked:
                        edges.append((g.prog.name, cores[blocked[g] - 1]))
                    else:
                        edges.append((g.prog.name, next(kids)))
            succ.append(edges)
        if node.children is None:
            raise ValueError("tableau tree was not kept; expand with keep_tree=True")
        children = [c for c in node.children if c.stat is Status.OPEN]
        for c in reversed(children):
            stack.append((c, acc, cores, is_state))

    saturated: dict[int, list] = {}

    def saturate(x: TableauNode) -> list:
        key = id(x)
        if key in saturated:
            return saturated[key]
        out, todo, seen = [], [x], set()
        while todo:
            y = todo.pop()
            if id(y) in seen:
                continue
            seen.add(id(y))
            if y.rule.value == "<>":
                out.append(world_of[id(y)])
            else:
                todo.extend(reversed([c for c in y.children if c.stat is Status.OPEN]))
        saturated[key] = out
        return out

    relations: dict[str, set] = {a: set() for a in programs_of(f0)}
    for w, edges in enumerate(succ):
        for a, x in edges:
            for t in saturate(x):
                relations.setdefault(a, set()).add((w, t))

    atoms = set(atoms_of(f0))
    for lab in labels:
        atoms |= {g.name for g in lab if isinstance(g, Atom)}
    valuation = {p: frozenset(w for w, lab in enumerate(labels) if Atom(p) in lab) for p in sorted(atoms)}

    designated = next(w for w, lab in enumerate(labels) if f0 in lab)
    model = KripkeModel(
        worlds=tuple(range(len(states))),
        relations={a: frozenset(es) for a, es in relations.items()},
        valuation=valuation,
        designated=designated,
    )
    return LabelledStructure(
        model,
        {w: lab for w, lab in enumerate(labels)},
        {w: s.serial for w, s in enumerate(states)},
    )


# ----------------------------------------------------------------- Hintikka conditions


@dataclass
class HintikkaReport:
    ok: bool
    condition: Optional[str] = None
    world: Optional[int] = None
    formula: Optional[Formula] = None
    detail: str = ""

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "Hintikka conditions hold"
        where = f" at world {self.world}" if self.world is not None else ""
        what = f" for {render(self.formula)}" if self.formula is not None else ""
        return f"{self.condition} violated{where}{what}: {self.detail}"


def leads_to(f: Formula) -> tuple:
    """One-step unfoldings of a diamond with a non-atomic program."""
    if not isinstance(f, Diamond):
        return ()
    p, chi = f.prog, f.body
    if isinstance(p, Seq):
        return (Diamond(p.left, Diamond(p.right, chi)),)
    if isinstance(p, Choice):
        return (Diamond(p.left, chi), Diamond(p.right, chi))
    if isinstance(p, Star):
        return (chi, Diamond(p.inner, f))
    if isinstance(p, Test):
        return (chi,)
    return ()


def fulfilling_chain(h: LabelledStructure, w, eventuality: Diamond) -> Optional[list]:
    """Shortest fulfilling chain for ``eventuality`` (a star diamond) from
    ``w``, as a list of (world, formula) pairs, or ``None``."""
    goal = eventuality.body
    start = (w, eventuality)
    parent = {start: None}
    queue = deque([start])
    m = h.model
    while queue:
        v, psi = queue.popleft()
        if psi == goal:
            chain = []
            cur = (v, psi)
            while cur is not None:
                chain.append(cur)
                cur = parent[cur]
            return chain[::-1]
        if isinstance(psi, Diamond) and isinstance(psi.prog, Atomic):
            steps = [(u, psi.body) for u in m.successors(psi.prog.name, v)]
        else:
            steps = [(v, g) for g in leads_to(psi)]
        for u, g in steps:
            nxt = (u, g)
            if nxt not in parent and g in h.labels[u] and in_pre(g, goal):
                parent[nxt] = (v, psi)
                queue.append(nxt)
    return None


def check_hintikka(h: LabelledStructure, f0: Optional[Formula] = None) -> HintikkaReport:
    """Check the Hintikka conditions at every world (and that some world holds ``f0``)."""
    m = h.model
    for w in m.worlds:
        label = h.labels[w]
        for g in sorted(label, key=render):
            try:
                c = classify(g)
            except ValueError as exc:
                return HintikkaReport(False, "NNF", w, g, str(exc))
            if isinstance(c, Literal):
                if isinstance(g, Not) and g.inner in label:
                    return HintikkaReport(False, "clash", w, g, "clashing literals")
            elif isinstance(c, Alpha):
                if c.a1 not in label or (c.a2 is not None and c.a2 not in label):
                    return HintikkaReport(False, "alpha", w, g, "alpha component missing")
            elif isinstance(c, Beta):
                if c.b1 not in label and c.b2 not in label:
                    return HintikkaReport(False, "beta", w, g, "no beta component present")
            elif isinstance(c, AtomicDiamond):
                if not any(c.body in h.labels[v] for v in m.successors(c.prog, w)):
                    return HintikkaReport(False, "diamond", w, g, "no successor holds the body")
            elif isinstance(c, AtomicBox):
                for v in m.successors(c.prog, w):
                    if c.body not in h.labels[v]:
                        return HintikkaReport(False, "box", w, g, f"successor {v} lacks the body")
    for w in m.worlds:
        for g in sorted(h.labels[w], key=render):
            if isinstance(g, Diamond) and isinstance(g.prog, Star):
                if fulfilling_chain(h, w, g) is None:
                    return HintikkaReport(False, "eventuality", w, g, "no fulfilling chain")
    if f0 is not None and not any(f0 in h.labels[w] for w in m.worlds):
        return HintikkaReport(False, "root", None, f0, "no world is labelled with the formula")
    return HintikkaReport(True)


# ----------------------------------------------------------------- bounded search

_CHUNK = 1 << 16
DEFAULT_MAX_MODELS = 1 << 25


class _VectorEvaluator:
    """Evaluates a formula over a batch of ``k``-world models at once; world
    sets are bitmask arrays of shape (batch,), programs (batch, k)."""

    def __init__(self, k: int, rels: dict, vals: dict, batch: int):
        self.k = k
        self.full = (1 << k) - 1
        self.rels = rels
        self.vals = vals
        self.batch = batch
        self._memo: dict = {}

    def formula(self, f):
        hit = self._memo.get(f)
        if hit is not None:
            return hit
        if isinstance(f, Atom):
            out = self.vals.get(f.name)
            if out is None:
                out = np.zeros(self.batch, dtype=np.int64)
        elif isinstance(f, Not):
            out = self.full ^ self.formula(f.inner)
        elif isinstance(f, And):
            out = self.formula(f.left) & self.formula(f.right)
        elif isinstance(f, Or):
            out = self.formula(f.left) | self.formula(f.right)
        else:
            succ = self.program(f.prog)
            body = self.formula(f.body)
            out = np.zeros(self.batch, dtype=np.int64)
            if isinstance(f, Diamond):
                for w in range(self.k):
                    out |= ((succ[:, w] & body) != 0).astype(np.int64) << w
            else:
                miss = self.full ^ body
                for w in range(self.k):
                    out |= ((succ[:, w] & miss) == 0).astype(np.int64) << w
        self._memo[f] = out
        return out

    def forget(self, x):
        self._memo.pop(x, None)

    def program(self, p):
        hit = self._memo.get(p)
        if hit is not None:
            return hit
        if isinstance(p, Atomic):
            out = self.rels.get(p.name)
            if out is None:
                out = np.zeros((self.batch, self.k), dtype=np.int64)
        elif isinstance(p, Choice):
            out = self.program(p.left) | self.program(p.right)
        elif isinstance(p, Seq):
            out = self._compose(self.program(p.left), self.program(p.right))
        elif isinstance(p, Test):
            ext = self.formula(p.condition)
            out = np.stack([ext & (1 << w) for w in range(self.k)], axis=1)
        else:
            step = self.program(p.inner)
            out = np.tile(np.array([1 << w for w in range(self.k)], dtype=np.int64), (self.batch, 1))
            for _ in range(self.k):
                nxt = out | self._compose(out, step)
                if np.array_equal(nxt, out):
                    break
                out = nxt
        self._memo[p] = out
        return out

    def _compose(self, first, second):
        out = np.zeros_like(first)
        for v in range(self.k):
            hit = ((first >> v) & 1).astype(bool)
            out |= np.where(hit, second[:, v:v + 1], 0)
        return out


def _decode(index: int, k: int, progs: list, atoms: list) -> tuple[dict, dict]:
    n_rel, n_val = 1 << (k * k), 1 << k
    vals, rels = {}, {}
    for p in reversed(atoms):
        index, vals[p] = divmod(index, n_val)
    for a in reversed(progs):
        index, rels[a] = divmod(index, n_rel)
    return rels, vals


def _model_from_masks(k: int, rels: dict, vals: dict, designated: int) -> KripkeModel:
    relations = {
        a: frozenset((w, v) for w in range(k) for v in range(k) if r >> (w * k + v) & 1)
        for a, r in rels.items()
    }
    valuation = {p: frozenset(w for w in range(k) if m >> w & 1) for p, m in vals.items()}
    return KripkeModel(tuple(range(k)), relations, valuation, designated)


def count_models(k: int, n_programs: int, n_atoms: int) -> int:
    return (1 << (k * k)) ** n_programs * (1 << k) ** n_atoms


def model_batch(k: int, progs: list, atoms: list, lo: int = 0, hi: Optional[int] = None) -> _VectorEvaluator:
    """Evaluator over the ``k``-world models with search indices in
    ``[lo, hi)``; ``formula(f)`` gives one world bitmask per model."""
    if hi is None:
        hi = count_models(k, len(progs), len(atoms))
    n_rel, n_val = 1 << (k * k), 1 << k
    shifts = np.arange(k, dtype=np.int64) * k
    rest = np.arange(lo, hi, dtype=np.int64)
    vals, rels = {}, {}
    for p in reversed(atoms):
        vals[p] = rest % n_val
        rest = rest // n_val
    for a in reversed(progs):
        r = rest % n_rel
        rest = rest // n_rel
        rels[a] = (r[:, None] >> shifts[None, :]) & ((1 << k) - 1)
    return _VectorEvaluator(k, rels, vals, hi - lo)


def bounded_model_search(f: Formula, max_worlds: int,
                         max_models: int = DEFAULT_MAX_MODELS) -> Optional[tuple[KripkeModel, int]]:
    """Exhaustively search models with at most ``max_worlds`` worlds over the
    atoms and programs of ``f``.

    Models are enumerated by world count, then relation bitmasks (programs in
    name order), then valuation bitmasks (atoms in name order), then
    designated world; the first (model, world) satisfying ``f`` is returned.
    """
    atoms, progs = atoms_of(f), programs_of(f)
    for k in range(1, max_worlds + 1):
        total = count_models(k, len(progs), len(atoms))
        if total > max_models:
            raise BudgetExceeded("model", max_models, total)
        for lo in range(0, total, _CHUNK):
            ext = model_batch(k, progs, atoms, lo, min(lo + _CHUNK, total)).formula(f)
            hits = np.flatnonzero(ext)
            if hits.size:
                i = int(hits[0])
                mask = int(ext[i])
                world = (mask & -mask).bit_length() - 1
                r_masks, v_masks = _decode(lo + i, k, progs, atoms)
                model = _model_from_masks(k, r_masks, v_masks, world)
                if not model_check(model, world, f):
                    raise AssertionError("vectorised and scalar evaluation disagree")
                return model, world
    return None


def all_models(k: int, progs: Iterable[str], atoms: Iterable[str]):
    """Every ``k``-world model over the given vocabulary, in search order."""
    progs, atoms = sorted(progs), sorted(atoms)
    for index in range(count_models(k, len(progs), len(atoms))):
        rels, vals = _decode(index, k, progs, atoms)
        yield _model_from_masks(k, rels, vals, 0)
