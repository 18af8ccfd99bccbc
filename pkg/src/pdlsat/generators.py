"""Random and exhaustive formula generators."""

from __future__ import annotations

import itertools
import random
from typing import Iterator, Sequence

from .syntax import (
    And, Atom, Atomic, Box, Choice, Diamond, Formula, Not, Or, Program, Seq, Star, Test, nnf,
)


def _names(prefix: Sequence[str], n: int) -> list[str]:
    return list(prefix[:n]) if n <= len(prefix) else [f"{prefix[0]}{i}" for i in range(n)]


def atom_names(n: int) -> list[str]:
    return _names("pqrs", n)


def program_names(n: int) -> list[str]:
    return _names("abcd", n)


class FormulaGenerator:
    """Seeded random PDL formulas of bounded AST depth.

    Every formula and program constructor has nonzero weight at every depth
    above zero, so all of them show up in modest batches.
    """

    FORMULA_KINDS = ("atom", "not", "and", "or", "diamond", "box")
    PROGRAM_KINDS = ("atomic", "seq", "choice", "star", "test")

    def __init__(self, seed: int, atoms: int = 2, programs: int = 2):
        if atoms < 1 or programs < 1:
            raise ValueError("need at least one atom and one program")
        self.rng = random.Random(seed)
        self.atoms = atom_names(atoms)
        self.programs = program_names(programs)

    def formula(self, depth: int) -> Formula:
        rng = self.rng
        if depth <= 0:
            return Atom(rng.choice(self.atoms))
        kind = rng.choices(self.FORMULA_KINDS, weights=(2, 2, 3, 3, 3, 3))[0]
        d = depth - 1
        if kind == "atom":
            return Atom(rng.choice(self.atoms))
        if kind == "not":
            return Not(self.formula(d))
        if kind == "and":
            return And(self.formula(d), self.formula(d))
        if kind == "or":
            return Or(self.formula(d), self.formula(d))
        cls = Diamond if kind == "diamond" else Box
        return cls(self.program(d), self.formula(d))

    def program(self, depth: int) -> Program:
        rng = self.rng
        if depth <= 0:
            return Atomic(rng.choice(self.programs))
        kind = rng.choices(self.PROGRAM_KINDS, weights=(4, 2, 2, 2, 1))[0]
        d = depth - 1
        if kind == "atomic":
            return Atomic(rng.choice(self.programs))
        if kind == "seq":
            return Seq(self.program(d), self.program(d))
        if kind == "choice":
            return Choice(self.program(d), self.program(d))
        if kind == "star":
            return Star(self.program(d))
        return Test(self.formula(d))


def gen_formulas(seed: int, count: int, depth: int, atoms: int = 2, programs: int = 2) -> list[Formula]:
    """``count`` pseudo-random formulas of depth at most ``depth``; the same
    arguments always give the same list."""
    if count < 0 or depth < 0:
        raise ValueError("count and depth must be non-negative")
    g = FormulaGenerator(seed, atoms, programs)
    return [g.formula(depth) for _ in range(count)]


def enumerate_formulas(depth: int, atoms: int = 1, programs: int = 1) -> list[Formula]:
    """Every formula of AST depth at most ``depth`` (formula and program
    constructors both count one level), ordered by depth then construction."""
    f_by: list[list] = [[Atom(p) for p in atom_names(atoms)]]
    p_by: list[list] = [[Atomic(a) for a in program_names(programs)]]
    for d in range(1, depth + 1):
        f_upto = [x for level in f_by for x in level]
        p_upto = [x for level in p_by for x in level]
        f_top, p_top = f_by[-1], p_by[-1]
        f_new = [Not(x) for x in f_top]
        for ctor in (And, Or):
            f_new += [ctor(x, y) for x, y in _pairs(f_upto, f_top)]
        for ctor in (Diamond, Box):
            f_new += [ctor(x, y) for x, y in _mixed(p_upto, p_top, f_upto, f_top)]
        p_new = []
        for ctor in (Seq, Choice):
            p_new += [ctor(x, y) for x, y in _pairs(p_upto, p_top)]
        p_new += [Star(x) for x in p_top]
        p_new += [Test(x) for x in f_top]
        f_by.append(f_new)
        p_by.append(p_new)
    return [x for level in f_by for x in level]


def _pairs(upto: list, top: list) -> Iterator[tuple]:
    """Pairs from ``upto`` with at least one member in ``top``."""
    top_set = set(top)
    for x, y in itertools.product(upto, repeat=2):
        if x in top_set or y in top_set:
            yield x, y


def _mixed(xs: list, x_top: list, ys: list, y_top: list) -> Iterator[tuple]:
    xt, yt = set(x_top), set(y_top)
    for x, y in itertools.product(xs, ys):
        if x in xt or y in yt:
            yield x, y


def dedup_nnf(formulas) -> list[Formula]:
    """Drop formulas whose negation normal form was already seen."""
    seen, out = set(), []
    for f in formulas:
        g = nnf(f)
        if g not in seen:
            seen.add(g)
            out.append(f)
    return out
