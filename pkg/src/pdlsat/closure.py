"""Smullyan-style alpha/beta classification of NNF formulas, the closure
set of a seed formula, and the diamond-prefix test ``in_pre``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .syntax import (
    And, Atom, Atomic, Box, Choice, Diamond, Formula, Not, Or, Seq, Star, Test, neg,
)


@dataclass(frozen=True)
class Literal:
    formula: Formula


@dataclass(frozen=True)
class AtomicDiamond:
    prog: str
    body: Formula


@dataclass(frozen=True)
class AtomicBox:
    prog: str
    body: Formula


@dataclass(frozen=True)
class Alpha:
    a1: Formula
    a2: Optional[Formula] = None


@dataclass(frozen=True)
class Beta:
    b1: Formula
    b2: Formula


Classification = Union[Literal, AtomicDiamond, AtomicBox, Alpha, Beta]


def classify(f: Formula) -> Classification:
    """Classify an NNF formula.

    Conjunctive formulas map to :class:`Alpha` (``a2`` is ``None`` for the
    two sequence modalities, which decompose into a single formula) and
    disjunctive ones to :class:`Beta`.  ``[q?]p`` is a beta formula with
    components ``p`` and ``neg(q)``.
    """
    if isinstance(f, Atom):
        return Literal(f)
    if isinstance(f, Not):
        if isinstance(f.inner, Atom):
            return Literal(f)
        raise ValueError(f"not in negation normal form: {f!r}")
    if isinstance(f, And):
        return Alpha(f.left, f.right)
    if isinstance(f, Or):
        return Beta(f.left, f.right)

    p, phi = f.prog, f.body
    if isinstance(f, Diamond):
        if isinstance(p, Atomic):
            return AtomicDiamond(p.name, phi)
        if isinstance(p, Test):
            return Alpha(phi, p.condition)
        if isinstance(p, Seq):
            return Alpha(Diamond(p.left, Diamond(p.right, phi)))
        if isinstance(p, Choice):
            return Beta(Diamond(p.left, phi), Diamond(p.right, phi))
        if isinstance(p, Star):
            return Beta(phi, Diamond(p.inner, f))
    elif isinstance(f, Box):
        if isinstance(p, Atomic):
            return AtomicBox(p.name, phi)
        if isinstance(p, Choice):
            return Alpha(Box(p.left, phi), Box(p.right, phi))
        if isinstance(p, Star):
            return Alpha(phi, Box(p.inner, f))
        if isinstance(p, Seq):
            return Alpha(Box(p.left, Box(p.right, phi)))
        if isinstance(p, Test):
            return Beta(phi, neg(p.condition))
    raise TypeError(f"not a formula: {f!r}")


def components(f: Formula) -> tuple[Formula, ...]:
    """Formulas one decomposition step below ``f`` in the closure."""
    c = classify(f)
    if isinstance(c, Alpha):
        return (c.a1,) if c.a2 is None else (c.a1, c.a2)
    if isinstance(c, Beta):
        return (c.b1, c.b2)
    if isinstance(c, (AtomicDiamond, AtomicBox)):
        return (c.body,)
    return ()


def fischer_ladner(seed: Formula) -> frozenset[Formula]:
    """Least set containing ``seed`` and closed under :func:`components`."""
    seen = {seed}
    todo = [seed]
    while todo:
        for g in components(todo.pop()):
            if g not in seen:
                seen.add(g)
                todo.append(g)
    return frozenset(seen)


def in_pre(chi1: Formula, chi2: Formula) -> bool:
    """True iff ``chi1`` is ``chi2`` behind zero or more leading diamonds."""
    while True:
        if chi1 == chi2:
            return True
        if not isinstance(chi1, Diamond):
            return False
        chi1 = chi1.body


def is_star_diamond(f: Formula) -> bool:
    return isinstance(f, Diamond) and isinstance(f.prog, Star)


def is_complex_diamond(f: Formula) -> bool:
    """Diamond whose outermost program is not atomic."""
    return isinstance(f, Diamond) and not isinstance(f.prog, Atomic)


def star_suffixes(f: Formula) -> Iterator[Formula]:
    """Star-diamond formulas ``psi`` with ``in_pre(f, psi)``."""
    while True:
        if is_star_diamond(f):
            yield f
        if not isinstance(f, Diamond):
            return
        f = f.body
