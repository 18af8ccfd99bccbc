"""Formula and program ASTs for PDL, the concrete-syntax parser and printer,
and negation normal form.

Surface syntax (ASCII)::

    ~p          negation            p & q       conjunction
    p | q       disjunction         <a>p        diamond
    [a]p        box                 a;b         sequence
    a+b         choice              a*          iteration
    p?          test                p -> q, p <-> q   (sugar, desugared on parse)

Unary operators bind tighter than ``&`` which binds tighter than ``|``; for
programs the postfix ``*``/``?`` bind tighter than ``;`` which binds tighter
than ``+``.  All binary operators associate to the right.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields
from typing import Iterator, Union


def _ast(cls):
    """Frozen dataclass with structural equality and a cached structural hash;
    AST values are hashed constantly by the tableau (sets, history lookups,
    uev keys)."""
    cls = dataclass(frozen=True, repr=False)(cls)
    names = tuple(f.name for f in fields(cls))
    tag = cls.__name__

    def __post_init__(self):
        object.__setattr__(self, "_h", hash((tag,) + tuple(getattr(self, n) for n in names)))

    def __hash__(self):
        return self._h

    # dataclass wires __post_init__ into __init__ only if present at decoration
    cls.__init__ = _chain_init(cls.__init__, __post_init__)
    cls.__hash__ = __hash__
    return cls


def _chain_init(init, post):
    def __init__(self, *args, **kwargs):
        init(self, *args, **kwargs)
        post(self)

    return __init__


# ----------------------------------------------------------------- programs


@_ast
class Atomic:
    name: str


@_ast
class Seq:
    left: "Program"
    right: "Program"


@_ast
class Choice:
    left: "Program"
    right: "Program"


@_ast
class Star:
    inner: "Program"


@_ast
class Test:
    condition: "Formula"


# ----------------------------------------------------------------- formulas


@_ast
class Atom:
    name: str


@_ast
class Not:
    inner: "Formula"


@_ast
class And:
    left: "Formula"
    right: "Formula"


@_ast
class Or:
    left: "Formula"
    right: "Formula"


@_ast
class Diamond:
    prog: "Program"
    body: "Formula"


@_ast
class Box:
    prog: "Program"
    body: "Formula"


Program = Union[Atomic, Seq, Choice, Star, Test]
Formula = Union[Atom, Not, And, Or, Diamond, Box]

PROGRAM_TYPES = (Atomic, Seq, Choice, Star, Test)
FORMULA_TYPES = (Atom, Not, And, Or, Diamond, Box)


def _repr(self) -> str:
    return f"{type(self).__name__}({render_any(self)!r})"


for _cls in PROGRAM_TYPES + FORMULA_TYPES:
    _cls.__repr__ = _repr


# ----------------------------------------------------------------- helpers


def is_literal(f: Formula) -> bool:
    return isinstance(f, Atom) or (isinstance(f, Not) and isinstance(f.inner, Atom))


def is_nnf(f: Formula) -> bool:
    """True iff negation occurs only directly in front of atoms (test
    conditions included)."""
    stack: list = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Not):
            if not isinstance(g.inner, Atom):
                return False
        elif isinstance(g, (And, Or)):
            stack += (g.left, g.right)
        elif isinstance(g, (Diamond, Box)):
            stack += (g.prog, g.body)
        elif isinstance(g, (Seq, Choice)):
            stack += (g.left, g.right)
        elif isinstance(g, Star):
            stack.append(g.inner)
        elif isinstance(g, Test):
            stack.append(g.condition)
    return True


def subterms(x) -> Iterator:
    """All formula and program subterms of ``x``, ``x`` included (pre-order)."""
    stack = [x]
    while stack:
        g = stack.pop()
        yield g
        if isinstance(g, (Not, Star)):
            stack.append(g.inner)
        elif isinstance(g, (And, Or, Seq, Choice)):
            stack += (g.right, g.left)
        elif isinstance(g, (Diamond, Box)):
            stack += (g.body, g.prog)
        elif isinstance(g, Test):
            stack.append(g.condition)


def size(x) -> int:
    return sum(1 for _ in subterms(x))


def depth(x) -> int:
    """AST depth; atoms and atomic programs have depth 0."""
    if isinstance(x, (Atom, Atomic)):
        return 0
    if isinstance(x, (Not, Star)):
        return 1 + depth(x.inner)
    if isinstance(x, Test):
        return 1 + depth(x.condition)
    if isinstance(x, (And, Or, Seq, Choice)):
        return 1 + max(depth(x.left), depth(x.right))
    return 1 + max(depth(x.prog), depth(x.body))


def atoms_of(x) -> list[str]:
    return sorted({g.name for g in subterms(x) if isinstance(g, Atom)})


def programs_of(x) -> list[str]:
    return sorted({g.name for g in subterms(x) if isinstance(g, Atomic)})


# ----------------------------------------------------------------- nnf


def nnf(f: Formula) -> Formula:
    """Push negations inward until they sit directly on atoms, test
    conditions included.  Idempotent on NNF input."""
    if isinstance(f, Atom):
        return f
    if isinstance(f, And):
        return And(nnf(f.left), nnf(f.right))
    if isinstance(f, Or):
        return Or(nnf(f.left), nnf(f.right))
    if isinstance(f, Diamond):
        return Diamond(nnf_program(f.prog), nnf(f.body))
    if isinstance(f, Box):
        return Box(nnf_program(f.prog), nnf(f.body))
    g = f.inner
    if isinstance(g, Atom):
        return f
    if isinstance(g, Not):
        return nnf(g.inner)
    if isinstance(g, And):
        return Or(neg(g.left), neg(g.right))
    if isinstance(g, Or):
        return And(neg(g.left), neg(g.right))
    if isinstance(g, Diamond):
        return Box(nnf_program(g.prog), neg(g.body))
    if isinstance(g, Box):
        return Diamond(nnf_program(g.prog), neg(g.body))
    raise TypeError(f"not a formula: {g!r}")


def nnf_program(p: Program) -> Program:
    if isinstance(p, Atomic):
        return p
    if isinstance(p, Seq):
        return Seq(nnf_program(p.left), nnf_program(p.right))
    if isinstance(p, Choice):
        return Choice(nnf_program(p.left), nnf_program(p.right))
    if isinstance(p, Star):
        return Star(nnf_program(p.inner))
    if isinstance(p, Test):
        return Test(nnf(p.condition))
    raise TypeError(f"not a program: {p!r}")


def neg(f: Formula) -> Formula:
    """NNF of the negation of ``f``."""
    return nnf(Not(f))


# ----------------------------------------------------------------- printer

_OR, _AND, _UNARY = 0, 1, 2
_CHOICE, _SEQ, _POSTFIX = 0, 1, 2


def render(f: Formula) -> str:
    """Print ``f`` with the fewest parentheses that reparse to the same AST."""
    return _fml(f, _OR)


def render_program(p: Program) -> str:
    return _prg(p, _CHOICE)


def render_any(x) -> str:
    return _prg(x, _CHOICE) if isinstance(x, PROGRAM_TYPES) else _fml(x, _OR)


def _paren(s: str, cond: bool) -> str:
    return f"({s})" if cond else s


def _fml(f, prec: int) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return "~" + _fml(f.inner, _UNARY)
    if isinstance(f, And):
        return _paren(f"{_fml(f.left, _UNARY)} & {_fml(f.right, _AND)}", prec > _AND)
    if isinstance(f, Or):
        return _paren(f"{_fml(f.left, _AND)} | {_fml(f.right, _OR)}", prec > _OR)
    if isinstance(f, Diamond):
        return f"<{_prg(f.prog, _CHOICE)}>{_fml(f.body, _UNARY)}"
    if isinstance(f, Box):
        return f"[{_prg(f.prog, _CHOICE)}]{_fml(f.body, _UNARY)}"
    raise TypeError(f"not a formula: {f!r}")


def _prg(p, prec: int) -> str:
    if isinstance(p, Atomic):
        return p.name
    if isinstance(p, Seq):
        return _paren(f"{_prg(p.left, _POSTFIX)};{_prg(p.right, _SEQ)}", prec > _SEQ)
    if isinstance(p, Choice):
        return _paren(f"{_prg(p.left, _SEQ)}+{_prg(p.right, _CHOICE)}", prec > _CHOICE)
    if isinstance(p, Star):
        inner = _prg(p.inner, _POSTFIX)
        # "q?*" is grammatical but hard to read
        return f"({inner})*" if isinstance(p.inner, Test) else inner + "*"
    if isinstance(p, Test):
        return _fml(p.condition, _UNARY) + "?"
    raise TypeError(f"not a program: {p!r}")


# ----------------------------------------------------------------- parser


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int, expected: frozenset = frozenset()):
        self.line = line
        self.column = column
        self.expected = expected
        detail = f" (expected one of: {', '.join(sorted(expected))})" if expected else ""
        super().__init__(f"{line}:{column}: {message}{detail}")


_TOKEN = re.compile(r"\s*(?:(?P<ident>[a-z][a-zA-Z0-9_]*)|(?P<sym><->|->|[~&|<>\[\];+*?()]))")
_IDENT = "identifier"
_EOF = "end of input"


class _Fail(Exception):
    pass


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks: list[tuple[str, str, int]] = []  # (kind, value, offset)
        pos = 0
        while True:
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                rest = text[pos:]
                if rest.strip():
                    off = pos + len(rest) - len(rest.lstrip())
                    line, col = self.where(off)
                    raise ParseError(f"unexpected character {text[off]!r}", line, col)
                break
            kind = "ident" if m.group("ident") else "sym"
            self.toks.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.toks.append(("eof", _EOF, len(text)))
        self.i = 0
        self.far = 0
        self.expected: set[str] = set()
        self.memo: dict = {}

    def where(self, offset: int) -> tuple[int, int]:
        line = self.text.count("\n", 0, offset) + 1
        col = offset - (self.text.rfind("\n", 0, offset) + 1) + 1
        return line, col

    # token helpers

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def miss(self, what: str):
        if self.i > self.far:
            self.far, self.expected = self.i, {what}
        elif self.i == self.far:
            self.expected.add(what)
        raise _Fail

    def accept(self, sym: str) -> bool:
        kind, value, _ = self.toks[self.i]
        if kind == "sym" and value == sym:
            self.i += 1
            return True
        if self.i >= self.far:
            if self.i > self.far:
                self.far, self.expected = self.i, set()
            self.expected.add(repr(sym))
        return False

    def expect(self, sym: str):
        if not self.accept(sym):
            raise _Fail

    def ident(self) -> str | None:
        kind, value, _ = self.toks[self.i]
        if kind == "ident":
            self.i += 1
            return value
        if self.i >= self.far:
            if self.i > self.far:
                self.far, self.expected = self.i, set()
            self.expected.add(_IDENT)
        return None

    # grammar

    def top(self):
        f = self.iff()
        if self.peek()[0] != "eof":
            self.miss(_EOF)
        return f

    def iff(self):
        left = self.imp()
        if self.accept("<->"):
            right = self.iff()
            return And(Or(Not(left), right), Or(Not(right), left))
        return left

    def imp(self):
        left = self.fml()
        if self.accept("->"):
            return Or(Not(left), self.imp())
        return left

    def fml(self):
        left = self.fml1()
        if self.accept("|"):
            return Or(left, self.fml())
        return left

    def fml1(self):
        left = self.fml2()
        if self.accept("&"):
            return And(left, self.fml1())
        return left

    def fml2(self):
        key = ("f", self.i)
        if key in self.memo:
            result, end = self.memo[key]
            if result is None:
                raise _Fail
            self.i = end
            return result
        start = self.i
        try:
            result = self._fml2()
        except _Fail:
            self.memo[key] = (None, start)
            self.i = start
            raise
        self.memo[key] = (result, self.i)
        return result

    def _fml2(self):
        name = self.ident()
        if name is not None:
            return Atom(name)
        if self.accept("~"):
            return Not(self.fml2())
        if self.accept("<"):
            p = self.prg()
            self.expect(">")
            return Diamond(p, self.fml2())
        if self.accept("["):
            p = self.prg()
            self.expect("]")
            return Box(p, self.fml2())
        if self.accept("("):
            f = self.iff()
            self.expect(")")
            return f
        raise _Fail

    def prg(self):
        left = self.prg1()
        if self.accept("+"):
            return Choice(left, self.prg())
        return left

    def prg1(self):
        left = self.prg2()
        if self.accept(";"):
            return Seq(left, self.prg1())
        return left

    def prg2(self):
        key = ("p", self.i)
        if key in self.memo:
            result, end = self.memo[key]
            if result is None:
                raise _Fail
            self.i = end
            return result
        start = self.i
        try:
            result = self._prg2()
        except _Fail:
            self.memo[key] = (None, start)
            self.i = start
            raise
        self.memo[key] = (result, self.i)
        return result

    def _prg2(self):
        start = self.i
        base = None
        # a test "fml2 ?" shares its prefix with atomic and parenthesised programs
        try:
            cond = self.fml2()
            self.expect("?")
            base = Test(cond)
        except _Fail:
            self.i = start
        if base is None:
            name = self.ident()
            if name is not None:
                base = Atomic(name)
            elif self.accept("("):
                base = self.prg()
                self.expect(")")
            else:
                raise _Fail
        while self.accept("*"):
            base = Star(base)
        return base


def parse(text: str) -> Formula:
    """Parse ``text`` into a :data:`Formula`; raises :class:`ParseError`
    carrying line, column and the set of expected tokens."""
    p = _Parser(text)
    try:
        return p.top()
    except _Fail:
        kind, value, offset = p.toks[p.far]
        line, col = p.where(offset)
        found = "end of input" if kind == "eof" else repr(value)
        raise ParseError(f"unexpected {found}", line, col, frozenset(p.expected)) from None
    except RecursionError:
        raise ParseError("formula nested too deeply", 1, 1) from None


def parse_program(text: str) -> Program:
    p = _Parser(text)
    try:
        prog = p.prg()
        if p.peek()[0] != "eof":
            p.miss(_EOF)
        return prog
    except _Fail:
        kind, value, offset = p.toks[p.far]
        line, col = p.where(offset)
        found = "end of input" if kind == "eof" else repr(value)
        raise ParseError(f"unexpected {found}", line, col, frozenset(p.expected)) from None
