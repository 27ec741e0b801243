"""PCTL / bPCTL syntax trees, parser, renderer and horizon analysis.

Grammar::

    state := 'true' | atom | '!' state | '(' state '&' state ')'
           | 'P' cmp rat '[' path ']'
    cmp   := '>' | '='
    rat   := int | int '/' int
    path  := 'X' state | state 'U' state | state 'U<=' int state
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

UNBOUNDED = math.inf
COMPARISONS = (">", "=")


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        self.pos = pos
        super().__init__(f"{message} at position {pos}")


# --- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class TrueF:
    def __str__(self):
        return render_formula(self)


@dataclass(frozen=True)
class Atom:
    ap: str

    def __str__(self):
        return self.ap


@dataclass(frozen=True)
class Not:
    arg: StateFormula

    def __str__(self):
        return render_formula(self)


@dataclass(frozen=True)
class And:
    left: StateFormula
    right: StateFormula

    def __str__(self):
        return render_formula(self)


@dataclass(frozen=True)
class Prob:
    cmp: str
    bound: Fraction
    path: PathFormula

    def __post_init__(self):
        if self.cmp not in COMPARISONS:
            raise ValueError(f"unsupported comparison {self.cmp!r}")
        b = Fraction(self.bound)
        if not 0 <= b <= 1:
            raise ValueError(f"probability bound {b} outside [0, 1]")
        object.__setattr__(self, "bound", b)

    def __str__(self):
        return render_formula(self)


@dataclass(frozen=True)
class Next:
    arg: StateFormula


@dataclass(frozen=True)
class Until:
    left: StateFormula
    right: StateFormula


@dataclass(frozen=True)
class BoundedUntil:
    left: StateFormula
    right: StateFormula
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("step bound must be non-negative")


StateFormula = Union[TrueF, Atom, Not, And, Prob]
PathFormula = Union[Next, Until, BoundedUntil]
TRUE = TrueF()


def Or(a: StateFormula, b: StateFormula) -> StateFormula:
    return Not(And(Not(a), Not(b)))


def conj(parts: Iterable[StateFormula]) -> StateFormula:
    parts = list(parts)
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts: Iterable[StateFormula]) -> StateFormula:
    parts = list(parts)
    if not parts:
        return Not(TRUE)
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


# --- rendering -------------------------------------------------------------


def render_formula(f) -> str:
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, Atom):
        return f.ap
    if isinstance(f, Not):
        return "!" + render_formula(f.arg)
    if isinstance(f, And):
        return f"({render_formula(f.left)} & {render_formula(f.right)})"
    if isinstance(f, Prob):
        return f"P{f.cmp}{f.bound} [ {render_path(f.path)} ]"
    if isinstance(f, (Next, Until, BoundedUntil)):
        return render_path(f)
    raise TypeError(f"not a formula: {f!r}")


def render_path(p: PathFormula) -> str:
    if isinstance(p, Next):
        return "X " + render_formula(p.arg)
    if isinstance(p, Until):
        return f"{render_formula(p.left)} U {render_formula(p.right)}"
    if isinstance(p, BoundedUntil):
        return f"{render_formula(p.left)} U<={p.k} {render_formula(p.right)}"
    raise TypeError(f"not a path formula: {p!r}")


# --- parsing ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<until_le>U<=)
  | (?P<bad_cmp>>=|<=|<|!=)
  | (?P<ident>[A-Za-z0-9_′'•:.]+(?:\([A-Za-z0-9_′'•,.]*\))?)
  | (?P<punct>[()\[\]&!>=/])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind == "bad_cmp":
            raise FormulaSyntaxError(f"unsupported comparison {m.group()!r}", pos)
        if kind != "ws":
            toks.append((kind, m.group(), pos))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, bindings: Optional[dict]):
        self.toks = _tokenize(text)
        self.i = 0
        self.bindings = bindings or {}

    def peek(self, offset: int = 0):
        return self.toks[min(self.i + offset, len(self.toks) - 1)]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        tok = self.take()
        if tok[1] != value:
            raise FormulaSyntaxError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2])
        return tok

    def integer(self) -> int:
        tok = self.take()
        if tok[0] != "ident" or not tok[1].isdigit():
            raise FormulaSyntaxError(f"expected integer, found {tok[1] or 'end of input'!r}", tok[2])
        return int(tok[1])

    def state(self) -> StateFormula:
        kind, val, pos = self.peek()
        if val == "!":
            self.take()
            return Not(self.state())
        if val == "(":
            self.take()
            left = self.state()
            self.expect("&")
            right = self.state()
            self.expect(")")
            return And(left, right)
        if kind == "ident":
            if val == "P" and self.peek(1)[1] in COMPARISONS:
                return self.prob()
            self.take()
            if val == "true":
                return TRUE
            bound = self.bindings.get(val)
            if bound is not None and not isinstance(bound, (Next, Until, BoundedUntil)):
                return bound
            return Atom(val)
        raise FormulaSyntaxError(f"expected state formula, found {val or 'end of input'!r}", pos)

    def prob(self) -> Prob:
        self.take()
        cmp_tok = self.take()
        num = self.integer()
        den = 1
        if self.peek()[1] == "/":
            self.take()
            den_pos = self.peek()[2]
            den = self.integer()
            if den == 0:
                raise FormulaSyntaxError("zero denominator", den_pos)
        bound = Fraction(num, den)
        if bound > 1:
            raise FormulaSyntaxError(f"probability bound {bound} exceeds 1", cmp_tok[2])
        self.expect("[")
        path = self.path()
        self.expect("]")
        return Prob(cmp_tok[1], bound, path)

    def path(self) -> PathFormula:
        kind, val, pos = self.peek()
        if kind == "ident" and val in self.bindings and self.peek(1)[1] == "]":
            bound = self.bindings[val]
            if isinstance(bound, (Next, Until, BoundedUntil)):
                self.take()
                return bound
        if kind == "ident" and val == "X":
            self.take()
            return Next(self.state())
        left = self.state()
        kind, val, pos = self.take()
        if kind == "until_le":
            k = self.integer()
            return BoundedUntil(left, self.state(), k)
        if val == "U":
            return Until(left, self.state())
        raise FormulaSyntaxError(f"expected 'U' or 'U<=', found {val or 'end of input'!r}", pos)


def parse_formula(text: str, bindings: Optional[dict] = None) -> StateFormula:
    """Parse a state formula.

    ``bindings`` maps names to pre-built formulas; a bound name standing alone
    inside ``P..[ ]`` is replaced by its path formula, elsewhere by its state
    formula.
    """
    p = _Parser(text, bindings)
    f = p.state()
    kind, val, pos = p.peek()
    if kind != "eof":
        raise FormulaSyntaxError(f"trailing input {val!r}", pos)
    return f


# --- analysis --------------------------------------------------------------


def required_horizon(f) -> float:
    """Number of transition steps satisfaction can depend on (``inf`` if unbounded)."""
    if isinstance(f, (TrueF, Atom)):
        return 0
    if isinstance(f, Not):
        return required_horizon(f.arg)
    if isinstance(f, And):
        return max(required_horizon(f.left), required_horizon(f.right))
    if isinstance(f, Prob):
        return path_horizon(f.path)
    if isinstance(f, (Next, Until, BoundedUntil)):
        return path_horizon(f)
    raise TypeError(f"not a formula: {f!r}")


def path_horizon(p: PathFormula, steps: Optional[float] = None) -> float:
    """Horizon of a path formula; ``steps`` overrides the until step bound."""
    if isinstance(p, Next):
        return 1 + required_horizon(p.arg)
    if isinstance(p, Until):
        return UNBOUNDED
    if isinstance(p, BoundedUntil):
        k = p.k if steps is None else steps
        return k + max(required_horizon(p.left), required_horizon(p.right))
    raise TypeError(f"not a path formula: {p!r}")


def atoms_of(f) -> set:
    if isinstance(f, Atom):
        return {f.ap}
    if isinstance(f, TrueF):
        return set()
    if isinstance(f, Not):
        return atoms_of(f.arg)
    if isinstance(f, (And, Until, BoundedUntil)):
        return atoms_of(f.left) | atoms_of(f.right)
    if isinstance(f, Prob):
        return atoms_of(f.path)
    if isinstance(f, Next):
        return atoms_of(f.arg)
    raise TypeError(f"not a formula: {f!r}")
