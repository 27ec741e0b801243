"""Quantum pushdown systems and the infinite chain they induce.

A stateless system (qBPA) is a :class:`QPDS` whose only control state is
``None``; configurations are then plain stack strings.  Stacks are tuples of
symbol names with the top at index 0.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional, Sequence

from .core import ONE, TWO_PI, Amplitude, ValidationReport, check_orthogonality

EMPTY = "empty"
EPSILON_TOKEN = "-"

_SYMBOL_RE = re.compile(r"^[^\s@%#:=>\-][^\s@%#]*$")


class SystemFormatError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, col {column}: " if line else ""
        super().__init__(where + message)


class Configuration(NamedTuple):
    control: Optional[str]
    stack: tuple

    def __str__(self) -> str:
        body = " ".join(self.stack) if self.stack else "ε"
        return body if self.control is None else f"{self.control} {body}"


def config(stack: str | Sequence[str], control: Optional[str] = None) -> Configuration:
    """Build a configuration from a whitespace-separated stack (top first)."""
    if isinstance(stack, str):
        stack = stack.split()
    return Configuration(control, tuple(stack))


@dataclass(frozen=True)
class Rule:
    lhs_symbol: str
    rhs: tuple
    amp: Amplitude
    lhs_state: Optional[str] = None
    rhs_state: Optional[str] = None

    def __str__(self) -> str:
        lhs = self.lhs_symbol if self.lhs_state is None else f"{self.lhs_state} {self.lhs_symbol}"
        body = " ".join(self.rhs) if self.rhs else EPSILON_TOKEN
        rhs = body if self.rhs_state is None else f"{self.rhs_state} {body}"
        return f"{lhs} -> {rhs}"


def head_name(head) -> str:
    """Spelling of a head under the identity labelling."""
    if isinstance(head, tuple):
        return f"{head[0]}:{head[1]}"
    return head


@dataclass(frozen=True)
class SimpleAssignment:
    """Labelling by heads: ``props[a]`` is the head set H_a.

    With ``identity`` on, every head additionally carries the proposition
    spelled like itself.  Empty-stack configurations always carry ``empty``.
    """

    props: dict = field(default_factory=dict, hash=False)
    identity: bool = True


class QPDS:
    """Rule table plus assignment; immutable after construction."""

    def __init__(
        self,
        gamma: Iterable[str],
        rules: Iterable[Rule],
        control_states: Optional[Iterable[str]] = None,
        start: Optional[Configuration] = None,
        assignment: Optional[SimpleAssignment] = None,
    ):
        self.gamma = tuple(dict.fromkeys(gamma))
        self.control_states = tuple(control_states) if control_states else (None,)
        self.rules = tuple(rules)
        self.start = start
        self.assignment = assignment or SimpleAssignment()
        table = defaultdict(list)
        for r in self.rules:
            table[(r.lhs_state, r.lhs_symbol)].append(r)
        self._table = {k: tuple(v) for k, v in table.items()}
        self._gamma_set = frozenset(self.gamma)
        heads_to_props = defaultdict(set)
        for a, hs in self.assignment.props.items():
            for h in hs:
                heads_to_props[h].add(a)
        self._head_props = {h: frozenset(v) for h, v in heads_to_props.items()}
        self._label_cache: dict = {}

    @property
    def stateless(self) -> bool:
        return self.control_states == (None,)

    def rules_for(self, symbol: str, state: Optional[str] = None) -> tuple:
        return self._table.get((state, symbol), ())

    def head(self, c: Configuration):
        return head(c)

    def successors(self, c: Configuration) -> tuple:
        """Ordered ``(Configuration, Amplitude)`` successors of ``c``."""
        if not c.stack:
            return ((c, ONE),)
        top, rest = c.stack[0], c.stack[1:]
        rules = self._table.get((c.control, top))
        if rules is None:
            if top not in self._gamma_set:
                raise ValueError(f"unknown stack symbol {top!r}")
            raise ValueError(f"no rule for head {head_name(head(c))!r}")
        return tuple((Configuration(r.rhs_state, r.rhs + rest), r.amp) for r in rules)

    def labels(self, c: Configuration) -> frozenset:
        h = head(c)
        cached = self._label_cache.get(h)
        if cached is not None:
            return cached
        out = set(self._head_props.get(h, ()))
        if h is None or (not c.stack):
            out.add(EMPTY)
        if self.assignment.identity and h is not None:
            out.add(head_name(h))
        result = frozenset(out)
        self._label_cache[h] = result
        return result

    def atoms(self) -> frozenset:
        """Every proposition some configuration can carry."""
        out = {EMPTY}
        out.update(self.assignment.props)
        if self.assignment.identity:
            for p in self.control_states:
                if p is not None:
                    out.add(p)
                for x in self.gamma:
                    out.add(head_name(x if p is None else (p, x)))
        return frozenset(out)

    def __repr__(self) -> str:
        return f"QPDS(|Q|={len(self.control_states)}, |Γ|={len(self.gamma)}, rules={len(self.rules)})"


def head(c: Configuration):
    """(control, top) for a nonempty stack, the control state otherwise.

    In the stateless case the control component is dropped, so the head is
    the top symbol or ``None`` for the empty stack.
    """
    if c.stack:
        return c.stack[0] if c.control is None else (c.control, c.stack[0])
    return c.control


def successors(sys: QPDS, c: Configuration) -> tuple:
    return sys.successors(c)


def labels(sys: QPDS, c: Configuration) -> frozenset:
    return sys.labels(c)


def validate_system(sys: QPDS, strict: bool = True) -> ValidationReport:
    report = ValidationReport()
    gamma = set(sys.gamma)
    states = set(sys.control_states)
    sums: dict = defaultdict(Fraction)
    for r in sys.rules:
        if r.lhs_state not in states or r.rhs_state not in states:
            report.add("closure", r, "control state outside Q")
        if r.lhs_symbol not in gamma:
            report.add("closure", r, f"symbol {r.lhs_symbol!r} outside Γ")
        for x in r.rhs:
            if x not in gamma:
                report.add("closure", r, f"symbol {x!r} outside Γ")
        if strict and len(r.rhs) > 2:
            report.add("rhs_length", r, f"|rhs| = {len(r.rhs)} > 2")
        sums[(r.lhs_state, r.lhs_symbol)] += r.amp.mod2
    for p in sys.control_states:
        for x in sys.gamma:
            key = (p, x)
            where = head_name(x if p is None else key)
            if key not in sums:
                report.add("totality", where, "no rule")
            elif sums[key] != 1:
                report.add("normalization", where, sums[key])
    if sys.start is not None:
        for x in sys.start.stack:
            if x not in gamma:
                report.add("closure", "start", f"symbol {x!r} outside Γ")
        if sys.start.control not in states:
            report.add("closure", "start", "control state outside Q")
    return report


def orthogonality_diagnostics(sys: QPDS, tol: float = 1e-9) -> list:
    """Head pairs whose rows (over a shared stack suffix) are not orthogonal.

    Only rows of configurations ``pXw`` and ``qYw`` are materialised; the
    induced operator itself is infinite and is never certified.
    """
    rows = {}
    for key, rules in sys._table.items():
        rows[key] = [((r.rhs_state, r.rhs), r.amp) for r in rules]
    keys = sorted(rows, key=lambda k: (str(k[0]), k[1]))
    bad = []
    for i, a in enumerate(keys):
        for b in keys[i + 1:]:
            if not check_orthogonality(rows[a], rows[b], tol):
                bad.append((head_name(a[1] if a[0] is None else a), head_name(b[1] if b[0] is None else b)))
    return bad


# --- text format -----------------------------------------------------------


def _parse_amplitude(text: str, line: int, column: int) -> Amplitude:
    mod2_text, _, phase_text = text.partition("%")
    try:
        mod2 = Fraction(mod2_text.strip())
    except (ValueError, ZeroDivisionError):
        raise SystemFormatError(f"bad mod2 {mod2_text.strip()!r}", line, column) from None
    if "." in mod2_text or "e" in mod2_text.lower():
        raise SystemFormatError("mod2 must be an integer or p/q rational", line, column)
    phase = TWO_PI
    if phase_text.strip():
        try:
            phase = float(phase_text)
        except ValueError:
            raise SystemFormatError(f"bad phase {phase_text.strip()!r}", line, column) from None
    if mod2 < 0 or mod2 > 1:
        raise SystemFormatError(f"mod2 {mod2} outside [0, 1]", line, column)
    return Amplitude(mod2, phase)


def _check_symbol(tok: str, line: int, column: int) -> str:
    if not _SYMBOL_RE.match(tok):
        raise SystemFormatError(f"bad symbol {tok!r}", line, column)
    return tok


def loads_system(text: str) -> QPDS:
    """Parse the line-oriented ``qpds v1`` format."""
    lines = text.splitlines()
    header_seen = False
    states: Optional[list] = None
    gamma: Optional[list] = None
    start_tokens: Optional[list] = None
    raw_rules = []
    raw_labels = []
    for lineno, raw in enumerate(lines, 1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        col = len(raw) - len(raw.lstrip()) + 1
        if not header_seen:
            if body.split() != ["qpds", "v1"]:
                raise SystemFormatError("expected header 'qpds v1'", lineno, col)
            header_seen = True
            continue
        key, sep, value = body.partition(":")
        if not sep:
            raise SystemFormatError("expected 'key: value'", lineno, col)
        key = key.strip()
        value = value.strip()
        if key == "states":
            states = [_check_symbol(t, lineno, col) for t in value.split()]
        elif key == "stack":
            gamma = [_check_symbol(t, lineno, col) for t in value.split()]
        elif key == "start":
            start_tokens = value.split()
        elif key == "rule":
            raw_rules.append((lineno, col, value))
        elif key == "label":
            raw_labels.append((lineno, col, value))
        else:
            raise SystemFormatError(f"unknown key {key!r}", lineno, col)
    if not header_seen:
        raise SystemFormatError("missing header 'qpds v1'", max(len(lines), 1), 1)
    if gamma is None:
        raise SystemFormatError("missing 'stack:' line", max(len(lines), 1), 1)
    if not raw_rules:
        raise SystemFormatError("no rules", max(len(lines), 1), 1)
    with_states = bool(states)

    rules = []
    for lineno, col, value in raw_rules:
        if "->" not in value or "@" not in value:
            raise SystemFormatError("rule needs 'LHS -> RHS @ mod2'", lineno, col)
        lhs, rest = value.split("->", 1)
        rhs, amp_text = rest.split("@", 1)
        lhs_t, rhs_t = lhs.split(), rhs.split()
        amp = _parse_amplitude(amp_text, lineno, col)
        if with_states:
            if len(lhs_t) != 2 or not rhs_t:
                raise SystemFormatError("rule needs 'p X -> q α'", lineno, col)
            lhs_state, lhs_sym = lhs_t
            rhs_state, rhs_syms = rhs_t[0], rhs_t[1:]
        else:
            if len(lhs_t) != 1 or not rhs_t:
                raise SystemFormatError("rule needs 'X -> α'", lineno, col)
            lhs_state, rhs_state = None, None
            lhs_sym, rhs_syms = lhs_t[0], rhs_t
        if rhs_syms == [EPSILON_TOKEN]:
            rhs_syms = []
        for t in [lhs_sym, *rhs_syms]:
            _check_symbol(t, lineno, col)
        rules.append(Rule(lhs_sym, tuple(rhs_syms), amp, lhs_state, rhs_state))

    props = {}
    for lineno, col, value in raw_labels:
        if "=>" not in value:
            raise SystemFormatError("label needs 'name => heads'", lineno, col)
        name, heads_text = value.split("=>", 1)
        name = name.strip()
        hs = set()
        for tok in heads_text.split():
            if with_states and ":" in tok:
                p, x = tok.split(":", 1)
                hs.add((p, x))
            else:
                hs.add(tok)
        props.setdefault(name, set()).update(hs)

    start = None
    if start_tokens is not None:
        if with_states:
            if not start_tokens:
                raise SystemFormatError("start needs a control state", 0, 0)
            start = Configuration(start_tokens[0], tuple(t for t in start_tokens[1:] if t != EPSILON_TOKEN))
        else:
            start = Configuration(None, tuple(t for t in start_tokens if t != EPSILON_TOKEN))
    assignment = SimpleAssignment({k: frozenset(v) for k, v in props.items()}, identity=True)
    return QPDS(gamma, rules, states if with_states else None, start, assignment)


def load_system(path) -> QPDS:
    with open(path, encoding="utf-8") as fh:
        return loads_system(fh.read())


def dumps_system(sys: QPDS, phases: bool = True) -> str:
    out = ["qpds v1"]
    if not sys.stateless:
        out.append("states: " + " ".join(sys.control_states))
    out.append("stack: " + " ".join(sys.gamma))
    if sys.start is not None:
        toks = list(sys.start.stack) or [EPSILON_TOKEN]
        if not sys.stateless:
            toks.insert(0, sys.start.control)
        out.append("start: " + " ".join(toks))
    for r in sys.rules:
        line = f"rule: {r} @ {r.amp.mod2}"
        if phases:
            line += f" % {r.amp.phase!r}"
        out.append(line)
    for name in sorted(sys.assignment.props):
        hs = sorted(head_name(h) for h in sys.assignment.props[name])
        out.append(f"label: {name} => " + " ".join(hs))
    return "\n".join(out) + "\n"
