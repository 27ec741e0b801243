"""Amplitudes, finite quantum Markov chains and the cylinder measure.

Probabilities are exact :class:`fractions.Fraction` values built from squared
moduli only; phases are kept as floats for orthogonality diagnostics.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

TWO_PI = 2 * math.pi


def canonical_phase(theta: float) -> float:
    """Reduce ``theta`` into (0, 2π]; zero maps to 2π."""
    r = math.fmod(theta, TWO_PI)
    if r <= 0:
        r += TWO_PI
    return r


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("mod2 must be exact; got float %r" % value)
    return Fraction(value)


@dataclass(frozen=True)
class Amplitude:
    """Complex amplitude stored as (squared modulus, phase)."""

    mod2: Fraction
    phase: float = TWO_PI

    def __post_init__(self):
        mod2 = as_fraction(self.mod2)
        if mod2 < 0:
            raise ValueError(f"mod2 must be non-negative, got {mod2}")
        object.__setattr__(self, "mod2", mod2)
        object.__setattr__(self, "phase", canonical_phase(float(self.phase)))

    def to_complex(self) -> complex:
        return math.sqrt(self.mod2) * cmath.exp(1j * self.phase)

    def __mul__(self, other: Amplitude) -> Amplitude:
        return Amplitude(self.mod2 * other.mod2, self.phase + other.phase)

    def __str__(self) -> str:
        return f"{self.mod2} % {self.phase!r}"


ONE = Amplitude(Fraction(1), TWO_PI)


def amp_product(factors: Iterable[Amplitude]) -> Amplitude:
    mod2 = Fraction(1)
    phase = 0.0
    for a in factors:
        mod2 *= a.mod2
        phase += a.phase
    return Amplitude(mod2, phase)


def path_probability(amps: Iterable[Amplitude]) -> Fraction:
    """Probability of the cylinder spanned by a path with these step amplitudes.

    The squared modulus of a product is the product of squared moduli, so the
    phases never enter; only ``mod2`` values are multiplied.
    """
    p = Fraction(1)
    for a in amps:
        p *= a.mod2
    return p


@dataclass(frozen=True)
class ProbInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = as_fraction(self.lo), as_fraction(self.hi)
        if not (0 <= lo <= hi <= 1):
            raise ValueError(f"bad probability interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, p) -> ProbInterval:
        return cls(p, p)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __str__(self) -> str:
        if self.is_point:
            return str(self.lo)
        return f"[{self.lo}, {self.hi}]"


State = Hashable


@dataclass(frozen=True)
class FiniteQMC:
    """A finite quantum Markov chain given as a row table.

    ``transitions[s]`` lists ``(target, Amplitude)`` entries in a fixed order.
    ``props`` declares propositions that may label no state at all.
    """

    states: tuple
    transitions: dict = field(hash=False)
    labelling: dict = field(default_factory=dict, hash=False)
    props: frozenset = frozenset()

    def __post_init__(self):
        for s in self.states:
            if not self.transitions.get(s):
                raise ValueError(f"state {s!r} has no outgoing transition")
            for t, _ in self.transitions[s]:
                if t not in self.transitions:
                    raise ValueError(f"transition {s!r} -> {t!r} leaves the state set")

    def successors(self, s: State) -> Sequence[tuple[State, Amplitude]]:
        return self.transitions[s]

    def labels(self, s: State) -> frozenset:
        return frozenset(self.labelling.get(s, ()))

    def atoms(self) -> frozenset:
        out = set(self.props)
        for v in self.labelling.values():
            out.update(v)
        return frozenset(out)


@dataclass
class ValidationReport:
    """Violations are data; ``ok`` is true iff there are none."""

    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, where, detail) -> None:
        self.violations.append({"kind": kind, "where": str(where), "detail": str(detail)})

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": self.violations, "warnings": self.warnings}


def validate_normalization(chain: FiniteQMC) -> ValidationReport:
    report = ValidationReport()
    for s in chain.states:
        total = sum((a.mod2 for _, a in chain.transitions[s]), Fraction(0))
        if total != 1:
            report.add("normalization", s, total)
    return report


def check_orthogonality(row_i, row_j, tol: float = 1e-9) -> bool:
    """True iff two amplitude rows are orthogonal up to ``tol``.

    Rows are sequences of ``(target, Amplitude)``; repeated targets accumulate.
    """
    vi: dict = {}
    for t, a in row_i:
        vi[t] = vi.get(t, 0j) + a.to_complex()
    vj: dict = {}
    for t, a in row_j:
        vj[t] = vj.get(t, 0j) + a.to_complex()
    inner = sum((vi[t] * vj[t].conjugate() for t in vi.keys() & vj.keys()), 0j)
    return abs(inner) <= tol
