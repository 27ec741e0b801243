"""PCTL/bPCTL evaluation over successor-generating models.

The engine unrolls the model lazily from the queried configuration.  Every
probability is an exact :class:`~fractions.Fraction`; when an unbounded until
(or a too-small horizon) leaves runs unresolved, the result is an interval and
the verdict may be ``UNKNOWN``.
"""

from __future__ import annotations

import enum
import os
import sys
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Hashable, Optional, Protocol, Sequence

from .core import Amplitude, ProbInterval
from .logic import (
    UNBOUNDED,
    And,
    Atom,
    BoundedUntil,
    Next,
    Not,
    Prob,
    TrueF,
    Until,
    atoms_of,
    path_horizon,
    required_horizon,
)

ZERO = Fraction(0)
ONE = Fraction(1)
DEFAULT_CEILING = 10000


class ModelAdapter(Protocol):
    def successors(self, c: Hashable) -> Sequence[tuple[Hashable, Amplitude]]: ...

    def labels(self, c: Hashable) -> frozenset: ...


class UnknownAtomError(ValueError):
    pass


class Truth(enum.Enum):
    HOLDS = "HOLDS"
    FAILS = "FAILS"
    UNKNOWN = "UNKNOWN"

    def __invert__(self) -> Truth:
        if self is Truth.HOLDS:
            return Truth.FAILS
        if self is Truth.FAILS:
            return Truth.HOLDS
        return Truth.UNKNOWN

    def __and__(self, other: Truth) -> Truth:
        if self is Truth.FAILS or other is Truth.FAILS:
            return Truth.FAILS
        if self is Truth.HOLDS and other is Truth.HOLDS:
            return Truth.HOLDS
        return Truth.UNKNOWN


HOLDS, FAILS, UNKNOWN = Truth.HOLDS, Truth.FAILS, Truth.UNKNOWN


@dataclass(frozen=True)
class Verdict:
    truth: Truth
    interval: Optional[ProbInterval] = None
    quiescent: bool = True
    horizon: float = 0

    def __post_init__(self):
        if self.interval is not None and self.interval.is_point and self.truth is UNKNOWN:
            raise ValueError("a point interval cannot give an UNKNOWN verdict")

    def __str__(self) -> str:
        if self.interval is None:
            return self.truth.value
        return f"{self.truth.value} {self.interval}"


def compare(cmp: str, bound: Fraction, lo: Fraction, hi: Fraction) -> Truth:
    """Decide ``P ⋈ bound`` knowing only ``lo <= P <= hi``."""
    if cmp == ">":
        if lo > bound:
            return HOLDS
        if hi <= bound:
            return FAILS
        return UNKNOWN
    if cmp == "=":
        if lo == hi == bound:
            return HOLDS
        if bound < lo or bound > hi:
            return FAILS
        return UNKNOWN
    raise ValueError(f"unsupported comparison {cmp!r}")


class Checker:
    """Evaluator bound to one model.

    ``memo`` caches (formula, configuration, remaining steps, budget) results;
    ``max_entries`` caps the cache, which is cleared when full.
    """

    def __init__(self, model: ModelAdapter, memo: bool = True, max_entries: Optional[int] = None,
                 check_atoms: bool = True):
        self.model = model
        self.memo = memo
        self.max_entries = max_entries
        self.check_atoms = check_atoms
        self._cache: dict = {}
        self._horizons: dict = {}
        self._pinned: list = []
        self._succ: dict = {}
        self.stats = {"hits": 0, "misses": 0}

    # -- helpers ----------------------------------------------------------

    def _horizon(self, f) -> float:
        key = id(f)
        h = self._horizons.get(key)
        if h is None:
            h = required_horizon(f)
            self._horizons[key] = h
            self._pinned.append(f)
        return h

    def _operand_horizon(self, p) -> float:
        key = ("ops", id(p))
        h = self._horizons.get(key)
        if h is None:
            h = max(self._horizon(p.left), self._horizon(p.right))
            self._horizons[key] = h
            self._pinned.append(p)
        return h

    def _successors(self, c):
        if not self.memo:
            return self.model.successors(c)
        s = self._succ.get(c)
        if s is None:
            s = tuple((t, a.mod2) for t, a in self.model.successors(c))
            if self.max_entries is not None and len(self._succ) >= self.max_entries:
                self._succ.clear()
            self._succ[c] = s
        return s

    def _steps(self, c):
        for t, a in self._successors(c):
            yield t, (a if isinstance(a, Fraction) else a.mod2)

    def _is_absorbing(self, c) -> bool:
        succ = self._successors(c)
        return len(succ) == 1 and succ[0][0] == c

    def _store(self, key, value):
        if self.memo:
            if self.max_entries is not None and len(self._cache) >= self.max_entries:
                self._cache.clear()
            self._cache[key] = value
        return value

    def clear(self) -> None:
        self._cache.clear()
        self._succ.clear()

    def validate_atoms(self, f) -> None:
        known = getattr(self.model, "atoms", None)
        if not self.check_atoms or known is None:
            return
        missing = sorted(atoms_of(f) - set(known()))
        if missing:
            raise UnknownAtomError(f"unknown atomic proposition(s): {', '.join(missing)}")

    # -- state formulas ---------------------------------------------------

    def sat(self, c, f, h: float) -> Truth:
        if isinstance(f, TrueF):
            return HOLDS
        if isinstance(f, Atom):
            return HOLDS if f.ap in self.model.labels(c) else FAILS
        if isinstance(f, Not):
            return ~self.sat(c, f.arg, h)
        if isinstance(f, And):
            left = self.sat(c, f.left, h)
            if left is FAILS:
                return FAILS
            return left & self.sat(c, f.right, h)
        if isinstance(f, Prob):
            lo, hi = self.prob_path(c, f.path, h)
            return compare(f.cmp, f.bound, lo, hi)
        raise TypeError(f"not a state formula: {f!r}")

    # -- path formulas ----------------------------------------------------

    def prob_path(self, c, p, h: float) -> tuple[Fraction, Fraction]:
        """Bounds ``(lo, hi)`` on the probability that runs from ``c`` satisfy ``p``."""
        if isinstance(p, Next):
            h = min(h, self._horizon(p))
            key = (id(p), c, 0, h)
            if self.memo:
                hit = self._cache.get(key)
                if hit is not None:
                    self.stats["hits"] += 1
                    return hit
                self.stats["misses"] += 1
            if h < 1:
                return self._store(key, (ZERO, ONE))
            lo = hi = ZERO
            for t, pr in self._steps(c):
                truth = self.sat(t, p.arg, h - 1)
                if truth is HOLDS:
                    lo += pr
                    hi += pr
                elif truth is UNKNOWN:
                    hi += pr
            return self._store(key, (lo, hi))
        if isinstance(p, BoundedUntil):
            return self._until(c, p, p.k, h)
        if isinstance(p, Until):
            return self._until(c, p, UNBOUNDED, h)
        raise TypeError(f"not a path formula: {p!r}")

    def _until(self, c, p, j: float, h: float) -> tuple[Fraction, Fraction]:
        if j != UNBOUNDED:
            h = min(h, j + self._operand_horizon(p))
        key = (id(p), c, j, h)
        if self.memo:
            hit = self._cache.get(key)
            if hit is not None:
                self.stats["hits"] += 1
                return hit
            self.stats["misses"] += 1
        goal = self.sat(c, p.right, h)
        if goal is HOLDS:
            return self._store(key, (ONE, ONE))
        stay = self.sat(c, p.left, h)
        if goal is FAILS and stay is FAILS:
            return self._store(key, (ZERO, ZERO))
        if j == 0 or self._is_absorbing(c):
            # nothing changes after this point: the goal's truth here is final
            if goal is FAILS:
                return self._store(key, (ZERO, ZERO))
            return self._store(key, (ZERO, ONE))
        if h < 1:
            return self._store(key, (ZERO, ONE))
        lo = hi = ZERO
        for t, pr in self._steps(c):
            sub_lo, sub_hi = self._until(t, p, j - 1, h - 1)
            lo += pr * sub_lo
            hi += pr * sub_hi
        if goal is FAILS and stay is HOLDS:
            return self._store(key, (lo, hi))
        # some operand is UNKNOWN: the value is one of {1 if goal}, {0 if not stay}, sub
        options_lo = [lo]
        options_hi = [hi]
        if goal is UNKNOWN:
            options_hi.append(ONE)
        if stay is not HOLDS:
            options_lo.append(ZERO)
        return self._store(key, (min(options_lo), max(options_hi)))

    # -- entry points -----------------------------------------------------

    def check(self, c, f, horizon: Optional[float] = None) -> Verdict:
        self.validate_atoms(f)
        need = self._horizon(f)
        if horizon is None:
            if need == UNBOUNDED:
                raise ValueError("formula has an unbounded until; give a horizon")
            horizon = need
        if horizon == UNBOUNDED:
            raise ValueError("horizon must be finite")
        return _deep(lambda: self._check(c, f, horizon), horizon)

    def _check(self, c, f, horizon) -> Verdict:
        if isinstance(f, Prob):
            lo, hi = self.prob_path(c, f.path, horizon)
            truth = compare(f.cmp, f.bound, lo, hi)
            return Verdict(truth, ProbInterval(lo, hi), lo == hi, horizon)
        truth = self.sat(c, f, horizon)
        return Verdict(truth, None, truth is not UNKNOWN, horizon)

    def probability(self, c, p, horizon: Optional[float] = None) -> ProbInterval:
        self.validate_atoms(p)
        if horizon is None:
            horizon = path_horizon(p)
            if horizon == UNBOUNDED:
                raise ValueError("path formula is unbounded; give a horizon")
        lo, hi = _deep(lambda: self.prob_path(c, p, horizon), horizon)
        return ProbInterval(lo, hi)


def _deep(fn: Callable[[], Any], horizon: float):
    """Run ``fn`` with room for recursion proportional to ``horizon``."""
    depth = int(horizon) * 4 + 200
    if depth < sys.getrecursionlimit() - 100:
        return fn()
    result: list = []
    error: list = []

    def target():
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, depth + 1000))
        try:
            result.append(fn())
        except BaseException as exc:  # re-raised in the caller's thread
            error.append(exc)
        finally:
            sys.setrecursionlimit(old)

    old_size = threading.stack_size()
    threading.stack_size(min(1 << 30, max(64 << 20, depth * 2048)))
    try:
        t = threading.Thread(target=target)
        t.start()
        t.join()
    finally:
        threading.stack_size(old_size)
    if error:
        raise error[0]
    return result[0]


def prob_path(model: ModelAdapter, c, phi, horizon: float) -> tuple[ProbInterval, bool]:
    iv = Checker(model).probability(c, phi, horizon)
    return iv, iv.is_point


def check_state(model: ModelAdapter, c, f, horizon: Optional[float] = None, memo: bool = True) -> Verdict:
    return Checker(model, memo=memo).check(c, f, horizon)


def max_horizon_from_env() -> int:
    raw = os.environ.get("QPMC_MAX_HORIZON")
    if not raw:
        return DEFAULT_CEILING
    value = int(raw)
    if value < 1:
        raise ValueError("QPMC_MAX_HORIZON must be positive")
    return value


def check_quiescent(model: ModelAdapter, c, f, ceiling: Optional[int] = None, start: int = 1,
                    checker: Optional[Checker] = None) -> tuple[Verdict, float]:
    """Iterative deepening: double the horizon until the verdict is decided.

    Bounded formulas are checked once at their required horizon.
    """
    checker = checker or Checker(model)
    need = required_horizon(f)
    if need != UNBOUNDED:
        v = checker.check(c, f, need)
        return v, need
    if ceiling is None:
        ceiling = max_horizon_from_env()
    h = max(1, start)
    while True:
        h = min(h, ceiling)
        v = checker.check(c, f, h)
        if v.truth is not UNKNOWN or h >= ceiling:
            return v, h
        checker.clear()
        h *= 2
