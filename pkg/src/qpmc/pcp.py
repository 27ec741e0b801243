"""Post Correspondence Problem instances, padding, and the brute-force solver.

Also hosts the dyadic word encodings ``rho`` / ``rho_bar`` whose sum is 1
exactly when two {A,B}-words coincide.
"""

from __future__ import annotations

import hashlib
import itertools
import logging
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

PAD = "•"
END = "Z′"
LETTERS = ("A", "B")
SIGMA = ("A", "B", PAD)

log = logging.getLogger(__name__)


class PCPFormatError(ValueError):
    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class PCPInstance:
    pairs: tuple
    alphabet: tuple = LETTERS
    bound: Optional[int] = None

    def __post_init__(self):
        pairs = tuple((str(u), str(v)) for u, v in self.pairs)
        if not pairs:
            raise ValueError("a PCP instance needs at least one pair")
        for u, v in pairs:
            for ch in u + v:
                if ch not in self.alphabet:
                    raise ValueError(f"letter {ch!r} outside alphabet {self.alphabet}")
        if self.bound is not None and self.bound < 1:
            raise ValueError("bound K must be positive")
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "alphabet", tuple(self.alphabet))

    @property
    def n(self) -> int:
        return len(self.pairs)

    def with_bound(self, k: Optional[int]) -> PCPInstance:
        return PCPInstance(self.pairs, self.alphabet, k)

    def digest(self) -> str:
        return hashlib.sha256(dumps_pcp(self).encode("utf-8")).hexdigest()[:16]

    def __str__(self) -> str:
        body = ", ".join(f"({u}, {v})" for u, v in self.pairs)
        k = f", K={self.bound}" if self.bound is not None else ""
        return "{" + body + "}" + k


@dataclass(frozen=True)
class PaddedInstance:
    base: PCPInstance
    m: int
    pairs: tuple

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def bound(self) -> Optional[int]:
        return self.base.bound


def trim(word: str) -> str:
    return word.replace(PAD, "")


def pad(instance: PCPInstance) -> PaddedInstance:
    """Pad every word with trailing ``•`` to the common length m."""
    for i, (u, v) in enumerate(instance.pairs, 1):
        if not u or not v:
            raise ValueError(f"pair {i} has an empty word; padding needs letters")
    m = max(max(len(u), len(v)) for u, v in instance.pairs)
    padded = tuple((u.ljust(m, PAD), v.ljust(m, PAD)) for u, v in instance.pairs)
    return PaddedInstance(instance, m, padded)


def theta(x: str) -> int:
    if x in (END, "A"):
        return 1
    if x == "B":
        return 0
    raise ValueError(f"theta undefined on {x!r}")


def theta_bar(x: str) -> int:
    if x in (END, "B"):
        return 1
    if x == "A":
        return 0
    raise ValueError(f"theta_bar undefined on {x!r}")


def _symbols(w) -> list:
    if isinstance(w, str):
        if not w.endswith(END):
            raise ValueError(f"word {w!r} must end with {END}")
        body = w[: -len(END)]
        if PAD in body:
            raise ValueError("padding symbol inside a rho argument; trim first")
        return list(body) + [END]
    syms = list(w)
    if not syms or syms[-1] != END or END in syms[:-1]:
        raise ValueError(f"word {w!r} must end with a single {END}")
    if PAD in syms:
        raise ValueError("padding symbol inside a rho argument; trim first")
    return syms


def _dyadic(w, weight) -> Fraction:
    total = Fraction(0)
    for i, x in enumerate(_symbols(w), 1):
        if weight(x):
            total += Fraction(1, 2 ** i)
    return total


def rho(w) -> Fraction:
    """Σ θ(x_i)/2^i over the symbols of ``w`` (which ends in Z′)."""
    return _dyadic(w, theta)


def rho_bar(w) -> Fraction:
    return _dyadic(w, theta_bar)


def verify_witness(instance: PCPInstance, indices: Sequence[int]) -> bool:
    if not indices:
        raise ValueError("a witness is a nonempty index sequence")
    for j in indices:
        if not 1 <= j <= instance.n:
            raise ValueError(f"index {j} outside [1, {instance.n}]")
    top = "".join(trim(instance.pairs[j - 1][0]) for j in indices)
    bottom = "".join(trim(instance.pairs[j - 1][1]) for j in indices)
    return top == bottom


def solve_bounded(instance: PCPInstance, k: Optional[int] = None) -> Optional[tuple]:
    """Lexicographically first witness of length 1..k, shortest lengths first."""
    k = instance.bound if k is None else k
    if k is None or k < 1:
        raise ValueError("solve_bounded needs a bound K >= 1")
    if k > instance.n:
        warnings.warn(f"K = {k} exceeds n = {instance.n}", stacklevel=2)
    for length in range(1, k + 1):
        for seq in itertools.product(range(1, instance.n + 1), repeat=length):
            if verify_witness(instance, seq):
                return seq
    return None


# --- text format -----------------------------------------------------------


def loads_pcp(text: str) -> PCPInstance:
    header = False
    alphabet = LETTERS
    pairs = []
    bound = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if not header:
            if body.split() != ["pcp", "v1"]:
                raise PCPFormatError("expected header 'pcp v1'", lineno)
            header = True
            continue
        key, sep, value = body.partition(":")
        if not sep:
            raise PCPFormatError("expected 'key: value'", lineno)
        key, toks = key.strip(), value.split()
        if key == "alphabet":
            if not toks or any(t not in LETTERS for t in toks):
                raise PCPFormatError("alphabet must be a subset of {A, B}", lineno)
            alphabet = tuple(toks)
        elif key == "pair":
            if len(toks) != 2:
                raise PCPFormatError("pair needs two words", lineno)
            pairs.append(tuple(toks))
        elif key == "k":
            try:
                bound = int(value)
            except ValueError:
                raise PCPFormatError(f"bad bound {value.strip()!r}", lineno) from None
        else:
            raise PCPFormatError(f"unknown key {key!r}", lineno)
    if not header:
        raise PCPFormatError("missing header 'pcp v1'")
    if not pairs:
        raise PCPFormatError("no pairs")
    try:
        return PCPInstance(tuple(pairs), alphabet, bound)
    except ValueError as exc:
        raise PCPFormatError(str(exc)) from None


def load_pcp(path) -> PCPInstance:
    with open(path, encoding="utf-8") as fh:
        return loads_pcp(fh.read())


def dumps_pcp(instance: PCPInstance) -> str:
    out = ["pcp v1", "alphabet: " + " ".join(instance.alphabet)]
    out += [f"pair: {u} {v}" for u, v in instance.pairs]
    if instance.bound is not None:
        out.append(f"k: {instance.bound}")
    return "\n".join(out) + "\n"


def desk_family(max_n: int = 2, max_len: int = 2, alphabet: Iterable[str] = LETTERS) -> list:
    """All bounded instances with n <= max_n pairs of words of length 1..max_len, K = n.

    Pair multisets are enumerated once (order of pairs does not change
    solvability).
    """
    alphabet = tuple(alphabet)
    words = [
        "".join(w)
        for length in range(1, max_len + 1)
        for w in itertools.product(alphabet, repeat=length)
    ]
    pairs = list(itertools.product(words, repeat=2))
    family = []
    for n in range(1, max_n + 1):
        for combo in itertools.combinations_with_replacement(pairs, n):
            family.append(PCPInstance(combo, alphabet, n))
    return family
