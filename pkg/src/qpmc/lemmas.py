"""Per-instance checks of the reduction's constructive lemmas.

Each check returns a :class:`LemmaResult` holding the exact values it
compared, so the CLI can print them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .checker import Checker
from .core import amp_product, path_probability
from .pcp import END, PaddedInstance, rho, rho_bar, trim
from .reduction import (
    C,
    PhaseAssignment,
    encode_bounded,
    expected_c_stack,
    frac_str,
    projections,
    reachable_c_configs,
    sum_probabilities,
)


@dataclass
class LemmaResult:
    name: str
    passed: bool
    details: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"lemma": self.name, "passed": self.passed, "details": self.details}


def _guess_paths(system, steps: int):
    """Yield (C-configuration, amplitude list) for every guess path within ``steps``."""
    stack = [(system.start, [])]
    while stack:
        c, amps = stack.pop()
        if c.stack and c.stack[0] == C:
            yield c, amps
            continue
        if len(amps) >= steps:
            continue
        for t, a in system.successors(c):
            if t != c:
                stack.append((t, amps + [a]))


def dyadic_equivalence(p: PaddedInstance) -> LemmaResult:
    art = encode_bounded(p)
    res = LemmaResult("dyadic equivalence", True)
    for c, _ in reachable_c_configs(art.system, art.outer_bound):
        x, y = projections(c.stack)
        tx, ty = trim(x), trim(y)
        r, rb = rho(tx + END), rho_bar(ty + END)
        ok = (tx == ty) == (r + rb == 1)
        res.passed &= ok
        res.details.append(f"{tx or 'ε'} vs {ty or 'ε'}: {frac_str(r)} + {frac_str(rb)} = {frac_str(r + rb)}"
                           + ("" if ok else "  MISMATCH"))
    return res


def phase_free_probability(p: PaddedInstance, seed: int = 1) -> LemmaResult:
    unit = encode_bounded(p)
    seeded = encode_bounded(p, PhaseAssignment(seed))
    res = LemmaResult("path probability ignores phases", True)
    unit_paths = dict((c, amps) for c, amps in _guess_paths(unit.system, unit.outer_bound))
    for c, amps in _guess_paths(seeded.system, seeded.outer_bound):
        exact = path_probability(amps)
        product = amp_product(amps).to_complex()
        numeric = abs(product) ** 2
        ok = exact == path_probability(unit_paths[c]) and abs(numeric - float(exact)) <= 1e-12
        res.passed &= ok
        res.details.append(f"{' '.join(c.stack)}: {frac_str(exact)} (|Πq|² = {numeric:.15g})")
    return res


def c_reachability(p: PaddedInstance) -> LemmaResult:
    art = encode_bounded(p)
    found = {c.stack for c, pr in reachable_c_configs(art.system, art.outer_bound) if pr > 0}
    expected = {
        expected_c_stack(p, seq)
        for k in range(1, p.bound + 1)
        for seq in itertools.product(range(1, p.n + 1), repeat=k)
    }
    res = LemmaResult("reachable C configurations", found == expected)
    res.details.append(f"{len(found)} reachable, {len(expected)} expected")
    for s in sorted(found ^ expected):
        res.details.append(("unexpected " if s in found else "missing ") + " ".join(s))
    return res


def until_equals_rho(p: PaddedInstance) -> tuple[LemmaResult, LemmaResult]:
    art = encode_bounded(p)
    rows = sum_probabilities(art, Checker(art.system))
    until_res = LemmaResult("until probability equals rho", True)
    sum_res = LemmaResult("sum is 1 iff words match", True)
    for row in rows:
        x, y = projections(row["stack"].split())
        tx, ty = trim(x), trim(y)
        pu, pv = row["p_u"], row["p_v"]
        want_u, want_v = rho(tx + END), rho_bar(ty + END)
        ok = pu.is_point and pv.is_point and pu.lo == want_u and pv.lo == want_v
        until_res.passed &= ok
        until_res.details.append(f"{row['stack']}: P_u = {pu} (rho {frac_str(want_u)}), "
                           f"P_v = {pv} (rho_bar {frac_str(want_v)})")
        total = pu.lo + pv.lo
        ok = (total == 1) == (tx == ty)
        sum_res.passed &= ok
        sum_res.details.append(f"{row['stack']}: {pu.lo} + {pv.lo} = {total}"
                           + (" (match)" if tx == ty else ""))
    return until_res, sum_res


def run_all(p: PaddedInstance) -> list:
    return [
        dyadic_equivalence(p),
        phase_free_probability(p),
        c_reachability(p),
        *until_equals_rho(p),
    ]
