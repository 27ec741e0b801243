"""Encoding (bounded) modified PCP instances as stateless quantum pushdown systems.

Both encoders build a guess phase that pushes padded letter pairs onto the
stack, followed by a verification phase whose until-probabilities from
``F α Z′`` and ``S α Z′`` are the dyadic values ``rho`` / ``rho_bar`` of the
trimmed top and bottom words.  :func:`decide_pcp` runs the bounded encoding
through the checker and compares with the brute-force solver.
"""

from __future__ import annotations

import enum
import json
import random
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .checker import FAILS, HOLDS, UNKNOWN, Checker
from .core import TWO_PI, Amplitude
from .logic import (
    TRUE,
    And,
    Atom,
    BoundedUntil,
    Next,
    Not,
    Prob,
    Until,
    conj,
    disj,
    required_horizon,
)
from .pcp import END, PAD, SIGMA, PaddedInstance, pad, rho, solve_bounded, trim
from .qpds import QPDS, Configuration, Rule, SimpleAssignment

Z, ZP, C, F, S, N = "Z", "Zp", "C", "F", "S", "N"


def pair_sym(x: str, y: str) -> str:
    return f"p({x},{y})"


def x_sym(x: str, y: str) -> str:
    return f"X({x},{y})"


def g_sym(i: int, j: int) -> str:
    return f"G{i}_{j}"


def gb_sym(l: int, k: int, j: int) -> str:
    return f"G{l}_{k}_{j}"


def unpair(sym: str) -> tuple[str, str]:
    """Inverse of :func:`pair_sym`."""
    if not (sym.startswith("p(") and sym.endswith(")")):
        raise ValueError(f"{sym!r} is not a pair symbol")
    x, y = sym[2:-1].split(",")
    return x, y


class Mode(enum.Enum):
    UNBOUNDED = "unbounded"
    BOUNDED = "bounded"


class DecisionMode(enum.Enum):
    LITERAL = "literal"
    SUM = "sum"


@dataclass(frozen=True)
class PhaseAssignment:
    """UNIT puts every phase at 2π; a seed draws reproducible phases in (0, 2π]."""

    seed: Optional[int] = None

    @property
    def mode(self) -> str:
        return "unit" if self.seed is None else "seeded"

    def phase(self, key: str) -> float:
        if self.seed is None:
            return TWO_PI
        rng = random.Random(f"{self.seed}/{key}")
        return TWO_PI * (1.0 - rng.random())

    def amp(self, mod2, key: str) -> Amplitude:
        return Amplitude(Fraction(mod2), self.phase(key))

    def describe(self) -> str:
        return self.mode if self.seed is None else f"seeded({self.seed})"


UNIT = PhaseAssignment()


@dataclass
class EncodingArtifacts:
    system: QPDS
    formula: object
    t: Fraction
    horizon_hint: float
    mode: Mode
    padded: PaddedInstance
    phi_pair: tuple
    outer_bound: Optional[int] = None
    phi_bound: Optional[int] = None
    warnings: list = field(default_factory=list)

    @property
    def gamma_report(self) -> dict:
        counts = Counter()
        for x in self.system.gamma:
            if x.startswith("p("):
                counts["pair"] += 1
            elif x.startswith("X("):
                counts["X"] += 1
            elif x.startswith("G"):
                counts["G"] += 1
            elif x.isdigit():
                counts["bound"] += 1
            else:
                counts["control"] += 1
        counts["total"] = len(self.system.gamma)
        return dict(counts)


def _verification_rules(phases: PhaseAssignment) -> list:
    half = Fraction(1, 2)
    rules = [
        Rule(C, (N,), phases.amp(1, "C>N")),
        Rule(N, (F,), phases.amp(half, "N>F")),
        Rule(N, (S,), phases.amp(half, "N>S")),
        Rule(F, (), phases.amp(1, "F>e")),
        Rule(S, (), phases.amp(1, "S>e")),
    ]
    for x in SIGMA:
        for y in SIGMA:
            rules.append(Rule(pair_sym(x, y), (x_sym(x, y),), phases.amp(half, f"{x}{y}>X")))
            rules.append(Rule(pair_sym(x, y), (), phases.amp(half, f"{x}{y}>e")))
    rules.append(Rule(ZP, (x_sym("A", "B"),), phases.amp(half, "Zp>AB")))
    rules.append(Rule(ZP, (x_sym("B", "A"),), phases.amp(half, "Zp>BA")))
    for x in SIGMA:
        for y in SIGMA:
            rules.append(Rule(x_sym(x, y), (), phases.amp(1, f"X{x}{y}>e")))
    return rules


def _pair_symbols() -> list:
    return [pair_sym(x, y) for x in SIGMA for y in SIGMA] + [x_sym(x, y) for x in SIGMA for y in SIGMA]


def build_phi_pair(bound: Optional[int] = None) -> tuple:
    """Path formulas reading the top (``u``) and bottom (``v``) words.

    With ``bound`` the untils are step-bounded.
    """
    u_stay = conj([Not(Atom(S))] + [Not(Atom(x_sym("B", z))) for z in SIGMA])
    u_goal = disj([Atom(x_sym("A", z)) for z in SIGMA])
    v_stay = conj([Not(Atom(F))] + [Not(Atom(x_sym(z, "A"))) for z in SIGMA])
    v_goal = disj([Atom(x_sym(z, "B")) for z in SIGMA])
    if bound is None:
        return Until(u_stay, u_goal), Until(v_stay, v_goal)
    return BoundedUntil(u_stay, u_goal, bound), BoundedUntil(v_stay, v_goal, bound)


def build_formula(phi_u, phi_v, t: Fraction, outer_bound: Optional[int] = None):
    t = Fraction(t)
    inner = And(Prob("=", t / 2, phi_u), Prob("=", (1 - t) / 2, phi_v))
    target = And(Atom(C), Prob("=", Fraction(1), Next(inner)))
    path = Until(TRUE, target) if outer_bound is None else BoundedUntil(TRUE, target, outer_bound)
    return Prob(">", Fraction(0), path)


def _check_t(t: Fraction) -> Fraction:
    t = Fraction(t)
    if not 0 < t < 1:
        raise ValueError(f"t must lie in (0, 1), got {t}")
    return t


def encode_unbounded(p: PaddedInstance, phases: PhaseAssignment = UNIT, t=Fraction(1, 2)) -> EncodingArtifacts:
    t = _check_t(t)
    n, m = p.n, p.m
    gamma = [Z, ZP, C, F, S, N] + _pair_symbols()
    gamma += [g_sym(i, j) for i in range(1, n + 1) for j in range(1, m + 2)]
    rules = [Rule(Z, (g_sym(i, 1), ZP), phases.amp(Fraction(1, n), f"Z>G{i}")) for i in range(1, n + 1)]
    for i, (u, v) in enumerate(p.pairs, 1):
        for j in range(1, m + 1):
            rules.append(Rule(g_sym(i, j), (g_sym(i, j + 1), pair_sym(u[j - 1], v[j - 1])),
                              phases.amp(1, f"G{i}_{j}")))
        last = g_sym(i, m + 1)
        rules.append(Rule(last, (C,), phases.amp(Fraction(1, n + 1), f"G{i}>C")))
        for l in range(1, n + 1):
            rules.append(Rule(last, (g_sym(l, 1),), phases.amp(Fraction(1, n + 1), f"G{i}>G{l}")))
    rules += _verification_rules(phases)
    system = QPDS(gamma, rules, start=Configuration(None, (Z,)), assignment=SimpleAssignment())
    phi_pair = build_phi_pair(None)
    formula = build_formula(*phi_pair, t)
    return EncodingArtifacts(
        system, formula, t, required_horizon(formula), Mode.UNBOUNDED, p, phi_pair,
        warnings=["unbounded encoding: iterative deepening need not terminate"],
    )


def guess_bound(p: PaddedInstance) -> int:
    """Steps from Z to the deepest reachable C configuration."""
    return p.bound * (p.m + 1) + 2


def verify_bound(p: PaddedInstance) -> int:
    """Steps from ``N α Z′`` until every run of the untils has resolved.

    The untils sit under ``X`` at C, so they are evaluated at N: one step to
    F/S, one pop of F/S, one step per stored pair plus one extra step per pad
    symbol on the projected side (the X-detour that changes nothing), then
    the final step from Z′.
    """
    k = p.bound
    dots = max(max(u.count(PAD), v.count(PAD)) for u, v in p.pairs)
    return k * p.m + k * dots + 3


def encode_bounded(p: PaddedInstance, phases: PhaseAssignment = UNIT, t=Fraction(1, 2)) -> EncodingArtifacts:
    t = _check_t(t)
    n, m, big_k = p.n, p.m, p.bound
    if big_k is None or not 1 <= big_k <= n:
        raise ValueError(f"bounded encoding needs 1 <= K <= n, got K={big_k}, n={n}")
    gamma = [Z] + [str(k) for k in range(1, big_k + 1)] + [ZP]
    gamma += [gb_sym(l, k, j) for k in range(1, big_k + 1) for l in range(1, n + 1) for j in range(1, m + 2)]
    gamma += _pair_symbols() + [C, F, S, N]
    rules = [Rule(Z, (str(k), ZP), phases.amp(Fraction(1, big_k), f"Z>{k}")) for k in range(1, big_k + 1)]
    for k in range(1, big_k + 1):
        for l in range(1, n + 1):
            rules.append(Rule(str(k), (gb_sym(l, k, 1),), phases.amp(Fraction(1, n), f"{k}>G{l}")))
    for k in range(1, big_k + 1):
        for l, (u, v) in enumerate(p.pairs, 1):
            for j in range(1, m + 1):
                rules.append(Rule(gb_sym(l, k, j), (gb_sym(l, k, j + 1), pair_sym(u[j - 1], v[j - 1])),
                                  phases.amp(1, f"G{l}_{k}_{j}")))
            last = gb_sym(l, k, m + 1)
            if k == 1:
                rules.append(Rule(last, (C,), phases.amp(1, f"G{l}_1>C")))
            else:
                for l2 in range(1, n + 1):
                    rules.append(Rule(last, (gb_sym(l2, k - 1, 1),),
                                      phases.amp(Fraction(1, n), f"G{l}_{k}>G{l2}")))
    rules += _verification_rules(phases)
    system = QPDS(gamma, rules, start=Configuration(None, (Z,)), assignment=SimpleAssignment())

    base_bound = 2 * n * m
    warnings = []
    outer = max(base_bound, guess_bound(p))
    inner = max(base_bound, verify_bound(p))
    if outer > base_bound:
        warnings.append(f"guess phase needs {outer} steps > 2nm = {base_bound}")
    if inner > base_bound:
        warnings.append(f"verification needs {inner} steps > 2nm = {base_bound}")
    phi_pair = build_phi_pair(inner)
    formula = build_formula(*phi_pair, t, outer)
    return EncodingArtifacts(system, formula, t, required_horizon(formula), Mode.BOUNDED, p, phi_pair,
                             outer_bound=outer, phi_bound=inner, warnings=warnings)


# --- stack analysis --------------------------------------------------------


def projections(stack) -> tuple[str, str]:
    """Top and bottom words spelled by the pair symbols of a stack, top first."""
    xs, ys = [], []
    for sym in stack:
        if sym.startswith("p("):
            x, y = unpair(sym)
            xs.append(x)
            ys.append(y)
    return "".join(xs), "".join(ys)


def expected_c_stack(p: PaddedInstance, pushed: tuple) -> tuple:
    """Stack ``C α Z′`` after the guess phase pushes the pairs ``pushed`` in order."""
    body = []
    for l in pushed:
        u, v = p.pairs[l - 1]
        body = [pair_sym(u[j], v[j]) for j in reversed(range(p.m))] + body
    return (C, *body, ZP)


def reachable_c_configs(system: QPDS, steps: int) -> list:
    """C-topped configurations reachable from the start within ``steps``, with their probabilities.

    Paths are enumerated; each entry is (configuration, summed probability).
    """
    frontier = {system.start: Fraction(1)}
    found: dict = {}
    for _ in range(steps + 1):
        nxt: dict = {}
        for c, pr in frontier.items():
            if c.stack and c.stack[0] == C:
                found[c] = found.get(c, Fraction(0)) + pr
                continue
            for t, a in system.successors(c):
                if a.mod2 == 0 or t == c:
                    continue
                nxt[t] = nxt.get(t, Fraction(0)) + pr * a.mod2
        frontier = nxt
        if not frontier:
            break
    return sorted(found.items(), key=lambda kv: kv[0].stack)


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


# --- decision pipeline -----------------------------------------------------


@dataclass
class DecisionReport:
    instance: str
    digest: str
    mode: str
    t: Fraction
    horizon: float
    verdict: str
    probabilities: list
    oracle_witness: Optional[tuple]
    agree: Optional[bool]
    phases: str
    warnings: list
    wall_time: float = 0.0

    def canonical(self) -> dict:
        """The run-independent part of the report (no timing, no phase choice)."""
        return {
            "instance": self.instance,
            "digest": self.digest,
            "mode": self.mode,
            "t": frac_str(self.t),
            "horizon": self.horizon,
            "verdict": self.verdict,
            "probabilities": self.probabilities,
            "oracle_witness": list(self.oracle_witness) if self.oracle_witness else None,
            "agree": self.agree,
            "inconclusive": self.verdict == UNKNOWN.value,
            "warnings": list(self.warnings),
        }

    def to_dict(self) -> dict:
        d = self.canonical()
        d["phases"] = self.phases
        d["wall_time"] = round(self.wall_time, 6)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)


def sum_probabilities(art: EncodingArtifacts, checker: Optional[Checker] = None) -> list:
    """For each reachable ``C α Z′``: the u-probability from ``F α Z′`` and v-probability from ``S α Z′``."""
    checker = checker or Checker(art.system)
    phi_u, phi_v = art.phi_pair
    rows = []
    for c, reach in reachable_c_configs(art.system, art.outer_bound):
        body = c.stack[1:]
        pu = checker.probability(Configuration(None, (F, *body)), phi_u)
        pv = checker.probability(Configuration(None, (S, *body)), phi_v)
        rows.append({
            "stack": " ".join(c.stack),
            "reach": reach,
            "p_u": pu,
            "p_v": pv,
        })
    return rows


def decide_pcp(p: PaddedInstance, t=Fraction(1, 2), phases: PhaseAssignment = UNIT,
               mode: DecisionMode = DecisionMode.SUM) -> DecisionReport:
    if not isinstance(p, PaddedInstance):
        p = pad(p)
    started = time.perf_counter()
    art = encode_bounded(p, phases, t)
    checker = Checker(art.system)
    probabilities = []
    if mode is DecisionMode.SUM:
        rows = sum_probabilities(art, checker)
        verdict = FAILS
        undecided = False
        for row in rows:
            pu, pv = row["p_u"], row["p_v"]
            if not (pu.is_point and pv.is_point):
                undecided = True
                continue
            total = pu.lo + pv.lo
            if total == 1:
                verdict = HOLDS
            probabilities.append({
                "stack": row["stack"],
                "p_u": frac_str(pu.lo),
                "p_v": frac_str(pv.lo),
                "sum": frac_str(total),
            })
        if verdict is FAILS and undecided:
            verdict = UNKNOWN
        horizon = art.phi_bound
    else:
        v = checker.check(art.system.start, art.formula, art.horizon_hint)
        verdict = v.truth
        probabilities.append({"lo": frac_str(v.interval.lo), "hi": frac_str(v.interval.hi)})
        horizon = art.horizon_hint
    witness = solve_bounded(p.base, p.bound)
    agree = None if verdict is UNKNOWN else (verdict is HOLDS) == (witness is not None)
    return DecisionReport(
        instance=str(p.base),
        digest=p.base.digest(),
        mode=mode.value,
        t=art.t,
        horizon=horizon,
        verdict=verdict.value,
        probabilities=probabilities,
        oracle_witness=witness,
        agree=agree,
        phases=phases.describe(),
        warnings=art.warnings,
        wall_time=time.perf_counter() - started,
    )


def _decide_canonical(args) -> dict:
    instance, t, seed, mode = args
    return decide_pcp(pad(instance), t, PhaseAssignment(seed), DecisionMode(mode)).canonical()


def decide_family(instances, t=Fraction(1, 2), seed: Optional[int] = None, mode: str = "sum",
                  workers: int = 1) -> list:
    """Canonical decision reports for many instances, in input order.

    ``workers > 1`` fans out over a process pool; results are reassembled in
    input order so the output does not depend on scheduling.
    """
    jobs = [(inst, Fraction(t), seed, mode) for inst in instances]
    if workers <= 1:
        return [_decide_canonical(j) for j in jobs]

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_decide_canonical, jobs, chunksize=max(1, len(jobs) // (workers * 8))))


def lemma_t(p: PaddedInstance, pushed: tuple) -> Fraction:
    """The rho value that makes the literal formula hold for a given guess."""
    x, _ = projections(expected_c_stack(p, pushed))
    return rho(trim(x) + END)
