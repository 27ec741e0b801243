import json
import math
from fractions import Fraction

import pytest

from qpmc.checker import HOLDS, Checker, check_quiescent
from qpmc.core import TWO_PI
from qpmc.lemmas import run_all
from qpmc.logic import And, Atom, BoundedUntil, Not, Prob, Until, render_formula
from qpmc.pcp import END, pad, rho, rho_bar, trim
from qpmc.qpds import config, validate_system
from qpmc.reduction import (
    C,
    UNIT,
    ZP,
    DecisionMode,
    PhaseAssignment,
    build_phi_pair,
    decide_pcp,
    encode_bounded,
    encode_unbounded,
    expected_c_stack,
    gb_sym,
    lemma_t,
    pair_sym,
    projections,
    reachable_c_configs,
    sum_probabilities,
    unpair,
    x_sym,
)

HALF = Fraction(1, 2)


def rows(system, symbol):
    return [(r.rhs, r.amp.mod2) for r in system.rules_for(symbol)]


def test_symbol_names_round_trip():
    assert unpair(pair_sym("A", "•")) == ("A", "•")
    assert pair_sym("A", "B") == "p(A,B)" and x_sym("B", "A") == "X(B,A)"


def test_gamma_sizes(e1):
    assert encode_bounded(pad(e1)).gamma_report["total"] == 38
    assert encode_unbounded(pad(e1)).gamma_report["total"] == 30


def test_bounded_guess_rows(e1):
    sys_ = encode_bounded(pad(e1)).system
    assert rows(sys_, "Z") == [(("1", ZP), HALF), (("2", ZP), HALF)]
    assert rows(sys_, "2") == [((gb_sym(1, 2, 1),), HALF), ((gb_sym(2, 2, 1),), HALF)]
    assert rows(sys_, gb_sym(1, 2, 1)) == [((gb_sym(1, 2, 2), pair_sym("A", "A")), 1)]
    assert rows(sys_, gb_sym(1, 2, 2)) == [((gb_sym(1, 2, 3), pair_sym("•", "A")), 1)]
    assert rows(sys_, gb_sym(1, 1, 3)) == [((C,), 1)]
    assert rows(sys_, gb_sym(2, 2, 3)) == [((gb_sym(1, 1, 1),), HALF), ((gb_sym(2, 1, 1),), HALF)]


def test_unbounded_guess_rows(e1):
    sys_ = encode_unbounded(pad(e1)).system
    assert [m for _, m in rows(sys_, "Z")] == [HALF, HALF]
    assert [m for _, m in rows(sys_, "G1_3")] == [Fraction(1, 3)] * 3


def test_verification_rows(e1):
    sys_ = encode_bounded(pad(e1)).system
    assert rows(sys_, C) == [(("N",), 1)]
    assert rows(sys_, "N") == [(("F",), HALF), (("S",), HALF)]
    assert rows(sys_, "F") == [((), 1)]
    assert rows(sys_, pair_sym("A", "•")) == [((x_sym("A", "•"),), HALF), ((), HALF)]
    assert rows(sys_, ZP) == [((x_sym("A", "B"),), HALF), ((x_sym("B", "A"),), HALF)]
    assert rows(sys_, x_sym("•", "B")) == [((), 1)]


def test_phi_pair_shape():
    phi_u, phi_v = build_phi_pair(8)
    assert isinstance(phi_u, BoundedUntil) and phi_u.k == 8
    stay = []
    f = phi_u.left
    while isinstance(f, And):
        stay.append(f.right)
        f = f.left
    stay.append(f)
    assert len(stay) == 4 and all(isinstance(s, Not) and isinstance(s.arg, Atom) for s in stay)
    assert {s.arg.ap for s in stay} == {"S", "X(B,A)", "X(B,B)", "X(B,•)"}
    assert isinstance(build_phi_pair()[1], Until)


def test_bounded_formula_bounds(e0, e1):
    art = encode_bounded(pad(e1))
    assert "true U<=8 " in render_formula(art.formula)
    assert render_formula(art.phi_pair[0]).count("U<=9") == 1
    assert art.warnings == ["verification needs 9 steps > 2nm = 8"]
    small = encode_bounded(pad(e0))
    assert small.outer_bound > 2 * 1 * 1 and small.warnings


@pytest.mark.parametrize("seed", [None, 1, 2])
def test_encodings_validate_strictly(e0, e1, e2, seed):
    for inst in (e0, e1, e2):
        for art in (encode_bounded(pad(inst), PhaseAssignment(seed)), encode_unbounded(pad(inst), PhaseAssignment(seed))):
            assert validate_system(art.system, strict=True).ok


def test_bounded_needs_k_at_most_n(e0):
    with pytest.raises(ValueError):
        encode_bounded(pad(e0.with_bound(2)))
    with pytest.raises(ValueError):
        encode_bounded(pad(e0), t=Fraction(1))


def test_phase_assignment_is_seeded():
    assert UNIT.phase("x") == TWO_PI
    a, b = PhaseAssignment(5), PhaseAssignment(5)
    assert a.phase("Z>1") == b.phase("Z>1")
    assert a.phase("Z>1") != PhaseAssignment(6).phase("Z>1")
    assert 0 < a.phase("Z>1") <= 2 * math.pi


def test_c_configurations_and_their_probabilities(e1):
    p = pad(e1)
    found = dict(reachable_c_configs(encode_bounded(p).system, 8))
    assert sum(found.values()) == 1
    for k in (1, 2):
        for seq in ((1,), (2,)) if k == 1 else ((1, 1), (1, 2), (2, 1), (2, 2)):
            assert found[config(expected_c_stack(p, seq))] == HALF * HALF ** k


def test_projection_reads_reversed_words(e1):
    p = pad(e1)
    x, y = projections(expected_c_stack(p, (1, 2)))
    # top of stack holds the last pushed letter
    assert x == "AA•A" and y == "•AAA"
    assert trim(x)[::-1] == trim(y)[::-1] == "A" + "AA"


def test_literal_untils_are_exact_at_n(e1):
    art = encode_bounded(pad(e1))
    chk = Checker(art.system)
    phi_u, phi_v = art.phi_pair
    for c, _ in reachable_c_configs(art.system, art.outer_bound):
        x, y = projections(c.stack)
        at_n = config(("N",) + c.stack[1:])
        assert chk.probability(at_n, phi_u).lo == rho(trim(x) + END) / 2
        assert chk.probability(at_n, phi_v).lo == rho_bar(trim(y) + END) / 2


def test_until_probabilities_equal_rho(e1):
    art = encode_bounded(pad(e1))
    for row in sum_probabilities(art):
        x, y = projections(row["stack"].split())
        assert row["p_u"].is_point and row["p_u"].lo == rho(trim(x) + END)
        assert row["p_v"].is_point and row["p_v"].lo == rho_bar(trim(y) + END)


def test_lemma_checks_pass(e0, e1, e2):
    for inst in (e0, e1, e2):
        assert all(r.passed for r in run_all(pad(inst)))


@pytest.mark.parametrize("name, verdict, witness", [("e0", "HOLDS", [1]), ("e1", "HOLDS", [1, 2]), ("e2", "FAILS", None)])
def test_decide_examples(request, name, verdict, witness):
    report = decide_pcp(pad(request.getfixturevalue(name)))
    assert report.verdict == verdict and report.agree
    assert report.canonical()["oracle_witness"] == witness


def test_decide_e1_sum_rows(e1):
    rows_ = decide_pcp(pad(e1)).canonical()["probabilities"]
    ones = [r["stack"] for r in rows_ if r["sum"] == "1/1"]
    assert ones == ["C p(A,•) p(A,A) p(•,A) p(A,A) Zp", "C p(•,A) p(A,A) p(A,•) p(A,A) Zp"]
    assert {r["p_u"] for r in rows_ if r["sum"] == "1/1"} == {"15/16"}


def test_decide_e2_sums(e2):
    rows_ = decide_pcp(pad(e2)).canonical()["probabilities"]
    assert [r["sum"] for r in rows_] == ["3/2"]


def test_literal_mode(e0, e1, e2):
    assert lemma_t(pad(e1), (1, 2)) == Fraction(15, 16)
    hold = decide_pcp(pad(e1), t=Fraction(15, 16), mode=DecisionMode.LITERAL)
    assert hold.verdict == "HOLDS" and hold.probabilities == [{"lo": "1/4", "hi": "1/4"}]
    # rho is 1/2 only on the empty word, so t = 1/2 never matches a guess
    assert decide_pcp(pad(e1), mode=DecisionMode.LITERAL).verdict == "FAILS"
    assert decide_pcp(pad(e0), t=Fraction(3, 4), mode=DecisionMode.LITERAL).verdict == "HOLDS"
    assert decide_pcp(pad(e2), t=Fraction(3, 4), mode=DecisionMode.LITERAL).verdict == "FAILS"


def test_unbounded_encoding_under_deepening(e0):
    art = encode_unbounded(pad(e0), t=Fraction(3, 4))
    verdict, h = check_quiescent(art.system, art.system.start, art.formula, ceiling=64)
    assert verdict.truth is HOLDS and verdict.interval.lo > 0


def test_report_json_and_canonical_form(e1):
    a = decide_pcp(pad(e1))
    b = decide_pcp(pad(e1), phases=PhaseAssignment(42))
    assert a.canonical() == b.canonical()
    d = json.loads(a.to_json())
    assert "wall_time" in d and "phases" in d
    assert "wall_time" not in a.canonical()


@pytest.mark.parametrize("name", ["e0", "e1", "e2"])
def test_literal_inner_formula_with_t_equal_to_rho(request, name):
    p = pad(request.getfixturevalue(name))
    art = encode_bounded(p)
    phi_u, phi_v = art.phi_pair
    chk = Checker(art.system)
    for c, _ in reachable_c_configs(art.system, art.outer_bound):
        x, y = projections(c.stack)
        t = rho(trim(x) + END)
        inner = And(Prob("=", t / 2, phi_u), Prob("=", (1 - t) / 2, phi_v))
        verdict = chk.check(config(("N",) + c.stack[1:]), inner)
        assert (verdict.truth is HOLDS) == (trim(x) == trim(y))
