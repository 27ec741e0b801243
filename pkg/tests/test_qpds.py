import math
import random
from fractions import Fraction

import pytest

from qpmc.core import TWO_PI, Amplitude
from qpmc.pcp import pad
from qpmc.qpds import (
    EMPTY,
    QPDS,
    Configuration,
    Rule,
    SimpleAssignment,
    SystemFormatError,
    config,
    dumps_system,
    head,
    labels,
    loads_system,
    orthogonality_diagnostics,
    successors,
    validate_system,
)
from qpmc.reduction import PhaseAssignment, encode_bounded

HALF = Fraction(1, 2)

COIN = """\
qpds v1
stack: X Y
start: X Y
rule: X -> X X @ 1/2 % 1.5707963267948966
rule: X -> - @ 1/2
rule: Y -> Y @ 1
label: bottom => Y
"""


@pytest.fixture
def coin():
    return loads_system(COIN)


def test_successors_push_and_pop(coin):
    succ = successors(coin, config("X Y"))
    assert [(" ".join(c.stack), a.mod2) for c, a in succ] == [("X X Y", HALF), ("Y", HALF)]
    assert succ[0][1].phase == pytest.approx(math.pi / 2)
    assert succ[1][1].phase == TWO_PI


def test_successor_configurations_follow_rule_order(coin):
    assert [c for c, _ in coin.successors(config("X"))] == [config("X X"), config("")]


def test_empty_stack_is_absorbing(coin):
    c = config("")
    ((t, a),) = coin.successors(c)
    assert t == c and a.mod2 == 1
    assert labels(coin, c) == frozenset({EMPTY})


def test_labels_depend_on_head_only(coin):
    assert labels(coin, config("Y")) == frozenset({"Y", "bottom"})
    assert labels(coin, config("X Y")) == labels(coin, config("X X X"))


def test_head():
    assert head(config("A B")) == "A"
    assert head(Configuration("p", ("A",))) == ("p", "A")
    assert head(Configuration("p", ())) == "p"
    assert head(config("")) is None


def test_unknown_symbol_raises(coin):
    with pytest.raises(ValueError):
        coin.successors(config("Q"))


def test_validate_ok(coin):
    assert validate_system(coin).ok


def test_validate_reports_each_kind():
    bad = QPDS(
        ["X", "Y", "W"],
        [Rule("X", ("X", "X", "X"), Amplitude(1)), Rule("Y", ("Q",), Amplitude(HALF))],
    )
    kinds = sorted({v["kind"] for v in validate_system(bad).violations})
    assert kinds == ["closure", "normalization", "rhs_length", "totality"]
    lenient = sorted({v["kind"] for v in validate_system(bad, strict=False).violations})
    assert "rhs_length" not in lenient


def test_control_states():
    text = """\
qpds v1
states: p q
stack: A
start: p A
rule: p A -> q A @ 1
rule: q A -> p - @ 1
label: hot => p:A
"""
    sys_ = loads_system(text)
    assert not sys_.stateless
    assert validate_system(sys_).ok
    ((c, _),) = sys_.successors(sys_.start)
    assert c == Configuration("q", ("A",))
    assert "hot" in sys_.labels(sys_.start) and "hot" not in sys_.labels(c)
    assert "q:A" in sys_.labels(c)
    assert sys_.labels(Configuration("p", ())) == frozenset({EMPTY, "p"})


def test_explicit_assignment_without_identity():
    sys_ = QPDS(["A"], [Rule("A", ("A",), Amplitude(1))],
                assignment=SimpleAssignment({"hot": {"A"}}, identity=False))
    assert sys_.labels(config("A")) == frozenset({"hot"})


def test_text_round_trip(coin):
    again = loads_system(dumps_system(coin))
    assert again.gamma == coin.gamma
    assert again.start == coin.start
    assert [(r.lhs_symbol, r.rhs, r.amp.mod2) for r in again.rules] == \
        [(r.lhs_symbol, r.rhs, r.amp.mod2) for r in coin.rules]
    assert [r.amp.phase for r in again.rules] == [r.amp.phase for r in coin.rules]


def test_encoding_round_trips_through_text(e1):
    art = encode_bounded(pad(e1), PhaseAssignment(3))
    again = loads_system(dumps_system(art.system))
    assert validate_system(again).ok
    assert again.rules == art.system.rules


@pytest.mark.parametrize(
    "text, line",
    [
        ("qpds v2\n", 1),
        ("qpds v1\nstack: X\nrule: X -> X @ 0.5\n", 3),
        ("qpds v1\nstack: X\nrule: X X @ 1\n", 3),
        ("qpds v1\nstack: X\n\nrule: X -> X @ 3/2\n", 4),
        ("qpds v1\nstack: X\nfoo: bar\n", 3),
    ],
)
def test_parse_errors_carry_line(text, line):
    with pytest.raises(SystemFormatError) as err:
        loads_system(text)
    assert err.value.line == line


def test_orthogonality_is_reported_not_enforced(e1):
    art = encode_bounded(pad(e1))
    bad = orthogonality_diagnostics(art.system)
    assert ("F", "S") in bad or ("S", "F") in bad
    assert validate_system(art.system).ok


@pytest.mark.parametrize("seed", range(10))
def test_encoding_rows_sum_to_one_on_random_configs(e1, seed):
    sys_ = encode_bounded(pad(e1), PhaseAssignment(seed)).system
    rng = random.Random(seed)
    for _ in range(50):
        c = config(rng.choices(sys_.gamma, k=rng.randint(0, 5)))
        succ = sys_.successors(c)
        assert sum(a.mod2 for _, a in succ) == 1
        assert succ == sys_.successors(c)
        for t, _ in succ:
            assert len(t.stack) <= len(c.stack) + 1


def test_identity_labelling_on_encoding(e1):
    sys_ = encode_bounded(pad(e1)).system
    assert sys_.labels(config("F p(A,A) Zp")) == frozenset({"F"})
