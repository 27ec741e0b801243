from fractions import Fraction

import pytest
from hypothesis import given, settings

from qpmc.logic import (
    TRUE,
    UNBOUNDED,
    And,
    Atom,
    BoundedUntil,
    FormulaSyntaxError,
    Next,
    Not,
    Or,
    Prob,
    Until,
    atoms_of,
    parse_formula,
    path_horizon,
    render_formula,
    required_horizon,
)
from qpmc.pcp import pad
from qpmc.reduction import encode_bounded
from strategies import state_formulas


def test_parse_next():
    f = parse_formula("P>0 [ X C ]")
    assert f == Prob(">", Fraction(0), Next(Atom("C")))


def test_parse_bounded_until_with_paren_atoms():
    f = parse_formula("P=1/2 [ !S U<=8 X(A,B) ]")
    assert f == Prob("=", Fraction(1, 2), BoundedUntil(Not(Atom("S")), Atom("X(A,B)"), 8))


def test_parse_conjunction_and_true():
    f = parse_formula("(true & !(a & b))")
    assert f == And(TRUE, Not(And(Atom("a"), Atom("b"))))


def test_render_examples():
    assert render_formula(Prob(">", 0, Next(Atom("C")))) == "P>0 [ X C ]"
    assert render_formula(Prob("=", Fraction(1, 4), Until(TRUE, Atom("b")))) == "P=1/4 [ true U b ]"
    assert render_formula(Or(Atom("a"), Atom("b"))) == "!(!a & !b)"


def test_bindings_substitute_state_and_path_formulas():
    phi = BoundedUntil(Atom("a"), Atom("b"), 3)
    psi = And(Atom("x"), Atom("y"))
    f = parse_formula("(psi & P=1/2 [ phi ])", {"phi": phi, "psi": psi})
    assert f == And(psi, Prob("=", Fraction(1, 2), phi))


@pytest.mark.parametrize(
    "text",
    ["P>=1/2 [ X a ]", "P<1 [ X a ]", "P=3/2 [ X a ]", "P>1/0 [ X a ]", "(a & b", "a b", "P>0 [ a ]", "a $"],
)
def test_rejects(text):
    with pytest.raises(FormulaSyntaxError):
        parse_formula(text)


def test_error_position():
    with pytest.raises(FormulaSyntaxError) as err:
        parse_formula("(a & b) c")
    assert err.value.pos == 8


def test_prob_bound_range():
    with pytest.raises(ValueError):
        Prob(">", Fraction(5, 4), Next(TRUE))
    with pytest.raises(ValueError):
        Prob(">=", Fraction(1, 4), Next(TRUE))


@pytest.mark.parametrize(
    "text, horizon",
    [
        ("a", 0),
        ("P>0 [ X a ]", 1),
        ("P>0 [ X P=1 [ X a ] ]", 2),
        ("P>0 [ a U<=5 P>0 [ X b ] ]", 6),
        ("P>0 [ a U b ]", UNBOUNDED),
        ("(P>0 [ X a ] & P>0 [ a U<=3 b ])", 3),
    ],
)
def test_required_horizon(text, horizon):
    assert required_horizon(parse_formula(text)) == horizon


def test_encoded_formula_horizon(e1):
    art = encode_bounded(pad(e1))
    # two pads on one side need one step beyond 2nm when read from N
    assert (art.outer_bound, art.phi_bound) == (8, 9)
    assert required_horizon(art.formula) == 8 + 1 + 9
    assert art.horizon_hint == 18


def test_path_horizon_override():
    p = BoundedUntil(Atom("a"), Prob(">", 0, Next(Atom("b"))), 4)
    assert path_horizon(p) == 5
    assert path_horizon(p, steps=10) == 11


def test_atoms_of():
    f = parse_formula("(a & P>0 [ !b U<=2 X(A,B) ])")
    assert atoms_of(f) == {"a", "b", "X(A,B)"}


@settings(max_examples=300)
@given(state_formulas(4))
def test_parse_render_round_trip(f):
    assert parse_formula(render_formula(f)) == f


@given(state_formulas(3))
def test_horizon_monotone_under_nesting(f):
    h = required_horizon(f)
    assert required_horizon(Not(f)) == h
    assert required_horizon(Prob(">", 0, Next(f))) == h + 1
