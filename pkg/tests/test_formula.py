import pytest
from hypothesis import given

from corpus import ALPHABET
from monitorability.errors import NotAFixpoint, ParseError, UnboundVariable, UnknownAction
from monitorability.formula import (
    FF,
    TT,
    Alphabet,
    And,
    Box,
    Diamond,
    GreatestFix,
    LeastFix,
    LAtom,
    LGlobally,
    LNegAtom,
    LUntil,
    Or,
    VarRef,
    encode_ltl,
    parse_formula,
    parse_ltl,
    print_formula,
    print_ltl,
    substitute,
    unfold,
    validate,
)
from monitorability.semantics import evaluate_many
from monitorability.traces import bounded_universe
from oracle import holds, universe
from strategies import formulas

FSR = "f,s,r"
G7 = "max X.([f]ff & [s]X & [r]X)"


# --- parsing --------------------------------------------------------------


def test_parse_literals():
    assert parse_formula("tt") == TT
    assert parse_formula("ff") == FF


def test_parse_invariant_shape():
    f = parse_formula(G7, FSR)
    assert isinstance(f, GreatestFix) and f.var == "X"
    body = f.body
    assert body == And(And(Box("f", FF), Box("s", VarRef("X"))), Box("r", VarRef("X")))


def test_parse_unbound_variable():
    with pytest.raises(UnboundVariable) as e:
        parse_formula("[f]X")
    assert e.value.name == "X"


def test_parse_unknown_action():
    with pytest.raises(UnknownAction):
        parse_formula("<z>tt", FSR)


def test_parse_syntax_error_position():
    with pytest.raises(ParseError) as e:
        parse_formula("[f]ff &")
    assert e.value.position == 7


@pytest.mark.parametrize("text", ["<a>", "max x.tt", "(tt", "[a]ff)", "<tt>tt", "max X <a>X"])
def test_parse_rejects_malformed(text):
    with pytest.raises(ParseError):
        parse_formula(text)


def test_precedence_and_binds_tighter_than_or():
    assert parse_formula("tt | ff & tt") == Or(TT, And(FF, TT))


def test_modal_binds_single_operand():
    assert parse_formula("<a>tt & ff") == And(Diamond("a", TT), FF)


def test_fixpoint_extends_right():
    f = parse_formula("max X.[a]X & [b]ff")
    assert f == GreatestFix("X", And(Box("a", VarRef("X")), Box("b", FF)))


# --- printing -------------------------------------------------------------


def test_print_examples():
    assert print_formula(TT) == "tt"
    assert print_formula(Box("f", FF)) == "[f]ff"
    inner = And(Diamond("s", TT), VarRef("X"))
    assert print_formula(inner) == "<s>tt & X"
    assert print_formula(GreatestFix("X", Box("a", inner))) == "max X.[a](<s>tt & X)"


def test_print_parenthesizes_fixpoint_operand():
    f = And(GreatestFix("X", Box("a", VarRef("X"))), Box("b", FF))
    assert print_formula(f) == "(max X.[a]X) & [b]ff"
    assert parse_formula(print_formula(f)) == f


@given(formulas("any", 5))
def test_print_parse_round_trip(f):
    assert parse_formula(print_formula(f)) == f


# --- validation -----------------------------------------------------------


def test_validate_unguarded():
    r = validate(GreatestFix("X", VarRef("X")))
    assert r.closed and not r.guarded and r.unguarded == {"X"}
    assert not r.valid


def test_validate_guarded():
    assert validate(parse_formula("max X.<a>X")).valid


def test_validate_actions():
    r = validate(parse_formula("min Y.(<s>tt | <f>Y | <s>Y | <r>Y)"))
    assert r.valid and r.actions == {"s", "f", "r"}


def test_validate_open():
    r = validate(Box("a", VarRef("X")))
    assert not r.closed and r.free == {"X"}


@given(formulas("any", 5))
def test_generated_formulas_valid(f):
    assert validate(f).valid


# --- alphabets ------------------------------------------------------------


def test_alphabet_order_and_errors():
    assert Alphabet.of("f,s,r").actions == ("f", "s", "r")
    with pytest.raises(ValueError):
        Alphabet.of("")
    with pytest.raises(ValueError):
        Alphabet.of("a,a")
    with pytest.raises(ValueError):
        Alphabet.of("tt")


# --- LTL ------------------------------------------------------------------


def test_parse_ltl_shapes():
    assert parse_ltl("G !f") == LGlobally(LNegAtom("f"))
    assert parse_ltl("!f U s") == LUntil(LNegAtom("f"), LAtom("s"))
    l = parse_ltl("(!f U s) | G F r")
    assert print_ltl(l) == "!f U s | G F r"
    assert parse_ltl(print_ltl(l)) == l


def test_encode_atom():
    assert encode_ltl(parse_ltl("s"), FSR) == Diamond("s", TT)
    assert encode_ltl(parse_ltl("!s"), FSR) == Box("s", FF)


def test_encode_globally_not_f():
    got = print_formula(encode_ltl(parse_ltl("G !f"), FSR))
    assert got == "max Y0.([f]ff & ff | [f]ff & (<f>Y0 | <s>Y0 | <r>Y0))"


def test_encode_finally_s():
    got = encode_ltl(parse_ltl("F s"), FSR)
    assert got == parse_formula("min Y0.(<s>tt | tt & (<f>Y0 | <s>Y0 | <r>Y0))")


def test_encode_fresh_variables_in_traversal_order():
    got = print_formula(encode_ltl(parse_ltl("F s & G r"), FSR))
    assert "Y0" in got and "Y1" in got
    assert got.index("Y0") < got.index("Y1")


def test_encode_globally_not_f_versus_invariant():
    # Strong next makes the encoded G false on every finite trace, so it
    # agrees with the invariant only on infinite traces.
    enc = encode_ltl(parse_ltl("G !f"), FSR)
    inv = parse_formula(G7)
    for t in universe(("f", "s", "r"), 3, 3):
        if t.is_finite:
            assert not holds(enc, t)
        else:
            assert holds(enc, t) == holds(inv, t)


@pytest.mark.parametrize("text", ["F s", "G F s", "F G !r", "(!f U s) | G F r", "X X a", "a R b"])
def test_encode_closed_and_guarded(text):
    f = encode_ltl(parse_ltl(text), "a,b,f,s,r")
    assert validate(f).valid


def test_encode_unknown_atom():
    with pytest.raises(UnknownAction):
        encode_ltl(parse_ltl("F z"), FSR)


# --- substitution and unfolding -------------------------------------------


def test_unfold_examples():
    f = parse_formula("max X.<a>X")
    assert unfold(f) == Diamond("a", f)
    g = parse_formula("min Y.(<s>tt | <r>Y)")
    assert unfold(g) == Or(Diamond("s", TT), Diamond("r", g))


def test_unfold_not_a_fixpoint():
    with pytest.raises(NotAFixpoint):
        unfold(TT)


def test_substitute_avoids_capture():
    # substituting a term mentioning Y under a binder for Y renames it
    body = LeastFix("Y", Or(VarRef("X"), Diamond("a", VarRef("Y"))))
    got = substitute(body, "X", Diamond("b", VarRef("Y")))
    assert isinstance(got, LeastFix) and got.var != "Y"
    assert got.body.left == Diamond("b", VarRef("Y"))


def test_unfold_nested_reuse_of_name():
    f = parse_formula("max X.[a](max X.[b]X & X)")
    u = unfold(f)
    assert validate(u).closed
    assert [holds(f, t) for t in universe(ALPHABET, 3, 3)] == [holds(u, t) for t in universe(ALPHABET, 3, 3)]


@given(formulas("any", 4))
def test_unfold_preserves_semantics(f):
    if not isinstance(f, (LeastFix, GreatestFix)):
        f = GreatestFix("W", And(f, Box("a", VarRef("W"))))
    u = unfold(f)
    traces = list(bounded_universe(ALPHABET, 4, 3))
    assert evaluate_many(f, traces, ALPHABET) == evaluate_many(u, traces, ALPHABET)
