import pytest
from hypothesis import given, settings

from corpus import ALPHABET, formula_corpus
from monitorability.formula import FF, TT, And, encode_ltl, parse_formula, parse_ltl
from monitorability.fragments import ihml_membership, in_chml, in_shml, make_explicit
from monitorability.pz import (
    PzStatus,
    TruthDomain,
    epz_monitorable,
    ffm_evaluate,
    ffm_monitorable,
    s_monitorable,
    upz_monitorable,
)
from monitorability.semantics import Polarity
from monitorability.traces import Trace
from oracle import all_words, brute_determines, holds
from strategies import formulas, words

FSR = "f,s,r"
G7 = parse_formula("max X.([f]ff & [s]X & [r]X)")
FS = encode_ltl(parse_ltl("F s"), FSR)
GFS = encode_ltl(parse_ltl("G F s"), FSR)
E9 = encode_ltl(parse_ltl("(!f U s) | G F r"), FSR)

# --- s-, e- and u-monitorability ---------------------------------------------


def test_s_monitorable_examples():
    res = s_monitorable(FF, "eps", 0)
    assert res.monitorable and res.witness == Trace(()) and res.polarity is Polarity.NEGATIVE
    res = s_monitorable(E9, "f", 6, FSR)
    assert res.status is PzStatus.NOT_MONITORABLE_UP_TO_BOUND and str(res) == "NotMonitorableUpToBound(6)"
    res = s_monitorable(G7, "s.s", 3, FSR)
    assert str(res) == "Monitorable(f)" and res.exact


def test_s_monitorable_valid_safety():
    res = s_monitorable(parse_formula("max X.[a]X & [b]tt"), "a", 3, "a,b")
    assert str(res) == "Monitorable(eps)" and res.polarity is Polarity.POSITIVE


@settings(max_examples=30)
@given(formulas("shml", 4), words.map(lambda w: w[:3]))
def test_fragments_monitorable_from_every_prefix(f, s):
    res = s_monitorable(f, Trace(s), 6, ALPHABET)
    assert res.monitorable and res.exact
    t = Trace(s + res.witness.prefix)
    assert brute_determines(f, t, res.polarity is Polarity.POSITIVE, ALPHABET, 2)


def test_epz_examples():
    res = epz_monitorable(E9, 4, FSR)
    assert res.monitorable and brute_determines(E9, res.witness, res.polarity is Polarity.POSITIVE, "fsr", 3)
    res = epz_monitorable(encode_ltl(parse_ltl("F G !r"), FSR), 6, FSR)
    assert str(res) == "NotMonitorableUpToBound(6)"
    assert str(epz_monitorable(TT, 0)) == "Monitorable(eps)"


def test_upz_examples():
    f = And(make_explicit(G7, FSR), FS)
    res = upz_monitorable(f, 3, 4, FSR)
    assert res.monitorable and res.exact
    assert res.witnesses["s.r"] == "f"
    res = upz_monitorable(E9, 1, 6, FSR)
    assert not res.monitorable and res.failing_prefix == Trace(("f",))


def test_upz_alphabet_sensitive():
    f = parse_formula("max X.<a>X")
    res = upz_monitorable(f, 2, 1, "a,b")
    assert res.monitorable and res.witnesses["a.a"] == "b"
    res = upz_monitorable(f, 2, 1, "a")
    assert not res.monitorable and res.failing_prefix == Trace(())


def _brute_s(f, s, n, k):
    for r in all_words(ALPHABET, n):
        t = Trace(s + r)
        for pos in (True, False):
            if brute_determines(f, t, pos, ALPHABET, k):
                return Trace(r)
    return None


@settings(max_examples=30)
@given(formulas("any", 3))
def test_s_monitorable_matches_brute_force(f):
    # the package's answer may only be more precise than a bounded oracle
    res = s_monitorable(f, "a", 2, ALPHABET, oracle_bound=3)
    want = _brute_s(f, ("a",), 2, 3)
    if res.monitorable:
        assert brute_determines(f, Trace(("a",) + res.witness.prefix), res.polarity is Polarity.POSITIVE, ALPHABET, 3)
        assert want is not None and len(want.prefix) <= len(res.witness.prefix)
    else:
        assert res.status is not PzStatus.MONITORABLE


def test_epz_on_informative_corpus():
    for f in formula_corpus():
        if ihml_membership(f) is not None:
            assert epz_monitorable(f, 3, ALPHABET).monitorable


# --- truth domains ----------------------------------------------------------


def test_ffm_evaluate_examples():
    assert str(ffm_evaluate(GFS, "s", TruthDomain.TT_FF_UNKNOWN, 4, FSR)) == "?"
    assert str(ffm_evaluate(FF, "eps", TruthDomain.FF_UNKNOWN, 0)) == "ff"
    assert str(ffm_evaluate(G7, "f", TruthDomain.FF_UNKNOWN, 2, FSR)) == "ff"
    assert str(ffm_evaluate(G7, "s", TruthDomain.FF_UNKNOWN, 2, FSR)) == "?"
    assert str(ffm_evaluate(FS, "s", TruthDomain.TT_UNKNOWN, 2, FSR)) == "tt"


@pytest.mark.parametrize("domain", list(TruthDomain))
def test_ffm_vacuous(domain):
    res = ffm_monitorable(GFS, domain, 3, 4, FSR)
    assert res.monitorable and res.pair is None


def test_ffm_safety():
    assert ffm_monitorable(G7, TruthDomain.FF_UNKNOWN, 3, 3, FSR).monitorable


def test_ffm_counterexample_pair():
    f = parse_formula("<s>tt | <f>[r]ff")
    res = ffm_monitorable(f, TruthDomain.TT_UNKNOWN, 2, 3, FSR)
    assert not res.monitorable
    assert [str(t) for t in res.pair] == ["f", "eps"]


def _brute_ffm(f, domain, n, k):
    def val(s):
        t = Trace(s)
        if domain is not TruthDomain.FF_UNKNOWN and brute_determines(f, t, True, ALPHABET, k):
            if domain is TruthDomain.TT_UNKNOWN or holds(f, t):
                return "tt"
        if domain is not TruthDomain.TT_UNKNOWN and brute_determines(f, t, False, ALPHABET, k):
            if domain is TruthDomain.FF_UNKNOWN or not holds(f, t):
                return "ff"
        return "?"

    ws = list(all_words(ALPHABET, n))
    inside = [w for w in ws if holds(f, Trace(w))]
    outside = [w for w in ws if not holds(f, Trace(w))]
    vals = {w: val(w) for w in ws}
    return all(vals[a] != vals[b] for a in inside for b in outside)


@settings(max_examples=25)
@given(formulas("any", 3))
def test_ffm_matches_brute_force_on_fragments(f):
    if not (in_shml(f) or in_chml(f)):
        return
    for domain in TruthDomain:
        got = ffm_monitorable(f, domain, 2, 3, ALPHABET)
        assert got.monitorable == _brute_ffm(f, domain, 2, 3)
