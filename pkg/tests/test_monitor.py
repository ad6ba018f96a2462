import pytest
from hypothesis import given, settings

from corpus import ALPHABET, monitor_corpus
from monitorability.errors import ParseError, StateExplosion, UnboundVariable
from monitorability.formula import FF, parse_formula
from monitorability.monitor import (
    END,
    NO,
    YES,
    Act,
    Choice,
    MVar,
    ParAnd,
    ParOr,
    Rec,
    Run,
    Simulator,
    Verdict,
    canonical,
    check_soundness_upto,
    decide_lasso,
    is_regular,
    parse_monitor,
    print_monitor,
    run_finite,
    run_trace,
    step,
)
from monitorability.synthesis import synthesize
from oracle import all_words, brute_lasso_outcome, brute_outcome
from strategies import finite, lassos, monitors, words

FSR = "f,s,r"
M1 = parse_monitor("f.no + s.yes + r.yes")


# --- syntax -----------------------------------------------------------------


def test_parse_shapes():
    assert parse_monitor("a.yes") == Act("a", YES)
    assert parse_monitor("a.yes + b.no") == Choice(Act("a", YES), Act("b", NO))
    assert parse_monitor("yes & no | end") == ParOr(ParAnd(YES, NO), END)
    assert parse_monitor("rec X.a.X") == Rec("X", Act("a", MVar("X")))


def test_parse_errors():
    with pytest.raises(UnboundVariable):
        parse_monitor("a.X")
    with pytest.raises(ParseError):
        parse_monitor("a.")
    with pytest.raises(ParseError):
        parse_monitor("yes +")


def test_print_examples():
    assert print_monitor(M1) == "f.no + s.yes + r.yes"
    assert print_monitor(parse_monitor("rec X.(s.X + f.no)")) == "rec X.(s.X + f.no)"


@given(monitors(False, 4))
def test_print_round_trip(m):
    assert parse_monitor(print_monitor(m)) == m


def test_regularity():
    assert is_regular(M1)
    assert not is_regular(parse_monitor("a.yes & b.no"))


# --- steps ------------------------------------------------------------------


def test_step_examples():
    assert step({Act("a", YES)}, "a") == {YES}
    assert step({M1}, "s") == {YES}
    m = ParOr(YES, parse_monitor("rec X.(a.X + b.no)"))
    assert step({m}, "a") == {YES}


def test_step_disabled_action():
    assert step({Act("a", YES)}, "b") == frozenset()


def test_verdicts_persist():
    for v in (YES, NO, END):
        assert step({v}, "a") == {v}


def test_tau_rules():
    assert step({ParAnd(END, END)}, "a") == {END}
    assert step({ParAnd(YES, Act("a", NO))}, "a") == {NO}
    assert step({ParOr(NO, Act("a", YES))}, "a") == {YES}


def test_state_cap():
    sim = Simulator(state_cap=3)
    m = parse_monitor("a.b.c.a.b.yes")
    with pytest.raises(StateExplosion):
        run_finite(m, "a.b.c.a.b", sim)
    assert run_finite(m, "a.b.c.a.b").accepted


def test_canonical_dedups_operands():
    m = ParAnd(Act("a", YES), ParAnd(Act("b", NO), Act("a", YES)))
    assert canonical(m) == canonical(ParAnd(Act("b", NO), Act("a", YES)))


# --- runs -------------------------------------------------------------------


def test_run_examples():
    out = run_finite(M1, "f.r")
    assert out.status is Verdict.REJECTED and out.prefix_length == 1
    assert str(out) == "REJECTED at 1"
    assert run_finite(YES, "eps").prefix_length == 0
    assert run_finite(YES, "eps").accepted
    assert run_finite(parse_monitor("a.yes + a.no"), "a").conflicting


def test_conflict_tie_reports_rejection():
    out = run_finite(parse_monitor("a.yes + a.no"), "a")
    assert out.rejected and out.prefix_length == 1


def test_earliest_verdict_wins():
    out = run_finite(parse_monitor("a.yes + a.b.no"), "a.b")
    assert out.accepted and out.prefix_length == 1 and out.conflicting


def test_lasso_examples():
    assert str(decide_lasso(M1, "(r)^w")) == "ACCEPTED at 1"
    assert decide_lasso(parse_monitor("rec X.s.X"), "(s)^w").status is Verdict.NO_VERDICT
    assert str(decide_lasso(M1, "(f)^w")) == "REJECTED at 1"


def test_lasso_needs_loop():
    with pytest.raises(ValueError):
        decide_lasso(M1, "f")
    with pytest.raises(ValueError):
        run_finite(M1, "(f)^w")


def test_lasso_late_verdict():
    m = parse_monitor("rec X.(a.b.X + b.b.b.no)")
    assert str(decide_lasso(m, "(a.b)^w")) == "NO-VERDICT"
    assert str(decide_lasso(m, "a.b(b)^w")) == "REJECTED at 5"


def test_verdict_under_rec_is_one_step_late():
    # recursion unfolds only in action steps and sums take no silent step,
    # so a verdict under either is only reported after the next action
    for text in ("rec X.no", "no + yes", "no + a.yes"):
        m = parse_monitor(text)
        assert run_finite(m, "eps").status is Verdict.NO_VERDICT
        assert run_finite(m, "a").rejected
    assert run_finite(parse_monitor("no & a.yes"), "eps").rejected


def test_streaming_run_matches_batch():
    run = Run(M1)
    assert run.outcome.status is Verdict.NO_VERDICT
    assert run.feed("s").accepted
    assert run.feed("f").accepted


# --- agreement with the raw-term oracle -------------------------------------


def _expected(acc, rej):
    if rej is not None and (acc is None or rej <= acc):
        return Verdict.REJECTED, rej
    if acc is not None:
        return Verdict.ACCEPTED, acc
    return Verdict.NO_VERDICT, None


def test_corpus_matches_oracle():
    sim = Simulator()
    for m in monitor_corpus()[::2]:
        for w in all_words(ALPHABET, 3):
            acc, rej = brute_outcome(m, w)
            out = run_finite(m, w, sim)
            assert (out.status, out.prefix_length) == _expected(acc, rej), (print_monitor(m), w)
            assert out.conflicting == (acc is not None and rej is not None)


@settings(max_examples=80)
@given(monitors(False, 4), words)
def test_run_matches_oracle(m, w):
    acc, rej = brute_outcome(m, w)
    out = run_finite(m, w)
    assert (out.status, out.prefix_length) == _expected(acc, rej)


@settings(max_examples=60)
@given(monitors(True, 4), lassos)
def test_lasso_matches_unrolled_oracle(m, t):
    acc, rej = brute_lasso_outcome(m, t)
    out = decide_lasso(m, t)
    assert (out.status, out.prefix_length) == _expected(acc, rej)


@given(monitors(False, 4), finite, words)
def test_verdicts_irrevocable(m, s, r):
    first = run_finite(m, s)
    later = run_finite(m, s.prefix + r)
    if first.status is not Verdict.NO_VERDICT and not first.conflicting:
        assert later.status is first.status and later.prefix_length == first.prefix_length


# --- bounded soundness ------------------------------------------------------


def test_soundness_examples():
    f = parse_formula("[f]ff")
    assert check_soundness_upto(synthesize(f, FSR).monitor, f, 4, 4, FSR).sound
    rep = check_soundness_upto(YES, FF, 2, 2, "a")
    assert not rep.sound and str(rep.violations[0].trace) == "eps"
    assert check_soundness_upto(NO, FF, 2, 2, "a").sound


def test_soundness_of_invariant_monitor():
    f = parse_formula("max X.([f]ff & [s]X & [r]X)")
    m = synthesize(f, FSR).monitor
    assert check_soundness_upto(m, f, 4, 3, FSR).sound


def test_run_trace_dispatch():
    assert run_trace(M1, "f").rejected
    assert run_trace(M1, "(s)^w").accepted
