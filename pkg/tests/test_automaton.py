import pytest
from hypothesis import given, settings

from corpus import ALPHABET, monitor_corpus
from monitorability.automaton import (
    classify_monitor,
    determinize,
    is_deterministic,
    is_explicit,
    monitor_dfa,
    rejection_equivalent,
    to_automaton,
    to_dot,
    to_regular_monitor,
    verdict_difference,
    verdict_equivalent,
)
from monitorability.errors import ConflictingVerdicts
from monitorability.monitor import NO, YES, Simulator, parse_monitor, print_monitor, run_finite
from oracle import all_words, brute_outcome
from strategies import monitors, words

FSR = "f,s,r"


def _consistent(m, sim):
    try:
        monitor_dfa(m, ALPHABET, simulator=sim)
    except ConflictingVerdicts:
        return False
    return True


# --- exploration ------------------------------------------------------------


def test_yes_is_one_sink():
    nfa = to_automaton(YES, "a")
    assert len(nfa.terms) == 1 and nfa.verdict == {0: "yes"}


def test_explore_choice():
    nfa = to_automaton(parse_monitor("f.no + s.yes + r.yes"), FSR)
    init = next(iter(nfa.initial))
    got = {a: {print_monitor(nfa.terms[q]) for q in nfa.delta[(init, a)]} for a in "fsr"}
    assert got == {"f": {"no"}, "s": {"yes"}, "r": {"yes"}}


def test_explore_loop():
    nfa = to_automaton(parse_monitor("rec X.a.X"), "a")
    assert not nfa.verdict
    dfa = determinize(nfa)
    # the loop plus the sink reached on no action
    assert len(dfa) == 1 and not dfa.verdict
    assert len(determinize(to_automaton(parse_monitor("rec X.a.X"), "a,b"))) == 2


# --- determinization --------------------------------------------------------


def test_determinize_union_of_extensions():
    dfa = monitor_dfa(parse_monitor("a.yes + a.a.yes"), "a,b")
    assert dfa.verdict[dfa.run(("a",))] == "yes"
    assert dfa.run(("b",)) not in dfa.verdict
    assert to_regular_monitor(dfa) == parse_monitor("a.yes")


def test_determinize_conflict():
    with pytest.raises(ConflictingVerdicts) as e:
        monitor_dfa(parse_monitor("a.yes + a.no"), "a")
    assert e.value.word == ("a",)


def test_yes_unchanged():
    assert to_regular_monitor(monitor_dfa(YES, "a")) == YES


def test_state_elimination_loop():
    m = parse_monitor("rec X.(s.X + f.no)")
    # summands follow the alphabet order
    assert print_monitor(to_regular_monitor(monitor_dfa(m, "s,f,r"))) == "rec X0.(s.X0 + f.no)"
    assert print_monitor(to_regular_monitor(monitor_dfa(m, FSR))) == "rec X0.(f.no + s.X0)"


def test_rejection_projection_ignores_yes():
    m = parse_monitor("a.yes + a.no")
    dfa = monitor_dfa(m, "a", keep=("no",))
    assert dfa.verdict[dfa.run(("a",))] == "no"


def test_dot_output():
    text = to_dot(monitor_dfa(parse_monitor("a.yes"), "a,b"))
    assert text.startswith("digraph") and "yes" in text


@settings(max_examples=60)
@given(monitors(False, 4), words)
def test_dfa_verdicts_match_oracle(m, w):
    try:
        dfa = monitor_dfa(m, ALPHABET)
    except ConflictingVerdicts as e:
        acc, rej = brute_outcome(m, e.word)
        assert acc is not None and rej is not None
        return
    acc, rej = brute_outcome(m, w)
    v = dfa.verdict.get(dfa.run(w))
    assert v == ("yes" if acc is not None else "no" if rej is not None else None)


def test_corpus_round_trip():
    sim = Simulator()
    checked = 0
    for m in monitor_corpus():
        if not _consistent(m, sim):
            continue
        d = to_regular_monitor(monitor_dfa(m, ALPHABET, simulator=sim))
        assert is_deterministic(d)
        assert verdict_equivalent(m, d, ALPHABET, simulator=sim), print_monitor(m)
        checked += 1
    assert checked > 150


def test_round_trip_replays_runs():
    for m in monitor_corpus()[::5]:
        try:
            d = to_regular_monitor(monitor_dfa(m, ALPHABET))
        except ConflictingVerdicts:
            continue
        for w in all_words(ALPHABET, 4):
            a, b = run_finite(m, w), run_finite(d, w)
            # d reports a verdict no earlier than m, and the same one from
            # the next action on
            if b.status.value != "NO-VERDICT":
                assert a.status is b.status
            if a.status.value != "NO-VERDICT" and a.prefix_length < len(w):
                assert a.status is b.status


# --- comparisons ------------------------------------------------------------


def test_equivalence_examples():
    assert verdict_equivalent(parse_monitor("a.yes + a.a.yes"), parse_monitor("a.yes"), "a,b")
    assert not verdict_equivalent(YES, NO)
    assert verdict_difference(YES, NO) == ()


def test_difference_is_shortest():
    m1 = parse_monitor("a.b.yes + b.no")
    m2 = parse_monitor("a.b.no + b.no")
    assert verdict_difference(m1, m2, "a,b") == ("a", "b")


def test_rejection_equivalence_ignores_acceptance():
    assert rejection_equivalent(parse_monitor("a.no + b.yes"), parse_monitor("a.no"), "a,b")
    assert not verdict_equivalent(parse_monitor("a.no + b.yes"), parse_monitor("a.no"), "a,b")


def test_deterministic_and_explicit():
    assert is_deterministic(parse_monitor("a.yes + b.no"))
    assert not is_deterministic(parse_monitor("a.yes + a.no"))
    assert not is_deterministic(parse_monitor("a.yes & b.no"))
    assert is_explicit(parse_monitor("rec X.(f.no + s.X + r.end)"), FSR)
    assert not is_explicit(parse_monitor("f.no + s.end"), FSR)
    # the violation grammar has no yes
    assert not is_explicit(parse_monitor("f.no + s.yes + r.yes"), FSR)


# --- informativeness --------------------------------------------------------


def test_classify_examples():
    c = classify_monitor(YES, "a")
    assert c.informative_sat and c.persistent_sat
    assert not c.informative_viol and not c.persistent_viol
    c = classify_monitor(parse_monitor("rec X.(s.X + f.no + r.no)"), FSR)
    assert c.informative_viol and c.persistent_viol and not c.informative_sat
    c = classify_monitor(parse_monitor("rec X.a.X"), "a")
    assert not any(c.as_dict().values())


def test_persistence_needs_either_verdict_only():
    c = classify_monitor(parse_monitor("a.yes + b.yes + c.no"), ALPHABET)
    assert c.persistent and not c.persistent_sat and not c.persistent_viol


def _bounded_flags(m, k):
    """Reachability by brute force over words up to ``k`` (plus ``k``
    more for the persistence witnesses)."""
    seen = {w: brute_outcome(m, w) for w in all_words(ALPHABET, 2 * k)}
    # corpus terms have at most five nested prefixes
    deep = [brute_outcome(m, w) for w in all_words(ALPHABET, 6) if len(w) == 6]
    acc = any(o[0] is not None for o in list(seen.values()) + deep)
    rej = any(o[1] is not None for o in list(seen.values()) + deep)

    def ext(w, idx):
        return any(seen[u][idx] is not None for u in seen if u[: len(w)] == w and len(u) <= len(w) + k)

    short = [w for w in seen if len(w) <= k]
    return acc, rej, all(ext(w, 0) for w in short), all(ext(w, 1) for w in short)


def test_classify_matches_bounded_search():
    sim = Simulator()
    for m in monitor_corpus(60, seed=7, regular=True):
        c = classify_monitor(m, ALPHABET, sim)
        acc, rej, pacc, prej = _bounded_flags(m, 2)
        assert (c.informative_sat, c.informative_viol) == (acc, rej), print_monitor(m)
        # bounded persistence can only overestimate the exact flags' failures
        if c.persistent_sat:
            assert pacc
        if c.persistent_viol:
            assert prej
