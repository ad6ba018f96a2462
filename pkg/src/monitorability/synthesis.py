"""Monitor synthesis from SHML/CHML, formula synthesis from regular monitors,
and the bounded maximal monitor for arbitrary formulas."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

from .automaton import DFA, determinize, to_automaton, to_regular_monitor
from .errors import NotInFragment, NotRegular
from .formula import (
    FF,
    TT,
    Alphabet,
    AlphabetLike,
    And,
    Box,
    Diamond,
    Falsehood,
    Formula,
    GreatestFix,
    LeastFix,
    Or,
    Truth,
    VarRef,
)
from .monitor import (
    NO,
    YES,
    Act,
    Choice,
    End,
    Monitor,
    MVar,
    No,
    ParAnd,
    ParOr,
    Rec,
    Yes,
    choice,
    is_regular,
)
from .semantics import (
    FALSE_DNF,
    TRUE_DNF,
    Polarity,
    Status,
    derivative,
    determines,
    dnf_to_formula,
    expand,
    require_closed_guarded,
    session_alphabet,
)
from .traces import Trace

SOUND_ONLY = "SoundOnly"
VIOLATION_COMPLETE = "SoundViolationComplete"
SATISFACTION_COMPLETE = "SoundSatisfactionComplete"
BOUNDED_MAXIMAL = "BoundedMaximal"


@dataclass(frozen=True)
class Guarantee:
    kind: str
    bound: int | None = None

    def __str__(self) -> str:
        return f"{self.kind}({self.bound})" if self.bound is not None else self.kind


@dataclass(frozen=True)
class SynthesisOutput:
    monitor: Monitor
    guarantees: Guarantee
    # prefixes whose verdict rests on a bounded (not exact) determination answer
    bounded_verdicts: tuple[Trace, ...] = field(default=())


def _table(f: Formula, actions: tuple[str, ...]) -> Monitor:
    if isinstance(f, Falsehood):
        return NO
    if isinstance(f, Truth):
        return YES
    if isinstance(f, And):
        return ParAnd(_table(f.left, actions), _table(f.right, actions))
    if isinstance(f, Or):
        return ParOr(_table(f.left, actions), _table(f.right, actions))
    if isinstance(f, (LeastFix, GreatestFix)):
        return Rec(f.var, _table(f.body, actions))
    if isinstance(f, VarRef):
        return MVar(f.name)
    if isinstance(f, (Box, Diamond)):
        other = YES if isinstance(f, Box) else NO
        rest = [Act(b, other) for b in actions if b != f.action]
        return choice(Act(f.action, _table(f.body, actions)), *rest)
    raise TypeError(f"not a formula: {f!r}")


def synthesize(f: Formula, alphabet: AlphabetLike | None = None) -> SynthesisOutput:
    """Translate a SHML or CHML formula into a monitor, summand by summand.

    Box and diamond completions list the remaining actions in alphabet
    order.  A formula in both fragments gets the satisfaction guarantee
    when it holds of the empty trace and the violation one otherwise.
    """
    from .fragments import in_chml, in_shml
    from .semantics import evaluate

    require_closed_guarded(f)
    shml, chml = in_shml(f), in_chml(f)
    if not (shml or chml):
        raise NotInFragment("synthesis needs a SHML or CHML formula")
    if shml and chml:
        kind = SATISFACTION_COMPLETE if evaluate(f, Trace()) else VIOLATION_COMPLETE
    else:
        kind = VIOLATION_COMPLETE if shml else SATISFACTION_COMPLETE
    alpha = session_alphabet(f, alphabet=alphabet) if _has_modal(f) or alphabet else None
    actions = alpha.actions if alpha else ()
    return SynthesisOutput(_table(f, actions), Guarantee(kind))


def _has_modal(f: Formula) -> bool:
    from .formula import actions_of

    return bool(actions_of(f))


@lru_cache(maxsize=512)
def _verdict_dfa(f: Formula, alphabet: Alphabet) -> DFA:
    m = synthesize(f, alphabet).monitor
    return determinize(to_automaton(m, alphabet))


def verdict_dfa(f: Formula, alphabet: AlphabetLike) -> DFA:
    """Deterministic automaton of the synthesized monitor of ``f``."""
    return _verdict_dfa(f, Alphabet.of(alphabet))


def monitor_to_formula(m: Monitor) -> Formula:
    """The SHML formula f(m) of a regular monitor."""
    if not is_regular(m):
        raise NotRegular("formula synthesis needs a monitor without parallel operators")

    def go(t: Monitor) -> Formula:
        if isinstance(t, No):
            return FF
        if isinstance(t, (Yes, End)):
            return TT
        if isinstance(t, Choice):
            return And(go(t.left), go(t.right))
        if isinstance(t, Act):
            return Box(t.action, go(t.body))
        if isinstance(t, Rec):
            return GreatestFix(t.var, go(t.body))
        if isinstance(t, MVar):
            return VarRef(t.name)
        raise TypeError(f"not a monitor: {t!r}")

    return go(m)


def bounded_maximal_monitor(
    f: Formula,
    bound: int,
    alphabet: AlphabetLike | None = None,
    oracle_bound: int | None = None,
) -> SynthesisOutput:
    """Deterministic monitor giving a verdict on every trace of length at
    most ``bound`` that the oracle finds determining.

    States are residuals of ``f``, explored breadth-first from ``eps`` to
    depth ``bound``; words with equal residuals share a state, which folds
    the prefix tree into loops.  Each new residual is labelled through
    ``determines`` at its shortest access word with ``oracle_bound``
    (default ``max(bound, 6)``); residuals first met at depth ``bound`` are not
    expanded further.
    """
    require_closed_guarded(f)
    alpha = session_alphabet(f, alphabet=alphabet) if _has_modal(f) or alphabet else None
    actions = alpha.actions if alpha else ()
    k = max(bound, 6) if oracle_bound is None else oracle_bound

    ids: dict[frozenset, int] = {}
    access: list[tuple[str, ...]] = []
    verdict: dict[int, str] = {}
    bounded_labels: list[Trace] = []

    def label(r: frozenset, word: tuple[str, ...]) -> str | None:
        if r == TRUE_DNF:
            return "yes"
        if r == FALSE_DNF:
            return "no"
        if not actions:
            return None
        t = Trace(word)
        for pol, v in ((Polarity.POSITIVE, "yes"), (Polarity.NEGATIVE, "no")):
            res = determines(f, t, pol, k, alpha)
            if res.plausible:
                if res.status is Status.UNKNOWN:
                    bounded_labels.append(t)
                return v
        return None

    def state(r: frozenset, word: tuple[str, ...]) -> int:
        if r not in ids:
            ids[r] = len(access)
            access.append(word)
            v = label(r, word)
            if v:
                verdict[ids[r]] = v
            queue.append(r)
        return ids[r]

    queue: deque = deque()
    edges: dict[int, dict[str, int]] = {}
    state(expand(f), ())
    while queue:
        r = queue.popleft()
        q = ids[r]
        if q in verdict or len(access[q]) >= bound:
            continue
        edges[q] = {a: state(derivative(r, a), access[q] + (a,)) for a in actions}

    # verdict states become shared sinks; unexpanded states go to a
    # verdict-free sink
    n = len(access)
    yes_id, no_id, sink = n, n + 1, n + 2
    delta: list[dict[str, int]] = []
    for q in range(n):
        if q in verdict:
            target = yes_id if verdict[q] == "yes" else no_id
            delta.append({a: target for a in actions})
        elif q in edges:
            row = {}
            for a, p in edges[q].items():
                row[a] = {"yes": yes_id, "no": no_id}.get(verdict.get(p), p)
            delta.append(row)
        else:
            delta.append({a: sink for a in actions})
    for s in (yes_id, no_id, sink):
        delta.append({a: s for a in actions})
    labels = [str(dnf_to_formula(r)) for r in _by_id(ids)] + ["yes", "no", "{}"]
    dfa = DFA(actions, delta, {yes_id: "yes", no_id: "no"}, labels, sink)
    # the initial state may itself be a verdict
    if 0 in verdict:
        monitor = YES if verdict[0] == "yes" else NO
    else:
        monitor = to_regular_monitor(dfa)
    return SynthesisOutput(monitor, Guarantee(BOUNDED_MAXIMAL, bound), tuple(bounded_labels))


def _by_id(ids: dict[frozenset, int]) -> list[frozenset]:
    out: list[frozenset] = [frozenset()] * len(ids)
    for r, i in ids.items():
        out[i] = r
    return out
