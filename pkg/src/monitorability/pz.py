"""Pnueli-Zaks monitorability (per prefix, existential, universal) and
three-valued truth-domain evaluation with its monitorability condition."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .formula import Alphabet, AlphabetLike, Formula
from .fragments import (
    SIHML,
    SPIHML,
    extend_to_violation,
    ihml_membership,
    in_chml,
    in_shml,
    pihml_membership,
    witness_informative_trace,
)
from .semantics import (
    Polarity,
    Status,
    determines,
    evaluate_many,
    require_closed_guarded,
    session_alphabet,
)
from .traces import Trace, TraceLike, finite_traces, words

DEFAULT_ORACLE_BOUND = 6


class PzStatus(enum.Enum):
    MONITORABLE = "Monitorable"
    NOT_MONITORABLE_UP_TO_BOUND = "NotMonitorableUpToBound"
    NOT_MONITORABLE = "NotMonitorable"


@dataclass(frozen=True)
class PzResult:
    status: PzStatus
    quantifier: str  # "existential" or "universal"
    bound: int
    probed: int
    exact: bool
    witness: Trace | None = None  # extension for s-/EPZ results
    polarity: Polarity | None = None
    failing_prefix: Trace | None = None
    witnesses: dict[str, str] = field(default_factory=dict)  # UPZ prefix -> extension
    reason: str = ""

    @property
    def monitorable(self) -> bool:
        return self.status is PzStatus.MONITORABLE

    def __str__(self) -> str:
        if self.status is PzStatus.MONITORABLE:
            if self.quantifier == "universal":
                return "Monitorable"
            return f"Monitorable({self.witness})"
        if self.status is PzStatus.NOT_MONITORABLE:
            return f"NotMonitorable({self.reason})"
        tail = f", failing prefix {self.failing_prefix}" if self.failing_prefix is not None else ""
        return f"NotMonitorableUpToBound({self.bound}{tail})"

    def as_dict(self) -> dict:
        return {
            "status": self.status.value,
            "quantifier": self.quantifier,
            "bound": self.bound,
            "probed": self.probed,
            "exact": self.exact,
            "witness": None if self.witness is None else str(self.witness),
            "polarity": None if self.polarity is None else self.polarity.value,
            "failingPrefix": None if self.failing_prefix is None else str(self.failing_prefix),
            "witnesses": dict(self.witnesses),
        }


def _fragment_s_monitorable(f: Formula, s: Trace, k: int, alpha: Alphabet):
    """Exact search: an extension works iff the extended trace already
    violates a SHML formula (satisfies a CHML one), or leads the synthesized
    monitor's automaton to a state where its verdict is unreachable."""
    from .synthesis import verdict_dfa

    shml = in_shml(f)
    bad = "no" if shml else "yes"
    direct = Polarity.NEGATIVE if shml else Polarity.POSITIVE
    dfa = verdict_dfa(f, alpha)
    dead = set(range(len(dfa))) - dfa.coreachable((bad,))
    start = dfa.run(s.prefix)
    probed = 0
    for n in range(k + 1):
        cands = [Trace(r) for r in words(alpha, n)]
        holds = evaluate_many(f, [Trace(s.prefix + r.prefix) for r in cands], alpha)
        for r, h in zip(cands, holds):
            probed += 1
            if h != shml:
                return r, direct, probed
            if dfa.run(r.prefix, start) in dead:
                return r, direct.opposite, probed
    return None, None, probed


def s_monitorable(
    f: Formula,
    s: TraceLike,
    bound: int,
    alphabet: AlphabetLike | None = None,
    oracle_bound: int = DEFAULT_ORACLE_BOUND,
) -> PzResult:
    """First extension ``r`` (length-lex, ``|r| <= bound``) such that ``s.r``
    positively or negatively determines ``f``."""
    require_closed_guarded(f)
    s = Trace.of(s)
    if alphabet is None and not s.prefix and not _has_actions(f):
        # no modality: the formula is constant and eps already decides it
        from .semantics import evaluate

        pol = Polarity.POSITIVE if evaluate(f, s) else Polarity.NEGATIVE
        return PzResult(PzStatus.MONITORABLE, "existential", bound, 1, True, Trace(), pol)
    alpha = session_alphabet(f, s, alphabet=alphabet)
    if in_shml(f) or in_chml(f):
        r, pol, probed = _fragment_s_monitorable(f, s, bound, alpha)
        if r is not None:
            return PzResult(PzStatus.MONITORABLE, "existential", bound, probed, True, r, pol)
        # some extension always works for these fragments, only a longer one
        return PzResult(PzStatus.NOT_MONITORABLE_UP_TO_BOUND, "existential", bound, probed, True)
    probed = 0
    for n in range(bound + 1):
        for r in words(alpha, n):
            probed += 1
            t = Trace(s.prefix + r)
            for pol in (Polarity.POSITIVE, Polarity.NEGATIVE):
                res = determines(f, t, pol, oracle_bound, alpha)
                if res.plausible:
                    return PzResult(
                        PzStatus.MONITORABLE, "existential", bound, probed, res.exact, Trace(r), pol
                    )
    # every candidate was refuted by a concrete counterexample, but longer
    # extensions remain open
    return PzResult(PzStatus.NOT_MONITORABLE_UP_TO_BOUND, "existential", bound, probed, False)


def epz_monitorable(
    f: Formula,
    bound: int,
    alphabet: AlphabetLike | None = None,
    oracle_bound: int = DEFAULT_ORACLE_BOUND,
) -> PzResult:
    """Monitorability from the empty prefix.  Informative formulas get an
    exact answer from their witness trace."""
    require_closed_guarded(f)
    split = ihml_membership(f)
    alpha = session_alphabet(f, alphabet=alphabet) if alphabet or _has_actions(f) else None
    if split is not None:
        w = witness_informative_trace(f)
        pol = Polarity.NEGATIVE if split.kind == SIHML else Polarity.POSITIVE
        return PzResult(PzStatus.MONITORABLE, "existential", bound, 1, True, w, pol)
    if alpha is None:
        raise ValueError("cannot infer an alphabet; pass one")
    return s_monitorable(f, Trace(), bound, alpha, oracle_bound)


def _has_actions(f: Formula) -> bool:
    from .formula import actions_of

    return bool(actions_of(f))


def upz_monitorable(
    f: Formula,
    depth: int,
    bound: int,
    alphabet: AlphabetLike | None = None,
    oracle_bound: int = DEFAULT_ORACLE_BOUND,
) -> PzResult:
    """Monitorability from every prefix of length at most ``depth``.

    Persistently informative formulas are answered exactly (for all
    prefixes) with extensions built by moving the verdict forward; other
    formulas are probed prefix by prefix.
    """
    require_closed_guarded(f)
    alpha = session_alphabet(f, alphabet=alphabet)
    split = pihml_membership(f, alpha)
    prefixes = list(finite_traces(alpha, depth))
    if split is not None:
        pol = Polarity.NEGATIVE if split.kind == SPIHML else Polarity.POSITIVE
        wit = {str(s): str(extend_to_violation(f, s, alpha)) for s in prefixes}
        return PzResult(
            PzStatus.MONITORABLE, "universal", bound, len(prefixes), True, polarity=pol, witnesses=wit
        )
    probed = 0
    exact = True
    wit: dict[str, str] = {}
    for s in prefixes:
        res = s_monitorable(f, s, bound, alpha, oracle_bound)
        probed += res.probed
        exact = exact and res.exact
        if not res.monitorable:
            return PzResult(
                PzStatus.NOT_MONITORABLE_UP_TO_BOUND,
                "universal",
                bound,
                probed,
                False,
                failing_prefix=s,
                witnesses=wit,
            )
        wit[str(s)] = str(res.witness)
    # exact only over the probed prefixes; deeper ones were not examined
    return PzResult(PzStatus.MONITORABLE, "universal", bound, probed, False, witnesses=wit)


# ---------------------------------------------------------------------------
# Truth domains


class TruthDomain(enum.Enum):
    FF_UNKNOWN = "ff?"
    TT_UNKNOWN = "tt?"
    TT_FF_UNKNOWN = "ttff?"


@dataclass(frozen=True)
class FfmValue:
    value: str  # "tt", "ff" or "?"
    exact: bool

    def __str__(self) -> str:
        return self.value


def ffm_evaluate(
    f: Formula,
    s: TraceLike,
    domain: TruthDomain,
    bound: int,
    alphabet: AlphabetLike | None = None,
) -> FfmValue:
    require_closed_guarded(f)
    s = Trace.of(s)
    alpha = session_alphabet(f, s, alphabet=alphabet) if alphabet or _has_actions(f) or s.prefix else None
    exact = True

    def det(pol: Polarity) -> bool:
        nonlocal exact
        if alpha is None:
            from .semantics import evaluate

            # no modality: the formula is constant
            return evaluate(f, Trace()) == (pol is Polarity.POSITIVE)
        res = determines(f, s, pol, bound, alpha)
        if res.status is Status.UNKNOWN:
            exact = False
        return res.plausible

    if domain is TruthDomain.FF_UNKNOWN:
        return FfmValue("ff" if det(Polarity.NEGATIVE) else "?", exact)
    if domain is TruthDomain.TT_UNKNOWN:
        return FfmValue("tt" if det(Polarity.POSITIVE) else "?", exact)
    member = evaluate_many(f, [s], alpha)[0] if alpha else det(Polarity.POSITIVE)
    if member and det(Polarity.POSITIVE):
        return FfmValue("tt", exact)
    if not member and det(Polarity.NEGATIVE):
        return FfmValue("ff", exact)
    return FfmValue("?", exact)


@dataclass(frozen=True)
class FfmResult:
    monitorable: bool
    pair: tuple[Trace, Trace] | None  # (inside, outside) with equal values
    exact: bool
    depth: int
    bound: int

    def as_dict(self) -> dict:
        return {
            "monitorable": self.monitorable,
            "pair": None if self.pair is None else [str(t) for t in self.pair],
            "exact": self.exact,
            "depth": self.depth,
            "bound": self.bound,
        }


def ffm_monitorable(
    f: Formula,
    domain: TruthDomain,
    depth: int,
    bound: int,
    alphabet: AlphabetLike | None = None,
) -> FfmResult:
    """Every finite ``s`` in the property and ``s'`` outside it, both of
    length at most ``depth``, must evaluate differently; the first
    violating pair in length-lex order is returned."""
    require_closed_guarded(f)
    alpha = session_alphabet(f, alphabet=alphabet)
    traces = list(finite_traces(alpha, depth))
    member = evaluate_many(f, traces, alpha)
    values = [ffm_evaluate(f, t, domain, bound, alpha) for t in traces]
    exact = all(v.exact for v in values)
    for i, s in enumerate(traces):
        if not member[i]:
            continue
        for j, s2 in enumerate(traces):
            if not member[j] and values[i].value == values[j].value:
                return FfmResult(False, (s, s2), exact, depth, bound)
    return FfmResult(True, None, exact, depth, bound)
