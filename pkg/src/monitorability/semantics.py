"""Exact recHML evaluation over finite and lasso traces, residuation, and
determining-prefix oracles."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import OpenFormula, UnguardedFormula
from .formula import (
    FF,
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
    action_order,
    conj,
    disj,
    free_vars,
    print_formula,
    unfold,
    validate,
)
from .traces import Trace, TraceGraph, TraceLike, extension_graph


def require_closed(f: Formula):
    free = free_vars(f)
    if free:
        raise OpenFormula(sorted(free))


def require_closed_guarded(f: Formula):
    report = validate(f)
    if not report.closed:
        raise OpenFormula(sorted(report.free))
    if not report.guarded:
        raise UnguardedFormula(sorted(report.unguarded))


# ---------------------------------------------------------------------------
# Fixpoint model checking on suffix graphs


class ModelChecker:
    """Evaluates formulas on every node of a ``TraceGraph`` at once.

    Fixpoints are computed by Knaster-Tarski iteration from the empty set
    (least) or the full set (greatest); results for closed subformulas are
    cached per graph.
    """

    def __init__(self, graph: TraceGraph):
        self.graph = graph
        self.act, self.nxt = graph.arrays()
        self.n = len(self.act)
        self._cache: dict[Formula, np.ndarray] = {}

    def vector(self, f: Formula, env: dict[str, np.ndarray] | None = None) -> np.ndarray:
        env = env or {}
        closed = not free_vars(f)
        if closed:
            hit = self._cache.get(f)
            if hit is not None:
                return hit
        out = self._compute(f, env)
        if closed:
            out.setflags(write=False)
            self._cache[f] = out
        return out

    def _action(self, a: str) -> int:
        return self.graph.action_index.get(a, -2)

    def _compute(self, f: Formula, env) -> np.ndarray:
        if isinstance(f, Truth):
            return np.ones(self.n, dtype=bool)
        if isinstance(f, Falsehood):
            return np.zeros(self.n, dtype=bool)
        if isinstance(f, VarRef):
            return env[f.name]
        if isinstance(f, And):
            return self.vector(f.left, env) & self.vector(f.right, env)
        if isinstance(f, Or):
            return self.vector(f.left, env) | self.vector(f.right, env)
        if isinstance(f, Diamond):
            return (self.act == self._action(f.action)) & self.vector(f.body, env)[self.nxt]
        if isinstance(f, Box):
            return (self.act != self._action(f.action)) | self.vector(f.body, env)[self.nxt]
        if isinstance(f, (LeastFix, GreatestFix)):
            cur = np.full(self.n, isinstance(f, GreatestFix), dtype=bool)
            while True:
                new = self.vector(f.body, {**env, f.var: cur})
                if np.array_equal(new, cur):
                    return cur
                cur = new
        raise TypeError(f"not a formula: {f!r}")

    def holds(self, f: Formula) -> np.ndarray:
        """Truth value at every root, in insertion order."""
        require_closed(f)
        return self.vector(f)[np.array(self.graph.roots, dtype=np.int64)]


def evaluate(f: Formula, t: TraceLike) -> bool:
    """Whether the trace satisfies the closed formula."""
    require_closed(f)
    g = TraceGraph(None, [t])
    return bool(ModelChecker(g).vector(f)[g.roots[0]])


def evaluate_many(f: Formula, traces: Iterable[TraceLike], alphabet: AlphabetLike | None = None) -> list[bool]:
    require_closed(f)
    g = TraceGraph(alphabet, traces)
    return [bool(x) for x in ModelChecker(g).holds(f)]


# ---------------------------------------------------------------------------
# Residuation
#
# A residual is kept in disjunctive normal form over closed modal formulas:
# a frozenset of clauses, each a frozenset of Diamond/Box atoms.  The empty
# DNF is false, a DNF containing the empty clause is true.  Every trace has
# at most one first action, so a clause holding diamonds for two different
# actions is dropped.

Clause = frozenset
Dnf = frozenset

TRUE_DNF: Dnf = frozenset({frozenset()})
FALSE_DNF: Dnf = frozenset()


def _consistent(clause: Clause) -> bool:
    firsts = {atom.action for atom in clause if isinstance(atom, Diamond)}
    return len(firsts) <= 1


def _absorb(clauses: Iterable[Clause]) -> Dnf:
    cs = sorted(set(clauses), key=len)
    kept: list[Clause] = []
    for c in cs:
        if not any(k <= c for k in kept):
            kept.append(c)
    return frozenset(kept)


def dnf_or(a: Dnf, b: Dnf) -> Dnf:
    return _absorb(a | b)


def dnf_and(a: Dnf, b: Dnf) -> Dnf:
    out = []
    for x in a:
        for y in b:
            c = x | y
            if _consistent(c):
                out.append(c)
    return _absorb(out)


@lru_cache(maxsize=None)
def expand(f: Formula) -> Dnf:
    """DNF of a closed guarded formula, unfolding fixpoints until every
    atom is a modal formula."""
    if isinstance(f, Truth):
        return TRUE_DNF
    if isinstance(f, Falsehood):
        return FALSE_DNF
    if isinstance(f, (Diamond, Box)):
        return frozenset({frozenset({f})})
    if isinstance(f, Or):
        return dnf_or(expand(f.left), expand(f.right))
    if isinstance(f, And):
        return dnf_and(expand(f.left), expand(f.right))
    if isinstance(f, (LeastFix, GreatestFix)):
        return expand(unfold(f))
    raise OpenFormula([f.name]) if isinstance(f, VarRef) else TypeError(repr(f))


@lru_cache(maxsize=None)
def _atom_derivative(atom: Formula, a: str) -> Dnf:
    if atom.action == a:
        return expand(atom.body)
    return FALSE_DNF if isinstance(atom, Diamond) else TRUE_DNF


@lru_cache(maxsize=None)
def derivative(r: Dnf, a: str) -> Dnf:
    """Residual of ``r`` after the single action ``a``."""
    out = FALSE_DNF
    for clause in r:
        acc = TRUE_DNF
        for atom in clause:
            acc = dnf_and(acc, _atom_derivative(atom, a))
            if not acc:
                break
        out = dnf_or(out, acc)
        if TRUE_DNF <= out:
            return TRUE_DNF
    return out


def residual(f: Formula | Dnf, s: Sequence[str] | Trace = ()) -> Dnf:
    """DNF ``r`` with ``s.t`` satisfying ``f`` iff ``t`` satisfies ``r``."""
    r = f if isinstance(f, frozenset) else expand(f)
    actions = s.prefix if isinstance(s, Trace) else tuple(s)
    for a in actions:
        r = derivative(r, a)
    return r


def _atom_key(f: Formula) -> str:
    return print_formula(f)


def dnf_to_formula(r: Dnf) -> Formula:
    clauses = sorted(r, key=lambda c: (len(c), sorted(map(_atom_key, c))))
    return disj(*(conj(*sorted(c, key=_atom_key)) for c in clauses)) if clauses else FF


def dnf_vector(checker: ModelChecker, r: Dnf) -> np.ndarray:
    out = np.zeros(checker.n, dtype=bool)
    for clause in r:
        acc = np.ones(checker.n, dtype=bool)
        for atom in clause:
            acc &= checker.vector(atom)
        out |= acc
    return out


# ---------------------------------------------------------------------------
# Determination


class Polarity(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"

    @property
    def opposite(self) -> "Polarity":
        return Polarity.NEGATIVE if self is Polarity.POSITIVE else Polarity.POSITIVE


class Status(enum.Enum):
    DETERMINED = "Determined"
    NOT_DETERMINED = "NotDetermined"
    UNKNOWN = "UnknownUpToBound"


class Path(enum.Enum):
    FRAGMENT = "fragment"  # synthesized SHML/CHML monitor
    RESIDUAL = "residual"  # residual is syntactically tt or ff
    BOUNDED = "bounded"  # bounded search over extensions


@dataclass(frozen=True)
class DeterminationResult:
    status: Status
    path: Path
    bound: int
    counterexample: Trace | None = None

    @property
    def exact(self) -> bool:
        return self.path is not Path.BOUNDED

    @property
    def determined(self) -> bool:
        return self.status is Status.DETERMINED

    @property
    def refuted(self) -> bool:
        return self.status is Status.NOT_DETERMINED

    @property
    def plausible(self) -> bool:
        """Determined, or not refuted within the bound."""
        return self.status is not Status.NOT_DETERMINED

    def __str__(self) -> str:
        if self.status is Status.NOT_DETERMINED:
            return f"NotDetermined({self.counterexample})"
        if self.status is Status.UNKNOWN:
            return f"UnknownUpToBound({self.bound})"
        return "Determined"


def session_alphabet(f: Formula, *traces: TraceLike, alphabet: AlphabetLike | None = None) -> Alphabet:
    if alphabet is not None:
        return Alphabet.of(alphabet)
    seen = dict.fromkeys(action_order(f))
    for t in traces:
        tt = Trace.of(t)
        for a in tt.prefix + (tt.loop or ()):
            seen.setdefault(a)
    if not seen:
        raise ValueError("cannot infer an alphabet from a formula without modalities; pass one")
    return Alphabet(tuple(seen))


def _fragment_determines(f: Formula, s: Trace, polarity: Polarity, alphabet: Alphabet, bound: int):
    from .fragments import in_chml, in_shml
    from .synthesis import verdict_dfa

    shml, chml = in_shml(f), in_chml(f)
    if not (shml or chml):
        return None
    direct = Polarity.NEGATIVE if shml else Polarity.POSITIVE
    if polarity is direct:
        # violation of a SHML formula (satisfaction of a CHML one) by a
        # finite trace is inherited by all its extensions, so s decides it
        # alone; the monitor may only report it one action later when the
        # verdict sits under a rec or a sum
        if evaluate(f, s) == (polarity is Polarity.POSITIVE):
            return DeterminationResult(Status.DETERMINED, Path.FRAGMENT, bound)
        return DeterminationResult(Status.NOT_DETERMINED, Path.FRAGMENT, bound, s)
    # the other polarity holds iff the monitor can never reach its verdict
    bad = "no" if shml else "yes"
    dfa = verdict_dfa(f, alphabet)
    w = dfa.shortest_path_to(dfa.run(s.prefix), bad)
    if w is None:
        return DeterminationResult(Status.DETERMINED, Path.FRAGMENT, bound)
    return DeterminationResult(Status.NOT_DETERMINED, Path.FRAGMENT, bound, Trace(s.prefix + w))


def determines(
    f: Formula,
    s: TraceLike,
    polarity: Polarity,
    bound: int = 6,
    alphabet: AlphabetLike | None = None,
    exact_paths: bool = True,
) -> DeterminationResult:
    """Whether every extension of the finite trace ``s`` satisfies
    (positive) or violates (negative) ``f``.

    SHML and CHML formulas are decided exactly through their synthesized
    monitors, as are residuals that collapse to tt or ff.  Otherwise every
    ``s.e`` with ``e`` from ``extensions(alphabet, bound)`` is checked and
    the first refuting one is returned.
    """
    require_closed_guarded(f)
    s = Trace.of(s)
    if not s.is_finite:
        raise ValueError("determining prefixes are finite traces")
    alpha = session_alphabet(f, s, alphabet=alphabet)
    if exact_paths:
        res = _fragment_determines(f, s, polarity, alpha, bound)
        if res is not None:
            return res
    r = residual(f, s)
    if exact_paths and r in (TRUE_DNF, FALSE_DNF):
        if (r == TRUE_DNF) == (polarity is Polarity.POSITIVE):
            return DeterminationResult(Status.DETERMINED, Path.RESIDUAL, bound)
        return DeterminationResult(Status.NOT_DETERMINED, Path.RESIDUAL, bound, s)
    graph = extension_graph(alpha, bound)
    checker = _checker(graph)
    values = dnf_vector(checker, r)[np.array(graph.roots, dtype=np.int64)]
    bad = ~values if polarity is Polarity.POSITIVE else values
    hits = np.flatnonzero(bad)
    if hits.size:
        return DeterminationResult(
            Status.NOT_DETERMINED, Path.BOUNDED, bound, s.concat(graph.traces[int(hits[0])])
        )
    return DeterminationResult(Status.UNKNOWN, Path.BOUNDED, bound)


@lru_cache(maxsize=16)
def _checker(graph: TraceGraph) -> ModelChecker:
    return ModelChecker(graph)


@dataclass(frozen=True)
class DeterminingSets:
    positives: tuple[Trace, ...]
    negatives: tuple[Trace, ...]
    length: int
    bound: int
    exact: bool  # every answer came from an exact path


def d_sets_upto(
    f: Formula,
    n: int,
    alphabet: AlphabetLike | None = None,
    oracle_bound: int | None = None,
) -> DeterminingSets:
    """Prefix-minimal positively and negatively determining finite traces
    of length at most ``n``.

    A candidate counts as determining when ``determines`` does not refute
    it within ``oracle_bound`` (default ``2n``); ``exact`` tells whether
    every membership answer was exact.
    """
    require_closed_guarded(f)
    alpha = session_alphabet(f, alphabet=alphabet)
    k = 2 * n if oracle_bound is None else oracle_bound
    pos: list[Trace] = []
    neg: list[Trace] = []
    exact = True
    frontier: list[tuple[str, ...]] = [()]
    for length in range(n + 1):
        nxt: list[tuple[str, ...]] = []
        for w in frontier:
            t = Trace(w)
            hit = False
            for pol, out in ((Polarity.POSITIVE, pos), (Polarity.NEGATIVE, neg)):
                res = determines(f, t, pol, k, alpha)
                if res.status is Status.UNKNOWN:
                    exact = False
                if res.plausible:
                    out.append(t)
                    hit = True
            if not hit and length < n:
                nxt.extend(w + (a,) for a in alpha)
        frontier = nxt
    return DeterminingSets(tuple(pos), tuple(neg), n, k, exact)
