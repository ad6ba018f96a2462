"""Monitor terms, their labelled-transition semantics and trace execution."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator

from ._node import Node
from .errors import OpenFormula, ParseError, StateExplosion, UnboundVariable, UnguardedFormula
from .formula import Alphabet, AlphabetLike, Formula, TokenStream, _check_action
from .traces import Trace, TraceLike, bounded_universe

DEFAULT_STATE_CAP = 100_000


class Monitor(Node):
    def __str__(self) -> str:
        return print_monitor(self)

    def __repr__(self) -> str:
        return f"{type(self).__name__}<{print_monitor(self)}>"


@dataclass(frozen=True, eq=False, repr=False)
class Yes(Monitor):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class No(Monitor):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class End(Monitor):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class Act(Monitor):
    action: str
    body: Monitor


@dataclass(frozen=True, eq=False, repr=False)
class Choice(Monitor):
    left: Monitor
    right: Monitor


@dataclass(frozen=True, eq=False, repr=False)
class ParAnd(Monitor):
    left: Monitor
    right: Monitor


@dataclass(frozen=True, eq=False, repr=False)
class ParOr(Monitor):
    left: Monitor
    right: Monitor


@dataclass(frozen=True, eq=False, repr=False)
class Rec(Monitor):
    var: str
    body: Monitor


@dataclass(frozen=True, eq=False, repr=False)
class MVar(Monitor):
    name: str


YES, NO, END = Yes(), No(), End()
VERDICTS = (Yes, No, End)
_BINARY = (Choice, ParAnd, ParOr)


def choice(*parts: Monitor) -> Monitor:
    """Left-nested sum of the given summands."""
    if not parts:
        raise ValueError("a sum needs at least one summand")
    out = parts[0]
    for p in parts[1:]:
        out = Choice(out, p)
    return out


def mchildren(m: Monitor) -> tuple[Monitor, ...]:
    if isinstance(m, _BINARY):
        return (m.left, m.right)
    if isinstance(m, (Act, Rec)):
        return (m.body,)
    return ()


def subterms(m: Monitor) -> Iterator[Monitor]:
    stack = [m]
    while stack:
        t = stack.pop()
        yield t
        stack.extend(reversed(mchildren(t)))


@lru_cache(maxsize=None)
def mfree_vars(m: Monitor) -> frozenset[str]:
    if isinstance(m, MVar):
        return frozenset({m.name})
    if isinstance(m, Rec):
        return mfree_vars(m.body) - {m.var}
    out = frozenset()
    for c in mchildren(m):
        out |= mfree_vars(c)
    return out


def is_regular(m: Monitor) -> bool:
    """No parallel operator occurs."""
    return not any(isinstance(t, (ParAnd, ParOr)) for t in subterms(m))


def monitor_actions(m: Monitor) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for t in subterms(m):
        if isinstance(t, Act):
            seen.setdefault(t.action)
    return tuple(seen)


def unguarded_vars(m: Monitor) -> frozenset[str]:
    out: set[str] = set()

    def walk(t: Monitor, scope: dict[str, bool]):
        if isinstance(t, MVar):
            if scope.get(t.name) is False:
                out.add(t.name)
        elif isinstance(t, Rec):
            walk(t.body, {**scope, t.var: False})
        elif isinstance(t, Act):
            walk(t.body, {k: True for k in scope})
        else:
            for c in mchildren(t):
                walk(c, scope)

    walk(m, {})
    return frozenset(out)


def require_runnable(m: Monitor):
    free = mfree_vars(m)
    if free:
        raise OpenFormula(sorted(free))
    bad = unguarded_vars(m)
    if bad:
        raise UnguardedFormula(sorted(bad))


def msubstitute(m: Monitor, var: str, replacement: Monitor) -> Monitor:
    """``m[replacement/var]`` for a closed ``replacement``."""

    def go(t: Monitor) -> Monitor:
        if var not in mfree_vars(t):
            return t
        if isinstance(t, MVar):
            return replacement
        if isinstance(t, Rec):
            return Rec(t.var, go(t.body))
        if isinstance(t, Act):
            return Act(t.action, go(t.body))
        return type(t)(go(t.left), go(t.right))

    return go(m)


def munfold(m: Rec) -> Monitor:
    return msubstitute(m.body, m.var, m)


# ---------------------------------------------------------------------------
# Text format
#
#   par    := pand ("|" pand)*
#   pand   := sum ("&" sum)*
#   sum    := prefix ("+" prefix)*
#   prefix := a "." prefix | yes | no | end | rec X "." par | X | "(" par ")"


def parse_monitor(text: str, alphabet: AlphabetLike | None = None) -> Monitor:
    alpha = Alphabet.of(alphabet) if alphabet is not None else None
    ts = TokenStream(text)

    def par(scope):
        m = pand(scope)
        while ts.accept("|"):
            m = ParOr(m, pand(scope))
        return m

    def pand(scope):
        m = sum_(scope)
        while ts.accept("&"):
            m = ParAnd(m, sum_(scope))
        return m

    def sum_(scope):
        m = prefix(scope)
        while ts.accept("+"):
            m = Choice(m, prefix(scope))
        return m

    def prefix(scope):
        tok = ts.peek
        if tok.kind == "word":
            if tok.text in ("yes", "no", "end"):
                ts.next()
                return {"yes": YES, "no": NO, "end": END}[tok.text]
            if tok.text == "rec":
                ts.next()
                vt = ts.next()
                if vt.kind != "var":
                    raise ParseError("expected a recursion variable", vt.pos, text)
                ts.expect(".")
                return Rec(vt.text, par(scope | {vt.text}))
            a = _check_action(ts.next(), alpha, ts)
            ts.expect(".")
            return Act(a, prefix(scope))
        if tok.kind == "var":
            ts.next()
            if tok.text not in scope:
                raise UnboundVariable(tok.text)
            return MVar(tok.text)
        if ts.accept("("):
            m = par(scope)
            ts.expect(")")
            return m
        ts.fail("expected a monitor")

    m = par(frozenset())
    ts.end()
    return m


_POR, _PAND, _SUM, _PREFIX = 0, 1, 2, 3


@lru_cache(maxsize=None)
def print_monitor(m: Monitor) -> str:
    return _mfmt(m, _POR, True)


def _mfmt(m: Monitor, prec: int, tail: bool) -> str:
    if isinstance(m, Yes):
        return "yes"
    if isinstance(m, No):
        return "no"
    if isinstance(m, End):
        return "end"
    if isinstance(m, MVar):
        return m.name
    if isinstance(m, Act):
        return f"{m.action}." + _mfmt(m.body, _PREFIX, tail)
    if isinstance(m, Rec):
        body = _mfmt(m.body, _POR, True)
        if isinstance(m.body, _BINARY):
            body = f"({body})"
        s = f"rec {m.var}.{body}"
        return s if tail else f"({s})"
    if isinstance(m, Choice):
        s = _mfmt(m.left, _SUM, False) + " + " + _mfmt(m.right, _PREFIX, tail)
        return s if prec <= _SUM else f"({s})"
    op, level = ("&", _PAND) if isinstance(m, ParAnd) else ("|", _POR)

    def operand(t: Monitor, p: int, last: bool) -> str:
        # sums are bracketed inside parallel compositions for readability
        if isinstance(t, Choice):
            return f"({_mfmt(t, _POR, True)})"
        return _mfmt(t, p, last)

    s = operand(m.left, level, False) + f" {op} " + operand(m.right, level + 1, tail)
    return s if prec <= level else f"({s})"


# ---------------------------------------------------------------------------
# Canonical terms
#
# Sums and parallel compositions are flattened, their operands sorted by
# printed form and duplicates dropped.  For + this is exact as long as a
# sum stays a sum.  For & and | it
# keeps the set of reachable verdicts: a copy of an operand can always follow
# the same derivation as its twin.


def _flatten(m: Monitor, kind) -> list[Monitor]:
    out: list[Monitor] = []
    stack = [m]
    while stack:
        t = stack.pop()
        if isinstance(t, kind):
            stack.append(t.right)
            stack.append(t.left)
        else:
            out.append(t)
    return out


def _rebuild(kind, parts: Iterable[Monitor]) -> Monitor:
    uniq = sorted(set(parts), key=print_monitor)
    if kind is Choice and len(uniq) == 1:
        # m + m takes no silent step of its own, unlike m
        uniq = uniq * 2
    out = uniq[0]
    for p in uniq[1:]:
        out = kind(out, p)
    return out


@lru_cache(maxsize=None)
def canonical(m: Monitor) -> Monitor:
    if isinstance(m, _BINARY):
        kind = type(m)
        return _rebuild(kind, (canonical(p) for p in _flatten(m, kind)))
    if isinstance(m, Act):
        return Act(m.action, canonical(m.body))
    if isinstance(m, Rec):
        return Rec(m.var, canonical(m.body))
    return m


# ---------------------------------------------------------------------------
# Transition semantics


def _par_tau(m: Monitor) -> list[Monitor]:
    """Single tau steps of a parallel composition, all rules including the
    symmetric variants."""
    l, r = m.left, m.right
    out: list[Monitor] = []
    if isinstance(m, ParAnd):
        if isinstance(l, Yes):
            out.append(r)
        if isinstance(r, Yes):
            out.append(l)
        if isinstance(l, No) or isinstance(r, No):
            out.append(NO)
    else:
        if isinstance(l, No):
            out.append(r)
        if isinstance(r, No):
            out.append(l)
        if isinstance(l, Yes) or isinstance(r, Yes):
            out.append(YES)
    if isinstance(l, End) and isinstance(r, End):
        out.append(END)
    kind = type(m)
    out.extend(kind(l2, r) for l2 in tau_steps(l))
    out.extend(kind(l, r2) for r2 in tau_steps(r))
    return out


def tau_steps(m: Monitor) -> list[Monitor]:
    if isinstance(m, (ParAnd, ParOr)):
        return _par_tau(m)
    return []


def action_steps(m: Monitor, a: str) -> list[Monitor]:
    """Strong ``a``-derivatives of a closed term."""
    if isinstance(m, VERDICTS):
        return [m]
    if isinstance(m, Act):
        return [m.body] if m.action == a else []
    if isinstance(m, Choice):
        return action_steps(m.left, a) + action_steps(m.right, a)
    if isinstance(m, (ParAnd, ParOr)):
        rights = action_steps(m.right, a)
        return [type(m)(l2, r2) for l2 in action_steps(m.left, a) for r2 in rights]
    if isinstance(m, Rec):
        return action_steps(munfold(m), a)
    if isinstance(m, MVar):
        raise OpenFormula([m.name])
    raise TypeError(f"not a monitor: {m!r}")


class Simulator:
    """Memoized weak-transition semantics over canonical terms."""

    def __init__(self, state_cap: int = DEFAULT_STATE_CAP):
        self.state_cap = state_cap
        self._closure: dict[Monitor, frozenset[Monitor]] = {}
        self._step: dict[tuple[Monitor, str], frozenset[Monitor]] = {}
        self._terms: set[Monitor] = set()

    def _register(self, m: Monitor):
        if m not in self._terms:
            self._terms.add(m)
            if len(self._terms) > self.state_cap:
                raise StateExplosion(self.state_cap)

    @property
    def universe_size(self) -> int:
        return len(self._terms)

    def closure(self, m: Monitor) -> frozenset[Monitor]:
        """Tau-normal forms reachable from ``m`` (``m`` itself if it has no
        tau step).  Intermediate terms are dropped: every verdict they reach
        weakly is reached from one of their normal forms."""
        hit = self._closure.get(m)
        if hit is not None:
            return hit
        seen = {m}
        todo = [m]
        normal = set()
        self._register(m)
        while todo:
            t = todo.pop()
            succ = tau_steps(t)
            if not succ:
                normal.add(t)
            for u in succ:
                u = canonical(u)
                if u not in seen:
                    self._register(u)
                    seen.add(u)
                    todo.append(u)
        out = frozenset(normal)
        self._closure[m] = out
        return out

    def initial(self, m: Monitor) -> frozenset[Monitor]:
        require_runnable(m)
        return self.closure(canonical(m))

    def step_term(self, m: Monitor, a: str) -> frozenset[Monitor]:
        key = (m, a)
        hit = self._step.get(key)
        if hit is not None:
            return hit
        out: set[Monitor] = set()
        for u in action_steps(m, a):
            out |= self.closure(canonical(u))
        res = frozenset(out)
        self._step[key] = res
        return res

    def step(self, states: Iterable[Monitor], a: str) -> frozenset[Monitor]:
        """Weak ``a``-successors of a tau-closed set of states."""
        out: set[Monitor] = set()
        for m in states:
            out |= self.step_term(m, a)
        return frozenset(out)


def step(ms: Iterable[Monitor], a: str, simulator: Simulator | None = None) -> frozenset[Monitor]:
    """Tau-close ``ms``, take every ``a`` step, tau-close again."""
    sim = simulator or Simulator()
    closed: set[Monitor] = set()
    for m in ms:
        closed |= sim.initial(m)
    return sim.step(closed, a)


# ---------------------------------------------------------------------------
# Runs


class Verdict(enum.Enum):
    ACCEPTED = "ACCEPTED"
    REJECTED = "REJECTED"
    NO_VERDICT = "NO-VERDICT"


@dataclass(frozen=True)
class RunOutcome:
    status: Verdict
    prefix_length: int | None = None
    conflicting: bool = False

    @property
    def accepted(self) -> bool:
        return self.status is Verdict.ACCEPTED

    @property
    def rejected(self) -> bool:
        return self.status is Verdict.REJECTED

    def __str__(self) -> str:
        if self.status is Verdict.NO_VERDICT:
            return "NO-VERDICT"
        return f"{self.status.value} at {self.prefix_length}"


def _outcome(first_yes: int | None, first_no: int | None) -> RunOutcome:
    conflicting = first_yes is not None and first_no is not None
    if first_no is not None and (first_yes is None or first_no <= first_yes):
        return RunOutcome(Verdict.REJECTED, first_no, conflicting)
    if first_yes is not None:
        return RunOutcome(Verdict.ACCEPTED, first_yes, conflicting)
    return RunOutcome(Verdict.NO_VERDICT)


@dataclass
class Run:
    """Incremental execution of one monitor over a stream of actions."""

    monitor: Monitor
    simulator: Simulator = field(default_factory=Simulator)

    def __post_init__(self):
        self.states = self.simulator.initial(self.monitor)
        self.position = 0
        self.first_yes: int | None = None
        self.first_no: int | None = None
        self._note()

    def _note(self):
        if self.first_yes is None and YES in self.states:
            self.first_yes = self.position
        if self.first_no is None and NO in self.states:
            self.first_no = self.position

    def feed(self, a: str) -> RunOutcome:
        self.states = self.simulator.step(self.states, a)
        self.position += 1
        self._note()
        return self.outcome

    @property
    def outcome(self) -> RunOutcome:
        return _outcome(self.first_yes, self.first_no)


def run_finite(m: Monitor, s: TraceLike, simulator: Simulator | None = None) -> RunOutcome:
    """Run over a whole finite trace; the earliest verdict wins and a run
    reaching both is flagged as conflicting (a tie reports rejection)."""
    s = Trace.of(s)
    if not s.is_finite:
        raise ValueError("run_finite needs a finite trace; use decide_lasso")
    run = Run(m, simulator or Simulator())
    for a in s.prefix:
        run.feed(a)
        if run.first_yes is not None and run.first_no is not None:
            break
    return run.outcome


def decide_lasso(m: Monitor, t: TraceLike, simulator: Simulator | None = None) -> RunOutcome:
    """Exact outcome on ``u(v)^w``: run through ``u``, then around the loop
    until a (loop offset, state set) pair repeats."""
    t = Trace.of(t)
    if t.is_finite:
        raise ValueError("decide_lasso needs a lasso trace")
    run = Run(m, simulator or Simulator())
    for a in t.prefix:
        run.feed(a)
    seen: set[tuple[int, frozenset]] = set()
    offset = 0
    while (offset, run.states) not in seen:
        if run.first_yes is not None and run.first_no is not None:
            break
        seen.add((offset, run.states))
        run.feed(t.loop[offset])
        offset = (offset + 1) % len(t.loop)
    return run.outcome


def run_trace(m: Monitor, t: TraceLike, simulator: Simulator | None = None) -> RunOutcome:
    t = Trace.of(t)
    return run_finite(m, t, simulator) if t.is_finite else decide_lasso(m, t, simulator)


# ---------------------------------------------------------------------------
# Bounded soundness check


@dataclass(frozen=True)
class SoundnessViolation:
    trace: Trace
    outcome: RunOutcome
    satisfied: bool


@dataclass(frozen=True)
class SoundnessReport:
    checked: int
    violations: tuple[SoundnessViolation, ...]

    @property
    def sound(self) -> bool:
        return not self.violations


def check_soundness_upto(
    m: Monitor,
    f: Formula,
    max_len: int,
    max_lasso: int,
    alphabet: AlphabetLike | None = None,
    simulator: Simulator | None = None,
) -> SoundnessReport:
    """Accepted traces must satisfy ``f`` and rejected ones violate it, over
    all finite traces up to ``max_len`` and lassos up to ``max_lasso``."""
    from .formula import action_order
    from .semantics import ModelChecker
    from .traces import TraceGraph

    if alphabet is not None:
        acts = Alphabet.of(alphabet).actions
    else:
        acts = tuple(dict.fromkeys(action_order(f) + monitor_actions(m)))
    traces = list(bounded_universe(acts, max_len, max_lasso)) if acts else [Trace()]
    truth = ModelChecker(TraceGraph(None, traces)).holds(f)
    sim = simulator or Simulator()
    bad = []
    for t, sat in zip(traces, truth):
        out = run_trace(m, t, sim)
        if (out.accepted and not sat) or (out.rejected and sat) or (out.conflicting):
            bad.append(SoundnessViolation(t, out, bool(sat)))
    return SoundnessReport(len(traces), tuple(bad))
