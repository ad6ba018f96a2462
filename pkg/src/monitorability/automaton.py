"""Finite-state views of monitors: exploration, subset construction,
regular-monitor extraction, verdict equivalence and informativeness."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .errors import ConflictingVerdicts
from .formula import AlphabetLike, Alphabet
from .monitor import (
    END,
    NO,
    YES,
    Act,
    Choice,
    End,
    Monitor,
    MVar,
    No,
    Rec,
    Simulator,
    Yes,
    choice,
    is_regular,
    monitor_actions,
    print_monitor,
)


def _actions(alphabet: AlphabetLike | None, *monitors: Monitor) -> tuple[str, ...]:
    if alphabet:
        return tuple(Alphabet.of(alphabet).actions)
    seen: dict[str, None] = {}
    for m in monitors:
        for a in monitor_actions(m):
            seen.setdefault(a)
    return tuple(seen)


def _verdict_of(m: Monitor) -> str | None:
    if isinstance(m, Yes):
        return "yes"
    if isinstance(m, No):
        return "no"
    return None


@dataclass
class NFA:
    """Nondeterministic automaton whose states are individual monitor terms.

    ``initial`` is the tau-closure of the monitor, a set of states; each
    ``delta[(q, a)]`` is the set of weak ``a``-successors of ``q``.
    """

    actions: tuple[str, ...]
    terms: list[Monitor]
    initial: frozenset[int]
    delta: dict[tuple[int, str], frozenset[int]]
    verdict: dict[int, str]

    def labels(self) -> list[str]:
        return [print_monitor(t) for t in self.terms]


@dataclass
class DFA:
    """Deterministic automaton with a total transition function.

    State 0 is initial.  ``verdict`` marks the yes/no sinks; ``sink`` is the
    verdict-free completion state, if one was needed.
    """

    actions: tuple[str, ...]
    delta: list[dict[str, int]]
    verdict: dict[int, str]
    labels: list[str]
    sink: int | None = None
    initial: int = 0

    def __len__(self) -> int:
        return len(self.delta)

    def run(self, word: Sequence[str], start: int | None = None) -> int:
        q = self.initial if start is None else start
        for a in word:
            q = self.delta[q][a]
        return q

    def shortest_path_to(self, start: int, verdict: str) -> tuple[str, ...] | None:
        """Shortest word leading from ``start`` to a ``verdict`` state."""
        prev: dict[int, tuple[int, str] | None] = {start: None}
        queue = deque([start])
        while queue:
            q = queue.popleft()
            if self.verdict.get(q) == verdict:
                word = []
                while prev[q] is not None:
                    q, a = prev[q]
                    word.append(a)
                return tuple(reversed(word))
            for a in self.actions:
                r = self.delta[q][a]
                if r not in prev:
                    prev[r] = (q, a)
                    queue.append(r)
        return None

    def reachable(self, start: int | None = None) -> set[int]:
        seen = {self.initial if start is None else start}
        todo = list(seen)
        while todo:
            q = todo.pop()
            for r in self.delta[q].values():
                if r not in seen:
                    seen.add(r)
                    todo.append(r)
        return seen

    def coreachable(self, verdicts: Sequence[str]) -> set[int]:
        """States from which a state with one of ``verdicts`` is reachable."""
        back: dict[int, set[int]] = {q: set() for q in range(len(self))}
        for q, row in enumerate(self.delta):
            for r in row.values():
                back[r].add(q)
        seen = {q for q, v in self.verdict.items() if v in verdicts}
        todo = list(seen)
        while todo:
            q = todo.pop()
            for p in back[q]:
                if p not in seen:
                    seen.add(p)
                    todo.append(p)
        return seen


# ---------------------------------------------------------------------------
# Exploration


def to_automaton(
    m: Monitor, alphabet: AlphabetLike | None = None, simulator: Simulator | None = None
) -> NFA:
    sim = simulator or Simulator()
    actions = _actions(alphabet, m)
    index: dict[Monitor, int] = {}
    terms: list[Monitor] = []

    def idx(t: Monitor) -> int:
        if t not in index:
            index[t] = len(terms)
            terms.append(t)
            todo.append(t)
        return index[t]

    todo: list[Monitor] = []
    init = frozenset(idx(t) for t in sorted(sim.initial(m), key=print_monitor))
    delta: dict[tuple[int, str], frozenset[int]] = {}
    while todo:
        t = todo.pop(0)
        q = index[t]
        for a in actions:
            succ = sorted(sim.step_term(t, a), key=print_monitor)
            delta[(q, a)] = frozenset(idx(u) for u in succ)
    verdict = {i: v for i, t in enumerate(terms) if (v := _verdict_of(t))}
    return NFA(actions, terms, init, delta, verdict)


def _subset_label(nfa: NFA, subset: frozenset[int]) -> str:
    if not subset:
        return "{}"
    return "{" + ", ".join(sorted(print_monitor(nfa.terms[i]) for i in subset)) + "}"


def _explore_subsets(nfa: NFA):
    """Reachable state sets in BFS order with access words and edges."""
    order = [nfa.initial]
    access = {nfa.initial: ()}
    edges: dict[frozenset, dict[str, frozenset]] = {}
    queue = deque([nfa.initial])
    while queue:
        S = queue.popleft()
        row = {}
        for a in nfa.actions:
            T = frozenset().union(*(nfa.delta[(q, a)] for q in S)) if S else frozenset()
            row[a] = T
            if T not in access:
                access[T] = access[S] + (a,)
                order.append(T)
                queue.append(T)
        edges[S] = row
    return order, access, edges


def determinize(nfa: NFA, keep: Sequence[str] = ("yes", "no")) -> DFA:
    """Subset construction with verdict collapse.

    Sets containing a verdict in ``keep`` become that verdict's sink; a set
    holding both verdicts raises ``ConflictingVerdicts`` with its access
    word.  Passing ``keep=("no",)`` projects onto the rejection language.
    """
    order, access, edges = _explore_subsets(nfa)

    def kind(S: frozenset) -> str | None:
        vs = {nfa.verdict[q] for q in S if q in nfa.verdict and nfa.verdict[q] in keep}
        if len(vs) > 1:
            raise ConflictingVerdicts(access[S])
        return vs.pop() if vs else None

    ids: dict[object, int] = {}
    labels: list[str] = []
    verdict: dict[int, str] = {}
    sink: int | None = None

    def key(S: frozenset):
        v = kind(S)
        return ("verdict", v) if v else S

    for S in order:
        k = key(S)
        if k not in ids:
            ids[k] = len(labels)
            if isinstance(k, tuple):
                labels.append(k[1])
                verdict[ids[k]] = k[1]
            else:
                labels.append(_subset_label(nfa, S))
                if not S:
                    sink = ids[k]
    delta: list[dict[str, int]] = [dict() for _ in labels]
    for S in order:
        q = ids[key(S)]
        if q in verdict:
            delta[q] = {a: q for a in nfa.actions}
            continue
        delta[q] = {a: ids[key(edges[S][a])] for a in nfa.actions}
    return DFA(nfa.actions, delta, verdict, labels, sink)


def monitor_dfa(
    m: Monitor,
    alphabet: AlphabetLike | None = None,
    keep: Sequence[str] = ("yes", "no"),
    simulator: Simulator | None = None,
) -> DFA:
    return determinize(to_automaton(m, alphabet, simulator), keep)


# ---------------------------------------------------------------------------
# Back to monitors


def to_regular_monitor(dfa: DFA) -> Monitor:
    """Deterministic regular monitor with the same verdicts.

    Edges into states that cannot reach a verdict are omitted; a state
    with no remaining edges becomes ``end``.  Cyclic states get a binder
    ``X<state>``.
    """
    live = dfa.coreachable(("yes", "no"))

    def build(q: int, stack: list[int], used: set[int]) -> Monitor:
        v = dfa.verdict.get(q)
        if v == "yes":
            return YES
        if v == "no":
            return NO
        if q in stack:
            used.add(q)
            return MVar(f"X{q}")
        stack.append(q)
        parts = []
        for a in dfa.actions:
            r = dfa.delta[q][a]
            if r in live:
                parts.append(Act(a, build(r, stack, used)))
        stack.pop()
        body = choice(*parts) if parts else END
        if q in used:
            used.discard(q)
            return Rec(f"X{q}", body)
        return body

    if dfa.initial not in live:
        return END
    return build(dfa.initial, [], set())


def _sum_parts(m: Monitor) -> list[Monitor]:
    if isinstance(m, Choice):
        return _sum_parts(m.left) + _sum_parts(m.right)
    return [m]


def is_deterministic(m: Monitor) -> bool:
    """Regular, and every sum of two or more summands has the shape
    Σ_{a∈A} a.m_a with pairwise distinct actions."""
    if not is_regular(m):
        return False

    def check(t: Monitor) -> bool:
        if isinstance(t, Choice):
            parts = _sum_parts(t)
            if not all(isinstance(p, Act) for p in parts):
                return False
            acts = [p.action for p in parts]
            if len(set(acts)) != len(acts):
                return False
            return all(check(p.body) for p in parts)
        if isinstance(t, (Act, Rec)):
            return check(t.body)
        return True

    return check(m)


def is_explicit(m: Monitor, alphabet: AlphabetLike) -> bool:
    """Generated by ``end | no | X | Σ_{a∈Σ} a.m_a | rec X.m``."""
    acts = tuple(Alphabet.of(alphabet).actions)

    def check(t: Monitor) -> bool:
        if isinstance(t, (End, No, MVar)):
            return True
        if isinstance(t, Rec):
            return check(t.body)
        if isinstance(t, (Choice, Act)):
            parts = _sum_parts(t)
            if not all(isinstance(p, Act) for p in parts):
                return False
            if sorted(p.action for p in parts) != sorted(acts):
                return False
            return all(check(p.body) for p in parts)
        return False

    return check(m)


# ---------------------------------------------------------------------------
# Comparisons and classification


def verdict_difference(
    m1: Monitor,
    m2: Monitor,
    alphabet: AlphabetLike | None = None,
    keep: Sequence[str] = ("yes", "no"),
    simulator: Simulator | None = None,
) -> tuple[str, ...] | None:
    """Shortest word on which the two monitors' verdicts differ, or None."""
    actions = _actions(alphabet, m1, m2)
    sim = simulator or Simulator()
    d1 = determinize(to_automaton(m1, actions, sim), keep)
    d2 = determinize(to_automaton(m2, actions, sim), keep)
    start = (d1.initial, d2.initial)
    prev: dict[tuple[int, int], tuple[tuple[int, int], str] | None] = {start: None}
    queue = deque([start])
    while queue:
        p = queue.popleft()
        if d1.verdict.get(p[0]) != d2.verdict.get(p[1]):
            word = []
            while prev[p] is not None:
                p, a = prev[p]
                word.append(a)
            return tuple(reversed(word))
        for a in actions:
            q = (d1.delta[p[0]][a], d2.delta[p[1]][a])
            if q not in prev:
                prev[q] = (p, a)
                queue.append(q)
    return None


def verdict_equivalent(
    m1: Monitor, m2: Monitor, alphabet: AlphabetLike | None = None, simulator: Simulator | None = None
) -> bool:
    return verdict_difference(m1, m2, alphabet, simulator=simulator) is None


def rejection_equivalent(
    m1: Monitor, m2: Monitor, alphabet: AlphabetLike | None = None, simulator: Simulator | None = None
) -> bool:
    """Same rejected traces, ignoring acceptances."""
    return verdict_difference(m1, m2, alphabet, keep=("no",), simulator=simulator) is None


@dataclass(frozen=True)
class MonitorClass:
    informative_sat: bool
    informative_viol: bool
    persistent_sat: bool
    persistent_viol: bool
    persistent: bool  # a verdict of either kind stays reachable

    @property
    def informative(self) -> bool:
        return self.informative_sat or self.informative_viol

    def as_dict(self) -> dict[str, bool]:
        return {
            "informativeSat": self.informative_sat,
            "informativeViol": self.informative_viol,
            "persistentSat": self.persistent_sat,
            "persistentViol": self.persistent_viol,
            "persistent": self.persistent,
            "informative": self.informative,
        }


def classify_monitor(
    m: Monitor, alphabet: AlphabetLike | None = None, simulator: Simulator | None = None
) -> MonitorClass:
    """Exact flags from reachability between the monitor's reachable state
    sets; conflicting monitors are accepted."""
    nfa = to_automaton(m, alphabet, simulator)
    order, _, edges = _explore_subsets(nfa)
    has = {
        v: {S for S in order if any(nfa.verdict.get(q) == v for q in S)} for v in ("yes", "no")
    }
    back: dict[frozenset, set[frozenset]] = {S: set() for S in order}
    for S, row in edges.items():
        for T in row.values():
            back[T].add(S)

    def coreach(targets: set[frozenset]) -> set[frozenset]:
        seen = set(targets)
        todo = list(seen)
        while todo:
            T = todo.pop()
            for S in back[T]:
                if S not in seen:
                    seen.add(S)
                    todo.append(S)
        return seen

    reach = set(order)
    co_yes, co_no = coreach(has["yes"]), coreach(has["no"])
    co_any = coreach(has["yes"] | has["no"])
    return MonitorClass(
        informative_sat=bool(has["yes"]),
        informative_viol=bool(has["no"]),
        persistent_sat=reach <= co_yes,
        persistent_viol=reach <= co_no,
        persistent=reach <= co_any,
    )


def to_dot(automaton: NFA | DFA, name: str = "monitor") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;"]

    def q(s: str) -> str:
        return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'

    if isinstance(automaton, DFA):
        for i, label in enumerate(automaton.labels):
            shape = "doublecircle" if i in automaton.verdict else "circle"
            lines.append(f"  s{i} [label={q(label)}, shape={shape}];")
        lines.append("  init [shape=point];")
        lines.append(f"  init -> s{automaton.initial};")
        for i, row in enumerate(automaton.delta):
            by_target: dict[int, list[str]] = {}
            for a in automaton.actions:
                by_target.setdefault(row[a], []).append(a)
            for j, acts in by_target.items():
                lines.append(f"  s{i} -> s{j} [label={q(','.join(acts))}];")
    else:
        for i, label in enumerate(automaton.labels()):
            shape = "doublecircle" if i in automaton.verdict else "circle"
            lines.append(f"  s{i} [label={q(label)}, shape={shape}];")
        lines.append("  init [shape=point];")
        for i in sorted(automaton.initial):
            lines.append(f"  init -> s{i};")
        for (i, a), targets in sorted(automaton.delta.items()):
            for j in sorted(targets):
                lines.append(f"  s{i} -> s{j} [label={q(a)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
