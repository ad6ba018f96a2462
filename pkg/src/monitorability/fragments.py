"""Syntactic fragments, refutability, explicitation, witness extraction and
the hierarchy classification."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import NotInFragment, NotInformativeFragment
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
    children,
    conj,
    disj,
    subformulas,
    unfold,
)
from .semantics import (
    ModelChecker,
    Polarity,
    Status,
    determines,
    require_closed,
    require_closed_guarded,
    session_alphabet,
)
from .traces import Trace, extension_graph

INF = math.inf


# ---------------------------------------------------------------------------
# SHML / CHML / eHML


@lru_cache(maxsize=None)
def in_shml(f: Formula) -> bool:
    if isinstance(f, (Truth, Falsehood, VarRef)):
        return True
    if isinstance(f, (Box, And, GreatestFix)):
        return all(in_shml(c) for c in children(f))
    return False


@lru_cache(maxsize=None)
def in_chml(f: Formula) -> bool:
    if isinstance(f, (Truth, Falsehood, VarRef)):
        return True
    if isinstance(f, (Diamond, Or, LeastFix)):
        return all(in_chml(c) for c in children(f))
    return False


def _cluster(f: Formula, kind) -> list[Formula]:
    """Operands of the maximal ``kind`` (And/Or) tree rooted at ``f``."""
    if isinstance(f, kind):
        return _cluster(f.left, kind) + _cluster(f.right, kind)
    return [f]


def _full_blocks(leaves: list[Formula], modal, actions: tuple[str, ...]) -> bool:
    """The ``modal`` leaves split into blocks covering every action once."""
    counts = Counter(g.action for g in leaves if isinstance(g, modal))
    if not counts:
        return True
    if set(counts) - set(actions):
        return False
    return len({counts.get(a, 0) for a in actions}) == 1


def in_ehml(f: Formula, alphabet: AlphabetLike) -> bool:
    """Explicit fragment, read modulo associativity and commutativity of
    ∧ and ∨: in every ∧-tree the boxes form whole blocks ⋀_{a∈Σ}[a]φ_a, in
    every ∨-tree the diamonds form whole blocks ⋁_{a∈Σ}<a>φ_a."""
    actions = Alphabet.of(alphabet).actions

    def check(g: Formula, parent) -> bool:
        if isinstance(g, (And, Or)):
            if type(g) is parent:
                return check(g.left, parent) and check(g.right, parent)
            leaves = _cluster(g, type(g))
            modal, other = (Box, Diamond) if isinstance(g, And) else (Diamond, Box)
            if not _full_blocks(leaves, modal, actions):
                return False
            # an opposite modality alone is a one-summand block
            if any(isinstance(x, other) for x in leaves) and len(actions) != 1:
                return False
            return all(check(x, type(g)) for x in leaves)
        if isinstance(g, (Box, Diamond)):
            # a modality outside any ∧/∨ tree is a block on its own
            if parent is None and len(actions) != 1:
                return False
            if parent is not None and not isinstance(g, Box if parent is And else Diamond):
                if len(actions) != 1:
                    return False
            return check(g.body, None)
        if isinstance(g, (LeastFix, GreatestFix)):
            return check(g.body, None)
        return True

    return check(f, None)


@dataclass(frozen=True)
class Membership:
    shml: bool
    chml: bool
    ehml: bool


def fragment_membership(f: Formula, alphabet: AlphabetLike | None = None) -> Membership:
    require_closed(f)
    alpha = _alphabet(f, alphabet)
    return Membership(in_shml(f), in_chml(f), in_ehml(f, alpha) if alpha else True)


def _alphabet(f: Formula, alphabet: AlphabetLike | None) -> Alphabet | None:
    try:
        return session_alphabet(f, alphabet=alphabet)
    except ValueError:
        return None


# ---------------------------------------------------------------------------
# Refutability


@dataclass(frozen=True)
class Refutability:
    """Least number of unfoldings after which each position can refute
    (``mode == "refute"``) or verify; ``None`` when it never can."""

    mode: str
    levels: dict[tuple[int, ...], int | None]

    def label(self, path: tuple[int, ...]) -> str:
        k = self.levels[path]
        if k is None:
            return "neither"
        return f"canRefute({k})" if self.mode == "refute" else f"canVerify({k})"

    @property
    def everywhere(self) -> bool:
        return all(k is not None for k in self.levels.values())


def annotate_refutability(
    f: Formula, mode: str | None = None, cutoff: int | None = None
) -> Refutability:
    """Position-wise least ``k`` such that the subformula can refute (SHML)
    or verify (CHML) in ``k`` unfoldings; with ``cutoff`` only ``k <= cutoff``
    is explored."""
    require_closed(f)
    if mode is None:
        if in_shml(f):
            mode = "refute"
        elif in_chml(f):
            mode = "verify"
        else:
            raise NotInFragment("refutability is defined for SHML and CHML formulas")
    if mode == "refute" and not in_shml(f) or mode == "verify" and not in_chml(f):
        raise NotInFragment(f"cannot {mode} outside its fragment")
    target = Falsehood if mode == "refute" else Truth
    binder = GreatestFix if mode == "refute" else LeastFix

    positions = dict(subformulas(f))
    level: dict[tuple[int, ...], int | None] = {
        p: (0 if any(isinstance(x, target) for _, x in subformulas(g)) else None)
        for p, g in positions.items()
    }
    # uses[p]: binders (by path) of the variables occurring free in p
    uses: dict[tuple[int, ...], set[tuple[int, ...]]] = {}

    def collect(path, g, scope):
        if isinstance(g, VarRef):
            b = scope.get(g.name)
            hits = {b} if b is not None else set()
        elif isinstance(g, (LeastFix, GreatestFix)):
            inner = {**scope, g.var: path if isinstance(g, binder) else None}
            hits = collect(path + (0,), g.body, inner) - {path}
        else:
            hits = set()
            for i, c in enumerate(children(g)):
                hits |= collect(path + (i,), c, scope)
        uses[path] = hits
        return hits

    collect((), f, {})
    changed = True
    while changed:
        changed = False
        for p in positions:
            best = level[p]
            for b in uses[p]:
                lb = level[b]
                if lb is not None and (best is None or lb + 1 < best):
                    if cutoff is None or lb + 1 <= cutoff:
                        best = lb + 1
            if best != level[p]:
                level[p] = best
                changed = True
    return Refutability(mode, level)


# ---------------------------------------------------------------------------
# Explicitation


def make_explicit(f: Formula, alphabet: AlphabetLike) -> Formula:
    """Complete every box group with ``[b]tt`` conjuncts (every diamond
    group with ``<b>ff`` disjuncts) so it ranges over the whole alphabet."""
    require_closed(f)
    actions = Alphabet.of(alphabet).actions
    if in_shml(f):
        kind, modal, filler, join = And, Box, TT, conj
    elif in_chml(f):
        kind, modal, filler, join = Or, Diamond, FF, disj
    else:
        raise NotInFragment("explicitation needs a SHML or CHML formula")

    def go(g: Formula, inside: bool) -> Formula:
        # ``inside``: g is an operand of an enclosing ``kind`` tree
        if isinstance(g, kind):
            if inside:
                return kind(go(g.left, True), go(g.right, True))
            rebuilt = kind(go(g.left, True), go(g.right, True))
            return _complete(rebuilt, _cluster(g, kind))
        if isinstance(g, modal):
            new = modal(g.action, go(g.body, False))
            return new if inside else _complete(new, [g])
        if isinstance(g, (LeastFix, GreatestFix)):
            return type(g)(g.var, go(g.body, False))
        return g

    def _complete(g: Formula, leaves: list[Formula]) -> Formula:
        counts = Counter(x.action for x in leaves if isinstance(x, modal))
        if not counts:
            return g
        need = max(counts.values())
        extra = []
        for a in actions:
            extra.extend([modal(a, filler)] * (need - counts.get(a, 0)))
        return join(g, *extra) if extra else g

    return go(f, False)


# ---------------------------------------------------------------------------
# Informative fragments


SIHML, CIHML, SPIHML, CPIHML = "SIHML", "CIHML", "SPIHML", "CPIHML"


@dataclass(frozen=True)
class Split:
    """A reading of ``f`` as ``phi1 ∧ phi2`` (or ``phi1 ∨ phi2``)."""

    kind: str
    phi1: Formula
    phi2: Formula
    reading: str  # "literal", "reordered" or "implicit"


def _splits(f: Formula, op, strict: bool):
    """Candidate readings for the ``op`` polarity, best first."""
    good = in_shml if op is And else in_chml
    neutral = TT if op is And else FF
    join = conj if op is And else disj
    if isinstance(f, op):
        yield f.left, f.right, "literal"
        if strict:
            return
        leaves = _cluster(f, op)
        ok = [x for x in leaves if good(x)]
        rest = [x for x in leaves if not good(x)]
        if ok:
            yield join(*ok), (join(*rest) if rest else neutral), "reordered"
        for i, x in enumerate(leaves):
            if good(x):
                yield x, join(*(leaves[:i] + leaves[i + 1 :])), "reordered"
        if good(f):
            yield f, neutral, "implicit"
    elif not strict and good(f):
        yield f, neutral, "implicit"


def ihml_membership(f: Formula, strict: bool = False) -> Split | None:
    """SIHML: some reading ``phi1 ∧ phi2`` with ``phi1`` in SHML mentioning
    ``ff``.  CIHML dually with ∨, CHML and ``tt``.  Unless ``strict``,
    operands of a top-level ∧/∨ may be regrouped and a bare fragment
    formula is read as ``phi1 ∧ tt`` (``phi1 ∨ ff``)."""
    require_closed(f)
    for op, kind, target, good in ((And, SIHML, Falsehood, in_shml), (Or, CIHML, Truth, in_chml)):
        for phi1, phi2, reading in _splits(f, op, strict):
            if good(phi1) and any(isinstance(x, target) for _, x in subformulas(phi1)):
                return Split(kind, phi1, phi2, reading)
    return None


def pihml_membership(f: Formula, alphabet: AlphabetLike | None = None, strict: bool = False) -> Split | None:
    """SPIHML: a reading ``phi1 ∧ phi2`` with ``phi1`` in SHML ∩ eHML and
    every position of ``phi1`` able to refute; CPIHML dually."""
    require_closed(f)
    alpha = _alphabet(f, alphabet)
    for op, kind, good, mode in ((And, SPIHML, in_shml, "refute"), (Or, CPIHML, in_chml, "verify")):
        for phi1, phi2, reading in _splits(f, op, strict):
            if not good(phi1):
                continue
            if alpha is not None and not in_ehml(phi1, alpha):
                continue
            if annotate_refutability(phi1, mode).everywhere:
                return Split(kind, phi1, phi2, reading)
    return None


# ---------------------------------------------------------------------------
# Depths and witnesses


@lru_cache(maxsize=None)
def depth_to(f: Formula, target: type) -> float:
    """d_ff (``target=Falsehood``, over SHML) or its dual d_tt over CHML."""
    if isinstance(f, target):
        return 0
    if isinstance(f, (Truth, Falsehood, VarRef)):
        return INF
    if isinstance(f, (And, Or)):
        return min(depth_to(f.left, target), depth_to(f.right, target)) + 1
    return depth_to(f.body, target) + 1


@lru_cache(maxsize=None)
def box_depth(f: Formula, alphabet: Alphabet) -> float:
    """d_B over SHML ∩ eHML (diamond blocks over CHML ∩ eHML): 0 at ff (tt)
    or at a tree that contains a whole block."""
    shml = in_shml(f)
    kind, modal, stop = (And, Box, Falsehood) if shml else (Or, Diamond, Truth)
    if isinstance(f, stop):
        return 0
    if isinstance(f, (Truth, Falsehood, VarRef)):
        return INF
    if isinstance(f, (kind, modal)):
        leaves = _cluster(f, kind)
        if any(isinstance(x, stop) for x in leaves):
            return 0
        if any(isinstance(x, modal) for x in leaves) and _full_blocks(leaves, modal, alphabet.actions):
            return 0
        rest = [box_depth(x, alphabet) for x in leaves if not isinstance(x, modal)]
        return min(rest, default=INF) + 1
    if isinstance(f, (LeastFix, GreatestFix)):
        return box_depth(f.body, alphabet) + 1
    return INF


def _descend(f: Formula, shml: bool) -> tuple[str, ...]:
    """Follow the least-depth path to ff (SHML) or tt (CHML), unfolding
    fixpoints, and return the actions met on the way."""
    target = Falsehood if shml else Truth
    kind, modal = (And, Box) if shml else (Or, Diamond)
    if depth_to(f, target) == INF:
        raise NotInformativeFragment("no path to a verdict constant")
    out: list[str] = []
    g = f
    while not isinstance(g, target):
        if isinstance(g, kind):
            g = g.left if depth_to(g.left, target) <= depth_to(g.right, target) else g.right
        elif isinstance(g, modal):
            out.append(g.action)
            g = g.body
        elif isinstance(g, (LeastFix, GreatestFix)):
            g = unfold(g)
        else:
            raise NotInformativeFragment(f"unexpected subformula {g}")
    return tuple(out)


def witness_informative_trace(f: Formula, strict: bool = False) -> Trace:
    """A finite trace determining ``f``: negatively for SIHML, positively
    for CIHML, found by descending ``phi1`` along least d_ff (d_tt)."""
    require_closed_guarded(f)
    split = ihml_membership(f, strict)
    if split is None:
        raise NotInformativeFragment("formula is not in SIHML or CIHML")
    return Trace(_descend(split.phi1, split.kind == SIHML))


def _move_forward(g: Formula, a: str, alphabet: Alphabet, shml: bool) -> Formula:
    """One step of pushing the refutation (verification) past action ``a``
    inside an explicit formula whose positions all refute (verify)."""
    kind, modal, stop = (And, Box, Falsehood) if shml else (Or, Diamond, Truth)
    for _ in range(10_000):
        if isinstance(g, stop):
            return g
        if isinstance(g, (LeastFix, GreatestFix)):
            g = unfold(g)
            continue
        if isinstance(g, (kind, modal)):
            leaves = _cluster(g, kind)
            for x in leaves:
                if isinstance(x, stop):
                    return x
            if any(isinstance(x, modal) for x in leaves) and _full_blocks(leaves, modal, alphabet.actions):
                for x in leaves:
                    if isinstance(x, modal) and x.action == a:
                        return x.body
            rest = [x for x in leaves if not isinstance(x, modal)]
            if not rest:
                break
            g = min(rest, key=lambda x: box_depth(x, alphabet))
            continue
        break
    raise NotInFragment(f"cannot move past {a!r} in {g}")


def extend_to_violation(f: Formula, s, alphabet: AlphabetLike | None = None, strict: bool = False) -> Trace:
    """Extension ``t`` with ``s.t`` negatively (SPIHML) or positively
    (CPIHML) determining ``f``."""
    require_closed_guarded(f)
    s = Trace.of(s)
    alpha = session_alphabet(f, s, alphabet=alphabet)
    split = pihml_membership(f, alpha, strict)
    if split is None:
        raise NotInFragment("formula is not in SPIHML or CPIHML")
    shml = split.kind == SPIHML
    g = split.phi1
    for a in s.prefix:
        g = _move_forward(g, a, alpha, shml)
    return Trace(_descend(g, shml))


def witness_polarity(split: Split) -> Polarity:
    return Polarity.NEGATIVE if split.kind in (SIHML, SPIHML) else Polarity.POSITIVE


def verify_witness(split: Split, trace: Trace, alphabet: Alphabet, bound: int = 6):
    """Check a witness against ``phi1`` on its fragment-exact path; what
    determines ``phi1`` determines the whole formula the same way."""
    return determines(split.phi1, trace, witness_polarity(split), bound, alphabet)


# ---------------------------------------------------------------------------
# Hierarchy


LEVELS = (
    "Complete",
    "CoSafety",
    "Safety",
    "PartiallyMonitorable",
    "PersistentlyInformative",
    "Informative",
    "SoundOnly",
)


@dataclass(frozen=True)
class Classification:
    level: str
    basis: str  # "syntactic" or "semanticBounded"
    membership: Membership
    ihml: Split | None
    pihml: Split | None
    refutability: Refutability | None
    alphabet: Alphabet | None
    witnesses: tuple[dict, ...] = field(default=())


def _trivial_up_to(f: Formula, alphabet: Alphabet, bound: int) -> bool | None:
    """True/False when ``f`` holds on all/no traces of ``extensions(bound)``."""
    graph = extension_graph(alphabet, bound)
    vals = ModelChecker(graph).holds(f)
    if vals.all():
        return True
    if not vals.any():
        return False
    return None


def classify(
    f: Formula,
    alphabet: AlphabetLike | None = None,
    bound: int = 6,
    semantic_complete: bool = True,
    strict: bool = False,
) -> Classification:
    """Syntactic lower bound on the hierarchy level of ``f``."""
    require_closed_guarded(f)
    alpha = _alphabet(f, alphabet)
    member = fragment_membership(f, alpha)
    ihml = ihml_membership(f, strict)
    pihml = pihml_membership(f, alpha, strict)
    refut = None
    if member.shml or member.chml:
        refut = annotate_refutability(f)

    witnesses = []
    if ihml is not None and alpha is not None:
        t = Trace(_descend(ihml.phi1, ihml.kind == SIHML))
        res = verify_witness(ihml, t, alpha, bound)
        witnesses.append(
            {
                "kind": "informative",
                "trace": str(t),
                "polarity": witness_polarity(ihml).value,
                "verified": res.status is Status.DETERMINED,
                "path": res.path.value,
            }
        )

    if isinstance(f, (Truth, Falsehood)):
        level, basis = "Complete", "syntactic"
    elif semantic_complete and _trivial(f, alpha, bound) is not None:
        level, basis = "Complete", "semanticBounded"
    elif member.chml:
        level, basis = "CoSafety", "syntactic"
    elif member.shml:
        level, basis = "Safety", "syntactic"
    elif pihml is not None:
        level, basis = "PersistentlyInformative", "syntactic"
    elif ihml is not None:
        level, basis = "Informative", "syntactic"
    else:
        level, basis = "SoundOnly", "syntactic"
    return Classification(level, basis, member, ihml, pihml, refut, alpha, tuple(witnesses))


def _trivial(f: Formula, alpha: Alphabet | None, bound: int) -> bool | None:
    if alpha is None:
        # no modality: the formula is constant
        from .semantics import evaluate

        return evaluate(f, Trace())
    return _trivial_up_to(f, alpha, bound)
