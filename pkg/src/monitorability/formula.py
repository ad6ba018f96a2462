"""recHML and LTL syntax: trees, text parsing and printing, validation,
capture-avoiding substitution and the LTL-to-recHML encoding."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence, Union

from ._node import Node
from .errors import NotAFixpoint, ParseError, UnboundVariable, UnknownAction

ACTION_RE = re.compile(r"[a-z][a-z0-9_]*\Z")
VARIABLE_RE = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")

#: Lowercase words with a fixed meaning in one of the text grammars.
RESERVED = frozenset({"tt", "ff", "max", "min", "rec", "yes", "no", "end", "eps"})


# ---------------------------------------------------------------------------
# Alphabet


@dataclass(frozen=True)
class Alphabet:
    """Finite ordered set of action names; declaration order is kept."""

    actions: tuple[str, ...]

    def __post_init__(self):
        acts = tuple(self.actions)
        if not acts:
            raise ValueError("alphabet must be nonempty")
        if len(set(acts)) != len(acts):
            raise ValueError(f"alphabet has duplicate actions: {acts}")
        for a in acts:
            if not ACTION_RE.match(a) or a in RESERVED:
                raise ValueError(f"invalid action name {a!r}")
        object.__setattr__(self, "actions", acts)

    @classmethod
    def of(cls, value: "AlphabetLike") -> "Alphabet":
        if isinstance(value, Alphabet):
            return value
        if isinstance(value, str):
            value = [a.strip() for a in value.split(",") if a.strip()]
        return cls(tuple(value))

    def __iter__(self) -> Iterator[str]:
        return iter(self.actions)

    def __len__(self) -> int:
        return len(self.actions)

    def __contains__(self, a) -> bool:
        return a in self.actions

    def index(self, a: str) -> int:
        return self.actions.index(a)

    def __str__(self) -> str:
        return ",".join(self.actions)


AlphabetLike = Union[Alphabet, str, Sequence[str]]


# ---------------------------------------------------------------------------
# recHML syntax tree


class Formula(Node):
    def __str__(self) -> str:
        return print_formula(self)

    def __repr__(self) -> str:
        return f"{type(self).__name__}<{print_formula(self)}>"


@dataclass(frozen=True, eq=False, repr=False)
class Truth(Formula):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class Falsehood(Formula):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False, repr=False)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False, repr=False)
class Diamond(Formula):
    action: str
    body: Formula


@dataclass(frozen=True, eq=False, repr=False)
class Box(Formula):
    action: str
    body: Formula


@dataclass(frozen=True, eq=False, repr=False)
class LeastFix(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, eq=False, repr=False)
class GreatestFix(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, eq=False, repr=False)
class VarRef(Formula):
    name: str


TT = Truth()
FF = Falsehood()

Modal = (Diamond, Box)
Fixpoint = (LeastFix, GreatestFix)
Binary = (And, Or)


def conj(*parts: Formula) -> Formula:
    """Left-nested conjunction; ``tt`` for no arguments."""
    if not parts:
        return TT
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(*parts: Formula) -> Formula:
    """Left-nested disjunction; ``ff`` for no arguments."""
    if not parts:
        return FF
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Binary):
        return (f.left, f.right)
    if isinstance(f, Modal + Fixpoint):
        return (f.body,)
    return ()


def subformulas(f: Formula, path: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], Formula]]:
    """All subformula occurrences in pre-order, keyed by their root path."""
    stack = [(path, f)]
    while stack:
        p, g = stack.pop()
        yield p, g
        kids = children(g)
        for i in reversed(range(len(kids))):
            stack.append((p + (i,), kids[i]))


def at_path(f: Formula, path: Sequence[int]) -> Formula:
    for i in path:
        f = children(f)[i]
    return f


@lru_cache(maxsize=None)
def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, VarRef):
        return frozenset({f.name})
    if isinstance(f, Fixpoint):
        return free_vars(f.body) - {f.var}
    out = frozenset()
    for c in children(f):
        out |= free_vars(c)
    return out


@lru_cache(maxsize=None)
def bound_vars(f: Formula) -> frozenset[str]:
    out = frozenset({f.var}) if isinstance(f, Fixpoint) else frozenset()
    for c in children(f):
        out |= bound_vars(c)
    return out


@lru_cache(maxsize=None)
def actions_of(f: Formula) -> frozenset[str]:
    out = frozenset({f.action}) if isinstance(f, Modal) else frozenset()
    for c in children(f):
        out |= actions_of(c)
    return out


def action_order(f: Formula) -> tuple[str, ...]:
    """Actions in order of first occurrence, for alphabet inference."""
    seen: dict[str, None] = {}
    for _, g in subformulas(f):
        if isinstance(g, Modal):
            seen.setdefault(g.action)
    return tuple(seen)


def contains(f: Formula, target: Formula) -> bool:
    return any(g == target for _, g in subformulas(f))


def size(f: Formula) -> int:
    return sum(1 for _ in subformulas(f))


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class ValidationReport:
    closed: bool
    guarded: bool
    free: frozenset[str]
    unguarded: frozenset[str]
    actions: frozenset[str]

    @property
    def valid(self) -> bool:
        return self.closed and self.guarded


def validate(f: Formula) -> ValidationReport:
    free: set[str] = set()
    unguarded: set[str] = set()

    def walk(g: Formula, scope: dict[str, bool]):
        # scope maps bound variable -> whether a modality separates it from its binder
        if isinstance(g, VarRef):
            if g.name not in scope:
                free.add(g.name)
            elif not scope[g.name]:
                unguarded.add(g.name)
        elif isinstance(g, Fixpoint):
            walk(g.body, {**scope, g.var: False})
        elif isinstance(g, Modal):
            walk(g.body, {k: True for k in scope})
        else:
            for c in children(g):
                walk(c, scope)

    walk(f, {})
    return ValidationReport(
        closed=not free,
        guarded=not unguarded,
        free=frozenset(free),
        unguarded=frozenset(unguarded),
        actions=actions_of(f),
    )


# ---------------------------------------------------------------------------
# Substitution


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    stem = base.rstrip("0123456789") or base
    i = 1
    while f"{stem}{i}" in avoid:
        i += 1
    return f"{stem}{i}"


def substitute(f: Formula, var: str, g: Formula) -> Formula:
    """``f[g/var]``, renaming binders of ``f`` that would capture free
    variables of ``g``."""
    g_free = free_vars(g)

    def go(h: Formula) -> Formula:
        if var not in free_vars(h):
            return h
        if isinstance(h, VarRef):
            return g
        if isinstance(h, Fixpoint):
            if h.var in g_free:
                new = fresh_name(h.var, g_free | free_vars(h.body) | bound_vars(h.body) | {var})
                body = substitute(h.body, h.var, VarRef(new))
                return type(h)(new, go(body))
            return type(h)(h.var, go(h.body))
        if isinstance(h, Modal):
            return type(h)(h.action, go(h.body))
        return type(h)(go(h.left), go(h.right))

    return go(f)


def unfold(f: Formula) -> Formula:
    """One-step unfolding ``body[fix/var]`` of a fixpoint formula."""
    if not isinstance(f, Fixpoint):
        raise NotAFixpoint(f"not a fixpoint formula: {print_formula(f)}")
    return substitute(f.body, f.var, f)


# ---------------------------------------------------------------------------
# Tokenizer shared by the formula, LTL and monitor grammars

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<word>[a-z][a-z0-9_]*)|(?P<var>[A-Z][A-Za-z0-9_]*)|(?P<sym>[()<>\[\].&|+!]))"
)


@dataclass
class Token:
    kind: str  # "word", "var", "sym", "eof"
    text: str
    pos: int


class TokenStream:
    def __init__(self, text: str, var_pattern: re.Pattern | None = None):
        self.text = text
        self.tokens: list[Token] = []
        pos = 0
        n = len(text)
        while True:
            while pos < n and text[pos].isspace():
                pos += 1
            if pos >= n:
                break
            m = (var_pattern or _TOKEN_RE).match(text, pos)
            if not m or m.end() == pos:
                raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
            kind = m.lastgroup
            self.tokens.append(Token(kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.tokens.append(Token("eof", "", n))
        self.i = 0

    @property
    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def accept(self, text: str) -> bool:
        tok = self.peek
        if tok.kind in ("sym", "word", "var") and tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.peek
        if tok.text != text or tok.kind == "eof":
            self.fail(f"expected {text!r}")
        return self.next()

    def fail(self, message: str):
        tok = self.peek
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"{message}, found {found}", tok.pos, self.text)

    def end(self):
        if self.peek.kind != "eof":
            self.fail("unexpected trailing input")


def _check_action(tok: Token, alphabet: Alphabet | None, ts: TokenStream) -> str:
    if tok.kind != "word" or tok.text in RESERVED:
        raise ParseError(f"expected an action name, found {tok.text!r}", tok.pos, ts.text)
    if alphabet is not None and tok.text not in alphabet:
        raise UnknownAction(tok.text)
    return tok.text


# ---------------------------------------------------------------------------
# Formula parser
#
#   expr  := conj ("|" conj)*
#   conj  := unary ("&" unary)*
#   unary := tt | ff | "<" a ">" unary | "[" a "]" unary
#          | ("max" | "min") X "." expr | X | "(" expr ")"


def parse_formula(text: str, alphabet: AlphabetLike | None = None) -> Formula:
    alpha = Alphabet.of(alphabet) if alphabet is not None else None
    ts = TokenStream(text)

    def expr(scope):
        f = conj_(scope)
        while ts.accept("|"):
            f = Or(f, conj_(scope))
        return f

    def conj_(scope):
        f = unary(scope)
        while ts.accept("&"):
            f = And(f, unary(scope))
        return f

    def unary(scope):
        tok = ts.peek
        if tok.kind == "word" and tok.text == "tt":
            ts.next()
            return TT
        if tok.kind == "word" and tok.text == "ff":
            ts.next()
            return FF
        if tok.kind == "word" and tok.text in ("max", "min"):
            ts.next()
            vt = ts.next()
            if vt.kind != "var":
                raise ParseError("expected a fixpoint variable", vt.pos, text)
            ts.expect(".")
            body = expr(scope | {vt.text})
            return (GreatestFix if tok.text == "max" else LeastFix)(vt.text, body)
        if tok.kind == "var":
            ts.next()
            if tok.text not in scope:
                raise UnboundVariable(tok.text)
            return VarRef(tok.text)
        if ts.accept("<"):
            a = _check_action(ts.next(), alpha, ts)
            ts.expect(">")
            return Diamond(a, unary(scope))
        if ts.accept("["):
            a = _check_action(ts.next(), alpha, ts)
            ts.expect("]")
            return Box(a, unary(scope))
        if ts.accept("("):
            f = expr(scope)
            ts.expect(")")
            return f
        ts.fail("expected a formula")

    f = expr(frozenset())
    ts.end()
    return f


# ---------------------------------------------------------------------------
# Formula printer

_OR, _AND, _UNARY = 0, 1, 2


def print_formula(f: Formula) -> str:
    return _fmt(f, _OR, True)


def _fmt(f: Formula, prec: int, tail: bool) -> str:
    if isinstance(f, Truth):
        return "tt"
    if isinstance(f, Falsehood):
        return "ff"
    if isinstance(f, VarRef):
        return f.name
    if isinstance(f, Diamond):
        return f"<{f.action}>" + _fmt(f.body, _UNARY, tail)
    if isinstance(f, Box):
        return f"[{f.action}]" + _fmt(f.body, _UNARY, tail)
    if isinstance(f, Fixpoint):
        kw = "max" if isinstance(f, GreatestFix) else "min"
        if isinstance(f.body, Binary):
            body = "(" + _fmt(f.body, _OR, True) + ")"
        else:
            body = _fmt(f.body, _OR, True)
        s = f"{kw} {f.var}.{body}"
        return s if tail else f"({s})"
    if isinstance(f, Or):
        if prec > _OR:
            return "(" + _fmt(f, _OR, True) + ")"
        return _fmt(f.left, _OR, False) + " | " + _fmt(f.right, _AND, tail)
    if isinstance(f, And):
        if prec > _AND:
            return "(" + _fmt(f, _OR, True) + ")"
        return _fmt(f.left, _AND, False) + " & " + _fmt(f.right, _UNARY, tail)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# LTL frontend


class Ltl(Node):
    def __str__(self) -> str:
        return print_ltl(self)

    def __repr__(self) -> str:
        return f"{type(self).__name__}<{print_ltl(self)}>"


@dataclass(frozen=True, eq=False, repr=False)
class LAtom(Ltl):
    action: str


@dataclass(frozen=True, eq=False, repr=False)
class LNegAtom(Ltl):
    action: str


@dataclass(frozen=True, eq=False, repr=False)
class LTrue(Ltl):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class LFalse(Ltl):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class LAnd(Ltl):
    left: Ltl
    right: Ltl


@dataclass(frozen=True, eq=False, repr=False)
class LOr(Ltl):
    left: Ltl
    right: Ltl


@dataclass(frozen=True, eq=False, repr=False)
class LNext(Ltl):
    arg: Ltl


@dataclass(frozen=True, eq=False, repr=False)
class LFinally(Ltl):
    arg: Ltl


@dataclass(frozen=True, eq=False, repr=False)
class LGlobally(Ltl):
    arg: Ltl


@dataclass(frozen=True, eq=False, repr=False)
class LUntil(Ltl):
    left: Ltl
    right: Ltl


@dataclass(frozen=True, eq=False, repr=False)
class LRelease(Ltl):
    left: Ltl
    right: Ltl


_LTL_TOKEN_RE = re.compile(r"\s*(?:(?P<word>[a-z][a-z0-9_]*)|(?P<sym>[XFGUR()&|!]))")


def parse_ltl(text: str, alphabet: AlphabetLike | None = None) -> Ltl:
    """Parse ``tt | ff | a | !a | X L | F L | G L | L U L | L R L | L & L
    | L "|" L | (L)``; U and R are right-associative and bind tighter
    than ``&``."""
    alpha = Alphabet.of(alphabet) if alphabet is not None else None
    ts = TokenStream(text, _LTL_TOKEN_RE)

    def or_():
        f = and_()
        while ts.accept("|"):
            f = LOr(f, and_())
        return f

    def and_():
        f = binary()
        while ts.accept("&"):
            f = LAnd(f, binary())
        return f

    def binary():
        f = unary()
        if ts.accept("U"):
            return LUntil(f, binary())
        if ts.accept("R"):
            return LRelease(f, binary())
        return f

    def unary():
        tok = ts.peek
        if tok.kind == "sym" and tok.text in "XFG" and tok.text:
            ts.next()
            arg = unary()
            return {"X": LNext, "F": LFinally, "G": LGlobally}[tok.text](arg)
        if ts.accept("!"):
            return LNegAtom(_check_action(ts.next(), alpha, ts))
        if ts.accept("("):
            f = or_()
            ts.expect(")")
            return f
        if tok.kind == "word" and tok.text == "tt":
            ts.next()
            return LTrue()
        if tok.kind == "word" and tok.text == "ff":
            ts.next()
            return LFalse()
        if tok.kind == "word":
            return LAtom(_check_action(ts.next(), alpha, ts))
        ts.fail("expected an LTL formula")

    f = or_()
    ts.end()
    return f


def print_ltl(f: Ltl) -> str:
    def go(g: Ltl, prec: int) -> str:
        # 0: or, 1: and, 2: until/release, 3: unary
        if isinstance(g, LAtom):
            return g.action
        if isinstance(g, LNegAtom):
            return "!" + g.action
        if isinstance(g, LTrue):
            return "tt"
        if isinstance(g, LFalse):
            return "ff"
        if isinstance(g, (LNext, LFinally, LGlobally)):
            op = {LNext: "X", LFinally: "F", LGlobally: "G"}[type(g)]
            return f"{op} " + go(g.arg, 3)
        if isinstance(g, (LUntil, LRelease)):
            op = "U" if isinstance(g, LUntil) else "R"
            s = go(g.left, 3) + f" {op} " + go(g.right, 2)
            return s if prec <= 2 else f"({s})"
        if isinstance(g, LAnd):
            s = go(g.left, 1) + " & " + go(g.right, 2)
            return s if prec <= 1 else f"({s})"
        if isinstance(g, LOr):
            s = go(g.left, 0) + " | " + go(g.right, 1)
            return s if prec == 0 else f"({s})"
        raise TypeError(f"not an LTL formula: {g!r}")

    return go(f, 0)


def ltl_actions(f: Ltl) -> tuple[str, ...]:
    seen: dict[str, None] = {}

    def go(g):
        if isinstance(g, (LAtom, LNegAtom)):
            seen.setdefault(g.action)
        for name in ("arg", "left", "right"):
            if hasattr(g, name):
                go(getattr(g, name))

    go(f)
    return tuple(seen)


@dataclass
class _Fresh:
    prefix: str = "Y"
    count: int = 0
    used: set = field(default_factory=set)

    def __call__(self) -> str:
        name = f"{self.prefix}{self.count}"
        self.count += 1
        return name


def encode_ltl(f: Ltl, alphabet: AlphabetLike) -> Formula:
    """Translate LTL into recHML with a strong next operator.

    Fixpoint variables are ``Y0, Y1, ...`` allocated in pre-order.
    """
    alpha = Alphabet.of(alphabet)
    fresh = _Fresh()

    def nxt(body: Formula) -> Formula:
        return disj(*(Diamond(a, body) for a in alpha))

    def go(g: Ltl) -> Formula:
        if isinstance(g, LTrue):
            return TT
        if isinstance(g, LFalse):
            return FF
        if isinstance(g, LAtom):
            if g.action not in alpha:
                raise UnknownAction(g.action)
            return Diamond(g.action, TT)
        if isinstance(g, LNegAtom):
            if g.action not in alpha:
                raise UnknownAction(g.action)
            return Box(g.action, FF)
        if isinstance(g, LAnd):
            return And(go(g.left), go(g.right))
        if isinstance(g, LOr):
            return Or(go(g.left), go(g.right))
        if isinstance(g, LNext):
            return nxt(go(g.arg))
        if isinstance(g, (LUntil, LFinally)):
            y = fresh()
            phi = go(g.left) if isinstance(g, LUntil) else TT
            psi = go(g.right if isinstance(g, LUntil) else g.arg)
            return LeastFix(y, Or(psi, And(phi, nxt(VarRef(y)))))
        if isinstance(g, (LRelease, LGlobally)):
            y = fresh()
            phi = go(g.left) if isinstance(g, LRelease) else FF
            psi = go(g.right if isinstance(g, LRelease) else g.arg)
            return GreatestFix(y, Or(And(psi, phi), And(psi, nxt(VarRef(y)))))
        raise TypeError(f"not an LTL formula: {g!r}")

    return go(f)


def infer_alphabet(*items: Formula | Ltl) -> Alphabet:
    seen: dict[str, None] = {}
    for item in items:
        acts = ltl_actions(item) if isinstance(item, Ltl) else action_order(item)
        for a in acts:
            seen.setdefault(a)
    return Alphabet(tuple(seen))
