"""Finite and lasso traces: text format, enumeration and suffix graphs."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from .errors import ParseError, UnknownAction
from .formula import ACTION_RE, RESERVED, Alphabet, AlphabetLike


@dataclass(frozen=True)
class Trace:
    """``prefix`` followed by ``loop`` repeated forever, or just ``prefix``
    when ``loop`` is None."""

    prefix: tuple[str, ...] = ()
    loop: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        if self.loop is not None:
            loop = tuple(self.loop)
            if not loop:
                raise ValueError("lasso loop must be nonempty")
            object.__setattr__(self, "loop", loop)

    @classmethod
    def of(cls, value: "TraceLike") -> "Trace":
        if isinstance(value, Trace):
            return value
        if isinstance(value, str):
            return parse_trace(value)
        return cls(tuple(value))

    @property
    def is_finite(self) -> bool:
        return self.loop is None

    def __len__(self) -> int:
        """Length of a finite trace; the lasso size ``|u|+|v|`` otherwise."""
        return len(self.prefix) + (len(self.loop) if self.loop else 0)

    def actions(self) -> set[str]:
        return set(self.prefix) | set(self.loop or ())

    def concat(self, other: "Trace") -> "Trace":
        if not self.is_finite:
            raise ValueError("cannot extend an infinite trace")
        return Trace(self.prefix + other.prefix, other.loop)

    def take(self, n: int) -> tuple[str, ...]:
        """The first ``n`` actions (fewer for a short finite trace)."""
        if self.loop is None or n <= len(self.prefix):
            return self.prefix[:n]
        out = list(self.prefix)
        for a in itertools.cycle(self.loop):
            if len(out) >= n:
                break
            out.append(a)
        return tuple(out)

    def canonical(self) -> "Trace":
        """The shortest representation of the same word."""
        if self.loop is None:
            return self
        loop = _primitive_root(self.loop)
        prefix = self.prefix
        while prefix and prefix[-1] == loop[-1]:
            prefix = prefix[:-1]
            loop = loop[-1:] + loop[:-1]
        return Trace(prefix, loop)

    def __str__(self) -> str:
        return print_trace(self)


TraceLike = Union[Trace, str, Sequence[str]]


def _primitive_root(w: tuple[str, ...]) -> tuple[str, ...]:
    n = len(w)
    for p in range(1, n + 1):
        if n % p == 0 and w[:p] * (n // p) == w:
            return w[:p]
    return w


_LASSO_RE = re.compile(r"\A(?P<prefix>.*?)\((?P<loop>[^()]*)\)\^w\Z")


def _split_word(text: str, offset: int, whole: str, alphabet: Alphabet | None) -> tuple[str, ...]:
    if text.strip() in ("", "eps"):
        return ()
    out = []
    pos = offset
    for part in text.split("."):
        name = part.strip()
        if not ACTION_RE.match(name) or name in RESERVED:
            raise ParseError(f"invalid action {name!r} in trace", pos, whole)
        if alphabet is not None and name not in alphabet:
            raise UnknownAction(name)
        out.append(name)
        pos += len(part) + 1
    return tuple(out)


def parse_trace(text: str, alphabet: AlphabetLike | None = None) -> Trace:
    """Parse ``a.b.c``, ``eps``, ``a.b(c.d)^w`` or ``(c)^w``."""
    alpha = Alphabet.of(alphabet) if alphabet is not None else None
    s = text.strip()
    m = _LASSO_RE.match(s)
    if m:
        prefix = _split_word(m.group("prefix"), 0, text, alpha)
        loop = _split_word(m.group("loop"), m.start("loop"), text, alpha)
        if not loop:
            raise ParseError("lasso loop must be nonempty", m.start("loop"), text)
        return Trace(prefix, loop)
    if "(" in s or ")" in s:
        raise ParseError("malformed lasso, expected u(v)^w", s.find("("), text)
    return Trace(_split_word(s, 0, text, alpha))


def print_trace(t: Trace) -> str:
    head = ".".join(t.prefix)
    if t.loop is None:
        return head or "eps"
    return f"{head}({'.'.join(t.loop)})^w"


def words(alphabet: AlphabetLike, n: int) -> Iterator[tuple[str, ...]]:
    """All words of length exactly ``n`` in lexicographic order."""
    return itertools.product(Alphabet.of(alphabet).actions, repeat=n)


def finite_traces(alphabet: AlphabetLike, max_len: int) -> Iterator[Trace]:
    """Finite traces of length at most ``max_len`` in length-lex order."""
    for n in range(max_len + 1):
        for w in words(alphabet, n):
            yield Trace(w)


def lassos_of_size(alphabet: AlphabetLike, n: int) -> Iterator[Trace]:
    """Lassos ``u(v)^w`` with ``|u|+|v| = n``: ordered by the word ``uv``
    lexicographically, then by ``|u|`` ascending."""
    for w in words(alphabet, n):
        for i in range(n):
            yield Trace(w[:i], w[i:])


def lassos(alphabet: AlphabetLike, max_size: int) -> Iterator[Trace]:
    for n in range(1, max_size + 1):
        yield from lassos_of_size(alphabet, n)


def extensions(alphabet: AlphabetLike, k: int) -> Iterator[Trace]:
    """Finite extensions of length ≤ k and lassos of size ≤ k, by size, with
    finite words before lassos of the same size."""
    for n in range(k + 1):
        for w in words(alphabet, n):
            yield Trace(w)
        if n:
            yield from lassos_of_size(alphabet, n)


def bounded_universe(alphabet: AlphabetLike, max_len: int, max_lasso: int) -> Iterator[Trace]:
    """Finite traces up to ``max_len`` followed by lassos up to ``max_lasso``."""
    yield from finite_traces(alphabet, max_len)
    yield from lassos(alphabet, max_lasso)


# ---------------------------------------------------------------------------
# Suffix graphs


class TraceGraph:
    """Shared graph of trace suffixes.

    Every node is one suffix and has at most one outgoing edge, labelled by
    the suffix's first action; finished finite traces are dead ends.
    ``act[i]`` is the alphabet index of that action (-1 at a dead end) and
    ``nxt[i]`` the successor (a dead end points to itself).
    """

    def __init__(self, alphabet: AlphabetLike | None, traces: Iterable[TraceLike] = ()):
        # without a declared alphabet, actions are indexed as they appear
        self.alphabet = Alphabet.of(alphabet) if alphabet is not None else None
        self.action_index: dict[str, int] = (
            {a: i for i, a in enumerate(self.alphabet)} if self.alphabet else {}
        )
        self._index: dict[Trace, int] = {}
        self._act: list[int] = []
        self._nxt: list[int] = []
        self.roots: list[int] = []
        self.traces: list[Trace] = []
        for t in traces:
            self.add(t)

    def add(self, t: TraceLike) -> int:
        t = Trace.of(t)
        for a in sorted(t.actions()):
            if a not in self.action_index:
                if self.alphabet is not None:
                    raise UnknownAction(a)
                self.action_index[a] = len(self.action_index)
        root = self._node(t.canonical())
        self.roots.append(root)
        self.traces.append(t)
        self._frozen = None
        return root

    def _node(self, t: Trace) -> int:
        # walk forward creating nodes until reaching a known suffix
        chain: list[Trace] = []
        cur = t
        while cur not in self._index:
            chain.append(cur)
            self._index[cur] = -2  # placeholder to detect the lasso cycle
            if cur.loop is None:
                if not cur.prefix:
                    break
                cur = Trace(cur.prefix[1:])
            elif cur.prefix:
                cur = Trace(cur.prefix[1:], cur.loop).canonical()
            else:
                cur = Trace((), cur.loop[1:] + cur.loop[:1])
        ids = []
        for c in chain:
            self._index[c] = len(self._act)
            ids.append(len(self._act))
            self._act.append(-1)
            self._nxt.append(-1)
        for c, i in zip(chain, ids):
            if c.loop is None and not c.prefix:
                self._nxt[i] = i
                continue
            first = c.prefix[0] if c.prefix else c.loop[0]
            if c.loop is None:
                succ = Trace(c.prefix[1:])
            elif c.prefix:
                succ = Trace(c.prefix[1:], c.loop).canonical()
            else:
                succ = Trace((), c.loop[1:] + c.loop[:1])
            self._act[i] = self.action_index[first]
            self._nxt[i] = self._index[succ]
        return self._index[t]

    def __len__(self) -> int:
        return len(self._act)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if getattr(self, "_frozen", None) is None:
            self._frozen = (np.array(self._act, dtype=np.int64), np.array(self._nxt, dtype=np.int64))
        return self._frozen


@lru_cache(maxsize=16)
def extension_graph(alphabet: Alphabet, k: int) -> TraceGraph:
    """Graph over ``extensions(alphabet, k)``, roots in enumeration order."""
    return TraceGraph(alphabet, extensions(alphabet, k))
