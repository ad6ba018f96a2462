"""Immutable syntax-tree base with structural equality and a cached hash.

Formulas and monitor terms are used as dictionary keys all over the
analyses (memo tables, state sets), so the hash of a deep tree is computed
once and stored on the node.
"""

from dataclasses import fields
from functools import lru_cache


@lru_cache(maxsize=None)
def _field_names(cls):
    return tuple(f.name for f in fields(cls))


class Node:
    """Mixin for ``@dataclass(frozen=True, eq=False)`` tree nodes."""

    def _values(self):
        return tuple(getattr(self, name) for name in _field_names(type(self)))

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((type(self).__name__,) + self._values())
            object.__setattr__(self, "_hash", h)
        return h

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other):
            return NotImplemented
        if hash(self) != hash(other):
            return False
        return self._values() == other._values()

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result
