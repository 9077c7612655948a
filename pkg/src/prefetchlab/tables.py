"""Bounded set-associative tables with LRU replacement.

All prefetcher metadata structures (RPT, PHT, Index Table, pair tables,
...) are bounded associative maps. Keys are ints or tuples of ints; the
set index is a deterministic fold of the key so runs are reproducible.
"""

from __future__ import annotations

from collections import OrderedDict
from typing import Any, Iterator, Optional, Tuple

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def fold_key(key) -> int:
    """Deterministic 64-bit fold of an int, str, or (nested) tuple of them."""
    if isinstance(key, int):
        return (key & _MASK64) * _GOLDEN & _MASK64
    if isinstance(key, (str, bytes)):
        data = key.encode() if isinstance(key, str) else key
        h = 0xCBF29CE484222325
        for byte in data:
            h = (h ^ byte) * 0x100000001B3 & _MASK64
        return h
    h = 0x84222325CBF29CE4
    for part in key:
        h = (h ^ fold_key(part)) * 0x100000001B3 & _MASK64
    return h


class SetAssociativeTable:
    """Fixed-capacity key/value map: `entries` total slots, `ways` per set."""

    def __init__(self, entries: int, ways: int) -> None:
        if entries < 1 or ways < 1 or entries % ways != 0:
            raise ValueError("entries must be a positive multiple of ways")
        self.entries = entries
        self.ways = ways
        self.sets = entries // ways
        self._sets: list[OrderedDict] = [OrderedDict() for _ in range(self.sets)]

    def _set_for(self, key) -> OrderedDict:
        return self._sets[fold_key(key) % self.sets]

    def lookup(self, key, touch: bool = True) -> Optional[Any]:
        s = self._set_for(key)
        if key not in s:
            return None
        if touch:
            s.move_to_end(key)
        return s[key]

    def insert(self, key, value) -> Optional[Tuple[Any, Any]]:
        """Insert or update; returns the evicted (key, value) if any."""
        s = self._set_for(key)
        if key in s:
            s[key] = value
            s.move_to_end(key)
            return None
        victim = None
        if len(s) >= self.ways:
            victim = s.popitem(last=False)
        s[key] = value
        return victim

    def __contains__(self, key) -> bool:
        return key in self._set_for(key)

    def __len__(self) -> int:
        return sum(len(s) for s in self._sets)

    def items(self) -> Iterator[Tuple[Any, Any]]:
        for s in self._sets:
            yield from s.items()


class DirectMappedTable:
    """Direct-mapped key/value store; reads validate the stored key."""

    def __init__(self, entries: int) -> None:
        if entries < 1:
            raise ValueError("entries must be >= 1")
        self.entries = entries
        self._slots: list[Optional[Tuple[Any, Any]]] = [None] * entries

    def put(self, key, value) -> None:
        self._slots[fold_key(key) % self.entries] = (key, value)

    def get(self, key) -> Optional[Any]:
        slot = self._slots[fold_key(key) % self.entries]
        if slot is None or slot[0] != key:
            return None
        return slot[1]
