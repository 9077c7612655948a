"""Set-associative cache with LRU replacement and an optional prefetch buffer.

Each demand access is classified as one of four outcomes:

- demand-hit: block resident and already demand-touched.
- prefetch-hit: block resident via a completed prefetch, first demand touch.
- late-prefetch-hit: block still in flight; the demand absorbs it early, so
  only part of the miss latency was hidden.
- demand-miss: everything else; the block is fetched and inserted.

Prefetched blocks are placed either in the cache itself or in an auxiliary
buffer searched after the cache; a buffer hit promotes the block into the
cache. Every displaced valid block is reported exactly once, in
displacement order, through `drain_evictions`.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .core import DEFAULT_BLOCK_SIZE, SimClock, require_power_of_two

DEMAND_HIT = "demand-hit"
DEMAND_MISS = "demand-miss"
PREFETCH_HIT = "prefetch-hit"
LATE_PREFETCH_HIT = "late-prefetch-hit"

# outcome classes that activate the prefetcher
TRIGGER_KINDS = frozenset({DEMAND_MISS, PREFETCH_HIT, LATE_PREFETCH_HIT})

PLACEMENT_IN_CACHE = "in-cache"
PLACEMENT_BUFFER = "auxiliary-buffer"


@dataclass(frozen=True)
class CacheConfig:
    sets: int = 64
    ways: int = 4
    block_size: int = DEFAULT_BLOCK_SIZE
    placement: str = PLACEMENT_IN_CACHE
    buffer_entries: int = 32

    def validate(self) -> None:
        if self.sets < 1 or self.ways < 1:
            raise ValueError("sets and ways must be >= 1")
        require_power_of_two(self.block_size, "block_size")
        if self.placement not in (PLACEMENT_IN_CACHE, PLACEMENT_BUFFER):
            raise ValueError(f"unknown placement {self.placement!r}")
        if self.placement == PLACEMENT_BUFFER and self.buffer_entries < 1:
            raise ValueError("buffer_entries must be >= 1 with auxiliary-buffer")


@dataclass
class AccessOutcome:
    kind: str
    block: int
    evicted: Optional[int] = None
    evicted_was_prefetched_unused: bool = False


class Cache:
    """LRU set-associative cache storage; in-flight tracking lives in SimClock."""

    def __init__(self, config: CacheConfig) -> None:
        config.validate()
        self.config = config
        # per set: block -> prefetched-and-unused flag; OrderedDict order is LRU->MRU
        self._sets: list[OrderedDict] = [OrderedDict() for _ in range(config.sets)]
        self._buffer: OrderedDict = OrderedDict()
        self._evictions: List[Tuple[int, bool]] = []

    # -- residency ---------------------------------------------------------

    def _set_for(self, block: int) -> OrderedDict:
        return self._sets[block % self.config.sets]

    def resident(self, block: int) -> bool:
        return block in self._set_for(block) or block in self._buffer

    def occupancy(self) -> int:
        return sum(len(s) for s in self._sets) + len(self._buffer)

    def drain_evictions(self) -> List[Tuple[int, bool]]:
        """Displaced (block, was_prefetched_unused) pairs since the last call."""
        out = self._evictions
        self._evictions = []
        return out

    # -- fills -------------------------------------------------------------

    def _insert(self, block: int, prefetched_unused: bool) -> Optional[Tuple[int, bool]]:
        s = self._set_for(block)
        victim = None
        if block not in s and len(s) >= self.config.ways:
            victim = s.popitem(last=False)
            self._evictions.append(victim)
        s[block] = prefetched_unused
        s.move_to_end(block)
        return victim

    def fill_prefetch(self, block: int) -> None:
        """Place a completed prefetch per the configured placement, MRU, tagged unused."""
        if self.resident(block):
            return
        if self.config.placement == PLACEMENT_BUFFER:
            if len(self._buffer) >= self.config.buffer_entries:
                old, _ = self._buffer.popitem(last=False)
                self._evictions.append((old, True))
            self._buffer[block] = True
            return
        self._insert(block, prefetched_unused=True)

    # -- demand path ---------------------------------------------------------

    def access(self, block: int, clock: SimClock) -> AccessOutcome:
        s = self._set_for(block)
        if block in s:
            was_prefetched = s[block]
            s[block] = False
            s.move_to_end(block)
            kind = PREFETCH_HIT if was_prefetched else DEMAND_HIT
            return AccessOutcome(kind=kind, block=block)
        if block in self._buffer:
            # first demand touch promotes the buffer entry into the cache
            del self._buffer[block]
            victim = self._insert(block, prefetched_unused=False)
            return self._with_victim(PREFETCH_HIT, block, victim)
        if clock.in_flight(block):
            # demand arrived before the prefetch completed: latency only
            # partially hidden; the fetch is absorbed as a demand fill
            clock.cancel(block)
            victim = self._insert(block, prefetched_unused=False)
            return self._with_victim(LATE_PREFETCH_HIT, block, victim)
        victim = self._insert(block, prefetched_unused=False)
        return self._with_victim(DEMAND_MISS, block, victim)

    @staticmethod
    def _with_victim(kind: str, block: int,
                     victim: Optional[Tuple[int, bool]]) -> AccessOutcome:
        if victim is None:
            return AccessOutcome(kind=kind, block=block)
        return AccessOutcome(kind=kind, block=block, evicted=victim[0],
                             evicted_was_prefetched_unused=victim[1])
