"""Spatial prefetchers: SMS, VLDP, and Bingo.

All three learn access patterns over fixed-size spatial regions. SMS and
Bingo record per-generation footprints (which blocks of a region were
touched between the first access and the region falling out of the
cache) and replay them when the correlated trigger event recurs. VLDP
correlates delta sequences inside regions through a ladder of prediction
tables and always trusts the longest matching history.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .cache import AccessOutcome
from .core import AccessEvent, DEFAULT_REGION_BLOCKS, region_of
from .engine import Prefetcher, PrefetchRequest
from .tables import DirectMappedTable, SetAssociativeTable, fold_key

GENERATION_TIMEOUT = 4096


@dataclass
class Generation:
    """Observation interval of one spatial region, from trigger to eviction."""

    region: int
    pc: int
    trigger_offset: int
    trigger_block: int
    opened_seq: int
    footprint: set = field(default_factory=set)
    # non-trigger accesses in observation order; stamp is caller-supplied
    items: List[Tuple[int, int]] = field(default_factory=list)
    trigger_stamp: int = 0


class GenerationTracker:
    """Tracks open generations; closes them on eviction or timeout."""

    def __init__(self, blocks_per_region: int,
                 timeout: int = GENERATION_TIMEOUT) -> None:
        self.blocks_per_region = blocks_per_region
        self.timeout = timeout
        self._open: "OrderedDict[int, Generation]" = OrderedDict()

    def observe(self, pc: int, block: int, seq: int,
                stamp: int = 0) -> Tuple[Generation, bool]:
        """Record one access; returns (generation, opened_now)."""
        region, offset = region_of(block, self.blocks_per_region)
        gen = self._open.get(region)
        if gen is None:
            gen = Generation(region=region, pc=pc, trigger_offset=offset,
                             trigger_block=block, opened_seq=seq,
                             footprint={offset}, trigger_stamp=stamp)
            self._open[region] = gen
            return gen, True
        gen.footprint.add(offset)
        gen.items.append((offset, stamp))
        return gen, False

    def note_eviction(self, block: int) -> Optional[Generation]:
        """An evicted block of a tracked region ends that region's generation."""
        region = block // self.blocks_per_region
        return self._open.pop(region, None)

    def expire(self, seq: int) -> List[Generation]:
        """Close generations older than the timeout (open order is FIFO)."""
        closed = []
        while self._open:
            oldest = next(iter(self._open.values()))
            if oldest.opened_seq + self.timeout > seq:
                break
            closed.append(self._open.popitem(last=False)[1])
        return closed


def footprint_requests(footprint: set, trigger_block: int, trigger_offset: int,
                       blocks_per_region: int, source: str) -> List[PrefetchRequest]:
    """One request per set bit except the trigger, nearest offsets first."""
    base = trigger_block - trigger_offset
    offsets = sorted(
        (o for o in footprint if o != trigger_offset),
        key=lambda o: (abs(o - trigger_offset), o),
    )
    return [
        PrefetchRequest(base + o, rank=i + 1, source=source)
        for i, o in enumerate(offsets)
    ]


# ---------------------------------------------------------------------------
# SMS


class SmsPrefetcher(Prefetcher):
    name = "sms"

    def __init__(self, blocks_per_region: int = DEFAULT_REGION_BLOCKS,
                 pht_entries: int = 2048, pht_ways: int = 8,
                 timeout: int = GENERATION_TIMEOUT) -> None:
        self.blocks_per_region = blocks_per_region
        self.pht = SetAssociativeTable(pht_entries, pht_ways)
        self.tracker = GenerationTracker(blocks_per_region, timeout)

    def _store(self, gen: Generation) -> None:
        self.pht.insert((gen.pc, gen.trigger_offset), frozenset(gen.footprint))

    def on_trigger(self, event: AccessEvent, outcome: AccessOutcome) -> List[PrefetchRequest]:
        for gen in self.tracker.expire(event.seq):
            self._store(gen)
        gen, opened = self.tracker.observe(event.pc, outcome.block, event.seq)
        if not opened:
            return []
        pattern = self.pht.lookup((event.pc, gen.trigger_offset))
        if not pattern:
            return []
        return footprint_requests(pattern, outcome.block, gen.trigger_offset,
                                  self.blocks_per_region, self.name)

    def on_eviction(self, block: int, was_prefetched_unused: bool) -> None:
        gen = self.tracker.note_eviction(block)
        if gen is not None:
            self._store(gen)


# ---------------------------------------------------------------------------
# VLDP


@dataclass
class DhbRow:
    last_block: int
    first_offset: int
    accesses: int = 1
    deltas: List[int] = field(default_factory=list)  # oldest..newest, max 3


class VldpPrefetcher(Prefetcher):
    """Variable-length delta prefetcher with DPT-1..k and an OPT.

    `lower_order_overrides` counts predictions issued from a lower-order
    table while a higher-order table also hit; the longest-match rule
    keeps it at zero and tests assert that.
    """

    name = "vldp"

    def __init__(self, blocks_per_region: int = DEFAULT_REGION_BLOCKS,
                 dpt_orders: int = 3, dpt_entries: int = 64,
                 dhb_rows: int = 16, degree: int = 4) -> None:
        if dpt_orders < 1:
            raise ValueError("dpt_orders must be >= 1")
        self.blocks_per_region = blocks_per_region
        self.orders = dpt_orders
        self.dpts = {i: DirectMappedTable(dpt_entries)
                     for i in range(1, dpt_orders + 1)}
        self.opt: Dict[int, int] = {}
        self.dhb_rows = dhb_rows
        self.dhb: "OrderedDict[int, DhbRow]" = OrderedDict()
        self.degree = degree
        self.lower_order_overrides = 0

    def _longest_match(self, history: List[int]) -> Optional[int]:
        hits = []
        for order in range(1, min(self.orders, len(history)) + 1):
            value = self.dpts[order].get(tuple(history[-order:]))
            if value is not None:
                hits.append((order, value))
        if not hits:
            return None
        chosen_order, chosen = max(hits, key=lambda h: h[0])
        if any(order > chosen_order for order, _ in hits):
            self.lower_order_overrides += 1
        return chosen

    def on_trigger(self, event: AccessEvent, outcome: AccessOutcome) -> List[PrefetchRequest]:
        block = outcome.block
        region, offset = region_of(block, self.blocks_per_region)
        row = self.dhb.get(region)
        if row is None:
            if len(self.dhb) >= self.dhb_rows:
                self.dhb.popitem(last=False)
            self.dhb[region] = DhbRow(last_block=block, first_offset=offset)
            next_delta = self.opt.get(offset)
            if next_delta is None:
                return []
            return [PrefetchRequest(block + next_delta, rank=1, source=self.name)]
        self.dhb.move_to_end(region)
        delta = block - row.last_block
        if delta == 0:
            return []
        # train with the history observed before this delta
        if row.accesses == 1:
            self.opt[row.first_offset] = delta
        history = row.deltas
        for order in range(1, min(self.orders, len(history)) + 1):
            self.dpts[order].put(tuple(history[-order:]), delta)
        row.deltas = (history + [delta])[-self.orders:]
        row.last_block = block
        row.accesses += 1
        # multi-degree: feed each prediction back as input
        requests: List[PrefetchRequest] = []
        speculative = list(row.deltas)
        target = block
        for k in range(self.degree):
            predicted = self._longest_match(speculative)
            if predicted is None:
                break
            target = target + predicted
            if target // self.blocks_per_region != region:
                break
            requests.append(PrefetchRequest(target, rank=k + 1, source=self.name))
            speculative = (speculative + [predicted])[-self.orders:]
        return requests


# ---------------------------------------------------------------------------
# Bingo


class BingoPht:
    """Single PHT indexed by a hash of the short event, tagged with the long one.

    Entries whose (pc, trigger offset) projections are equal always land
    in the same set, so a short-event lookup only has to scan one set.
    """

    def __init__(self, sets: int, ways: int, blocks_per_region: int) -> None:
        if sets < 1 or ways < 1:
            raise ValueError("sets and ways must be >= 1")
        self.sets = sets
        self.ways = ways
        self.blocks_per_region = blocks_per_region
        self._sets: list[OrderedDict] = [OrderedDict() for _ in range(sets)]

    def _index(self, pc: int, offset: int) -> int:
        return fold_key((pc << 6) | offset) % self.sets

    def insert(self, pc: int, trigger_block: int, footprint: frozenset) -> None:
        offset = trigger_block % self.blocks_per_region
        ways = self._sets[self._index(pc, offset)]
        tag = (pc, trigger_block)
        if tag not in ways and len(ways) >= self.ways:
            ways.popitem(last=False)
        ways[tag] = footprint
        ways.move_to_end(tag)

    def lookup(self, pc: int, trigger_block: int) -> Optional[frozenset]:
        """Long-event match first; otherwise the MRU short-event match."""
        offset = trigger_block % self.blocks_per_region
        ways = self._sets[self._index(pc, offset)]
        tag = (pc, trigger_block)
        if tag in ways:
            ways.move_to_end(tag)
            return ways[tag]
        for stored_tag in reversed(ways):
            stored_pc, stored_block = stored_tag
            if stored_pc == pc and stored_block % self.blocks_per_region == offset:
                footprint = ways[stored_tag]
                ways.move_to_end(stored_tag)
                return footprint
        return None


class BingoPrefetcher(Prefetcher):
    name = "bingo"

    def __init__(self, blocks_per_region: int = DEFAULT_REGION_BLOCKS,
                 sets: int = 1024, ways: int = 16,
                 timeout: int = GENERATION_TIMEOUT) -> None:
        self.blocks_per_region = blocks_per_region
        self.pht = BingoPht(sets, ways, blocks_per_region)
        self.tracker = GenerationTracker(blocks_per_region, timeout)

    def _store(self, gen: Generation) -> None:
        self.pht.insert(gen.pc, gen.trigger_block, frozenset(gen.footprint))

    def on_trigger(self, event: AccessEvent, outcome: AccessOutcome) -> List[PrefetchRequest]:
        for gen in self.tracker.expire(event.seq):
            self._store(gen)
        gen, opened = self.tracker.observe(event.pc, outcome.block, event.seq)
        if not opened:
            return []
        pattern = self.pht.lookup(event.pc, outcome.block)
        if not pattern:
            return []
        return footprint_requests(pattern, outcome.block, gen.trigger_offset,
                                  self.blocks_per_region, self.name)

    def on_eviction(self, block: int, was_prefetched_unused: bool) -> None:
        gen = self.tracker.note_eviction(block)
        if gen is not None:
            self._store(gen)
