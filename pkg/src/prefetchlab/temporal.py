"""Temporal prefetchers: STMS, Domino, and ISB.

These record the demand-miss sequence and replay it. Their metadata is
too large for on-chip storage, so every table access is charged to an
off-chip traffic model: one 64-byte transfer per read or update. STMS
pays two serial reads (index, then history) before the first prefetch of
a stream; Domino's enhanced index carries the first prefetch candidate
inline, so its first prefetch leaves one metadata latency earlier. ISB
keeps its mappings cached on chip while a page is "resident" (an LRU set
of recently touched pages standing in for TLB synchronization) and pays
off-chip traffic only on page refetch and writeback.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .cache import DEMAND_MISS, AccessOutcome
from .core import AccessEvent
from .engine import Prefetcher, PrefetchRequest
from .tables import SetAssociativeTable, fold_key

BYTES_PER_METADATA_ACCESS = 64


class MetadataCounters:
    """Off-chip metadata traffic: reads, writes, and stream-start accounting."""

    def __init__(self) -> None:
        self.reads = 0
        self.writes = 0
        self.stream_starts = 0
        self.stream_reads = 0

    def read(self, n: int = 1) -> None:
        self.reads += n

    def write(self, n: int = 1) -> None:
        self.writes += n

    def stream_start(self, serial_reads: int = 2) -> None:
        self.stream_starts += 1
        self.stream_reads += serial_reads
        self.reads += serial_reads

    @property
    def bytes(self) -> int:
        return (self.reads + self.writes) * BYTES_PER_METADATA_ACCESS


class HistoryTable:
    """Circular FIFO of miss addresses addressed by monotone positions.

    Positions grow without bound; a position is readable while it has not
    been overwritten, i.e. while head - capacity <= pos < head. That makes
    dangling index pointers detectable by plain position arithmetic.
    """

    def __init__(self, capacity: int) -> None:
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._buf: List[Optional[int]] = [None] * capacity
        self.head = 0  # next append position

    def append(self, block: int) -> int:
        pos = self.head
        self._buf[pos % self.capacity] = block
        self.head += 1
        return pos

    def at(self, pos: int) -> Optional[int]:
        if pos < 0 or pos >= self.head or pos < self.head - self.capacity:
            return None
        return self._buf[pos % self.capacity]

    def read_forward(self, pos: int, count: int) -> List[int]:
        """Up to `count` addresses after pos, stopping at the head."""
        out = []
        for p in range(pos + 1, min(pos + 1 + count, self.head)):
            value = self.at(p)
            if value is None:
                break
            out.append(value)
        return out


# ---------------------------------------------------------------------------
# STMS


class StmsPrefetcher(Prefetcher):
    name = "stms"

    def __init__(self, history_entries: int = 1 << 16,
                 index_entries: int = 1 << 15, index_ways: int = 8,
                 degree: int = 8, metadata_latency: int = 0) -> None:
        self.history = HistoryTable(history_entries)
        self.index = SetAssociativeTable(index_entries, index_ways)
        self.degree = degree
        self.metadata_latency = metadata_latency
        self.metadata = MetadataCounters()
        # (trigger seq, first issue event) per started stream, for tests
        self.stream_log: List[Tuple[int, int]] = []

    def _predict(self, block: int, seq: int) -> List[PrefetchRequest]:
        pos = self.index.lookup(block)
        if pos is None or self.history.at(pos) != block:
            # index probe found nothing usable (miss or dangling pointer)
            self.metadata.read(1)
            return []
        self.metadata.stream_start(serial_reads=2)
        delay = 2 * self.metadata_latency
        addresses = self.history.read_forward(pos, self.degree)
        if addresses:
            self.stream_log.append((seq, seq + delay))
        return [
            PrefetchRequest(addr, rank=i + 1, source=self.name, delay=delay)
            for i, addr in enumerate(addresses)
        ]

    def _train(self, block: int) -> None:
        pos = self.history.append(block)
        self.index.insert(block, pos)
        self.metadata.write(2)  # history append + index update

    def on_trigger(self, event: AccessEvent, outcome: AccessOutcome) -> List[PrefetchRequest]:
        requests = self._predict(outcome.block, event.seq)
        if outcome.kind == DEMAND_MISS:
            self._train(outcome.block)
        return requests


# ---------------------------------------------------------------------------
# Domino


@dataclass
class SuperEntry:
    """EIT super-entry: one miss address plus its observed successors."""

    tag: int
    # successor block -> position of the tag's occurrence; order is LRU->MRU
    entries: "OrderedDict[int, int]" = field(default_factory=OrderedDict)


class EnhancedIndexTable:
    """Rows of super-entries with LRU at both levels."""

    def __init__(self, rows: int, super_entries: int, entries: int) -> None:
        self.rows = rows
        self.super_entries = super_entries
        self.entries = entries
        self._rows: list[OrderedDict] = [OrderedDict() for _ in range(rows)]

    def _row(self, block: int) -> OrderedDict:
        return self._rows[fold_key(block) % self.rows]

    def find(self, block: int) -> Optional[SuperEntry]:
        row = self._row(block)
        se = row.get(block)
        if se is not None:
            row.move_to_end(block)
        return se

    def update(self, tag: int, successor: int, pointer: int) -> None:
        row = self._row(tag)
        se = row.get(tag)
        if se is None:
            if len(row) >= self.super_entries:
                row.popitem(last=False)
            se = SuperEntry(tag=tag)
            row[tag] = se
        row.move_to_end(tag)
        if successor not in se.entries and len(se.entries) >= self.entries:
            se.entries.popitem(last=False)
        se.entries[successor] = pointer
        se.entries.move_to_end(successor)


class DominoPrefetcher(Prefetcher):
    """Two-step stream lookup: fetch a row and prefetch the MRU successor
    immediately; confirm with the next trigger and stream from the history.
    """

    name = "domino"

    def __init__(self, history_entries: int = 1 << 16, rows: int = 1 << 14,
                 super_entries: int = 4, entries: int = 4,
                 degree: int = 8, metadata_latency: int = 0) -> None:
        self.history = HistoryTable(history_entries)
        self.eit = EnhancedIndexTable(rows, super_entries, entries)
        self.degree = degree
        self.metadata_latency = metadata_latency
        self.metadata = MetadataCounters()
        self._held: Optional[Tuple[int, List[Tuple[int, int]]]] = None
        self._last_miss: Optional[Tuple[int, int]] = None  # (block, position)
        self.stream_log: List[Tuple[int, int]] = []

    def _step_one(self, block: int, seq: int) -> List[PrefetchRequest]:
        """Fetch the row for `block`; on a super-entry hit prefetch its MRU entry."""
        self.metadata.read(1)
        se = self.eit.find(block)
        if se is None or not se.entries:
            self._held = None
            return []
        snapshot = list(se.entries.items())
        self._held = (block, snapshot)
        mru_addr = snapshot[-1][0]
        delay = self.metadata_latency
        self.metadata.stream_start(serial_reads=1)
        self.stream_log.append((seq, seq + delay))
        return [PrefetchRequest(mru_addr, rank=1, source=self.name, delay=delay)]

    def _step_two(self, block: int, seq: int) -> Optional[List[PrefetchRequest]]:
        """Match the trigger against the held super-entry; stream on success."""
        tag, entries = self._held
        pointer = next((p for a, p in entries if a == block), None)
        self._held = None
        if pointer is None:
            return None
        if self.history.at(pointer) != tag or self.history.at(pointer + 1) != block:
            return None  # overwritten history; fall back to a fresh lookup
        self.metadata.read(1)  # history row
        delay = self.metadata_latency
        addresses = self.history.read_forward(pointer + 1, self.degree)
        if addresses:
            self.stream_log.append((seq, seq + delay))
        return [
            PrefetchRequest(addr, rank=i + 1, source=self.name, delay=delay)
            for i, addr in enumerate(addresses)
        ]

    def _train(self, block: int) -> None:
        pos = self.history.append(block)
        if self._last_miss is not None:
            prev_block, prev_pos = self._last_miss
            if prev_block != block:
                self.eit.update(prev_block, block, prev_pos)
        self._last_miss = (block, pos)
        self.metadata.write(2)  # history append + EIT update

    def on_trigger(self, event: AccessEvent, outcome: AccessOutcome) -> List[PrefetchRequest]:
        block = outcome.block
        requests = None
        if self._held is not None:
            requests = self._step_two(block, event.seq)
        if requests is None:
            requests = self._step_one(block, event.seq)
        if outcome.kind == DEMAND_MISS:
            self._train(block)
        return requests


# ---------------------------------------------------------------------------
# ISB


class StructuralMaps:
    """Bidirectional physical/structural mapping with chunked allocation."""

    def __init__(self, chunk: int = 16) -> None:
        if chunk < 2:
            raise ValueError("chunk must be >= 2")
        self.chunk = chunk
        self.psam: Dict[int, int] = {}
        self.spam: Dict[int, int] = {}
        self._next_chunk = 0

    def _bind(self, block: int, saddr: int) -> None:
        old = self.psam.get(block)
        if old is not None and old != saddr:
            del self.spam[old]
        self.psam[block] = saddr
        self.spam[saddr] = block

    def _fresh(self, block: int) -> int:
        saddr = self._next_chunk * self.chunk
        self._next_chunk += 1
        self._bind(block, saddr)
        return saddr

    def place_pair(self, first: int, second: int) -> None:
        """Map `second` right after `first` in structural space when possible."""
        saddr = self.psam.get(first)
        if saddr is None:
            saddr = self._fresh(first)
        target = saddr + 1
        if target % self.chunk == 0:
            # the successor slot would cross into another chunk
            self._fresh(second)
            return
        occupant = self.spam.get(target)
        if occupant is None or occupant == second:
            self._bind(second, target)
        else:
            self._fresh(second)

    def successors(self, block: int, count: int) -> List[int]:
        """Mapped blocks in the `count` structural slots after `block`,
        skipping holes, without leaving the chunk."""
        saddr = self.psam.get(block)
        if saddr is None:
            return []
        chunk_id = saddr // self.chunk
        out = []
        for s in range(saddr + 1, saddr + 1 + count):
            if s // self.chunk != chunk_id:
                break
            mapped = self.spam.get(s)
            if mapped is not None:
                out.append(mapped)
        return out

    def check_inverse(self) -> None:
        for block, saddr in self.psam.items():
            assert self.spam.get(saddr) == block, (block, saddr)
        for saddr, block in self.spam.items():
            assert self.psam.get(block) == saddr, (saddr, block)


class IsbPrefetcher(Prefetcher):
    """Irregular stream buffer: per-pc miss pairs linearized structurally."""

    name = "isb"

    # 4 KB pages at 64-byte blocks
    BLOCKS_PER_PAGE = 64

    def __init__(self, chunk: int = 16, degree: int = 8,
                 resident_pages: int = 1024) -> None:
        self.maps = StructuralMaps(chunk)
        self.degree = degree
        self.resident_pages = resident_pages
        self.metadata = MetadataCounters()
        self._resident: "OrderedDict[int, bool]" = OrderedDict()
        self._last_by_pc: Dict[int, int] = {}

    def _touch_page(self, block: int) -> None:
        page = block // self.BLOCKS_PER_PAGE
        if page in self._resident:
            self._resident.move_to_end(page)
            return
        self.metadata.read(1)  # fetch this page's metadata on chip
        if len(self._resident) >= self.resident_pages:
            self._resident.popitem(last=False)
            self.metadata.write(1)  # write back the evicted page's metadata
        self._resident[page] = True

    def on_trigger(self, event: AccessEvent, outcome: AccessOutcome) -> List[PrefetchRequest]:
        block = outcome.block
        self._touch_page(block)
        requests = [
            PrefetchRequest(b, rank=i + 1, source=self.name)
            for i, b in enumerate(self.maps.successors(block, self.degree))
        ]
        if outcome.kind == DEMAND_MISS:
            prev = self._last_by_pc.get(event.pc)
            self._last_by_pc[event.pc] = block
            if prev is not None and prev != block:
                self.maps.place_pair(prev, block)
        return requests
