"""Spatio-temporal streaming (STeMS): replaying the total miss order.

A temporal stream of region triggers is recorded in a Region Miss Order
Buffer (RMOB) while per-generation ordered offset lists go to a Pattern
Sequence Table (PST). Entries carry delta fields counting how many
events of the other stream interleave before the next event of their
own stream. On a recurring trigger the reconstruction walks the RMOB
and re-interleaves offset lists with subsequent triggers into a single
merged sequence in recorded order.

Interpretation notes (the source material describes the delta fields but
not the merge): each PST item's delta counts the temporal events between
the previous access of the same generation (the trigger, for the first
item) and that access; when several generations have items due between
the same pair of triggers, they are emitted in generation-trigger order.
Traces whose interleaving follows that discipline reconstruct exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from .cache import DEMAND_MISS, AccessOutcome
from .core import AccessEvent, DEFAULT_REGION_BLOCKS, region_of
from .engine import Prefetcher, PrefetchRequest
from .spatial import GENERATION_TIMEOUT, Generation, GenerationTracker
from .tables import SetAssociativeTable
from .temporal import HistoryTable, MetadataCounters


@dataclass
class RmobRecord:
    pc: int
    block: int
    delta: int = 0  # spatial events before the next recorded trigger


class _Cursor:
    """Replay position inside one generation's ordered offset list."""

    __slots__ = ("base", "items", "idx", "due")

    def __init__(self, base: int, items: Tuple[Tuple[int, int], ...], gap: int) -> None:
        self.base = base
        self.items = items
        self.idx = 0
        self.due = gap + items[0][1]

    def emit_due(self, gap: int, out: List[int], limit: int) -> None:
        while self.idx < len(self.items) and self.due == gap and len(out) < limit:
            offset, _ = self.items[self.idx]
            out.append(self.base + offset)
            self.idx += 1
            if self.idx < len(self.items):
                self.due += self.items[self.idx][1]


class StemsPrefetcher(Prefetcher):
    name = "stems"

    def __init__(self, blocks_per_region: int = DEFAULT_REGION_BLOCKS,
                 rmob_entries: int = 1 << 16, pst_entries: int = 2048,
                 pst_ways: int = 8, degree: int = 16,
                 timeout: int = GENERATION_TIMEOUT,
                 metadata_latency: int = 0) -> None:
        self.blocks_per_region = blocks_per_region
        self.rmob = HistoryTable(rmob_entries)
        self.rmob_index = SetAssociativeTable(rmob_entries // 2, 8)
        self.pst = SetAssociativeTable(pst_entries, pst_ways)
        self.tracker = GenerationTracker(blocks_per_region, timeout)
        self.degree = degree
        self.metadata_latency = metadata_latency
        self.metadata = MetadataCounters()
        self._tpos = 0            # temporal events (region triggers) so far
        self._spatial_since = 0   # spatial events since the last RMOB append
        self._last_record: Optional[RmobRecord] = None
        # raw reconstruction per predicting trigger, for order-fidelity tests
        self.reconstruction_log: List[Tuple[int, List[int]]] = []

    # -- recording -----------------------------------------------------------

    def _store(self, gen: Generation) -> None:
        deltas: List[Tuple[int, int]] = []
        prev_stamp = gen.trigger_stamp
        for offset, stamp in gen.items:
            deltas.append((offset, stamp - prev_stamp))
            prev_stamp = stamp
        self.pst.insert((gen.pc, gen.trigger_offset), tuple(deltas))
        self.metadata.write(1)

    # -- reconstruction ------------------------------------------------------

    def _pst_items(self, rec: RmobRecord) -> Optional[Tuple[Tuple[int, int], ...]]:
        _, offset = region_of(rec.block, self.blocks_per_region)
        items = self.pst.lookup((rec.pc, offset))
        self.metadata.read(1)
        return items

    def reconstruct(self, start_pos: int, limit: int) -> List[int]:
        """Merged block sequence recorded after the trigger at start_pos."""
        out: List[int] = []
        cursors: List[_Cursor] = []
        gap = 0
        pos = start_pos
        while len(out) < limit:
            rec = self.rmob.at(pos)
            if rec is None:
                break
            if pos != start_pos:
                out.append(rec.block)
                if len(out) >= limit:
                    break
            items = self._pst_items(rec)
            if items:
                cursors.append(_Cursor(rec.block - rec.block %
                                       self.blocks_per_region, items, gap))
            for cursor in cursors:
                cursor.emit_due(gap, out, limit)
            gap += 1
            pos += 1
        return out

    # -- trigger handling ------------------------------------------------------

    def on_trigger(self, event: AccessEvent, outcome: AccessOutcome) -> List[PrefetchRequest]:
        for gen in self.tracker.expire(event.seq):
            self._store(gen)
        block = outcome.block
        gen, opened = self.tracker.observe(event.pc, block, event.seq,
                                           stamp=self._tpos)
        if not opened:
            # spatial event inside an open generation
            self._spatial_since += 1
            return []

        self._tpos += 1
        gen.trigger_stamp = self._tpos

        requests = self._predict(block, event.seq)

        if outcome.kind == DEMAND_MISS:
            if self._last_record is not None:
                self._last_record.delta = self._spatial_since
            record = RmobRecord(pc=event.pc, block=block)
            pos = self.rmob.append(record)
            self.rmob_index.insert(block, pos)
            self._last_record = record
            self._spatial_since = 0
            self.metadata.write(2)  # RMOB append + index update
        return requests

    def _predict(self, block: int, seq: int) -> List[PrefetchRequest]:
        pos = self.rmob_index.lookup(block)
        rec = self.rmob.at(pos) if pos is not None else None
        if rec is None or rec.block != block:
            self.metadata.read(1)
            return []
        self.metadata.stream_start(serial_reads=2)
        merged = self.reconstruct(pos, self.degree)
        self.reconstruction_log.append((seq, merged))
        delay = 2 * self.metadata_latency
        return [
            PrefetchRequest(b, rank=i + 1, source=self.name, delay=delay)
            for i, b in enumerate(merged)
        ]

    def on_eviction(self, block: int, was_prefetched_unused: bool) -> None:
        gen = self.tracker.note_eviction(block)
        if gen is not None:
            self._store(gen)
