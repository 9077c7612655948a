"""Stride and offset prefetchers: IBSP, Sandbox, Best-Offset, and MLOP.

IBSP tracks per-instruction streams in a Reference Prediction Table and
issues only after three consecutive accesses produce two identical
strides. The offset family evaluates candidate offsets over fixed-length
windows of trigger accesses and issues block+offset without stream
detection: Sandbox accepts every offset whose accuracy clears a
threshold, Best-Offset keeps the single offset with the best timely
score, and MLOP scores every offset at multiple lookahead levels and
issues one best offset per level, smaller lookaheads first.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .cache import AccessOutcome
from .core import AccessEvent, DEFAULT_REGION_BLOCKS, region_of
from .engine import Prefetcher, PrefetchRequest
from .tables import SetAssociativeTable

DEFAULT_OFFSET_RANGE = 8
DEFAULT_WINDOW = 1024
DEFAULT_SP_THRESHOLD = 0.25
DEFAULT_MLOP_LEVELS = 4
DEFAULT_AMT_ROWS = 64


def candidate_offsets(offset_range: int) -> List[int]:
    """Offsets -range..+range excluding 0."""
    if offset_range < 1:
        raise ValueError("offset_range must be >= 1")
    return [o for o in range(-offset_range, offset_range + 1) if o != 0]


# ---------------------------------------------------------------------------
# IBSP


@dataclass
class RptEntry:
    last_block: int
    last_stride: int = 0  # 0 means no stride observed yet


class IbspPrefetcher(Prefetcher):
    name = "ibsp"

    def __init__(self, entries: int = 256, ways: int = 4, lookahead: int = 4) -> None:
        if lookahead < 1:
            raise ValueError("lookahead must be >= 1")
        self.rpt = SetAssociativeTable(entries, ways)
        self.lookahead = lookahead

    def on_trigger(self, event: AccessEvent, outcome: AccessOutcome) -> List[PrefetchRequest]:
        block = outcome.block
        entry: Optional[RptEntry] = self.rpt.lookup(event.pc)
        if entry is None:
            self.rpt.insert(event.pc, RptEntry(last_block=block))
            return []
        stride = block - entry.last_block
        requests: List[PrefetchRequest] = []
        if stride != 0 and stride == entry.last_stride:
            requests = [
                PrefetchRequest(block + stride * i, rank=i, source=self.name)
                for i in range(1, self.lookahead + 1)
            ]
        entry.last_block = block
        entry.last_stride = stride
        return requests


# ---------------------------------------------------------------------------
# Sandbox (accuracy-gated offsets)


def sp_evaluate(window: Sequence[int], offsets: Sequence[int],
                threshold: float) -> set[int]:
    """Accept offsets whose would-have-prefetched accuracy clears threshold.

    For offset o, accuracy is the fraction of accesses x in the window for
    which x - o was accessed earlier in the same window.
    """
    accepted: set[int] = set()
    if not window:
        return accepted
    for o in offsets:
        covered = 0
        earlier: set[int] = set()
        for x in window:
            if x - o in earlier:
                covered += 1
            earlier.add(x)
        if covered / len(window) >= threshold:
            accepted.add(o)
    return accepted


class SandboxPrefetcher(Prefetcher):
    name = "sp"

    def __init__(self, offset_range: int = DEFAULT_OFFSET_RANGE,
                 threshold: float = DEFAULT_SP_THRESHOLD,
                 window: int = DEFAULT_WINDOW) -> None:
        self.offsets = candidate_offsets(offset_range)
        self.threshold = threshold
        self.window_size = window
        self._window: List[int] = []
        # accepted offsets from the last closed window, in issue order
        self.accepted: List[int] = []

    def on_trigger(self, event: AccessEvent, outcome: AccessOutcome) -> List[PrefetchRequest]:
        block = outcome.block
        requests = [
            PrefetchRequest(block + o, rank=i + 1, source=self.name)
            for i, o in enumerate(self.accepted)
        ]
        self._window.append(block)
        if len(self._window) >= self.window_size:
            chosen = sp_evaluate(self._window, self.offsets, self.threshold)
            self.accepted = sorted(chosen, key=lambda o: (abs(o), o < 0))
            self._window = []
        return requests


# ---------------------------------------------------------------------------
# Best-Offset (timeliness-gated single offset)


def bop_select(window: Sequence[Tuple[int, int]], offsets: Sequence[int],
               timely_distance: int) -> Optional[int]:
    """Best offset counting only covers that would have been timely.

    window holds (block, seq) pairs. Access x at seq s counts for offset o
    if x - o appeared at least `timely_distance` events before s. Ties
    prefer the smallest magnitude, then the positive offset. Returns None
    when no offset scores.
    """
    scores: Dict[int, int] = {o: 0 for o in offsets}
    first_seen: Dict[int, int] = {}
    for block, seq in window:
        for o in offsets:
            prev = first_seen.get(block - o)
            if prev is not None and seq - prev >= timely_distance:
                scores[o] += 1
        if block not in first_seen:
            first_seen[block] = seq
    best = max(scores.items(), key=lambda kv: (kv[1], -abs(kv[0]), kv[0] > 0))
    return best[0] if best[1] > 0 else None


class BestOffsetPrefetcher(Prefetcher):
    name = "bop"

    def __init__(self, offset_range: int = DEFAULT_OFFSET_RANGE,
                 window: int = DEFAULT_WINDOW,
                 timely_distance: int = 32) -> None:
        self.offsets = candidate_offsets(offset_range)
        self.window_size = window
        self.timely_distance = timely_distance
        self._window: List[Tuple[int, int]] = []
        self.best: Optional[int] = None

    def on_trigger(self, event: AccessEvent, outcome: AccessOutcome) -> List[PrefetchRequest]:
        block = outcome.block
        requests = []
        if self.best is not None:
            requests = [PrefetchRequest(block + self.best, rank=1, source=self.name)]
        self._window.append((block, event.seq))
        if len(self._window) >= self.window_size:
            self.best = bop_select(self._window, self.offsets, self.timely_distance)
            self._window = []
        return requests


# ---------------------------------------------------------------------------
# MLOP


class AmtRow:
    """One access map: per-offset bit plus the row-access stamp when set."""

    __slots__ = ("stamps", "counter")

    def __init__(self) -> None:
        self.stamps: Dict[int, int] = {}
        self.counter = 0


class MlopPrefetcher(Prefetcher):
    """Multi-lookahead offset prefetcher with a double-buffered score matrix.

    During a window the live matrix trains; at the window boundary one
    best offset per lookahead level is frozen and used for issuing during
    the next window. Requests carry rank = level so smaller lookaheads
    are issued first.
    """

    name = "mlop"

    def __init__(self, offset_range: int = DEFAULT_OFFSET_RANGE,
                 levels: int = DEFAULT_MLOP_LEVELS,
                 window: int = DEFAULT_WINDOW,
                 amt_rows: int = DEFAULT_AMT_ROWS,
                 blocks_per_region: int = DEFAULT_REGION_BLOCKS) -> None:
        if levels < 1:
            raise ValueError("levels must be >= 1")
        self.offsets = candidate_offsets(offset_range)
        self.levels = levels
        self.window_size = window
        self.amt_rows = amt_rows
        self.blocks_per_region = blocks_per_region
        self._amt: OrderedDict[int, AmtRow] = OrderedDict()
        self._scores: Dict[int, List[int]] = self._fresh_scores()
        self._seen = 0
        # frozen (level, offset) selections from the last closed window
        self.selections: List[Tuple[int, int]] = []

    def _fresh_scores(self) -> Dict[int, List[int]]:
        return {o: [0] * (self.levels + 1) for o in self.offsets}

    def _row(self, region: int) -> AmtRow:
        row = self._amt.get(region)
        if row is None:
            if len(self._amt) >= self.amt_rows:
                self._amt.popitem(last=False)
            row = AmtRow()
            self._amt[region] = row
        else:
            self._amt.move_to_end(region)
        return row

    def update_scores(self, block: int) -> None:
        region, offset = region_of(block, self.blocks_per_region)
        row = self._row(region)
        row.counter += 1
        for o in self.offsets:
            source = offset - o
            if not 0 <= source < self.blocks_per_region:
                continue
            stamp = row.stamps.get(source)
            if stamp is None:
                continue
            depth = min(row.counter - stamp, self.levels)
            column = self._scores[o]
            for level in range(1, depth + 1):
                column[level] += 1
        row.stamps[offset] = row.counter

    def select(self) -> List[Tuple[int, int]]:
        """Best offset per level (ascending); ties prefer small magnitude, then positive."""
        out: List[Tuple[int, int]] = []
        for level in range(1, self.levels + 1):
            best_offset = None
            best_score = 0
            for o in sorted(self.offsets, key=lambda o: (abs(o), o < 0)):
                score = self._scores[o][level]
                if score > best_score:
                    best_score = score
                    best_offset = o
            if best_offset is not None:
                out.append((level, best_offset))
        return out

    def on_trigger(self, event: AccessEvent, outcome: AccessOutcome) -> List[PrefetchRequest]:
        block = outcome.block
        requests = [
            PrefetchRequest(block + o, rank=level, source=self.name)
            for level, o in self.selections
        ]
        self.update_scores(block)
        self._seen += 1
        if self._seen >= self.window_size:
            self.selections = self.select()
            self._scores = self._fresh_scores()
            self._amt.clear()
            self._seen = 0
        return requests
