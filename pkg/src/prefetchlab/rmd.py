"""Runahead metadata: degree harnessing for pairwise-correlating prefetchers.

Pairwise predictors map each event to a single next prediction, so
multi-degree prefetching normally chains lookups blindly and overruns
stream ends. RMD keeps a second table one step ahead: D1 predicts the
next event, D2 the next-but-one. The first prefetch uses D1 alone; each
further step is issued only while D1's chained prediction agrees with
D2's prediction from one step back, so the chain stops where the two
tables disagree instead of at an arbitrary fixed degree.

The harness runs over two backends: `delta` events are consecutive-access
deltas inside a spatial region, `address` events are global demand-miss
block addresses.
"""

from __future__ import annotations

from collections import OrderedDict
from typing import List, Optional

from .cache import DEMAND_MISS, AccessOutcome
from .core import AccessEvent, DEFAULT_REGION_BLOCKS, region_of
from .engine import Prefetcher, PrefetchRequest
from .tables import SetAssociativeTable

BACKEND_DELTA = "delta"
BACKEND_ADDRESS = "address"


class PairTable(SetAssociativeTable):
    """Event -> predicted event, bounded associative with LRU."""

    def __init__(self, entries: int = 4096, ways: int = 4) -> None:
        super().__init__(entries, ways)

    def get(self, event) -> Optional[int]:
        return self.lookup(event)

    def put(self, event, prediction) -> None:
        self.insert(event, prediction)


def rmd_train(d1: PairTable, d2: PairTable, prev2, prev1, current) -> None:
    """Record one step: D1[prev1]=current and D2[prev2]=current."""
    if prev1 is not None:
        d1.put(prev1, current)
    if prev2 is not None:
        d2.put(prev2, current)


def rmd_issue(trigger, d1: PairTable, d2: PairTable, cap: int) -> List:
    """Chain predictions while D1 and D2 agree; the first uses D1 only."""
    first = d1.get(trigger)
    if first is None or cap < 1:
        return []
    out = [first]
    back_two, back_one = trigger, first
    while len(out) < cap:
        ahead = d1.get(back_one)
        expected = d2.get(back_two)
        if ahead is None or expected is None or ahead != expected:
            break
        out.append(ahead)
        back_two, back_one = back_one, ahead
    return out


def naive_multidegree(trigger, d1: PairTable, fixed_degree: int) -> List:
    """Baseline: blindly re-index D1 with its own prediction."""
    out = []
    current = trigger
    for _ in range(fixed_degree):
        nxt = d1.get(current)
        if nxt is None:
            break
        out.append(nxt)
        current = nxt
    return out


class RmdPrefetcher(Prefetcher):
    name = "rmd"

    def __init__(self, backend: str = BACKEND_DELTA, cap: int = 8,
                 entries: int = 4096, ways: int = 4,
                 blocks_per_region: int = DEFAULT_REGION_BLOCKS,
                 region_rows: int = 64) -> None:
        if backend not in (BACKEND_DELTA, BACKEND_ADDRESS):
            raise ValueError(f"unknown rmd backend {backend!r}")
        self.backend = backend
        self.cap = cap
        self.d1 = PairTable(entries, ways)
        self.d2 = PairTable(entries, ways)
        self.blocks_per_region = blocks_per_region
        self.region_rows = region_rows
        # delta backend: per-region (last_block, prev_delta, prev_prev_delta)
        self._regions: "OrderedDict[int, list]" = OrderedDict()
        # address backend: last two demand-miss blocks
        self._prev1: Optional[int] = None
        self._prev2: Optional[int] = None

    # -- address backend -----------------------------------------------------

    def _address_trigger(self, block: int, is_miss: bool) -> List[PrefetchRequest]:
        chain = rmd_issue(block, self.d1, self.d2, self.cap)
        if is_miss:
            rmd_train(self.d1, self.d2, self._prev2, self._prev1, block)
            self._prev2, self._prev1 = self._prev1, block
        return [
            PrefetchRequest(b, rank=i + 1, source=self.name)
            for i, b in enumerate(chain)
        ]

    # -- delta backend ---------------------------------------------------------

    def _delta_trigger(self, block: int) -> List[PrefetchRequest]:
        region, _ = region_of(block, self.blocks_per_region)
        row = self._regions.get(region)
        if row is None:
            if len(self._regions) >= self.region_rows:
                self._regions.popitem(last=False)
            self._regions[region] = [block, None, None]
            return []
        self._regions.move_to_end(region)
        last_block, prev1, prev2 = row
        delta = block - last_block
        if delta == 0:
            return []
        rmd_train(self.d1, self.d2, prev2, prev1, delta)
        row[0] = block
        row[1], row[2] = delta, prev1
        chain = rmd_issue(delta, self.d1, self.d2, self.cap)
        requests = []
        target = block
        for i, d in enumerate(chain):
            target = target + d
            if target // self.blocks_per_region != region:
                break
            requests.append(PrefetchRequest(target, rank=i + 1, source=self.name))
        return requests

    def on_trigger(self, event: AccessEvent, outcome: AccessOutcome) -> List[PrefetchRequest]:
        if self.backend == BACKEND_ADDRESS:
            return self._address_trigger(outcome.block,
                                         outcome.kind == DEMAND_MISS)
        return self._delta_trigger(outcome.block)
