"""Prefetch engine: hosts one prefetcher behind a uniform interface.

The engine routes trigger accesses (demand misses and prefetch hits) to
the active prefetcher, filters candidates that are already resident, in
flight, or duplicated within the batch, truncates to the degree budget in
ascending rank order, and registers the survivors with the clock. It also
resolves issued prefetches into useful / useless outcomes for the
accuracy metric and the optional adaptive-degree controller.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional

from .cache import Cache, LATE_PREFETCH_HIT, PREFETCH_HIT, AccessOutcome
from .core import AccessEvent, SimClock
from .metrics import MetricsCollector

ADAPTIVE_WINDOW = 256
ADAPTIVE_LOW = 0.4
ADAPTIVE_HIGH = 0.8


@dataclass(frozen=True)
class PrefetchRequest:
    """A predicted block plus provenance. rank 1 is expected soonest.

    `delay` models metadata stalls: the request leaves the prefetcher
    `delay` events after its trigger, so it completes at
    trigger_seq + delay + latency.
    """

    block: int
    rank: int = 1
    source: str = ""
    delay: int = 0


class Prefetcher:
    """Base prefetcher. Subclasses react to triggers and evictions.

    on_trigger must not mutate cache state; it only reads the outcome and
    returns an ordered candidate list. Prefetchers that model off-chip
    metadata expose a MetadataCounters instance as `.metadata`.
    """

    name = "none"
    metadata = None

    def on_trigger(self, event: AccessEvent, outcome: AccessOutcome) -> List[PrefetchRequest]:
        return []

    def on_eviction(self, block: int, was_prefetched_unused: bool) -> None:
        pass


class PrefetchEngine:
    def __init__(self, prefetcher: Prefetcher, cache: Cache, clock: SimClock,
                 metrics: MetricsCollector, degree: int = 4,
                 adaptive: bool = False, keep_issue_log: bool = False) -> None:
        if degree < 0:
            raise ValueError("degree must be >= 0")
        self.prefetcher = prefetcher
        self.cache = cache
        self.clock = clock
        self.metrics = metrics
        self.configured_degree = degree
        self.degree = degree
        self.adaptive = adaptive
        self.issue_log: Optional[List[tuple]] = [] if keep_issue_log else None
        self._pending: set[int] = set()  # issued, not yet touched or evicted
        self._window: deque = deque(maxlen=ADAPTIVE_WINDOW)
        self._since_adjust = 0

    def set_degree(self, degree: int) -> None:
        if degree < 0:
            raise ValueError("degree must be >= 0")
        self.configured_degree = degree
        self.degree = degree

    def dispatch(self, event: AccessEvent, outcome: AccessOutcome) -> List[PrefetchRequest]:
        candidates = self.prefetcher.on_trigger(event, outcome)
        issued: List[PrefetchRequest] = []
        if not candidates or self.degree == 0:
            # degree 0 disables issuing; training above still happened
            return issued
        seen: set[int] = set()
        for req in sorted(candidates, key=lambda r: r.rank):
            if len(issued) >= self.degree:
                break
            if req.block in seen:
                continue
            seen.add(req.block)
            if self.cache.resident(req.block) or self.clock.in_flight(req.block):
                continue
            self.clock.schedule(req.block, req.delay)
            self._pending.add(req.block)
            self.metrics.record_issue(event.seq + req.delay)
            if self.issue_log is not None:
                self.issue_log.append((event.seq + req.delay, req.block, req.source))
            issued.append(req)
        return issued

    # -- resolution of issued prefetches ------------------------------------

    def note_outcome(self, outcome: AccessOutcome) -> None:
        if outcome.kind in (PREFETCH_HIT, LATE_PREFETCH_HIT):
            if outcome.block in self._pending:
                self._pending.discard(outcome.block)
                self.metrics.record_useful()
                self._resolve(True)

    def note_eviction(self, block: int, was_prefetched_unused: bool) -> None:
        if was_prefetched_unused:
            self.metrics.record_evicted_unused()
            if block in self._pending:
                self._pending.discard(block)
                self._resolve(False)
        self.prefetcher.on_eviction(block, was_prefetched_unused)

    def _resolve(self, useful: bool) -> None:
        if not self.adaptive:
            return
        self._window.append(1 if useful else 0)
        self._since_adjust += 1
        if len(self._window) < ADAPTIVE_WINDOW or self._since_adjust < ADAPTIVE_WINDOW:
            return
        accuracy = sum(self._window) / len(self._window)
        if accuracy < ADAPTIVE_LOW:
            self.degree = max(1, self.degree // 2)
        elif accuracy > ADAPTIVE_HIGH:
            self.degree = min(self.configured_degree, max(1, self.degree * 2))
        self._since_adjust = 0
