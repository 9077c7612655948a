"""The event-ordered simulation loop tying clock, cache, engine, and metrics.

Per event: first every prefetch whose completion is due is filled into
the cache (their evictions are delivered to the prefetcher before
anything else happens), then the demand access is classified, and
finally, if the access is a trigger, the prefetcher is consulted and the
surviving candidates are put in flight. Replaying the same trace with the
same configuration yields a byte-identical report.
"""

from __future__ import annotations

from typing import List, Optional, Sequence

from .cache import TRIGGER_KINDS, Cache
from .config import Config, build_prefetcher, cache_config
from .core import AccessEvent, SimClock, block_of
from .engine import Prefetcher, PrefetchEngine
from .metrics import MetricsCollector, MetricsReport


class Simulator:
    def __init__(self, cfg: Config, prefetcher: Optional[Prefetcher] = None,
                 total_events: int = 0, keep_issue_log: bool = False) -> None:
        self.cfg = cfg
        self.cache = Cache(cache_config(cfg))
        self.clock = SimClock(latency=cfg.get_int("sim.latency_events"))
        self.metrics = MetricsCollector(total_events,
                                        warmup_frac=cfg.get_float("sim.warmup_frac"))
        self.prefetcher = prefetcher if prefetcher is not None else build_prefetcher(cfg)
        self.engine = PrefetchEngine(
            self.prefetcher, self.cache, self.clock, self.metrics,
            degree=cfg.get_int("prefetcher.degree"),
            adaptive=cfg.get_bool("prefetcher.adaptive"),
            keep_issue_log=keep_issue_log,
        )
        self.block_size = cfg.get_int("cache.block_size")
        self._index = 0

    def _deliver_evictions(self) -> None:
        for block, was_unused in self.cache.drain_evictions():
            self.engine.note_eviction(block, was_unused)

    def step(self, event: AccessEvent) -> None:
        self.clock.advance(event.seq)
        for block in self.clock.drain(event.seq):
            self.cache.fill_prefetch(block)
        self._deliver_evictions()

        block = block_of(event.addr, self.block_size)
        outcome = self.cache.access(block, self.clock)
        self._deliver_evictions()
        self.engine.note_outcome(outcome)
        self.metrics.record_outcome(outcome, self._index)
        self._index += 1

        if outcome.kind in TRIGGER_KINDS:
            self.engine.dispatch(event, outcome)

    def run(self, events: Sequence[AccessEvent], source: str = "") -> MetricsReport:
        for event in events:
            self.step(event)
        return self.report(source)

    def report(self, source: str = "") -> MetricsReport:
        meta = getattr(self.prefetcher, "metadata", None)
        return self.metrics.finalize(
            prefetcher=self.prefetcher.name,
            degree=self.engine.configured_degree,
            source=source,
            metadata_reads=meta.reads if meta else 0,
            metadata_writes=meta.writes if meta else 0,
            metadata_bytes=meta.bytes if meta else 0,
        )


def run_simulation(cfg: Config, events: Sequence[AccessEvent],
                   source: str = "", prefetcher: Optional[Prefetcher] = None,
                   keep_issue_log: bool = False) -> MetricsReport:
    sim = Simulator(cfg, prefetcher=prefetcher, total_events=len(events),
                    keep_issue_log=keep_issue_log)
    return sim.run(events, source=source)
