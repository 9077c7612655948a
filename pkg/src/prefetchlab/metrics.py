"""Run counters and the derived coverage / accuracy / timeliness report.

Definitions used throughout this package:

- coverage   = prefetch_hits / (prefetch_hits + demand_misses)
- accuracy   = useful / issued, where useful counts issued blocks that were
  later demand-touched
- timeliness = prefetch_hits / (prefetch_hits + late_prefetch_hits)

Outcome-class counters only count events at or after the warmup boundary
(a configurable fraction of the trace); issue-side and metadata counters
cover the whole run. Ratios with a zero denominator report 0.0. The report
schema is fixed: every key is present even when zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, List

from .cache import DEMAND_HIT, DEMAND_MISS, LATE_PREFETCH_HIT, PREFETCH_HIT, AccessOutcome

REPORT_FIELDS: List[str] = [
    "prefetcher",
    "degree",
    "source",
    "events",
    "warmup_events",
    "demand_hits",
    "demand_misses",
    "prefetch_hits",
    "late_prefetch_hits",
    "issued",
    "useful",
    "evicted_unused",
    "metadata_reads",
    "metadata_writes",
    "metadata_bytes",
    "coverage",
    "accuracy",
    "timeliness",
    "uncovered_miss_ratio",
    "first_issue_seq",
]

_RATIO_FIELDS = ("coverage", "accuracy", "timeliness", "uncovered_miss_ratio")


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


@dataclass(frozen=True)
class MetricsReport:
    prefetcher: str
    degree: int
    source: str
    events: int
    warmup_events: int
    demand_hits: int
    demand_misses: int
    prefetch_hits: int
    late_prefetch_hits: int
    issued: int
    useful: int
    evicted_unused: int
    metadata_reads: int
    metadata_writes: int
    metadata_bytes: int
    coverage: float
    accuracy: float
    timeliness: float
    uncovered_miss_ratio: float
    first_issue_seq: int

    def to_dict(self) -> Dict[str, object]:
        return {name: getattr(self, name) for name in REPORT_FIELDS}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def csv_row(self) -> str:
        cells = []
        for name in REPORT_FIELDS:
            value = getattr(self, name)
            if name in _RATIO_FIELDS:
                cells.append(f"{value:.6f}")
            else:
                cells.append(str(value))
        return ",".join(cells)

    @staticmethod
    def csv_header() -> str:
        return ",".join(REPORT_FIELDS)


class MetricsCollector:
    """Accumulates counters during a run and freezes them into a report."""

    def __init__(self, total_events: int, warmup_frac: float = 0.0) -> None:
        if not 0.0 <= warmup_frac < 1.0:
            raise ValueError("warmup_frac must be in [0, 1)")
        self.total_events = total_events
        self.warmup_events = int(total_events * warmup_frac)
        self.events_seen = 0
        self.demand_hits = 0
        self.demand_misses = 0
        self.prefetch_hits = 0
        self.late_prefetch_hits = 0
        self.issued = 0
        self.useful = 0
        self.evicted_unused = 0
        self.first_issue_seq = -1

    def record_outcome(self, outcome: AccessOutcome, index: int) -> None:
        self.events_seen += 1
        if index < self.warmup_events:
            return
        if outcome.kind == DEMAND_HIT:
            self.demand_hits += 1
        elif outcome.kind == DEMAND_MISS:
            self.demand_misses += 1
        elif outcome.kind == PREFETCH_HIT:
            self.prefetch_hits += 1
        elif outcome.kind == LATE_PREFETCH_HIT:
            self.late_prefetch_hits += 1
        else:
            raise ValueError(f"unknown outcome kind {outcome.kind!r}")

    def record_issue(self, seq: int) -> None:
        self.issued += 1
        if self.first_issue_seq < 0:
            self.first_issue_seq = seq

    def record_useful(self) -> None:
        self.useful += 1

    def record_evicted_unused(self) -> None:
        self.evicted_unused += 1

    def finalize(self, prefetcher: str, degree: int, source: str,
                 metadata_reads: int = 0, metadata_writes: int = 0,
                 metadata_bytes: int = 0) -> MetricsReport:
        return MetricsReport(
            prefetcher=prefetcher,
            degree=degree,
            source=source,
            events=self.events_seen,
            warmup_events=self.warmup_events,
            demand_hits=self.demand_hits,
            demand_misses=self.demand_misses,
            prefetch_hits=self.prefetch_hits,
            late_prefetch_hits=self.late_prefetch_hits,
            issued=self.issued,
            useful=self.useful,
            evicted_unused=self.evicted_unused,
            metadata_reads=metadata_reads,
            metadata_writes=metadata_writes,
            metadata_bytes=metadata_bytes,
            coverage=_ratio(self.prefetch_hits, self.prefetch_hits + self.demand_misses),
            accuracy=_ratio(self.useful, self.issued),
            timeliness=_ratio(self.prefetch_hits,
                              self.prefetch_hits + self.late_prefetch_hits),
            uncovered_miss_ratio=_ratio(self.demand_misses,
                                        self.prefetch_hits + self.demand_misses),
            first_issue_seq=self.first_issue_seq,
        )
