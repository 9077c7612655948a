"""prefetchlab: trace-driven cache and hardware data-prefetcher simulation."""

from .cache import (
    DEMAND_HIT,
    DEMAND_MISS,
    LATE_PREFETCH_HIT,
    PREFETCH_HIT,
    AccessOutcome,
    Cache,
    CacheConfig,
)
from .config import Config, ConfigError, PREFETCHER_NAMES, build_prefetcher
from .core import AccessEvent, SimClock, TraceFormatError, block_of, read_trace, region_of
from .engine import PrefetchEngine, Prefetcher, PrefetchRequest
from .metrics import MetricsReport
from .sim import Simulator, run_simulation
from .workloads import WorkloadSpec, generate, parse_workload

__all__ = [
    "AccessEvent",
    "AccessOutcome",
    "Cache",
    "CacheConfig",
    "Config",
    "ConfigError",
    "DEMAND_HIT",
    "DEMAND_MISS",
    "LATE_PREFETCH_HIT",
    "MetricsReport",
    "PREFETCH_HIT",
    "PREFETCHER_NAMES",
    "PrefetchEngine",
    "Prefetcher",
    "PrefetchRequest",
    "SimClock",
    "Simulator",
    "TraceFormatError",
    "WorkloadSpec",
    "block_of",
    "build_prefetcher",
    "generate",
    "parse_workload",
    "read_trace",
    "region_of",
    "run_simulation",
]

__version__ = "0.1.0"
