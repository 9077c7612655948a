import random

from prefetchlab.cache import Cache, CacheConfig, DEMAND_MISS, AccessOutcome
from prefetchlab.core import AccessEvent, SimClock
from prefetchlab.engine import PrefetchEngine, Prefetcher, PrefetchRequest
from prefetchlab.metrics import MetricsCollector
from prefetchlab.workloads import gen_strided

from helpers import mk_cfg, run_sim


class ScriptedPrefetcher(Prefetcher):
    """Returns a canned candidate list and counts training calls."""

    name = "scripted"

    def __init__(self, batches):
        self.batches = list(batches)
        self.trained = 0

    def on_trigger(self, event, outcome):
        self.trained += 1
        if not self.batches:
            return []
        return self.batches.pop(0)


def make_engine(prefetcher, degree=4, adaptive=False, sets=16, ways=4):
    cache = Cache(CacheConfig(sets=sets, ways=ways))
    clock = SimClock(latency=0)
    metrics = MetricsCollector(total_events=1000)
    engine = PrefetchEngine(prefetcher, cache, clock, metrics,
                            degree=degree, adaptive=adaptive)
    return engine, cache, clock, metrics


def trigger(engine, seq=0, block=0):
    event = AccessEvent(pc=1, addr=block * 64, seq=seq)
    outcome = AccessOutcome(kind=DEMAND_MISS, block=block)
    return engine.dispatch(event, outcome)


def reqs(*blocks):
    return [PrefetchRequest(b, rank=i + 1) for i, b in enumerate(blocks)]


def test_truncates_to_degree_in_rank_order():
    p = ScriptedPrefetcher([reqs(101, 102, 103)])
    engine, _, clock, _ = make_engine(p, degree=2)
    issued = trigger(engine)
    assert [r.block for r in issued] == [101, 102]
    assert clock.in_flight(101) and clock.in_flight(102)
    assert not clock.in_flight(103)


def test_filters_resident_blocks():
    p = ScriptedPrefetcher([reqs(50)])
    engine, cache, clock, _ = make_engine(p)
    cache.access(50, clock)
    assert trigger(engine, block=1) == []


def test_deduplicates_candidates():
    p = ScriptedPrefetcher([[PrefetchRequest(70, rank=1), PrefetchRequest(70, rank=2)]])
    engine, _, _, metrics = make_engine(p)
    issued = trigger(engine)
    assert [r.block for r in issued] == [70]
    assert metrics.issued == 1


def test_in_flight_candidates_filtered():
    p = ScriptedPrefetcher([reqs(70), reqs(70, 71)])
    engine, _, _, _ = make_engine(p)
    trigger(engine, seq=0)
    issued = trigger(engine, seq=1, block=1)
    assert [r.block for r in issued] == [71]


def test_degree_zero_disables_issuing_but_trains():
    p = ScriptedPrefetcher([reqs(1), reqs(2), reqs(3)])
    engine, _, _, metrics = make_engine(p, degree=0)
    for seq in range(3):
        assert trigger(engine, seq=seq, block=100 + seq) == []
    assert p.trained == 3
    assert metrics.issued == 0


def test_degree_larger_than_candidates():
    p = ScriptedPrefetcher([reqs(1, 2, 3)])
    engine, _, _, _ = make_engine(p, degree=8)
    assert len(trigger(engine)) == 3


def test_degree_change_takes_effect_next_dispatch():
    # replay oracle: per-event issue counts under a mid-run set_degree
    batches = [reqs(10, 11, 12, 13), reqs(20, 21, 22, 23), reqs(30, 31, 32, 33)]
    p = ScriptedPrefetcher([list(b) for b in batches])
    engine, _, _, _ = make_engine(p, degree=4)
    counts = [len(trigger(engine, seq=0, block=0))]
    engine.set_degree(1)
    counts.append(len(trigger(engine, seq=1, block=1)))
    counts.append(len(trigger(engine, seq=2, block=2)))
    expected = []
    degree_at = [4, 1, 1]
    for i, batch in enumerate(batches):
        expected.append(min(degree_at[i], len(batch)))
    assert counts == expected


def test_adaptive_halves_on_low_accuracy():
    p = ScriptedPrefetcher([])
    engine, _, _, _ = make_engine(p, degree=8, adaptive=True)
    for _ in range(256):
        engine._pending.add(0)
        engine.note_eviction(0, was_prefetched_unused=True)
    assert engine.degree == 4
    assert engine.configured_degree == 8


def test_adaptive_doubles_back_up_to_cap():
    p = ScriptedPrefetcher([])
    engine, _, _, _ = make_engine(p, degree=8, adaptive=True)
    engine.degree = 2
    outcome = AccessOutcome(kind="prefetch-hit", block=0)
    for _ in range(256):
        engine._pending.add(0)
        engine.note_outcome(outcome)
    assert engine.degree == 4
    for _ in range(256):
        engine._pending.add(0)
        engine.note_outcome(outcome)
    assert engine.degree == 8
    for _ in range(256):
        engine._pending.add(0)
        engine.note_outcome(outcome)
    assert engine.degree == 8  # capped at the configured degree


def test_degree_zero_coverage_equals_baseline():
    events, _ = gen_strided(n=2000, stride=2)
    base, _ = run_sim(events, prefetcher_name="none", sim_latency_events=0)
    off, _ = run_sim(events, prefetcher_name="ibsp", prefetcher_degree=0,
                     sim_latency_events=0)
    assert off.coverage == base.coverage
    assert off.issued == base.issued == 0
    assert off.demand_misses == base.demand_misses
    assert off.demand_hits == base.demand_hits


def test_block_never_resident_and_in_flight():
    # drive a full simulation and check the exclusion after every event
    from prefetchlab.sim import Simulator

    events, _ = gen_strided(n=1500, stride=1)
    cfg = mk_cfg(prefetcher_name="ibsp", sim_latency_events=8,
                 cache_sets=8, cache_ways=2)
    sim = Simulator(cfg, total_events=len(events))
    for event in events:
        sim.step(event)
        for block in sim.clock._completion:
            assert not sim.cache.resident(block)
