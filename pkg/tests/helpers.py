"""Shared trace builders and config shorthand for the test suite."""

import random

from prefetchlab.config import Config
from prefetchlab.core import AccessEvent, block_from_region
from prefetchlab.sim import Simulator
from prefetchlab.workloads import _irregular_blocks

BPR = 32


def mk_cfg(**overrides) -> Config:
    values = {}
    for key, value in overrides.items():
        values[key.replace("_", ".", 1)] = str(value)
    return Config(values)


def events_from_blocks(blocks, pc=0x400, block_size=64):
    if isinstance(pc, int):
        pc = [pc] * len(blocks)
    return [AccessEvent(pc=p, addr=b * block_size, seq=i)
            for i, (b, p) in enumerate(zip(blocks, pc))]


def run_sim(events, keep_issue_log=False, **overrides):
    cfg = mk_cfg(**overrides)
    sim = Simulator(cfg, total_events=len(events), keep_issue_log=keep_issue_log)
    report = sim.run(events)
    return report, sim


def build_ambiguous_streams(seed=42, n_streams=24, stream_len=20, rounds=5):
    """Rounds of stable streams followed by a fresh permutation of the same
    address universe. Every address ends up in two contexts: its stable
    stream (recurring successor) and the latest scrambler (one-off
    successor), so single-address history lookup lands in the wrong stream
    while a two-miss lookup disambiguates. Returns (events, phase bounds).
    """
    rng = random.Random(seed)
    universe = _irregular_blocks(n_streams * stream_len, rng, BPR)
    streams = [universe[i * stream_len:(i + 1) * stream_len]
               for i in range(n_streams)]
    blocks = []
    stream_bounds = []
    for _ in range(rounds):
        start = len(blocks)
        for s in streams:
            blocks.extend(s)
        stream_bounds.append((start, len(blocks)))
        scrambled = universe[:]
        rng.shuffle(scrambled)
        blocks.extend(scrambled)
    return events_from_blocks(blocks), stream_bounds


def build_interleaved_regions(seed=7, n_gens=30, items_per_gen=3,
                              filler_len=600):
    """Overlapping region streams, a cache-flushing filler, then a repeat.

    Each generation g triggers at gap g (distinct trigger offset per
    generation) and contributes one non-trigger access per following gap;
    the final gap finishes every generation's remaining items
    consecutively in generation order. Returns
    (events, pass1_blocks, filler_len, per-region open rank, trigger map).
    """
    rng = random.Random(seed)
    regions = rng.sample(range(1, 1 << 20), n_gens)
    trig_offs = list(range(n_gens))
    item_offsets = []
    for g in range(n_gens):
        pool = [o for o in range(BPR) if o != trig_offs[g]]
        item_offsets.append(rng.sample(pool, items_per_gen))
    blocks, pending = [], []
    open_rank = {}
    for g in range(n_gens):
        open_rank[regions[g]] = g
        blocks.append(block_from_region(regions[g], trig_offs[g], BPR))
        pending.append([g, item_offsets[g], 0])
        if g < n_gens - 1:
            for entry in pending:
                gi, items, idx = entry
                if idx < len(items) and gi + idx <= g:
                    blocks.append(
                        block_from_region(regions[gi], items[idx], BPR))
                    entry[2] += 1
        else:
            for entry in pending:
                gi, items, idx = entry
                for j in range(idx, len(items)):
                    blocks.append(
                        block_from_region(regions[gi], items[j], BPR))
                entry[2] = len(items)
    pass1 = blocks[:]
    filler_regions = rng.sample(range(1 << 20, 1 << 21), filler_len)
    filler = [block_from_region(r, i % BPR, BPR)
              for i, r in enumerate(filler_regions)]
    trace = pass1 + filler + pass1
    pcs = [0x10] * len(pass1) + [0x999] * len(filler) + [0x10] * len(pass1)
    events = events_from_blocks(trace, pc=pcs)
    triggers = {block_from_region(regions[g], trig_offs[g], BPR): g
                for g in range(n_gens)}
    return events, pass1, filler, open_rank, triggers
