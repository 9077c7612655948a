"""Synthetic workload generators and the workload spec mini-language.

Each generator is deterministic in its seed and returns the event list
plus an info dict describing what was generated (used by tests that need
closed-form expectations, e.g. per-page access orders).

Spec strings take the form ``kind:key=value,key=value``, e.g.
``strided:n=10000,stride=3`` or ``spatial:fp_size=6,pages=100,seed=7``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .core import (
    AccessEvent,
    DEFAULT_BLOCK_SIZE,
    DEFAULT_REGION_BLOCKS,
    block_from_region,
)

DEFAULT_PC = 0x400800
# region ids are drawn from this range; large enough that random picks
# give spatially-uncorrelated, stride-free sequences
_REGION_SPACE = 1 << 28

KINDS = ("strided", "temporal", "spatial", "pointer-chase", "mixed")


@dataclass(frozen=True)
class WorkloadSpec:
    kind: str
    length: int = 0
    seed: int = 0
    params: Dict[str, object] = field(default_factory=dict)


def _events_from_blocks(blocks: Sequence[int], pcs,
                        block_size: int = DEFAULT_BLOCK_SIZE) -> List[AccessEvent]:
    if isinstance(pcs, int):
        pcs = [pcs] * len(blocks)
    return [
        AccessEvent(pc=pc, addr=block * block_size, seq=i)
        for i, (block, pc) in enumerate(zip(blocks, pcs))
    ]


def _check_irregular(blocks: Sequence[int], blocks_per_region: int) -> None:
    """No two consecutive accesses may share a region or repeat a stride."""
    for i in range(1, len(blocks)):
        assert blocks[i] // blocks_per_region != blocks[i - 1] // blocks_per_region, \
            "consecutive accesses share a region"
    deltas = [blocks[i + 1] - blocks[i] for i in range(len(blocks) - 1)]
    for i in range(1, len(deltas)):
        assert deltas[i] != deltas[i - 1], "consecutive accesses repeat a stride"


def _irregular_blocks(count: int, rng: random.Random,
                      blocks_per_region: int) -> List[int]:
    """Distinct blocks, one per distinct region, no repeated strides."""
    regions = rng.sample(range(1, _REGION_SPACE), count)
    blocks = [
        block_from_region(r, rng.randrange(blocks_per_region), blocks_per_region)
        for r in regions
    ]
    # resample any element that would repeat its predecessor's stride
    for i in range(2, len(blocks)):
        while blocks[i] - blocks[i - 1] == blocks[i - 1] - blocks[i - 2]:
            r = rng.randrange(1, _REGION_SPACE)
            blocks[i] = block_from_region(
                r, rng.randrange(blocks_per_region), blocks_per_region)
    return blocks


def gen_strided(n: int, stride: int, base_block: Optional[int] = None,
                pc: int = DEFAULT_PC) -> Tuple[List[AccessEvent], Dict]:
    """n accesses from a base block with a constant block stride."""
    if stride == 0:
        raise ValueError("stride must be nonzero")
    if n < 1:
        raise ValueError("n must be >= 1")
    if base_block is None:
        # keep descending streams above address zero
        base_block = (1 << 20) + (n * abs(stride) if stride < 0 else 0)
    blocks = [base_block + i * stride for i in range(n)]
    return _events_from_blocks(blocks, pc), {"blocks": blocks}


def gen_temporal(seq: int, repeats: int, seed: int = 0, pc: int = DEFAULT_PC,
                 blocks_per_region: int = DEFAULT_REGION_BLOCKS
                 ) -> Tuple[List[AccessEvent], Dict]:
    """A random irregular sequence repeated `repeats` times."""
    if seq < 2 or repeats < 1:
        raise ValueError("need seq >= 2 and repeats >= 1")
    rng = random.Random(seed)
    base = _irregular_blocks(seq, rng, blocks_per_region)
    blocks: List[int] = []
    for _ in range(repeats):
        blocks.extend(base)
    _check_irregular(base, blocks_per_region)
    return _events_from_blocks(blocks, pc), {"sequence": base}


def gen_spatial(footprint: Optional[Sequence[int]] = None, pages: int = 2,
                fp_size: Optional[int] = None, seed: int = 0,
                pc: int = DEFAULT_PC, shuffle: bool = False,
                blocks_per_region: int = DEFAULT_REGION_BLOCKS
                ) -> Tuple[List[AccessEvent], Dict]:
    """The same offset footprint replayed across `pages` distinct regions.

    The trigger offset (first element of the footprint) always leads;
    the remaining offsets follow in footprint order, or in a fresh
    per-page permutation when `shuffle` is set.
    """
    rng = random.Random(seed)
    if footprint is None:
        if fp_size is None or fp_size < 1:
            raise ValueError("give footprint or fp_size >= 1")
        rest = rng.sample(range(1, blocks_per_region), fp_size - 1)
        footprint = [0] + sorted(rest)
    footprint = list(footprint)
    if len(set(footprint)) != len(footprint):
        raise ValueError("footprint offsets must be distinct")
    if any(not 0 <= o < blocks_per_region for o in footprint):
        raise ValueError("footprint offsets must lie inside one region")
    if pages < 2:
        raise ValueError("pages must be >= 2")
    regions = rng.sample(range(1, _REGION_SPACE), pages)
    blocks: List[int] = []
    orders: List[List[int]] = []
    for region in regions:
        rest = footprint[1:]
        if shuffle:
            rest = rng.sample(rest, len(rest))
        order = [footprint[0]] + list(rest)
        orders.append(order)
        blocks.extend(block_from_region(region, o, blocks_per_region)
                      for o in order)
    info = {"footprint": footprint, "regions": regions, "orders": orders}
    return _events_from_blocks(blocks, pc), info


def gen_pointer_chase(chain: int, passes: int = 2, seed: int = 0,
                      pc: int = DEFAULT_PC,
                      blocks_per_region: int = DEFAULT_REGION_BLOCKS
                      ) -> Tuple[List[AccessEvent], Dict]:
    """A dependent-miss chain visited in order, repeated `passes` times."""
    if chain < 2:
        raise ValueError("chain must be >= 2")
    return gen_temporal(seq=chain, repeats=passes, seed=seed, pc=pc,
                        blocks_per_region=blocks_per_region)


def gen_mixed(length: int, seed: int = 0,
              blocks_per_region: int = DEFAULT_REGION_BLOCKS
              ) -> Tuple[List[AccessEvent], Dict]:
    """Round-robin interleave of strided, spatial, and chase sub-streams.

    Each turn contributes one region's worth of accesses from one
    sub-generator, so spatial generations interleave with temporal
    traffic at region granularity.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    rng = random.Random(seed)

    strided_blocks, _ = gen_strided(length, stride=1, pc=DEFAULT_PC)
    spatial_events, spatial_info = gen_spatial(
        fp_size=6, pages=max(2, length // (2 * 6)), seed=rng.randrange(1 << 30),
        pc=DEFAULT_PC + 4, blocks_per_region=blocks_per_region)
    chase_events, _ = gen_pointer_chase(
        chain=max(2, length // 4), passes=2, seed=rng.randrange(1 << 30),
        pc=DEFAULT_PC + 8, blocks_per_region=blocks_per_region)

    streams = [
        [(ev.pc, ev.addr) for ev in strided_blocks],
        [(ev.pc, ev.addr) for ev in spatial_events],
        [(ev.pc, ev.addr) for ev in chase_events],
    ]
    cursors = [0, 0, 0]
    out: List[Tuple[int, int]] = []
    turn = 0
    while len(out) < length and any(c < len(s) for c, s in zip(cursors, streams)):
        idx = turn % len(streams)
        turn += 1
        stream, cur = streams[idx], cursors[idx]
        if cur >= len(stream):
            continue
        # emit until the region changes (one region burst per turn)
        region = stream[cur][1] // (blocks_per_region * DEFAULT_BLOCK_SIZE)
        while cur < len(stream) and len(out) < length:
            pc, addr = stream[cur]
            if addr // (blocks_per_region * DEFAULT_BLOCK_SIZE) != region:
                break
            out.append((pc, addr))
            cur += 1
        cursors[idx] = cur
    events = [AccessEvent(pc=pc, addr=addr, seq=i)
              for i, (pc, addr) in enumerate(out)]
    return events, {"spatial": spatial_info}


def parse_workload(spec: str) -> WorkloadSpec:
    """Parse ``kind:key=value,...`` into a WorkloadSpec."""
    kind, _, rest = spec.partition(":")
    kind = kind.strip()
    if kind not in KINDS:
        raise ValueError(f"unknown workload kind {kind!r} (choose from {KINDS})")
    params: Dict[str, object] = {}
    if rest.strip():
        for item in rest.split(","):
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"bad workload parameter {item!r}")
            key = key.strip()
            value = value.strip()
            try:
                params[key] = int(value, 0)
            except ValueError:
                params[key] = value
    return WorkloadSpec(kind=kind, seed=int(params.pop("seed", 0)),
                        params=params)


def generate(spec: WorkloadSpec) -> Tuple[List[AccessEvent], Dict]:
    p = dict(spec.params)
    if spec.kind == "strided":
        return gen_strided(n=int(p.get("n", 1024)), stride=int(p.get("stride", 1)),
                           base_block=p.get("base"), pc=int(p.get("pc", DEFAULT_PC)))
    if spec.kind == "temporal":
        return gen_temporal(seq=int(p.get("seq", 256)),
                            repeats=int(p.get("repeats", 2)), seed=spec.seed,
                            pc=int(p.get("pc", DEFAULT_PC)))
    if spec.kind == "spatial":
        return gen_spatial(fp_size=int(p.get("fp_size", 6)),
                           pages=int(p.get("pages", 16)), seed=spec.seed,
                           pc=int(p.get("pc", DEFAULT_PC)),
                           shuffle=bool(p.get("shuffle", 0)))
    if spec.kind == "pointer-chase":
        return gen_pointer_chase(chain=int(p.get("chain", 256)),
                                 passes=int(p.get("passes", 2)), seed=spec.seed,
                                 pc=int(p.get("pc", DEFAULT_PC)))
    if spec.kind == "mixed":
        return gen_mixed(length=int(p.get("length", 1024)), seed=spec.seed)
    raise ValueError(f"unknown workload kind {spec.kind!r}")
