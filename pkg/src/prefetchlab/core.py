"""Trace data model, block/region address arithmetic, and the event clock.

Addresses are plain non-negative integers at byte granularity. A block
address is the byte address divided by the (power-of-two) block size; a
region groups a power-of-two number of consecutive blocks. Simulation
time is counted in trace events, not cycles: a prefetch scheduled at
event s with latency L completes at event s + L.

Trace grammar (text): one record per line, ``<pc-hex> <addr-hex>`` with an
optional third decimal field giving an explicit sequence number (which
must strictly increase). Lines starting with ``#`` and blank lines are
ignored. Binary traces (``.btrace``) are fixed 16-byte little-endian
records: 8-byte pc, 8-byte addr.
"""

from __future__ import annotations

import heapq
import struct
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

DEFAULT_BLOCK_SIZE = 64
DEFAULT_REGION_BLOCKS = 32
DEFAULT_LATENCY_EVENTS = 32

DEMAND_LOAD = "demand-load"

_BTRACE_RECORD = struct.Struct("<QQ")


class TraceFormatError(ValueError):
    """Malformed trace record; carries the 1-based line number when known."""

    def __init__(self, message: str, line_no: Optional[int] = None) -> None:
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


@dataclass(frozen=True)
class AccessEvent:
    """One trace record: a demand load by instruction `pc` at byte `addr`."""

    pc: int
    addr: int
    seq: int
    kind: str = DEMAND_LOAD


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def require_power_of_two(n: int, what: str) -> None:
    if not is_power_of_two(n):
        raise ValueError(f"{what} must be a power of two, got {n}")


def block_of(addr: int, block_size: int) -> int:
    """Byte address to block address (truncating division)."""
    return addr // block_size


def region_of(block: int, blocks_per_region: int) -> Tuple[int, int]:
    """Block address to (region id, offset within region)."""
    return block // blocks_per_region, block % blocks_per_region


def block_from_region(region: int, offset: int, blocks_per_region: int) -> int:
    return region * blocks_per_region + offset


def region_base(block: int, blocks_per_region: int) -> int:
    """First block of the region containing `block`."""
    return block - block % blocks_per_region


def parse_trace_record(line: str, line_no: int) -> Optional[Tuple[int, int, Optional[int]]]:
    """Parse one text record into (pc, addr, explicit_seq or None).

    Returns None for blank lines and `#` comments. Raises TraceFormatError
    (naming the line) for anything else that does not match the grammar.
    """
    text = line.strip()
    if not text or text.startswith("#"):
        return None
    fields = text.split()
    if len(fields) not in (2, 3):
        raise TraceFormatError(f"expected 2 or 3 fields, got {len(fields)}", line_no)
    try:
        pc = int(fields[0], 16)
        addr = int(fields[1], 16)
    except ValueError:
        raise TraceFormatError(f"bad hex field in {text!r}", line_no) from None
    seq = None
    if len(fields) == 3:
        try:
            seq = int(fields[2], 10)
        except ValueError:
            raise TraceFormatError(f"bad sequence field in {text!r}", line_no) from None
    if pc < 0 or addr < 0:
        raise TraceFormatError("pc and addr must be non-negative", line_no)
    return pc, addr, seq


def read_trace_text(lines: Iterable[str]) -> List[AccessEvent]:
    events: List[AccessEvent] = []
    last_explicit = None
    for line_no, line in enumerate(lines, start=1):
        parsed = parse_trace_record(line, line_no)
        if parsed is None:
            continue
        pc, addr, explicit = parsed
        if explicit is not None:
            if last_explicit is not None and explicit <= last_explicit:
                raise TraceFormatError(
                    f"sequence field {explicit} not strictly increasing", line_no
                )
            last_explicit = explicit
        events.append(AccessEvent(pc=pc, addr=addr, seq=len(events)))
    return events


def read_trace_binary(data: bytes) -> List[AccessEvent]:
    if len(data) % _BTRACE_RECORD.size != 0:
        raise TraceFormatError(
            f"binary trace length {len(data)} is not a multiple of "
            f"{_BTRACE_RECORD.size} bytes"
        )
    events = []
    for i, (pc, addr) in enumerate(_BTRACE_RECORD.iter_unpack(data)):
        events.append(AccessEvent(pc=pc, addr=addr, seq=i))
    return events


def read_trace(path: str) -> List[AccessEvent]:
    """Read a trace file; `.btrace` selects the binary format."""
    if str(path).endswith(".btrace"):
        with open(path, "rb") as fh:
            return read_trace_binary(fh.read())
    with open(path, "r", encoding="utf-8") as fh:
        return read_trace_text(fh)


def write_trace(events: Iterable[AccessEvent], path: str) -> None:
    if str(path).endswith(".btrace"):
        with open(path, "wb") as fh:
            for ev in events:
                fh.write(_BTRACE_RECORD.pack(ev.pc, ev.addr))
        return
    with open(path, "w", encoding="utf-8") as fh:
        for ev in events:
            fh.write(f"{ev.pc:#x} {ev.addr:#x}\n")


class SimClock:
    """Event-indexed clock tracking in-flight prefetch completions.

    A block scheduled at event s with extra delay d completes at
    s + d + latency. Completions must be drained (in completion order)
    before the event at which they are due is processed.
    """

    def __init__(self, latency: int = DEFAULT_LATENCY_EVENTS) -> None:
        if latency < 0:
            raise ValueError("latency must be >= 0")
        self.latency = latency
        self.now = 0
        self._completion: dict[int, int] = {}
        self._heap: list[Tuple[int, int, int]] = []
        self._order = 0

    def advance(self, seq: int) -> None:
        self.now = seq

    def schedule(self, block: int, extra_delay: int = 0) -> int:
        completion = self.now + extra_delay + self.latency
        self._completion[block] = completion
        self._order += 1
        heapq.heappush(self._heap, (completion, self._order, block))
        return completion

    def in_flight(self, block: int) -> bool:
        return block in self._completion

    def cancel(self, block: int) -> None:
        # lazy removal; the heap entry is skipped at drain time
        self._completion.pop(block, None)

    def pending(self) -> int:
        return len(self._completion)

    def drain(self, seq: int) -> List[int]:
        """Pop all blocks whose completion is <= seq, in completion order."""
        done: List[int] = []
        while self._heap and self._heap[0][0] <= seq:
            completion, _, block = heapq.heappop(self._heap)
            if self._completion.get(block) == completion:
                del self._completion[block]
                done.append(block)
        return done
