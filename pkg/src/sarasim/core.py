"""Core domain types shared by every stage of the simulator.

A Transaction is one 64-byte (by default) memory request.  It carries the
dynamic priority level its source DMA held at creation time, plus the cycle
stamps needed by the performance meters and the metrics sink.
"""

from __future__ import annotations

from dataclasses import dataclass, field

PRIORITY_BITS = 3
PRIORITY_LEVELS = 1 << PRIORITY_BITS  # 0 = healthy/lowest urgency, 7 = highest
TXN_SIZE_BYTES = 64

READ = 0
WRITE = 1


class ConfigInvalid(Exception):
    pass


@dataclass
class SimClock:
    """Cycle counter in the DRAM command-clock domain."""

    cycle: int = 0
    controller_freq_hz: float = 933.0e6

    def seconds(self, cycles: int | None = None) -> float:
        n = self.cycle if cycles is None else cycles
        return n / self.controller_freq_hz

    def advance(self) -> None:
        self.cycle += 1


@dataclass(slots=True)
class Transaction:
    id: int
    source: str
    kind: int  # READ or WRITE
    address: int
    size_bytes: int = TXN_SIZE_BYTES
    priority: int = 0
    aged: bool = False
    t_created: int = 0
    t_enqueued: int = -1
    t_completed: int = -1
    # decoded address fields, filled in once at creation to keep the
    # per-cycle scheduling loops cheap
    channel: int = 0
    rank: int = 0
    bank: int = 0
    row: int = 0
    queue: int = 0  # controller queue index, assigned on arrival
    t_hop: int = -1  # cycle the txn entered its current NoC queue

    def __post_init__(self):
        if self.size_bytes <= 0:
            raise ValueError("size_bytes must be positive")
        if not 0 <= self.priority < PRIORITY_LEVELS:
            raise ValueError("priority out of range")
