"""Synthetic per-DMA memory request streams.

Four source kinds cover the camcorder dataflow:

  bursty_frame    whole frame payload becomes eligible at each frame
                  boundary, emitted as fast as backpressure permits
  constant_rate   credit-paced stream; when tied to an occupancy meter the
                  pace is boosted while the buffer has headroom, so a healthy
                  stream builds cushion instead of tracking the drain exactly
  latency_probe   single reads with exponential inter-arrival
  bandwidth_stream credit-paced elastic stream at an offered rate that may
                  exceed the meter target (the surplus is best-effort filler)

Addresses walk the DMA's region sequentially; with probability
(1 - locality) a request jumps to a random aligned address in the region.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import READ, WRITE, TXN_SIZE_BYTES, Transaction

BURSTY_FRAME = "bursty_frame"
CONSTANT_RATE = "constant_rate"
LATENCY_PROBE = "latency_probe"
BANDWIDTH_STREAM = "bandwidth_stream"
SOURCE_KINDS = (BURSTY_FRAME, CONSTANT_RATE, LATENCY_PROBE, BANDWIDTH_STREAM)

CREDIT_CAP_TXNS = 32


@dataclass
class DmaSpec:
    dma_id: str
    core: str
    source_kind: str
    rate_bytes_per_s: float = 0.0
    frame_period_cycles: int = 0
    frame_bytes: int = 0
    address_region: tuple = (0, 1 << 20)
    locality: float = 1.0
    read_fraction: float = 1.0
    size_bytes: int = TXN_SIZE_BYTES
    pace_boost: float = 2.0  # occupancy-gated refill headroom factor

    def validate(self) -> None:
        if self.source_kind not in SOURCE_KINDS:
            raise ValueError(f"unknown source kind {self.source_kind}")
        if self.rate_bytes_per_s < 0:
            raise ValueError("rate must be non-negative")
        if not 0.0 <= self.locality <= 1.0:
            raise ValueError("locality must be in [0, 1]")
        if not 0.0 <= self.read_fraction <= 1.0:
            raise ValueError("read_fraction must be in [0, 1]")
        if self.source_kind == BURSTY_FRAME and self.frame_period_cycles <= 0:
            raise ValueError("bursty_frame needs frame_period_cycles")


@dataclass
class GeneratorState:
    byte_credit: float = 0.0
    bytes_left_in_frame: int = 0
    next_address: int = 0
    emitted_bytes: int = 0
    inflight_bytes: int = 0
    next_probe_cycle: float = 0.0
    pending_probes: int = 0
    last_cycle: int = 0
    next_boundary: int = 0


class Generator:
    """Stepwise request source for one DMA."""

    def __init__(self, spec: DmaSpec, rng, clock_freq_hz: float,
                 id_base: int = 0, occupancy_meter=None):
        spec.validate()
        self.spec = spec
        self.rng = rng
        self.state = GeneratorState(next_address=spec.address_region[0])
        self.rate_per_cycle = spec.rate_bytes_per_s / clock_freq_hz
        self.occupancy_meter = occupancy_meter
        self._next_id = id_base
        if spec.source_kind == LATENCY_PROBE and self.rate_per_cycle > 0:
            mean = spec.size_bytes / self.rate_per_cycle
            self.state.next_probe_cycle = float(rng.exponential(mean))

    # -- address stream ----------------------------------------------------

    def _next_addr(self) -> int:
        base, length = self.spec.address_region
        addr = self.state.next_address
        size = self.spec.size_bytes
        if self.spec.locality < 1.0 and self.rng.random() >= self.spec.locality:
            slots = length // size
            addr = base + int(self.rng.integers(slots)) * size
        nxt = addr + size
        if nxt >= base + length:
            nxt = base
        self.state.next_address = nxt
        return addr

    def _kind(self) -> int:
        rf = self.spec.read_fraction
        if rf >= 1.0:
            return READ
        if rf <= 0.0:
            return WRITE
        return READ if self.rng.random() < rf else WRITE

    def _make(self, now: int, priority: int) -> Transaction:
        txn = Transaction(id=self._next_id, source=self.spec.dma_id,
                          kind=self._kind(), address=self._next_addr(),
                          size_bytes=self.spec.size_bytes, priority=priority,
                          t_created=now)
        self._next_id += 1
        self.state.inflight_bytes += txn.size_bytes
        self.state.emitted_bytes += txn.size_bytes
        return txn

    def on_completion(self, txn: Transaction) -> None:
        self.state.inflight_bytes -= txn.size_bytes

    # -- emission ----------------------------------------------------------

    def _occupancy_space(self) -> bool:
        meter = self.occupancy_meter
        if meter is None:
            return True
        size = self.spec.size_bytes
        if meter.direction == 0:  # DRAIN: refill only while there is headroom
            return (meter.occupancy + self.state.inflight_bytes + size
                    <= meter.buffer_bytes)
        # FILL: drain only what the producer has actually buffered
        return meter.occupancy - self.state.inflight_bytes >= size

    def next_requests(self, now: int, space: int, priority: int = 0) -> list:
        """Emit up to `space` transactions for this cycle."""
        spec, st = self.spec, self.state
        out = []
        if space <= 0 or self.rate_per_cycle == 0.0:
            st.last_cycle = now
            return out
        kind = spec.source_kind
        size = spec.size_bytes

        if kind == BURSTY_FRAME:
            while now >= st.next_boundary:
                st.bytes_left_in_frame += spec.frame_bytes
                st.next_boundary += spec.frame_period_cycles
            while st.bytes_left_in_frame >= size and len(out) < space:
                out.append(self._make(now, priority))
                st.bytes_left_in_frame -= size

        elif kind in (CONSTANT_RATE, BANDWIDTH_STREAM):
            rate = self.rate_per_cycle
            if self.occupancy_meter is not None:
                rate *= spec.pace_boost
            st.byte_credit += rate * (now - st.last_cycle)
            cap = CREDIT_CAP_TXNS * size
            if st.byte_credit > cap:
                st.byte_credit = cap
            limit = 1 if kind == CONSTANT_RATE else space
            while (st.byte_credit >= size and len(out) < limit
                   and self._occupancy_space()):
                out.append(self._make(now, priority))
                st.byte_credit -= size

        elif kind == LATENCY_PROBE:
            mean = size / self.rate_per_cycle
            while st.next_probe_cycle <= now:
                st.pending_probes += 1
                st.next_probe_cycle += float(self.rng.exponential(mean))
            while st.pending_probes > 0 and len(out) < space:
                out.append(self._make(now, priority))
                st.pending_probes -= 1

        st.last_cycle = now
        return out

    def next_action_cycle(self, now: int) -> int:
        """Earliest cycle at which this generator may emit again."""
        spec, st = self.spec, self.state
        if self.rate_per_cycle == 0.0:
            return 1 << 62
        if spec.source_kind == BURSTY_FRAME:
            if st.bytes_left_in_frame >= spec.size_bytes:
                return now
            return st.next_boundary
        if spec.source_kind == LATENCY_PROBE:
            if st.pending_probes > 0:
                return now
            return int(st.next_probe_cycle)
        rate = self.rate_per_cycle
        if self.occupancy_meter is not None:
            rate *= spec.pace_boost
        deficit = spec.size_bytes - st.byte_credit
        if deficit <= 0:
            return now
        return now + max(1, int(deficit / rate))


def next_requests(spec: DmaSpec, state: GeneratorState, clock, rng=None,
                  space: int = 1, priority: int = 0):
    """Functional wrapper: one emission step at clock.cycle."""
    import numpy as np

    gen = Generator(spec, rng if rng is not None else np.random.default_rng(0),
                    clock.controller_freq_hz)
    gen.state = state
    txns = gen.next_requests(clock.cycle, space, priority)
    return txns, gen.state


def make_dataflow_scenario(case: str):
    """DmaSpec list for the shipped camcorder test cases ("A" or "B")."""
    from .config import load_packaged_scenario

    scenario = load_packaged_scenario(case)
    return scenario.dma_specs()
