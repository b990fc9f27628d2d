"""Cycle-driven event loop tying generators, meters, NoC, controller and
DRAM together.

Fixed phase order inside one cycle:

  1. traffic generation into the NoC leaf queues
  2. meter update, frame-boundary resets, priority re-evaluation, aging
  3. NoC arbitration (roots first, then cluster arbiters: one hop per cycle)
  4. controller scheduling and DRAM command issue, one per channel
  5. completion delivery, meter feedback and metric recording

DMAs are always iterated in sorted id order so the result is independent of
any incidental container ordering.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from . import metrics
from .config import ScenarioConfig
from .controller import AGING_POLICIES, ControllerState, QUEUE_NAMES
from .core import ConfigInvalid, SimClock, Transaction
from .dram import DramModel, DramTimingConfig
from .meters import (DRAIN, FILL, FRAME_PROGRESS_LUT, BandwidthMeter,
                     FrameProgressMeter, LatencyMeter, OccupancyMeter,
                     PriorityLut, translate)
from .noc import FCFS as NOC_FCFS
from .noc import PRIORITY as NOC_PRIORITY
from .noc import ROUND_ROBIN as NOC_RR
from .noc import NocFabric
from .rng import dma_stream
from .traffic import Generator

# which NoC arbitration flavor each controller policy implies
NOC_MODE_OF_POLICY = {
    "FCFS": NOC_FCFS,
    "RR": NOC_RR,
    "FRAME_QOS": NOC_PRIORITY,
    "QOS": NOC_PRIORITY,
    "QOS_RB": NOC_PRIORITY,
    "FR_FCFS": NOC_RR,
}

ID_STRIDE = 1 << 32  # per-DMA transaction id spacing


@dataclass
class SimulationReport:
    scenario_name: str
    policy: str
    fingerprint: tuple
    dma_order: list
    duration_cycles: int
    warmup_cycles: int
    clock_freq_hz: float
    desk_scale: int
    sink: metrics.MetricsSink
    row_hits: int = 0
    row_misses: int = 0
    bank_opens: int = 0
    total_bytes: int = 0
    max_wait: int = 0
    generated: int = 0
    completed: int = 0
    resident_at_end: int = 0
    target_bytes_per_s: dict = field(default_factory=dict)

    @property
    def row_hit_rate(self) -> float:
        total = self.row_hits + self.row_misses + self.bank_opens
        return self.row_hits / total if total else 0.0

    def _window(self) -> tuple:
        return self.warmup_cycles, self.duration_cycles

    def min_npi(self, dma_id: str) -> float:
        return metrics.min_npi(self.sink.series[dma_id], *self._window())

    def priority_histogram(self, dma_id: str):
        return metrics.priority_histogram(self.sink.series[dma_id],
                                          *self._window())

    def mean_priority(self, dma_id: str) -> float:
        return metrics.mean_priority(self.sink.series[dma_id], *self._window())

    def dma_bytes(self, dma_id: str) -> int:
        return metrics.bytes_in_window(self.sink.bytes_by_dma.get(dma_id, ()),
                                       *self._window())

    def mean_bandwidth(self, dma_id: str) -> float:
        start, end = self._window()
        if end <= start:
            return 0.0
        scaled = self.dma_bytes(dma_id) * self.clock_freq_hz / (end - start)
        return scaled * self.desk_scale  # report at nominal scale

    def total_bandwidth(self) -> float:
        start, end = self._window()
        if end <= start:
            return 0.0
        total = sum(self.dma_bytes(d) for d in self.dma_order)
        return total * self.clock_freq_hz / (end - start) * self.desk_scale


class World:
    def __init__(self, cfg: ScenarioConfig):
        cfg.validate()
        self.cfg = cfg
        clock_hz = cfg.command_clock_hz
        self.clock = SimClock(0, clock_hz)
        timing = cfg.dram
        timing.clock_freq_hz = clock_hz
        self.dram = DramModel(timing)

        entries = sorted(cfg.dmas, key=lambda e: e.dma_id)
        self.dma_order = [e.dma_id for e in entries]
        queue_of = {e.dma_id: QUEUE_NAMES.index(e.queue) for e in entries}
        self.controller = ControllerState(
            policy=cfg.policy, capacity=cfg.capacity,
            aging_period=cfg.aging_period, delta=cfg.delta,
            queue_of_dma=queue_of, static_split=cfg.static_split)

        clusters = {}
        direct = []
        for e in entries:
            if e.cluster == "direct":
                direct.append(e.dma_id)
            else:
                clusters.setdefault(e.cluster, []).append(e.dma_id)
        self.noc = NocFabric(clusters, direct, self.dma_order,
                             channels=timing.channels, depth=cfg.noc_depth,
                             cluster_depth=cfg.noc_cluster_depth,
                             mode=NOC_MODE_OF_POLICY[cfg.policy],
                             leaf_depths={e.dma_id: e.queue_depth
                                          for e in entries})

        self.meters = {}
        self.luts = {}
        self.generators = {}
        self.level = {}
        self.media_dmas = set()
        self.frame_meters = []
        epoch_window = cfg.meter_window_cycles
        for i, e in enumerate(entries):
            spec = e.spec_for(clock_hz, cfg.desk_scale, cfg.fps)
            window = e.window_cycles or epoch_window
            meter = self._build_meter(e, spec, clock_hz, window,
                                      cfg.desk_scale)
            self.meters[e.dma_id] = meter
            if e.lut:
                lut = PriorityLut(entries=tuple(e.lut))
            elif e.meter == "frame_progress":
                lut = PriorityLut(entries=FRAME_PROGRESS_LUT)
            else:
                lut = PriorityLut()
            lut.validate()
            self.luts[e.dma_id] = lut
            rng = dma_stream(cfg.seed, e.dma_id)
            occ = meter if isinstance(meter, OccupancyMeter) else None
            self.generators[e.dma_id] = Generator(
                spec, rng, clock_hz, id_base=(i + 1) * ID_STRIDE,
                occupancy_meter=occ)
            self.level[e.dma_id] = 0
            if e.queue == "media":
                self.media_dmas.add(e.dma_id)
            if isinstance(meter, FrameProgressMeter):
                self.frame_meters.append((e.dma_id, meter,
                                          spec.frame_period_cycles))

        self.unhealthy = set()
        self.inflight = []  # heap of (completion, seq, txn)
        self._seq = 0
        self.sink = metrics.MetricsSink()
        self._epoch_bytes = {d: 0 for d in self.dma_order}
        self.generated = 0
        self.completed = 0
        self.max_wait = 0
        self._next_poll = {d: 0 for d in self.dma_order}

    @staticmethod
    def _build_meter(e, spec, clock_hz, window, desk_scale):
        if e.meter == "latency":
            if e.latency_limit_cycles <= 0:
                raise ConfigInvalid(f"{e.dma_id}: latency meter needs a limit")
            return LatencyMeter(e.dma_id, e.latency_limit_cycles)
        if e.meter == "frame_progress":
            return FrameProgressMeter(e.dma_id, max(spec.frame_bytes, 1),
                                      max(spec.frame_period_cycles, 1),
                                      e.reference_slope)
        if e.meter == "occupancy":
            buffer_bytes = e.buffer_kb * 1024 / desk_scale
            direction = DRAIN if e.direction == "drain" else FILL
            rate = spec.rate_bytes_per_s
            if rate <= 0:
                raise ConfigInvalid(f"{e.dma_id}: occupancy meter needs a rate")
            return OccupancyMeter(e.dma_id, buffer_bytes, rate, clock_hz,
                                  direction=direction, window_cycles=window)
        if e.meter == "bandwidth":
            return BandwidthMeter(e.dma_id, e.target_bytes_per_s / desk_scale,
                                  clock_hz, window_cycles=window)
        raise ConfigInvalid(f"{e.dma_id}: unknown meter {e.meter}")

    # -- one cycle ---------------------------------------------------------

    def step(self) -> None:
        now = self.clock.cycle
        cfg = self.cfg

        # phase 1: traffic generation
        for dma in self.dma_order:
            if now < self._next_poll[dma]:
                continue
            gen = self.generators[dma]
            space = self.noc.leaf_space(dma)
            if space > 0:
                for txn in gen.next_requests(now, space, self.level[dma]):
                    self.dram.decode_into(txn)
                    self.noc.offer(dma, txn, now)
                    self.generated += 1
            self._next_poll[dma] = max(gen.next_action_cycle(now), now + 1)

        # phase 2: meters, priorities, aging
        for dma, meter, period in self.frame_meters:
            if period > 0 and now % period == 0:
                meter.start_frame(now)
        if now > 0 and now % cfg.epoch_cycles == 0:
            self._reevaluate(now)
        if (now > 0 and cfg.policy in AGING_POLICIES
                and now % cfg.aging_period == 0):
            self.controller.apply_aging(now)
            self.noc.age_resident(now, cfg.aging_period)

        # phase 3: NoC arbitration
        self.noc.step(now, self.controller)

        # phase 4: scheduling + DRAM issue
        for ch in range(self.dram.timing.channels):
            txn = self.controller.select(self.dram, ch, now, self.unhealthy)
            if txn is not None:
                completion = self.dram.issue(txn, now)
                heapq.heappush(self.inflight, (completion, self._seq, txn))
                self._seq += 1

        # phase 5: completion delivery
        inflight = self.inflight
        while inflight and inflight[0][0] <= now:
            _, _, txn = heapq.heappop(inflight)
            txn.t_completed = now
            self.meters[txn.source].on_completion(txn, now)
            self.generators[txn.source].on_completion(txn)
            self._epoch_bytes[txn.source] += txn.size_bytes
            self.completed += 1
            wait = now - txn.t_created
            if wait > self.max_wait:
                self.max_wait = wait

        self.clock.advance()

    def _reevaluate(self, now: int) -> None:
        unhealthy = set()
        for dma in self.dma_order:
            meter = self.meters[dma]
            npi = meter.npi(now)
            level = translate(self.luts[dma], npi)
            if self.cfg.policy == "FRAME_QOS":
                # frame-level QoS: media cores ride at the top level for the
                # whole frame, every other source stays at the base level
                level = 7 if dma in self.media_dmas else 0
            self.level[dma] = level
            # requests still waiting in the DMA's own leaf queue carry its
            # current level, so an escalation is not blocked by stale heads
            for txn in self.noc.leaf[dma]:
                txn.priority = level
            self.sink.record(metrics.NpiSample(dma, now, npi, level))
            nbytes = self._epoch_bytes[dma]
            if nbytes:
                self.sink.record_bytes(dma, now, nbytes)
                self._epoch_bytes[dma] = 0
            if dma in self.media_dmas and npi < self.cfg.boost_npi:
                unhealthy.add(dma)
        self.unhealthy = (set(self.media_dmas)
                          if self.cfg.policy == "FRAME_QOS" else unhealthy)

    def resident_count(self) -> int:
        return (self.noc.resident_count() + self.controller.occupancy
                + len(self.inflight))

    def report(self) -> SimulationReport:
        cfg = self.cfg
        duration = self.clock.cycle
        for dma in self.dma_order:  # flush trailing partial epoch
            if self._epoch_bytes[dma]:
                self.sink.record_bytes(dma, duration, self._epoch_bytes[dma])
                self._epoch_bytes[dma] = 0
        targets = {}
        for e in cfg.dmas:
            targets[e.dma_id] = e.target_bytes_per_s
        return SimulationReport(
            scenario_name=cfg.name,
            policy=cfg.policy,
            fingerprint=cfg.fingerprint(),
            dma_order=self.dma_order,
            duration_cycles=duration,
            warmup_cycles=min(cfg.warmup_cycles, max(duration - 1, 0)),
            clock_freq_hz=cfg.command_clock_hz,
            desk_scale=cfg.desk_scale,
            sink=self.sink,
            row_hits=self.dram.row_hits,
            row_misses=self.dram.row_misses,
            bank_opens=self.dram.bank_opens,
            total_bytes=self.dram.bytes_done,
            max_wait=self.max_wait,
            generated=self.generated,
            completed=self.completed,
            resident_at_end=self.resident_count(),
            target_bytes_per_s=targets,
        )


def run(scenario: ScenarioConfig, duration_cycles: int | None = None
        ) -> SimulationReport:
    """Run a scenario to completion and return its report."""
    world = World(scenario)
    total = scenario.resolved_duration() if duration_cycles is None \
        else duration_cycles
    for _ in range(total):
        world.step()
    return world.report()
