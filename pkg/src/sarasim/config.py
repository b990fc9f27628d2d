"""Scenario configuration: a strict nested key-value text format.

Layout: global keys first, then `[dram]`, `[controller]`, `[noc]` and one
`[dma <id>]` section per DMA.  `#` starts a comment.  Unknown sections or
keys are hard errors that cite the offending line, so a typo can never turn
into a silent default.

All rates and byte quantities are given at nominal (full-chip) scale; the
`desk_scale` divisor shrinks traffic volume and the command clock together,
which leaves every cycle-domain quantity (timings, latencies, queue dynamics)
unchanged while making a 33 ms frame simulable on a desktop.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources

from .controller import POLICIES, QUEUE_NAMES
from .dram import DramTimingConfig
from .meters import PriorityLut
from .traffic import DmaSpec, SOURCE_KINDS


class ParseError(Exception):
    pass


class ValidationError(Exception):
    pass


METER_KINDS = ("latency", "frame_progress", "occupancy", "bandwidth")

MB = 1.0e6
KB = 1024


@dataclass
class DmaEntry:
    dma_id: str
    core: str
    queue: str
    cluster: str  # "media", "system" or "direct"
    kind: str
    meter: str
    rate_mbps: float = 0.0
    target_mbps: float = -1.0  # defaults to rate_mbps
    frame_kb: float = 0.0
    buffer_kb: float = 0.0
    latency_limit_cycles: float = 0.0
    direction: str = "drain"
    reference_slope: float = 1.0
    lut: tuple = ()
    region_base_kb: int = 0
    region_len_kb: int = 1024
    locality: float = 1.0
    read_fraction: float = 1.0
    pace_boost: float = 2.0
    queue_depth: int = 0  # 0: use the fabric-wide [noc] depth
    window_cycles: int = 0  # 0: use the global meter_window_cycles

    @property
    def target_bytes_per_s(self) -> float:
        mbps = self.target_mbps if self.target_mbps >= 0 else self.rate_mbps
        return mbps * MB

    def spec_for(self, clock_freq_hz: float, desk_scale: int,
                 fps: float) -> DmaSpec:
        period = int(round(clock_freq_hz / fps)) if fps > 0 else 0
        return DmaSpec(
            dma_id=self.dma_id,
            core=self.core,
            source_kind=self.kind,
            rate_bytes_per_s=self.rate_mbps * MB / desk_scale,
            frame_period_cycles=period,
            frame_bytes=int(self.frame_kb * KB / desk_scale),
            address_region=(self.region_base_kb * KB,
                            self.region_len_kb * KB),
            locality=self.locality,
            read_fraction=self.read_fraction,
            pace_boost=self.pace_boost,
        )


@dataclass
class ScenarioConfig:
    name: str = "scenario"
    seed: int = 0
    desk_scale: int = 64
    warmup_cycles: int = 4000
    duration_cycles: int = 0   # 0 means warmup + duration_frames frames
    duration_frames: int = 1
    fps: float = 30.0
    epoch_cycles: int = 100
    meter_window_cycles: int = 100
    io_freq_mhz: float = 1866.0
    dram: DramTimingConfig = field(default_factory=DramTimingConfig)
    policy: str = "QOS"
    capacity: int = 42
    aging_period: int = 10000
    delta: int = 6
    boost_npi: float = 1.3  # FRAME_QOS: media below this NPI get boosted
    static_split: bool = False
    noc_depth: int = 8
    noc_cluster_depth: int | None = None  # None: same as noc_depth
    dmas: list = field(default_factory=list)

    @property
    def command_clock_hz(self) -> float:
        return self.io_freq_mhz * MB / 2.0 / self.desk_scale

    @property
    def frame_period_cycles(self) -> int:
        return int(round(self.command_clock_hz / self.fps))

    def resolved_duration(self) -> int:
        if self.duration_cycles > 0:
            return self.duration_cycles
        return self.warmup_cycles + self.duration_frames * self.frame_period_cycles

    def fingerprint(self) -> tuple:
        return (self.name, self.seed, self.desk_scale, self.io_freq_mhz,
                self.resolved_duration(), self.warmup_cycles)

    def dma_specs(self) -> list:
        clock = self.command_clock_hz
        return [e.spec_for(clock, self.desk_scale, self.fps)
                for e in self.dmas]

    def validate(self) -> None:
        if self.io_freq_mhz <= 0:
            raise ValidationError("io_freq_mhz must be positive")
        if self.resolved_duration() <= 0:
            raise ValidationError("duration must be positive")
        if self.desk_scale < 1:
            raise ValidationError("desk_scale must be >= 1")
        if self.policy not in POLICIES:
            raise ValidationError(f"unknown policy {self.policy}")
        if self.epoch_cycles <= 0:
            raise ValidationError("epoch_cycles must be positive")
        seen = set()
        regions = []
        for e in self.dmas:
            if e.dma_id in seen:
                raise ValidationError(f"duplicate dma id {e.dma_id}")
            seen.add(e.dma_id)
            if e.kind not in SOURCE_KINDS:
                raise ValidationError(f"{e.dma_id}: unknown kind {e.kind}")
            if e.meter not in METER_KINDS:
                raise ValidationError(f"{e.dma_id}: unknown meter {e.meter}")
            if e.queue not in QUEUE_NAMES:
                raise ValidationError(f"{e.dma_id}: unknown queue {e.queue}")
            if e.cluster not in ("media", "system", "direct"):
                raise ValidationError(f"{e.dma_id}: unknown cluster {e.cluster}")
            if not 0.0 <= e.locality <= 1.0:
                raise ValidationError(f"{e.dma_id}: locality out of range")
            if not 0.0 <= e.read_fraction <= 1.0:
                raise ValidationError(f"{e.dma_id}: read_fraction out of range")
            if e.lut:
                PriorityLut(entries=tuple(e.lut)).validate()
            regions.append((e.dma_id, e.region_base_kb,
                            e.region_base_kb + e.region_len_kb))
        regions.sort(key=lambda r: r[1])
        for (a, a0, a1), (b, b0, b1) in zip(regions, regions[1:]):
            if b0 < a1:
                raise ValidationError(
                    f"address regions of {a} and {b} overlap")
        self.dram.validate()


# ---------------------------------------------------------------------------
# parsing

_GLOBAL_KEYS = {
    "name": str, "seed": int, "desk_scale": int, "warmup_cycles": int,
    "duration_cycles": int, "duration_frames": int, "fps": float,
    "epoch_cycles": int, "meter_window_cycles": int,
}
_DRAM_KEYS = {
    "io_freq_mhz": float, "channels": int, "ranks": int, "banks": int,
    "column_bits": int, "CL": int, "tRCD": int, "tRP": int, "tWTR": int,
    "tRTP": int, "tWR": int, "tRRD": int, "tFAW": int, "tBURST": int,
}
_CONTROLLER_KEYS = {
    "policy": str, "capacity": int, "aging_period": int, "delta": int,
    "boost_npi": float, "static_split": bool,
}
_NOC_KEYS = {"depth": int, "cluster_depth": int}
_DMA_KEYS = {
    "core": str, "queue": str, "cluster": str, "kind": str, "meter": str,
    "rate_mbps": float, "target_mbps": float, "frame_kb": float,
    "buffer_kb": float, "latency_limit_cycles": float, "direction": str,
    "queue_depth": int, "window_cycles": int,
    "reference_slope": float, "lut": str, "region_base_kb": int,
    "region_len_kb": int, "locality": float, "read_fraction": float,
    "pace_boost": float,
}


def _convert(raw: str, typ, key: str, lineno: int):
    try:
        if typ is bool:
            if raw.lower() in ("true", "yes", "1"):
                return True
            if raw.lower() in ("false", "no", "0"):
                return False
            raise ValueError(raw)
        return typ(raw)
    except ValueError:
        raise ParseError(
            f"line {lineno}: bad value {raw!r} for key {key!r}") from None


def parse_config(text: str) -> ScenarioConfig:
    cfg = ScenarioConfig()
    section = "global"
    dma_entry = None
    dma_raw = None

    def finish_dma():
        nonlocal dma_entry, dma_raw
        if dma_raw is None:
            return
        for req in ("core", "queue", "cluster", "kind", "meter"):
            if req not in dma_raw:
                raise ValidationError(
                    f"dma {dma_entry['dma_id']}: missing key {req!r}")
        lut = ()
        if "lut" in dma_raw:
            lut = tuple(float(v) for v in dma_raw.pop("lut").split(","))
        entry = DmaEntry(dma_id=dma_entry["dma_id"], lut=lut, **dma_raw)
        cfg.dmas.append(entry)
        dma_entry = dma_raw = None

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(f"line {lineno}: malformed section header")
            finish_dma()
            header = line[1:-1].strip()
            if header in ("dram", "controller", "noc"):
                section = header
            elif header.startswith("dma "):
                section = "dma"
                dma_entry = {"dma_id": header[4:].strip()}
                dma_raw = {}
                if not dma_entry["dma_id"]:
                    raise ParseError(f"line {lineno}: empty dma id")
            else:
                raise ParseError(f"line {lineno}: unknown section [{header}]")
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected 'key = value'")
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if section == "global":
            if key not in _GLOBAL_KEYS:
                raise ParseError(f"line {lineno}: unknown key {key!r}")
            value = _convert(raw, _GLOBAL_KEYS[key], key, lineno)
            if key == "duration_cycles" and value <= 0:
                raise ValidationError(
                    f"line {lineno}: duration_cycles must be positive")
            setattr(cfg, key, value)
        elif section == "dram":
            if key not in _DRAM_KEYS:
                raise ParseError(f"line {lineno}: unknown key {key!r} in [dram]")
            value = _convert(raw, _DRAM_KEYS[key], key, lineno)
            if key == "io_freq_mhz":
                cfg.io_freq_mhz = value
            else:
                setattr(cfg.dram, key, value)
        elif section == "controller":
            if key not in _CONTROLLER_KEYS:
                raise ParseError(
                    f"line {lineno}: unknown key {key!r} in [controller]")
            setattr(cfg, key, _convert(raw, _CONTROLLER_KEYS[key], key, lineno))
        elif section == "noc":
            if key not in _NOC_KEYS:
                raise ParseError(f"line {lineno}: unknown key {key!r} in [noc]")
            value = _convert(raw, _NOC_KEYS[key], key, lineno)
            if key == "depth":
                cfg.noc_depth = value
            else:
                cfg.noc_cluster_depth = value
        elif section == "dma":
            if key not in _DMA_KEYS:
                raise ParseError(
                    f"line {lineno}: unknown key {key!r} in [dma ...]")
            if key == "lut":
                dma_raw[key] = raw
            else:
                dma_raw[key] = _convert(raw, _DMA_KEYS[key], key, lineno)
        else:  # pragma: no cover
            raise AssertionError(section)
    finish_dma()
    # the DRAM clock is derived, not stored, but keep the field coherent
    cfg.dram.clock_freq_hz = cfg.command_clock_hz
    cfg.validate()
    return cfg


def emit_config(cfg: ScenarioConfig) -> str:
    """Canonical text form; parse(emit(cfg)) reproduces cfg."""
    out = []
    for key in _GLOBAL_KEYS:
        if key == "duration_cycles" and cfg.duration_cycles == 0:
            continue  # 0 means frame-derived and is not a legal input value
        out.append(f"{key} = {getattr(cfg, key)}")
    out.append("")
    out.append("[dram]")
    out.append(f"io_freq_mhz = {cfg.io_freq_mhz}")
    for key in _DRAM_KEYS:
        if key != "io_freq_mhz":
            out.append(f"{key} = {getattr(cfg.dram, key)}")
    out.append("")
    out.append("[controller]")
    for key in _CONTROLLER_KEYS:
        out.append(f"{key} = {getattr(cfg, key)}")
    out.append("")
    out.append("[noc]")
    out.append(f"depth = {cfg.noc_depth}")
    if cfg.noc_cluster_depth is not None:
        out.append(f"cluster_depth = {cfg.noc_cluster_depth}")
    for e in cfg.dmas:
        out.append("")
        out.append(f"[dma {e.dma_id}]")
        for key in _DMA_KEYS:
            if key == "lut":
                if e.lut:
                    out.append("lut = " + ",".join(str(v) for v in e.lut))
                continue
            out.append(f"{key} = {getattr(e, key)}")
    return "\n".join(out) + "\n"


def load_config(path: str) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def load_packaged_scenario(case: str) -> ScenarioConfig:
    name = f"case_{case.lower()}.cfg"
    text = resources.files("sarasim.scenarios").joinpath(name).read_text()
    return parse_config(text)


def with_policy(cfg: ScenarioConfig, policy: str) -> ScenarioConfig:
    clone = dataclasses.replace(cfg, dram=dataclasses.replace(cfg.dram),
                                dmas=list(cfg.dmas))
    clone.policy = policy
    return clone


def with_frequency(cfg: ScenarioConfig, io_freq_mhz: float) -> ScenarioConfig:
    if io_freq_mhz <= 0:
        raise ValidationError("frequency must be positive")
    clone = dataclasses.replace(cfg, dram=dataclasses.replace(cfg.dram),
                                dmas=list(cfg.dmas))
    clone.io_freq_mhz = io_freq_mhz
    clone.dram.clock_freq_hz = clone.command_clock_hz
    return clone
