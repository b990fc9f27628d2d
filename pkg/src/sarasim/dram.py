"""Bank-level DRAM timing model with row-buffer state.

The model enforces per-bank command windows (tRCD, tRP, tRTP, tWR, tWTR),
per-rank activate spacing (tRRD, tFAW) and a shared data bus per channel:
every access reserves a tBURST-cycle data window, and windows on one channel
may never overlap (they may be granted out of order, so activate/precharge
work in one bank overlaps data transfer from another).

A whole command sequence (optional PRE, optional ACT, then RD/WR) is issued
atomically; `can_issue` and `issue` share one planning routine so that an
IllegalIssue can only indicate a scheduler bug.

Open-page policy: a row stays open until a conflicting access forces a
precharge.  Refresh is not modeled.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import READ, Transaction

ROW_HIT = 0
ROW_MISS = 1
BANK_CLOSED = 2

NEVER = 1 << 62


class IllegalIssue(Exception):
    pass


class InvalidWindow(Exception):
    pass


@dataclass
class DramTimingConfig:
    CL: int = 36
    tRCD: int = 34
    tRP: int = 34
    tWTR: int = 19
    tRTP: int = 14
    tWR: int = 34
    tRRD: int = 19
    tFAW: int = 75
    tBURST: int = 8
    clock_freq_hz: float = 933.0e6  # command clock
    channels: int = 2
    ranks: int = 2
    banks: int = 8
    column_bits: int = 5  # columns per row per channel = 2**column_bits

    def validate(self) -> None:
        for name in ("CL", "tRCD", "tRP", "tWTR", "tRTP", "tWR", "tRRD",
                     "tFAW", "tBURST"):
            if getattr(self, name) <= 0:
                raise ValueError(f"timing {name} must be positive")
        for name in ("channels", "ranks", "banks"):
            v = getattr(self, name)
            if v <= 0 or v & (v - 1):
                raise ValueError(f"{name} must be a positive power of two")


def service_latency(classification: int, timing: DramTimingConfig) -> int:
    """Cycles from command issue until the data burst completes."""
    if classification == ROW_HIT:
        return timing.CL + timing.tBURST
    if classification == BANK_CLOSED:
        return timing.tRCD + timing.CL + timing.tBURST
    if classification == ROW_MISS:
        return timing.tRP + timing.tRCD + timing.CL + timing.tBURST
    raise ValueError(f"unknown classification {classification}")


class AddressMap:
    """Bit-field layout byte-offset | channel | column | bank | rank | row.

    Bijective over any address range; addresses sharing all bits above the
    column field land in the same (channel, rank, bank, row).
    """

    def __init__(self, timing: DramTimingConfig, offset_bits: int = 6):
        self.offset_bits = offset_bits
        self.channel_bits = (timing.channels - 1).bit_length()
        self.column_bits = timing.column_bits
        self.bank_bits = (timing.banks - 1).bit_length()
        self.rank_bits = (timing.ranks - 1).bit_length()
        self._ch_shift = offset_bits
        self._col_shift = self._ch_shift + self.channel_bits
        self._bank_shift = self._col_shift + self.column_bits
        self._rank_shift = self._bank_shift + self.bank_bits
        self._row_shift = self._rank_shift + self.rank_bits
        self._ch_mask = (1 << self.channel_bits) - 1
        self._col_mask = (1 << self.column_bits) - 1
        self._bank_mask = (1 << self.bank_bits) - 1
        self._rank_mask = (1 << self.rank_bits) - 1

    @property
    def row_stride(self) -> int:
        """Address distance between consecutive rows of the same bank."""
        return 1 << self._row_shift

    def decode(self, addr: int):
        """addr -> (channel, rank, bank, row, column)."""
        return (
            (addr >> self._ch_shift) & self._ch_mask,
            (addr >> self._rank_shift) & self._rank_mask,
            (addr >> self._bank_shift) & self._bank_mask,
            addr >> self._row_shift,
            (addr >> self._col_shift) & self._col_mask,
        )

    def encode(self, channel: int, rank: int, bank: int, row: int,
               column: int = 0, offset: int = 0) -> int:
        return (offset
                | (channel << self._ch_shift)
                | (column << self._col_shift)
                | (bank << self._bank_shift)
                | (rank << self._rank_shift)
                | (row << self._row_shift))


class BankState:
    __slots__ = ("open_row", "earliest_activate", "earliest_read",
                 "earliest_write", "earliest_precharge")

    def __init__(self):
        self.open_row = None
        self.earliest_activate = 0
        self.earliest_read = 0
        self.earliest_write = 0
        self.earliest_precharge = 0


class _ChannelBus:
    """Non-overlapping future data windows, granted in any order."""

    __slots__ = ("windows", "burst")

    def __init__(self, burst: int):
        self.windows = []  # sorted (start, end)
        self.burst = burst

    def prune(self, now: int) -> None:
        windows = self.windows
        drop = 0
        while drop < len(windows) and windows[drop][1] <= now:
            drop += 1
        if drop:
            del windows[:drop]

    def fits(self, completion: int) -> bool:
        start = completion - self.burst
        for w0, w1 in self.windows:
            if w0 >= completion:
                break
            if w1 > start:
                return False
        return True

    def earliest(self, completion: int) -> int:
        """Smallest legal completion cycle >= `completion`."""
        start = completion - self.burst
        for w0, w1 in self.windows:
            if w0 >= start + self.burst:
                break
            if w1 > start:
                start = w1
        return start + self.burst

    def reserve(self, completion: int) -> None:
        start = completion - self.burst
        windows = self.windows
        i = len(windows)
        while i > 0 and windows[i - 1][0] > start:
            i -= 1
        windows.insert(i, (start, completion))


class DramModel:
    """All channel/rank/bank state plus bandwidth and row-hit accounting."""

    def __init__(self, timing: DramTimingConfig):
        timing.validate()
        self.timing = timing
        self.address_map = AddressMap(timing)
        self.banks = [[[BankState() for _ in range(timing.banks)]
                       for _ in range(timing.ranks)]
                      for _ in range(timing.channels)]
        # last 4 activate times per (channel, rank), newest last
        self.rank_activates = [[[] for _ in range(timing.ranks)]
                               for _ in range(timing.channels)]
        self.bus = [_ChannelBus(timing.tBURST) for _ in range(timing.channels)]
        self.row_hits = 0
        self.row_misses = 0
        self.bank_opens = 0
        self.bytes_done = 0

    def decode_into(self, txn: Transaction) -> None:
        ch, rank, bank, row, _col = self.address_map.decode(txn.address)
        txn.channel, txn.rank, txn.bank, txn.row = ch, rank, bank, row

    def classify(self, txn: Transaction) -> int:
        bank = self.banks[txn.channel][txn.rank][txn.bank]
        if bank.open_row is None:
            return BANK_CLOSED
        return ROW_HIT if bank.open_row == txn.row else ROW_MISS

    def _faw_bound(self, channel: int, rank: int) -> tuple:
        """(earliest activate from tRRD, earliest from tFAW)."""
        acts = self.rank_activates[channel][rank]
        rrd = acts[-1] + self.timing.tRRD if acts else 0
        faw = acts[-4] + self.timing.tFAW if len(acts) >= 4 else 0
        return rrd, faw

    def earliest_issue(self, txn: Transaction, now: int) -> int:
        """Exact earliest cycle >= now at which txn's sequence could start,
        assuming no further commands are issued in between."""
        t = self.timing
        bank = self.banks[txn.channel][txn.rank][txn.bank]
        cls = self.classify(txn)
        if cls == ROW_HIT:
            ready = bank.earliest_read if txn.kind == READ else bank.earliest_write
            offset = 0
        elif cls == BANK_CLOSED:
            rrd, faw = self._faw_bound(txn.channel, txn.rank)
            ready = max(bank.earliest_activate, rrd, faw)
            offset = t.tRCD
        else:
            rrd, faw = self._faw_bound(txn.channel, txn.rank)
            ready = max(bank.earliest_precharge,
                        bank.earliest_activate - t.tRP,
                        rrd - t.tRP, faw - t.tRP)
            offset = t.tRP + t.tRCD
        start = max(now, ready)
        data_latency = offset + t.CL + t.tBURST
        completion = self.bus[txn.channel].earliest(start + data_latency)
        return completion - data_latency

    def can_issue(self, txn: Transaction, now: int) -> bool:
        return self.earliest_issue(txn, now) == now

    def issue(self, txn: Transaction, now: int) -> int:
        """Issue the full command sequence for txn; returns completion cycle."""
        if self.earliest_issue(txn, now) != now:
            raise IllegalIssue(
                f"txn {txn.id} not issuable at cycle {now} "
                f"(ch{txn.channel} r{txn.rank} b{txn.bank} row {txn.row})")
        t = self.timing
        bank = self.banks[txn.channel][txn.rank][txn.bank]
        cls = self.classify(txn)
        if cls == ROW_HIT:
            access = now
            self.row_hits += 1
        else:
            if cls == BANK_CLOSED:
                t_act = now
                self.bank_opens += 1
            else:
                t_act = now + t.tRP
                self.row_misses += 1
            acts = self.rank_activates[txn.channel][txn.rank]
            acts.append(t_act)
            del acts[:-4]
            bank.open_row = txn.row
            bank.earliest_activate = t_act + t.tRRD
            access = t_act + t.tRCD
        completion = access + t.CL + t.tBURST
        if txn.kind == READ:
            bank.earliest_read = access + t.tBURST
            bank.earliest_write = access + t.tBURST
            bank.earliest_precharge = max(bank.earliest_precharge,
                                          access + t.tRTP)
        else:
            bank.earliest_read = completion + t.tWTR
            bank.earliest_write = access + t.tBURST
            bank.earliest_precharge = max(bank.earliest_precharge,
                                          completion + t.tWR)
        bus = self.bus[txn.channel]
        bus.prune(now)
        bus.reserve(completion)
        self.bytes_done += txn.size_bytes
        return completion

    @property
    def row_hit_rate(self) -> float:
        total = self.row_hits + self.row_misses + self.bank_opens
        return self.row_hits / total if total else 0.0


def bandwidth(bytes_done: int, window_cycles: int, clock_freq_hz: float) -> float:
    """Average bytes per second over a cycle window."""
    if window_cycles <= 0:
        raise InvalidWindow("window must be positive")
    return bytes_done * clock_freq_hz / window_cycles
