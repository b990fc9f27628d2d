"""Transaction-queue memory controller with pluggable scheduling policies.

Five queues (CPU, GPU, DSP, media, system) share a 42-entry pool by default.
Policies:

  FCFS      globally oldest ready transaction
  RR        round-robin over the five queues, oldest ready within a queue
  FRAME_QOS ready transactions from media DMAs currently behind their
            real-time reference outrank everything, otherwise FCFS
  QOS       priority round-robin (highest priority wins, queue round-robin
            as tie-break) with periodic aging
  QOS_RB    QOS extended to prefer open-row transactions while nobody is
            above the urgency threshold delta
  FR_FCFS   ready row-hits first, FCFS among them, FCFS otherwise

Aged transactions outrank every priority level until completed; aging is
active only under QOS and QOS_RB.
"""

from __future__ import annotations

from collections import deque

from .core import Transaction
from .dram import NEVER, ROW_HIT, DramModel

QUEUE_NAMES = ("cpu", "gpu", "dsp", "media", "system")
NUM_QUEUES = len(QUEUE_NAMES)

FCFS = "FCFS"
RR = "RR"
FRAME_QOS = "FRAME_QOS"
QOS = "QOS"
QOS_RB = "QOS_RB"
FR_FCFS = "FR_FCFS"
POLICIES = (FCFS, RR, FRAME_QOS, QOS, QOS_RB, FR_FCFS)

AGING_POLICIES = (QOS, QOS_RB)


class ControllerState:
    def __init__(self, policy: str = QOS, capacity: int = 42,
                 aging_period: int = 10000, delta: int = 6,
                 queue_of_dma: dict | None = None,
                 static_split: bool = False):
        if policy not in POLICIES:
            raise ValueError(f"unknown policy {policy}")
        self.policy = policy
        self.capacity = capacity
        self.aging_period = aging_period
        self.delta = delta
        self.queue_of_dma = dict(queue_of_dma or {})
        self.static_split = static_split
        self.queues = [deque() for _ in range(NUM_QUEUES)]
        self.occupancy = 0
        self.rr_pointer = 0
        self._seq = 0
        self._arrival = {}  # txn id -> arrival sequence for FCFS tie-breaks
        self.max_wait = 0
        self.enqueued_count = 0
        self.issued_count = 0
        # per-channel cycle before which select cannot possibly succeed;
        # refreshed on every enqueue/issue touching the channel
        self.next_try = {}

    # -- queue admission ---------------------------------------------------

    def queue_index(self, dma_id: str) -> int:
        return self.queue_of_dma[dma_id]

    def enqueue(self, txn: Transaction, now: int) -> bool:
        """Append txn to its designated queue; False means backpressure."""
        qi = self.queue_of_dma[txn.source]
        if self.static_split:
            if len(self.queues[qi]) >= self.capacity // NUM_QUEUES:
                return False
        elif self.occupancy >= self.capacity:
            return False
        txn.queue = qi
        txn.t_enqueued = now
        self.next_try[txn.channel] = 0
        self._arrival[txn.id] = self._seq
        self._seq += 1
        self.queues[qi].append(txn)
        self.occupancy += 1
        self.enqueued_count += 1
        return True

    # -- aging -------------------------------------------------------------

    def apply_aging(self, now: int) -> None:
        if self.policy not in AGING_POLICIES:
            return
        for q in self.queues:
            for txn in q:
                if not txn.aged and now - txn.t_created >= self.aging_period:
                    txn.aged = True

    # -- scheduling --------------------------------------------------------

    def _ready(self, dram: DramModel, channel: int, now: int) -> tuple:
        """(issuable txns, earliest future cycle any txn could become ready)."""
        out = []
        horizon = NEVER
        for q in self.queues:
            for txn in q:
                if txn.channel != channel:
                    continue
                at = dram.earliest_issue(txn, now)
                if at == now:
                    out.append(txn)
                elif at < horizon:
                    horizon = at
        return out, horizon

    def _arrival_key(self, txn: Transaction):
        return (txn.t_enqueued, self._arrival[txn.id])

    def _oldest(self, txns) -> Transaction:
        return min(txns, key=self._arrival_key)

    def _priority_round_robin(self, ready) -> Transaction:
        """Policy 1 over an arbitrary ready set."""
        aged = [t for t in ready if t.aged]
        if aged:
            candidates = aged
        else:
            maxp = max(t.priority for t in ready)
            candidates = [t for t in ready if t.priority == maxp]
        by_queue = {}
        for t in candidates:
            prev = by_queue.get(t.queue)
            if prev is None or self._arrival_key(t) < self._arrival_key(prev):
                by_queue[t.queue] = t
        for step in range(1, NUM_QUEUES + 1):
            qi = (self.rr_pointer + step) % NUM_QUEUES
            if qi in by_queue:
                self.rr_pointer = qi
                return by_queue[qi]
        raise AssertionError("candidates cannot be empty")

    def _select_from(self, ready, dram: DramModel, now: int,
                     unhealthy: set) -> Transaction:
        policy = self.policy
        if policy == FCFS:
            return self._oldest(ready)
        if policy == RR:
            by_queue = {}
            for t in ready:
                prev = by_queue.get(t.queue)
                if prev is None or self._arrival_key(t) < self._arrival_key(prev):
                    by_queue[t.queue] = t
            for step in range(1, NUM_QUEUES + 1):
                qi = (self.rr_pointer + step) % NUM_QUEUES
                if qi in by_queue:
                    self.rr_pointer = qi
                    return by_queue[qi]
        if policy == FRAME_QOS:
            boosted = [t for t in ready if t.source in unhealthy]
            return self._oldest(boosted) if boosted else self._oldest(ready)
        if policy == FR_FCFS:
            hits = [t for t in ready if dram.classify(t) == ROW_HIT]
            return self._oldest(hits) if hits else self._oldest(ready)
        if policy == QOS:
            return self._priority_round_robin(ready)
        if policy == QOS_RB:
            if not any(t.aged for t in ready):
                prios = {t.priority for t in ready}
                if len(prios) == 1 or max(prios) < self.delta:
                    hits = [t for t in ready if dram.classify(t) == ROW_HIT]
                    if hits:
                        return self._oldest(hits)
            return self._priority_round_robin(ready)
        raise AssertionError(f"unhandled policy {policy}")

    def select(self, dram: DramModel, channel: int, now: int,
               unhealthy: set = frozenset()):
        """Pick and remove one issuable transaction for `channel`, or None.

        When nothing is issuable, `next_try[channel]` is advanced so the
        caller can skip select until a queue event or that cycle arrives.
        """
        if now < self.next_try.get(channel, 0):
            return None
        ready, horizon = self._ready(dram, channel, now)
        if not ready:
            self.next_try[channel] = horizon
            return None
        self.next_try[channel] = 0  # an issue changes bank and bus state
        txn = self._select_from(ready, dram, now, unhealthy)
        self.queues[txn.queue].remove(txn)
        self.occupancy -= 1
        del self._arrival[txn.id]
        self.issued_count += 1
        wait = now - txn.t_created
        if wait > self.max_wait:
            self.max_wait = wait
        return txn

    def resident(self):
        for q in self.queues:
            yield from q
