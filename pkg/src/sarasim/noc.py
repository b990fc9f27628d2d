"""On-chip network modeled as a tree of priority-aware arbiters.

Default shape: a media-cluster arbiter and a system-cluster arbiter feed a
root arbiter per DRAM channel, next to direct ports for the remaining DMAs.
Every queue hop costs one cycle (a transaction cannot be granted in the
cycle it entered a queue) and every queue is a bounded FIFO, so backpressure
propagates without loss.  Per-DMA FIFO order is preserved end-to-end: each
cluster keeps a single output FIFO whose head is eligible only at the root
of its target channel.

Arbitration modes: "priority" (aged flag first, then priority level,
round-robin tie-break), "fcfs" (oldest head by creation time) and "rr"
(priority-blind round-robin).
"""

from __future__ import annotations

from collections import deque

from .controller import ControllerState
from .core import Transaction

PRIORITY = "priority"
FCFS = "fcfs"
ROUND_ROBIN = "rr"
MODES = (PRIORITY, FCFS, ROUND_ROBIN)


class ArbiterNode:
    """One switch: bounded FIFO per input port, one grant per cycle."""

    def __init__(self, name: str, num_ports: int, depth: int = 8,
                 mode: str = PRIORITY):
        if mode not in MODES:
            raise ValueError(f"unknown arbitration mode {mode}")
        self.name = name
        self.ports = [deque() for _ in range(num_ports)]
        self.depth = depth
        self.mode = mode
        self.rr_pointer = 0

    def offer(self, port: int, txn: Transaction, now: int) -> bool:
        q = self.ports[port]
        if len(q) >= self.depth:
            return False
        txn.t_hop = now
        q.append(txn)
        return True

    def eligible_ports(self, now: int):
        return [i for i, q in enumerate(self.ports)
                if q and q[0].t_hop < now]

    def arbitrate(self, now: int, eligible=None):
        """Pick the winning port index, or None.  Does not move the txn."""
        if eligible is None:
            eligible = self.eligible_ports(now)
        if not eligible:
            return None
        if self.mode == FCFS:
            return min(eligible, key=lambda i: (self.ports[i][0].t_created, i))
        if self.mode == PRIORITY:
            def rank(i):
                head = self.ports[i][0]
                return (1 if head.aged else 0, head.priority)
            best = max(rank(i) for i in eligible)
            eligible = [i for i in eligible if rank(i) == best]
        # round-robin among what is left, starting after rr_pointer
        n = len(self.ports)
        for step in range(1, n + 1):
            i = (self.rr_pointer + step) % n
            if i in eligible:
                self.rr_pointer = i
                return i
        return None

    def grant(self, port: int) -> Transaction:
        return self.ports[port].popleft()

    def resident(self):
        for q in self.ports:
            yield from q


class NocFabric:
    """Leaf queue per DMA, optional cluster arbiters, one root per channel."""

    def __init__(self, clusters: dict, direct: list, dma_order: list,
                 channels: int, depth: int = 8, cluster_depth: int | None = None,
                 mode: str = PRIORITY, leaf_depths: dict | None = None):
        self.mode = mode
        self.depth = depth
        self.cluster_depth = depth if cluster_depth is None else cluster_depth
        self.leaf_depth = {d: (leaf_depths or {}).get(d) or depth
                           for d in dma_order}
        self.channels = channels
        self.dma_order = list(dma_order)
        self.leaf = {}
        self.leaf_node = {}
        self.leaf_port = {}
        self.cluster_names = sorted(clusters)
        self.cluster_nodes = []
        self.cluster_out = []  # one FIFO per cluster, shared across channels
        for name in self.cluster_names:
            members = [d for d in dma_order if d in clusters[name]]
            node = ArbiterNode(name, len(members), depth, mode)
            for port, dma in enumerate(members):
                self.leaf_node[dma] = node
                self.leaf_port[dma] = port
                self.leaf[dma] = node.ports[port]
            self.cluster_nodes.append(node)
            self.cluster_out.append(deque())
        self.direct = [d for d in dma_order if d in direct]
        # root ports: clusters first, then direct DMAs
        self.root_sources = ([("cluster", i) for i in range(len(self.cluster_nodes))]
                             + [("direct", d) for d in self.direct])
        self.roots = [ArbiterNode(f"root{ch}", len(self.root_sources), depth, mode)
                      for ch in range(channels)]
        self._direct_leaf = {}
        for d in self.direct:
            q = deque()
            self.leaf[d] = q
            self._direct_leaf[d] = q

    # -- injection ---------------------------------------------------------

    def offer(self, dma_id: str, txn: Transaction, now: int) -> bool:
        q = self.leaf[dma_id]
        if len(q) >= self.leaf_depth[dma_id]:
            return False
        txn.t_hop = now
        q.append(txn)
        return True

    def leaf_space(self, dma_id: str) -> int:
        return self.leaf_depth[dma_id] - len(self.leaf[dma_id])

    # -- one simulation cycle ---------------------------------------------

    def _root_head(self, src, channel: int, now: int):
        if src[0] == "cluster":
            q = self.cluster_out[src[1]]
        else:
            q = self._direct_leaf[src[1]]
        if q and q[0].t_hop < now and q[0].channel == channel:
            return q
        return None

    def step(self, now: int, controller: ControllerState) -> None:
        # roots drain cluster outputs and direct leaves into the controller
        for ch, root in enumerate(self.roots):
            queues = {}
            eligible = []
            for i, src in enumerate(self.root_sources):
                q = self._root_head(src, ch, now)
                if q is not None:
                    root.ports[i] = q  # arbitration view shares the FIFO
                    queues[i] = q
                    eligible.append(i)
            if not eligible:
                continue
            win = root.arbitrate(now, eligible)
            if win is None:
                continue
            txn = queues[win][0]
            if controller.enqueue(txn, now):
                queues[win].popleft()

        # clusters move leaf heads into their output FIFO
        for ci, node in enumerate(self.cluster_nodes):
            out = self.cluster_out[ci]
            if len(out) >= self.cluster_depth:
                continue
            win = node.arbitrate(now)
            if win is None:
                continue
            txn = node.grant(win)
            txn.t_hop = now
            out.append(txn)

    # -- aging / accounting ------------------------------------------------

    def age_resident(self, now: int, period: int) -> None:
        for q in self.all_queues():
            for txn in q:
                if not txn.aged and now - txn.t_created >= period:
                    txn.aged = True

    def all_queues(self):
        for dma in self.dma_order:
            yield self.leaf[dma]
        yield from self.cluster_out

    def resident_count(self) -> int:
        return sum(len(q) for q in self.all_queues())
