"""Deterministic per-DMA random streams.

Each generator gets its own PCG64 stream keyed by (master seed, DMA id), so
adding or removing a DMA never perturbs the draws seen by the others.
"""

from __future__ import annotations

import zlib

import numpy as np


def dma_stream(master_seed: int, dma_id: str) -> np.random.Generator:
    key = zlib.crc32(dma_id.encode("utf-8"))
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(key,))
    return np.random.Generator(np.random.PCG64(seq))
