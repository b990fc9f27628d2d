#!/usr/bin/env python3
"""Sweep the DRAM I/O frequency and report how one DMA's priority levels and
delivered bandwidth respond.

Usage:
    python scripts/frequency_sweep.py [--dma improc] [--out DIR]
"""

import argparse
from importlib import resources

from sarasim.cli import main as sarasim_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--case", default="sweep", choices=["A", "B", "sweep"])
    parser.add_argument("--dma", default="improc")
    parser.add_argument("--frequencies", default="1700,1600,1500,1400,1300")
    parser.add_argument("--out", default="out/sweep")
    args = parser.parse_args()
    cfg = str(resources.files("sarasim.scenarios")
              / f"case_{args.case.lower()}.cfg")
    return sarasim_main(["sweep", "-c", cfg, "--frequencies",
                         args.frequencies, "--dma", args.dma,
                         "-o", args.out])


if __name__ == "__main__":
    raise SystemExit(main())
