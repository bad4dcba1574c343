#!/usr/bin/env python3
"""Side-by-side size and runtime histograms of the two synthetic presets.

    python3 scripts/characterize_presets.py out/characterization
"""
import sys

from unisched.cli import main

if len(sys.argv) < 2:
    sys.exit(f"usage: {sys.argv[0]} OUT_DIR [extra unisched characterize flags]")

main([
    "characterize",
    "--preset", "capability-like",
    "--preset2", "capacity-like",
    "--count", "50000",
    "--out", sys.argv[1],
    *sys.argv[2:],
])
