#!/usr/bin/env python3
"""Fusion downsizing sweep with synthetic presets at a chosen scale.

Merges a capability-predominant and a capacity-predominant workload onto
a 14,048-node unified machine and sweeps machine fractions 100/95/90/85/80.
Any extra arguments are passed straight to ``unisched fuse``.

    python3 scripts/run_fusion_sweep.py out/fusion
    python3 scripts/run_fusion_sweep.py out/fusion --jobs 5 --seed 7
"""
import sys

from unisched.cli import main

WEEKS = 2
CAPABILITY_COUNT = int(2.7 * 24 * 7 * WEEKS)   # ~2.7 jobs/hour
CAPACITY_COUNT = int(268 * 24 * 7 * WEEKS)     # ~268 jobs/hour

if len(sys.argv) < 2:
    sys.exit(f"usage: {sys.argv[0]} OUT_DIR [extra unisched fuse flags]")

main([
    "fuse",
    "--capability-preset", "capability-like",
    "--capability-count", str(CAPABILITY_COUNT),
    "--capacity-preset", "capacity-like",
    "--capacity-count", str(CAPACITY_COUNT),
    "--nodes", "14048",
    "--out", sys.argv[1],
    *sys.argv[2:],
])
