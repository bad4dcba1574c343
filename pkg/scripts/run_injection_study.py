#!/usr/bin/env python3
"""Backfill-queue injection study over the W1-W6 selection rules.

Runs a WFP+EASY baseline on a 4,360-node capability machine with a
128-node minimum allocation, then injects the capacity sub-workload
selected by each rule.  Reports land in OUT_DIR/<rule>/.

    python3 scripts/run_injection_study.py out/injection
    python3 scripts/run_injection_study.py out/injection W1 W4
"""
import sys

from unisched.cli import INJECTION_PRESETS, main

WEEKS = 2
CAPABILITY_COUNT = int(2.7 * 24 * 7 * WEEKS)
CAPACITY_COUNT = int(268 * 24 * 7 * WEEKS)

if len(sys.argv) < 2:
    sys.exit(f"usage: {sys.argv[0]} OUT_DIR [RULE ...]")

out = sys.argv[1]
rules = sys.argv[2:] or sorted(INJECTION_PRESETS)
for rule in rules:
    if rule not in INJECTION_PRESETS:
        sys.exit(f"unknown rule {rule}; choose from {sorted(INJECTION_PRESETS)}")
    main([
        "inject",
        "--capability-preset", "capability-like",
        "--capability-count", str(CAPABILITY_COUNT),
        "--capacity-preset", "capacity-like",
        "--capacity-count", str(CAPACITY_COUNT),
        "--preset", rule,
        "--out", f"{out}/{rule}",
    ], standalone_mode=False)
print(f"injection reports for {', '.join(rules)} under {out}/")
