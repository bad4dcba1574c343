"""Command-line surface: experiment presets, sweeps, and report emission.

Commands: ``characterize | simulate | fuse | inject | synth``.  Options can
come from a YAML/JSON config file (``--config``); explicit flags win.
Each run writes CSV files per metric plus a ``summary.json``; reruns with
the same config overwrite identical bytes.  Logs go to standard error.
"""
from __future__ import annotations

import csv
import json
import logging
import multiprocessing
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import click
import yaml

from . import engine, metrics, workload as wl
from .model import Machine, Source
from .policy import PolicyKind
from .workload import TraceFormat, Workload, WorkloadError

log = logging.getLogger("unisched")

# Capacity sub-workload selection rules: (max nodes, max runtime seconds).
# W1-W3 select small-sized jobs, W4-W6 short-running jobs.
INJECTION_PRESETS: dict[str, tuple[int, int]] = {
    "W1": (128, 30 * 60),
    "W2": (128, 45 * 60),
    "W3": (128, 60 * 60),
    "W4": (4096, 10 * 60),
    "W5": (4096, 29 * 60),
    "W6": (4096, 30 * 60),
}

DEFAULT_FUSE_FRACTIONS = (100.0, 95.0, 90.0, 85.0, 80.0)

# One generic bin set wide enough for both workload classes.
DEFAULT_SIZE_BINS = (
    (1, 1), (2, 32), (33, 128), (129, 256), (257, 512), (513, 1024), (1025, None),
)
DEFAULT_RUNTIME_BINS = metrics.RUNTIME_BINS


@dataclass
class ExperimentConfig:
    """Resolved configuration for one command invocation."""

    machine: Machine
    policy: PolicyKind
    bucket: int
    out_dir: Path
    fractions: tuple[float, ...] = ()
    parallelism: int = 1
    seed: int = 0


def _load_config_file(path: Optional[str]) -> dict:
    if not path:
        return {}
    p = Path(path)
    if not p.exists():
        raise click.ClickException(f"config file not found: {p}")
    data = yaml.safe_load(p.read_text())
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise click.ClickException("config file must contain a mapping")
    return data


def _pick(cfg: dict, key: str, flag_value, default=None):
    """Flag value if given, else config-file value, else default."""
    if flag_value is not None and flag_value != ():
        return flag_value
    return cfg.get(key, default)


def _resolve_workload(
    cfg: dict,
    prefix: str,
    source: Source,
    trace: Optional[str],
    fmt: Optional[str],
    preset: Optional[str],
    count: Optional[int],
    seed: Optional[int],
) -> Optional[Workload]:
    trace = _pick(cfg, f"{prefix}trace", trace)
    fmt = _pick(cfg, f"{prefix}format", fmt, "csv")
    preset = _pick(cfg, f"{prefix}preset", preset)
    count = int(_pick(cfg, f"{prefix}count", count, 10_000))
    seed = int(_pick(cfg, f"{prefix}seed", seed, 0))
    if trace:
        try:
            return wl.parse_trace(trace, TraceFormat(fmt), source=source)
        except (WorkloadError, ValueError) as exc:
            raise click.ClickException(str(exc)) from exc
    if preset:
        try:
            spec = wl.preset_spec(preset, count, seed=seed)
        except WorkloadError as exc:
            raise click.ClickException(str(exc)) from exc
        w = wl.synthesize(spec)
        return Workload(jobs=w.jobs, label=w.label)
    return None


def _require_workload(w: Optional[Workload], what: str) -> Workload:
    if w is None:
        raise click.ClickException(f"missing {what}: give --{what}-trace or --{what}-preset")
    return w


def _ensure_out(out: str) -> Path:
    p = Path(out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _utilization_rows(series: metrics.UtilizationSeries) -> list[list]:
    return [
        [i, series.start + i * series.bucket, ns, f"{v:.6f}"]
        for i, (ns, v) in enumerate(zip(series.node_seconds, series.values))
    ]


def _wait_rows(stats: list[metrics.WaitStats]) -> list[list]:
    return [
        [
            "|".join(s.key),
            s.count,
            f"{s.mean_wait:.3f}",
            f"{s.stdev:.3f}",
            f"{s.stderr:.3f}",
            f"{s.ci95_half_width:.3f}",
            int(s.degenerate),
        ]
        for s in stats
    ]


def _emit_run_reports(result, out: Path, bucket: int) -> dict:
    """Standard per-run reports; returns the summary fragment."""
    util_alloc = metrics.utilization_series(
        result, bucket, metrics.UtilizationVariant.ALLOCATED
    )
    util_eff = metrics.utilization_series(
        result, bucket, metrics.UtilizationVariant.EFFECTIVE
    )
    waits = metrics.wait_stats(
        result, by_source=True, size_bins=DEFAULT_SIZE_BINS, runtime_bins=None
    )
    header = ["bucket", "start", "node_seconds", "utilization"]
    _write_csv(out / "utilization_allocated.csv", header, _utilization_rows(util_alloc))
    _write_csv(out / "utilization_effective.csv", header, _utilization_rows(util_eff))
    _write_csv(
        out / "wait_stats.csv",
        ["group", "count", "mean_wait_s", "stdev_s", "stderr_s", "ci95_s", "degenerate"],
        _wait_rows(waits),
    )
    by_source = metrics.wait_stats(result, by_source=True)
    return {
        "jobs": len(result.records),
        "unschedulable": len(result.unschedulable),
        "mean_utilization_allocated": util_alloc.mean(),
        "mean_utilization_effective": util_eff.mean(),
        "mean_wait_by_source": {s.key[0]: s.mean_wait for s in by_source},
    }


def _parse_policy(name: str) -> PolicyKind:
    try:
        return PolicyKind(name.lower())
    except ValueError:
        raise click.ClickException(
            f"unknown policy {name!r}; expected one of: "
            + ", ".join(p.value for p in PolicyKind)
        ) from None


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose: bool) -> None:
    """Trace-driven batch-scheduling simulator for unified-cluster studies."""
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command()
@click.option("--preset", required=True, type=click.Choice(sorted(wl.PRESETS)))
@click.option("--count", type=int, default=10_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--rate", type=float, default=None, help="Arrival rate per hour override.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def synth(preset: str, count: int, seed: int, rate: Optional[float], out: str) -> None:
    """Generate a synthetic workload CSV from a named preset."""
    kwargs = {} if rate is None else {"arrival_rate_per_hour": rate}
    spec = wl.preset_spec(preset, count, seed=seed, **kwargs)
    w = wl.synthesize(spec)
    wl.write_csv(w, out)
    click.echo(f"wrote {len(w)} jobs to {out}")


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--trace", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "swf"]), default=None)
@click.option("--preset", type=click.Choice(sorted(wl.PRESETS)), default=None)
@click.option("--count", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--trace2", type=click.Path(), default=None)
@click.option("--format2", type=click.Choice(["csv", "swf"]), default=None)
@click.option("--preset2", type=click.Choice(sorted(wl.PRESETS)), default=None)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def characterize(config_path, trace, fmt, preset, count, seed, trace2, format2, preset2, out):
    """Histogram a workload (or two, side by side) by size and runtime."""
    cfg = _load_config_file(config_path)
    w1 = _resolve_workload(cfg, "", Source.CAPABILITY, trace, fmt, preset, count, seed)
    if w1 is None:
        raise click.ClickException("give --trace or --preset")
    w2 = _resolve_workload(cfg, "second_", Source.CAPACITY, trace2, format2, preset2, count, seed)
    chars = [wl.characterize(w, DEFAULT_SIZE_BINS, DEFAULT_RUNTIME_BINS) for w in [w1, w2] if w]
    out_dir = _ensure_out(out)

    def rows(attr: str) -> list[list]:
        base = getattr(chars[0], attr)
        table = []
        for i, row in enumerate(base):
            line = [row.label, row.count, f"{row.percent:.3f}"]
            for c in chars[1:]:
                extra = getattr(c, attr)[i]
                line += [extra.count, f"{extra.percent:.3f}"]
            table.append(line)
        return table

    header = ["bin"]
    for c in chars:
        header += [f"count_{c.label}", f"percent_{c.label}"]
    _write_csv(out_dir / "sizes.csv", header, rows("size_rows"))
    _write_csv(out_dir / "runtimes.csv", header, rows("runtime_rows"))
    _write_json(
        out_dir / "summary.json",
        {
            "workloads": [
                {"label": w.label, "jobs": len(w), "dropped_records": w.dropped}
                for w in [w1, w2]
                if w
            ]
        },
    )
    click.echo(f"characterization written to {out_dir}")


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--trace", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "swf"]), default=None)
@click.option("--preset", type=click.Choice(sorted(wl.PRESETS)), default=None)
@click.option("--count", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--nodes", type=int, default=None)
@click.option("--min-alloc", type=int, default=None)
@click.option("--policy", default=None)
@click.option("--bucket", type=int, default=None)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def simulate(config_path, trace, fmt, preset, count, seed, nodes, min_alloc, policy, bucket, out):
    """Single-system baseline run with standard reports."""
    cfg = _load_config_file(config_path)
    w = _resolve_workload(cfg, "", Source.CAPABILITY, trace, fmt, preset, count, seed)
    if w is None:
        raise click.ClickException("give --trace or --preset")
    machine = Machine(
        total_nodes=int(_pick(cfg, "nodes", nodes, 4360)),
        min_alloc=int(_pick(cfg, "min_alloc", min_alloc, 0)),
    )
    pol = _parse_policy(str(_pick(cfg, "policy", policy, "fcfs")))
    bucket = int(_pick(cfg, "bucket", bucket, metrics.DAY))
    out_dir = _ensure_out(out)
    result = engine.simulate(machine, w, policy=pol)
    summary = {
        "command": "simulate",
        "machine": {"total_nodes": machine.total_nodes, "min_alloc": machine.min_alloc},
        "policy": pol.value,
        "workload": w.label,
        **_emit_run_reports(result, out_dir, bucket),
    }
    _write_json(out_dir / "summary.json", summary)
    click.echo(f"simulation reports written to {out_dir}")


def _fuse_one(args) -> tuple[float, dict]:
    fraction, machine, merged, bucket, out_dir = args
    sized = engine.downsize(machine, fraction)
    result = engine.simulate(sized, merged, policy=PolicyKind.FCFS)
    frac_dir = out_dir / f"frac_{fraction:g}"
    frac_dir.mkdir(parents=True, exist_ok=True)
    fragment = _emit_run_reports(result, frac_dir, bucket)
    fragment["fraction"] = fraction
    fragment["total_nodes"] = sized.total_nodes
    return fraction, fragment


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--capability-trace", type=click.Path(), default=None)
@click.option("--capability-format", type=click.Choice(["csv", "swf"]), default=None)
@click.option("--capability-preset", type=click.Choice(sorted(wl.PRESETS)), default=None)
@click.option("--capability-count", type=int, default=None)
@click.option("--capacity-trace", type=click.Path(), default=None)
@click.option("--capacity-format", type=click.Choice(["csv", "swf"]), default=None)
@click.option("--capacity-preset", type=click.Choice(sorted(wl.PRESETS)), default=None)
@click.option("--capacity-count", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--nodes", type=int, default=None, help="Unified machine size at 100%.")
@click.option("--min-alloc", type=int, default=None)
@click.option("--fraction", "fractions", type=float, multiple=True)
@click.option("--bucket", type=int, default=None)
@click.option("--jobs", "parallelism", type=int, default=None, help="Sweep worker pool size.")
@click.option("--out", required=True, type=click.Path(file_okay=False))
def fuse(config_path, capability_trace, capability_format, capability_preset,
         capability_count, capacity_trace, capacity_format, capacity_preset,
         capacity_count, seed, nodes, min_alloc, fractions, bucket, parallelism, out):
    """Merge two workloads onto a unified machine and sweep downsizing fractions."""
    cfg = _load_config_file(config_path)
    cap = _resolve_workload(
        cfg, "capability_", Source.CAPABILITY,
        capability_trace, capability_format, capability_preset, capability_count, seed,
    )
    cty = _resolve_workload(
        cfg, "capacity_", Source.CAPACITY,
        capacity_trace, capacity_format, capacity_preset, capacity_count, seed,
    )
    if cap is None or cty is None:
        raise click.ClickException("fusion needs two workloads (capability and capacity)")
    merged = wl.merge_workloads(cap, cty)
    # Min-alloc rounding is dropped on the unified system by default: the
    # merged queue accepts single-node jobs.
    machine = Machine(
        total_nodes=int(_pick(cfg, "nodes", nodes, 14_048)),
        min_alloc=int(_pick(cfg, "min_alloc", min_alloc, 0)),
    )
    fractions = tuple(_pick(cfg, "fractions", tuple(fractions), DEFAULT_FUSE_FRACTIONS))
    bucket = int(_pick(cfg, "bucket", bucket, metrics.DAY))
    workers = int(_pick(cfg, "jobs", parallelism, 1))
    out_dir = _ensure_out(out)

    warnings: list[str] = []
    tasks = []
    for fraction in fractions:
        try:
            engine.downsize(machine, fraction)
        except ValueError as exc:
            warnings.append(f"fraction {fraction}: {exc}")
            continue
        tasks.append((fraction, machine, merged, bucket, out_dir))
    if workers > 1 and len(tasks) > 1:
        with multiprocessing.Pool(workers) as pool:
            results = pool.map(_fuse_one, tasks)
    else:
        results = [_fuse_one(t) for t in tasks]

    results.sort(key=lambda r: -r[0])
    sweep = [frag for _, frag in results]
    _write_csv(
        out_dir / "sweep.csv",
        ["fraction", "total_nodes", "mean_utilization_allocated", "mean_utilization_effective"],
        [
            [f["fraction"], f["total_nodes"],
             f"{f['mean_utilization_allocated']:.6f}",
             f"{f['mean_utilization_effective']:.6f}"]
            for f in sweep
        ],
    )
    _write_json(
        out_dir / "summary.json",
        {
            "command": "fuse",
            "machine": {"total_nodes": machine.total_nodes, "min_alloc": machine.min_alloc},
            "policy": PolicyKind.FCFS.value,
            "merged_jobs": len(merged),
            "sweep": sweep,
            "warnings": warnings,
        },
    )
    click.echo(f"fusion sweep written to {out_dir}")


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--capability-trace", type=click.Path(), default=None)
@click.option("--capability-format", type=click.Choice(["csv", "swf"]), default=None)
@click.option("--capability-preset", type=click.Choice(sorted(wl.PRESETS)), default=None)
@click.option("--capability-count", type=int, default=None)
@click.option("--capacity-trace", type=click.Path(), default=None)
@click.option("--capacity-format", type=click.Choice(["csv", "swf"]), default=None)
@click.option("--capacity-preset", type=click.Choice(sorted(wl.PRESETS)), default=None)
@click.option("--capacity-count", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--nodes", type=int, default=None)
@click.option("--min-alloc", type=int, default=None)
@click.option("--policy", default=None)
@click.option("--preset", "w_preset", type=click.Choice(sorted(INJECTION_PRESETS)), default=None,
              help="Named capacity selection rule (W1-W6).")
@click.option("--max-nodes", type=int, default=None)
@click.option("--max-runtime-min", type=int, default=None)
@click.option("--bucket", type=int, default=None)
@click.option("--baseline-only", is_flag=True, default=False)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def inject(config_path, capability_trace, capability_format, capability_preset,
           capability_count, capacity_trace, capacity_format, capacity_preset,
           capacity_count, seed, nodes, min_alloc, policy, w_preset, max_nodes,
           max_runtime_min, bucket, baseline_only, out):
    """Inject filtered capacity jobs into a capability machine's backfill queue."""
    cfg = _load_config_file(config_path)
    cap = _resolve_workload(
        cfg, "capability_", Source.CAPABILITY,
        capability_trace, capability_format, capability_preset, capability_count, seed,
    )
    cty = _resolve_workload(
        cfg, "capacity_", Source.CAPACITY,
        capacity_trace, capacity_format, capacity_preset, capacity_count, seed,
    )
    cap = _require_workload(cap, "capability")
    machine = Machine(
        total_nodes=int(_pick(cfg, "nodes", nodes, 4360)),
        min_alloc=int(_pick(cfg, "min_alloc", min_alloc, 128)),
    )
    pol = _parse_policy(str(_pick(cfg, "policy", policy, "wfp")))
    bucket = int(_pick(cfg, "bucket", bucket, metrics.DAY))
    w_preset = _pick(cfg, "preset_w", w_preset)
    max_nodes = _pick(cfg, "max_nodes", max_nodes)
    max_runtime_min = _pick(cfg, "max_runtime_min", max_runtime_min)
    if w_preset:
        max_nodes, max_runtime = INJECTION_PRESETS[w_preset]
    else:
        max_runtime = max_runtime_min * 60 if max_runtime_min else None
    out_dir = _ensure_out(out)
    warnings: list[str] = []

    baseline_dir = out_dir / "baseline"
    baseline_dir.mkdir(parents=True, exist_ok=True)
    baseline = engine.simulate(machine, cap, policy=pol)
    summary: dict = {
        "command": "inject",
        "machine": {"total_nodes": machine.total_nodes, "min_alloc": machine.min_alloc},
        "policy": pol.value,
        "selection": {"max_nodes": max_nodes, "max_runtime_s": max_runtime,
                      "preset": w_preset},
        "baseline": _emit_run_reports(baseline, baseline_dir, bucket),
    }

    if not baseline_only:
        if cty is None:
            raise click.ClickException("injection needs a capacity workload (or --baseline-only)")
        selected = wl.filter_workload(cty, max_nodes=max_nodes, max_runtime=max_runtime)
        summary["selection"]["selected_jobs"] = len(selected)
        if len(selected) == 0:
            warnings.append("selection rule removed every capacity job; baseline only")
        else:
            injected_dir = out_dir / "injected"
            injected_dir.mkdir(parents=True, exist_ok=True)
            injected = engine.simulate(machine, cap, selected, policy=pol)
            summary["injected"] = _emit_run_reports(injected, injected_dir, bucket)
            cap_waits = metrics.wait_stats(
                injected,
                by_source=True,
                size_bins=DEFAULT_SIZE_BINS,
                runtime_bins=DEFAULT_RUNTIME_BINS,
            )
            _write_csv(
                injected_dir / "wait_stats_binned.csv",
                ["group", "count", "mean_wait_s", "stdev_s", "stderr_s", "ci95_s", "degenerate"],
                _wait_rows(cap_waits),
            )
            rescued = metrics.rescued_resource(injected, bucket)
            _write_csv(
                out_dir / "rescued.csv",
                ["bucket", "rescued_percent"],
                [[i, "" if v is None else f"{v:.3f}"] for i, v in enumerate(rescued)],
            )
            filled = [v for v in rescued if v is not None]
            summary["rescued_mean_percent"] = (
                sum(filled) / len(filled) if filled else 0.0
            )
    summary["warnings"] = warnings
    _write_json(out_dir / "summary.json", summary)
    click.echo(f"injection reports written to {out_dir}")


if __name__ == "__main__":
    main()
