"""Command-line interface.

Subcommands::

    mfmc pilot       draw a pilot sample and write ensemble statistics (JSON)
    mfmc select      choose the model subset from a statistics file
    mfmc allocate    compute a sampling plan for one budget
    mfmc estimate    run the estimator following a saved plan
    mfmc experiment  full pipeline, writing CSV, JSON and text tables

Budgets are given as multiples of the high-fidelity cost ``w1``. Exit codes:
0 on success, 1 when a budget is infeasible or an experiment row did not
complete, 2 for usage and configuration errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .allocation import METHODS, allocate
from .config import PRESETS, ExperimentConfig, preset
from .ensemble import EnsembleStatistics, measure_costs, write_pilot_csv
from .errors import BudgetError, ConfigError, MFMCError
from .estimator import mc_estimate, mfmc_estimate
from .benchmarks.published import published_statistics
from .harness import custom_statistics, pilot_statistics, resolve_benchmark, run_pipeline
from .report import ResultsTable
from .rng import seed_sequence
from .selection import select_models

# substream key of `mfmc estimate` runs
ESTIMATE_STREAM = 20

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _dump(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _add_config_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", help="JSON experiment configuration")
    src.add_argument("--preset", choices=sorted(PRESETS), help="built-in configuration")
    src.add_argument("--benchmark", choices=["short-column", "burgers"], help="benchmark with default settings")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--pilot-size", type=int)
    p.add_argument("--stats-source", choices=["pilot", "paper"])
    p.add_argument("--lognormal-convention", choices=["underlying", "moments"])
    p.add_argument("--z2-range", type=float, nargs=2, metavar=("LOW", "HIGH"))
    p.add_argument("--training-samples", type=int)
    p.add_argument("--max-workers", type=int)


def _config_from_args(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.load(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    elif args.benchmark:
        cfg = ExperimentConfig(benchmark=args.benchmark)
    else:
        raise ConfigError("one of --config, --preset or --benchmark is required")
    overrides = {
        "seed": args.seed,
        "pilot_size": args.pilot_size,
        "stats_source": args.stats_source,
        "lognormal_convention": args.lognormal_convention,
        "z2_range": None if args.z2_range is None else list(args.z2_range),
        "training_samples": args.training_samples,
        "max_workers": args.max_workers,
    }
    for name in ("n_runs", "reference_size", "budgets", "methods", "models", "output_dir"):
        overrides[name] = getattr(args, name, None)
    if getattr(args, "emit_plot_data", False):
        overrides["emit_plot_data"] = True
    if overrides["budgets"] is not None:
        overrides["budgets"] = [float(b) for b in overrides["budgets"]]
    for name, value in overrides.items():
        if value is not None:
            setattr(cfg, name, value)
    cfg.validate()
    return cfg


def _load_stats(path: str) -> tuple[EnsembleStatistics, int | None]:
    data = json.loads(Path(path).read_text())
    return EnsembleStatistics.from_dict(data), data.get("seed")


def _resolve_subset(stats: EnsembleStatistics, spec: str) -> tuple[list[int], dict | None]:
    if spec == "auto":
        sel = select_models(stats)
        return sel.selected_indices, sel.to_dict()
    if spec == "all":
        return list(range(stats.k)), None
    ids = [s.strip() for s in spec.split(",") if s.strip()]
    missing = [i for i in ids if i not in stats.names]
    if missing:
        raise ConfigError(f"unknown model ids {missing}; available {stats.names}", "subset")
    return [stats.names.index(i) for i in ids], None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_pilot(args) -> int:
    cfg = _config_from_args(args)
    bench = resolve_benchmark(cfg)
    if bench.samplable:
        stats, pilot = pilot_statistics(cfg, bench)
        if args.pilot_csv:
            write_pilot_csv(args.pilot_csv, pilot, stats.names)
        if cfg.stats_source == "paper":
            stats = published_statistics(cfg.benchmark, sigma=stats.sigma)
    else:
        stats = custom_statistics(cfg)
    out = {"seed": cfg.seed, "benchmark": cfg.benchmark, "stats_source": cfg.stats_source, **stats.to_dict()}
    if args.measure_costs and bench.samplable:
        # informational: never fed back into allocation
        out["measured_seconds_per_eval"] = measure_costs(bench.models, bench.input_spec, seed=cfg.seed).tolist()
    _dump(out, args.output)
    return EXIT_OK


def cmd_select(args) -> int:
    stats, seed = _load_stats(args.stats)
    budget = None if args.budget is None else args.budget * float(stats.costs[0])
    sel = select_models(stats, budget=budget)
    _dump({"seed": seed, **sel.to_dict()}, args.output)
    return EXIT_OK


def cmd_allocate(args) -> int:
    stats, seed = _load_stats(args.stats)
    indices, selection = _resolve_subset(stats, args.subset)
    sub = stats.subset(indices)
    w1 = float(stats.costs[0])
    budget = args.budget * w1
    try:
        plan = allocate(sub, budget, args.method)
    except BudgetError as exc:
        _dump(
            {
                "seed": seed,
                "error": "infeasible-budget",
                "message": str(exc),
                "budget": budget,
                "budget_over_w1": args.budget,
                "minimum_budget": math.fsum(sub.costs),
                "models": sub.names,
            },
            args.output,
        )
        return EXIT_FAILED
    out = {
        "seed": seed,
        **plan.to_dict(),
        "budget_over_w1": args.budget,
        "effective_budget": plan.realized_cost / w1,
    }
    if selection is not None:
        out["selection"] = selection
    _dump(out, args.output)
    return EXIT_OK


def cmd_estimate(args) -> int:
    from .allocation import SamplingPlan

    cfg = _config_from_args(args)
    plan = SamplingPlan.load(args.plan)
    bench = resolve_benchmark(cfg)
    if not bench.samplable:
        raise ConfigError("estimation needs a benchmark with models", "benchmark")
    by_id = {m.id: m for m in bench.models}
    ids = plan.model_ids or [m.id for m in bench.models[: plan.k]]
    missing = [i for i in ids if i not in by_id]
    if missing:
        raise ConfigError(f"plan refers to unknown models {missing}")
    models = [by_id[i] for i in ids]
    values = []
    for j in range(args.runs):
        ss = seed_sequence(cfg.seed, ESTIMATE_STREAM, j)
        if plan.method == "mc":
            values.append(mc_estimate(models[0], int(plan.m[0]), bench.input_spec, ss))
        else:
            values.append(mfmc_estimate(models, plan, bench.input_spec, ss).value)
    _dump(
        {
            "seed": cfg.seed,
            "benchmark": cfg.benchmark,
            "models": ids,
            "m": [int(v) for v in plan.m],
            "realized_cost": plan.realized_cost,
            "estimates": values,
            "mean": float(np.mean(values)),
        },
        args.output,
    )
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = _config_from_args(args)
    result = run_pipeline(cfg)
    table = ResultsTable.from_pipeline(result)
    out_dir = Path(args.output_dir) if args.output_dir else cfg.resolved_output_dir
    files = table.write(out_dir, emit_plot_data=cfg.emit_plot_data)
    sys.stdout.write(table.render_text())
    for path in files.values():
        sys.stdout.write(f"# wrote {path}\n")
    if not table.complete:
        bad = [f"{r.budget_over_w1:g}/{r.method}" for r in table.rows if r.status != "ok"]
        sys.stderr.write(f"incomplete rows: {', '.join(bad)}\n")
        return EXIT_FAILED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mfmc", description="Multifidelity Monte Carlo estimation")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pilot", help="estimate ensemble statistics from a pilot sample")
    _add_config_args(p)
    p.add_argument("--output", "-o", help="statistics JSON (default: stdout)")
    p.add_argument("--pilot-csv", help="also write the raw pilot matrix here")
    p.add_argument("--measure-costs", action="store_true",
                   help="also report wall-clock seconds per evaluation (not used for allocation)")
    p.set_defaults(func=cmd_pilot)

    p = sub.add_parser("select", help="select models from a statistics file")
    p.add_argument("stats", help="statistics JSON")
    p.add_argument("--budget", type=float, help="budget in multiples of w1 (scales the variances only)")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("allocate", help="compute a sampling plan")
    p.add_argument("stats", help="statistics JSON")
    p.add_argument("--budget", type=float, required=True, help="budget in multiples of w1")
    p.add_argument("--method", choices=[m for m in METHODS if m != "exhaustive"], default="modified")
    p.add_argument("--subset", default="auto", help="'auto' (select), 'all', or comma-separated ids such as f1,f2,f5")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("estimate", help="run the estimator following a plan")
    p.add_argument("plan", help="plan JSON written by 'allocate'")
    _add_config_args(p)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("experiment", help="run the full benchmark pipeline")
    _add_config_args(p)
    p.add_argument("--budgets", type=float, nargs="+", help="budgets in multiples of w1")
    p.add_argument("--n-runs", type=int)
    p.add_argument("--reference-size", type=int)
    p.add_argument("--methods", nargs="+", choices=["mc", "modified", "naive-rounded"])
    p.add_argument("--models", type=lambda s: [t.strip() for t in s.split(",")], help="explicit subset, e.g. f1,f4,f2")
    p.add_argument("--output-dir")
    p.add_argument("--emit-plot-data", action="store_true", help="write per-run estimates to plot_data.csv")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_USAGE
    except MFMCError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
