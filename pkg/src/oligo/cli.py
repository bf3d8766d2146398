"""Command-line entry point: ``oligo {run,experiment,validate,warmup}``."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import io
from .config import ConfigError, ModelConfig
from .engine import RunSpec, estimate_warmup, run, run_many
from .experiments import (GALLUP_REFERENCE, ExperimentSpec, compare_to_polls, named_experiment,
                          run_experiment, suite_names, validation_metrics)
from .rng import derive_seed


def _model_config(path) -> ModelConfig:
    if path is None:
        return ModelConfig()
    cfg = io.parse_config(path)
    if isinstance(cfg, ExperimentSpec):
        raise ConfigError("experiment", "this command takes a model config, not an experiment", str(path))
    return cfg


def cmd_run(args) -> int:
    spec = RunSpec(_model_config(args.config), args.cycles, args.warmup, args.seed)
    trace = run(spec)
    out = Path(args.out)
    io.write_trace_csv(trace, out / "trace.csv")
    io.write_rows(out / "summary.csv", ["field", "mean"], sorted(trace.summary.items()))
    print(f"wrote {len(trace)} cycles to {out / 'trace.csv'}")
    return 0


def _experiment_spec(args) -> ExperimentSpec:
    if args.config is not None:
        spec = io.parse_config(args.config)
        if not isinstance(spec, ExperimentSpec):
            spec = ExperimentSpec(name=args.name or "custom", base=spec)
    elif args.name:
        spec = named_experiment(args.name)
    else:
        raise ConfigError("experiment", f"give a suite name ({', '.join(suite_names())}) or --config")
    changes = {"master_seed": args.seed}
    if args.runs is not None:
        changes["runs"] = args.runs
    if args.cycles is not None:
        changes["cycles"] = args.cycles
    if args.warmup is not None:
        changes["warmup"] = args.warmup
    return dataclasses.replace(spec, **changes)


def cmd_experiment(args) -> int:
    spec = _experiment_spec(args)
    table = run_experiment(spec, workers=args.workers, keep_traces=args.trace)
    out = Path(args.out)
    io.write_outcome_csv(table, out / f"{spec.name}_outcomes.csv")
    io.write_box_csv(table, out / f"{spec.name}_boxes.csv")
    if table.correlations:
        io.write_correlations_csv(table, out / f"{spec.name}_correlations.csv")
    if args.trace:
        for ci, cond in enumerate(table.conditions):
            for r, trace in enumerate(cond.traces):
                io.write_trace_csv(trace, out / "traces" / f"{spec.name}_c{ci}_r{r}.csv")
    print(f"{spec.name}: {len(table.conditions)} condition(s) x {spec.runs} runs -> {out}")
    return 0


def cmd_validate(args) -> int:
    cfg = _model_config(args.config)
    specs = [RunSpec(cfg, args.warmup + args.window, args.warmup, derive_seed(args.seed, 0, r))
             for r in range(args.runs)]
    traces = run_many(specs, args.workers)
    metrics = [validation_metrics(t, args.window) for t in traces]
    polls = io.ingest_polls(args.polls) if args.polls else GALLUP_REFERENCE
    comparisons = compare_to_polls(metrics, polls)
    out = Path(args.out)
    io.write_validation_csv(cfg.variant, comparisons, out / "validation.csv")
    for m, c in comparisons.items():
        print(f"{m:16s} model {c.model_mean:9.3f}  polls {c.poll_mean:9.3f}  d {c.cohens_d:7.3f}")
    return 0


def cmd_warmup(args) -> int:
    cfg = _model_config(args.config)
    specs = [RunSpec(cfg, args.cycles, 0, derive_seed(args.seed, 0, r)) for r in range(args.runs)]
    est = estimate_warmup(run_many(specs, args.workers), args.field, args.window, args.band)
    out = Path(args.out)
    io.write_warmup_csv(est, out / "warmup.csv")
    print(f"suggested warm-up: {est.suggested_cycles} cycles")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oligo", description="Oligarch, party and voter simulation.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, runs_default):
        sp.add_argument("--config", help="YAML config file")
        sp.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--runs", type=int, default=runs_default)
        sp.add_argument("--workers", type=int, default=1, help="worker processes")

    sp = sub.add_parser("run", help="one run, written as a per-cycle trace")
    sp.add_argument("--config")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=".")
    sp.add_argument("--cycles", type=int, default=1300)
    sp.add_argument("--warmup", type=int, default=300)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("experiment", help="a named suite or a custom experiment config")
    sp.add_argument("name", nargs="?", choices=suite_names(), metavar="NAME",
                    help=f"one of: {', '.join(suite_names())}")
    common(sp, None)
    sp.add_argument("--cycles", type=int)
    sp.add_argument("--warmup", type=int)
    sp.add_argument("--trace", action="store_true", help="also write every run's trace")
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("validate", help="compare red-support volatility with polls")
    common(sp, 100)
    sp.add_argument("--polls", help="poll CSV (period,red_support,blue_support); "
                                    "defaults to the built-in Gallup reference row")
    sp.add_argument("--window", type=int, default=120)
    sp.add_argument("--warmup", type=int, default=300)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("warmup", help="emit the cross-run mean series for warm-up selection")
    common(sp, 20)
    sp.add_argument("--cycles", type=int, default=1300)
    sp.add_argument("--field", default="mean_oligarch_profit")
    sp.add_argument("--window", type=int, default=301, help="moving-average width")
    sp.add_argument("--band", type=float, default=0.05)
    sp.set_defaults(func=cmd_warmup)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, KeyError, OSError) as err:
        msg = err.args[0] if isinstance(err, KeyError) and err.args else err
        print(f"oligo: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
