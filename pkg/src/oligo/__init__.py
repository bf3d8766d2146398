"""Agent-based model of oligarchs, parties and voters with an experiment harness."""

from .config import ConfigError, ModelConfig
from .engine import CycleRecord, RunSpec, RunTrace, estimate_warmup, run, run_many, step
from .experiments import (ExperimentSpec, OutcomeTable, PollSeries, compare_to_polls,
                          named_experiment, run_experiment, validation_metrics)
from .io import ingest_polls, parse_config, write_csv
from .rng import RandomStream, derive_seed, run_streams

__all__ = [
    "ConfigError", "ModelConfig", "CycleRecord", "RunSpec", "RunTrace", "estimate_warmup",
    "run", "run_many", "step", "ExperimentSpec", "OutcomeTable", "PollSeries",
    "compare_to_polls", "named_experiment", "run_experiment", "validation_metrics",
    "ingest_polls", "parse_config", "write_csv", "RandomStream", "derive_seed", "run_streams",
]
__version__ = "0.1.0"
