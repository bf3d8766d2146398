"""Config files, CSV output, and poll ingestion.

Configs are YAML (JSON also parses).  A flat mapping of model parameters
yields a :class:`ModelConfig`; a file with an ``experiment`` section yields
an :class:`ExperimentSpec`, whose base model comes from an optional
``model`` section.  CSVs use a fixed column order and six decimal places so
identical runs give byte-identical files.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
import yaml

from .config import ConfigError, ModelConfig
from .engine import BOOL_FIELDS, RECORD_FIELDS, RunSpec, RunTrace, WarmupEstimate
from .experiments import (OUTCOMES, ExperimentSpec, OutcomeTable, PollComparison, PollSeries,
                          VALIDATION_METRICS, named_experiment, period_key)
from .stats import tukey_summary

POLL_HEADER = ("period", "red_support", "blue_support")

_EXPERIMENT_KEYS = {"name", "suite", "overrides", "sweep_parameter", "sweep_values",
                    "runs", "cycles", "warmup", "master_seed"}


class PollFormatError(ValueError):
    def __init__(self, path, line: int, message: str):
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


# -- config ----------------------------------------------------------------------

def _key_lines(node, prefix: str = "") -> dict[str, int]:
    """Line number (1-based) of every mapping key, dotted for nested keys."""
    lines = {}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            key = f"{prefix}{key_node.value}"
            lines[key] = key_node.start_mark.line + 1
            lines.update(_key_lines(value_node, key + "."))
    return lines


def _build_config(values: Mapping[str, Any], lines: dict[str, int], path, prefix: str = "") -> ModelConfig:
    def where(key):
        line = lines.get(prefix + key)
        return f"{path}:{line}" if line else str(path)

    if not isinstance(values, Mapping):
        raise ConfigError(prefix.rstrip(".") or "<root>", "expected a mapping of parameters", str(path))
    known = set(ModelConfig.field_names())
    for key in values:
        if key not in known:
            raise ConfigError(str(key), "unknown parameter", where(key))
    try:
        return ModelConfig(**dict(values))
    except ConfigError as err:
        raise ConfigError(err.key, str(err).split(": ", 1)[1], where(err.key)) from None
    except TypeError as err:
        raise ConfigError("<root>", f"bad value: {err}", str(path)) from None


def parse_config(path) -> ModelConfig | ExperimentSpec:
    path = Path(path)
    text = path.read_text()
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        loc = f"{path}:{mark.line + 1}" if mark else str(path)
        raise ConfigError("<file>", f"parse error: {getattr(err, 'problem', err)}", loc) from None
    lines = _key_lines(node) if node is not None else {}
    data = data or {}
    if not isinstance(data, Mapping):
        raise ConfigError("<root>", "top level must be a mapping", str(path))
    if "experiment" not in data:
        return _build_config(data, lines, path)

    for key in data:
        if key not in ("experiment", "model"):
            raise ConfigError(str(key), "unknown section", f"{path}:{lines.get(key)}")
    base = _build_config(data.get("model") or {}, lines, path, "model.")
    exp = data["experiment"] or {}
    for key in exp:
        if key not in _EXPERIMENT_KEYS:
            raise ConfigError(str(key), "unknown experiment setting",
                              f"{path}:{lines.get('experiment.' + str(key))}")
    exp = dict(exp)
    suite = exp.pop("suite", None)
    if suite is not None:
        spec = named_experiment(suite)
        params = {f: getattr(spec, f) for f in ("name", "overrides", "sweep_parameter",
                                                "sweep_values", "runs", "cycles", "warmup")}
    else:
        params = {"name": "custom"}
    params.update(exp)
    params["overrides"] = {**dict(params.get("overrides") or {}), **dict(exp.get("overrides") or {})}
    if "sweep_values" in params:
        params["sweep_values"] = tuple(params["sweep_values"] or ())
    try:
        spec = ExperimentSpec(base=base, **params)
        for _, cfg in spec.condition_configs():
            cfg.validate()
    except ConfigError as err:
        line = lines.get("experiment." + err.key) or lines.get("experiment.overrides." + err.key)
        raise ConfigError(err.key, str(err).split(": ", 1)[1],
                          f"{path}:{line}" if line else str(path)) from None
    except TypeError as err:
        raise ConfigError("experiment", f"bad value: {err}", str(path)) from None
    return spec


# -- CSV writers -------------------------------------------------------------------

def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        s = f"{float(v):.6f}"
        return "0.000000" if s == "-0.000000" else s
    if v is None:
        return ""
    return str(v)


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_value(v) for v in row])


def write_trace_csv(trace: RunTrace, path) -> None:
    fields = [f for f in RECORD_FIELDS if f in trace.columns]
    cols = [trace.columns[f].tolist() for f in fields]
    write_rows(path, fields, zip(*cols))


def outcome_rows(table: OutcomeTable) -> list[list]:
    rows = []
    for c in table.conditions:
        row = [table.spec.name, "" if c.value is None else c.value, c.runs]
        for name in OUTCOMES:
            row += [c.mean(name), c.sd(name)]
        rows.append(row)
    return rows


def outcome_header() -> list[str]:
    header = ["experiment", "condition", "runs"]
    for name in OUTCOMES:
        header += [f"{name}_mean", f"{name}_sd"]
    return header


def write_outcome_csv(table: OutcomeTable, path) -> None:
    write_rows(path, outcome_header(), outcome_rows(table))


def write_correlations_csv(table: OutcomeTable, path) -> None:
    rows = [[table.spec.name, table.spec.sweep_parameter, k, v] for k, v in table.correlations.items()]
    write_rows(path, ["experiment", "sweep_parameter", "outcome", "spearman"], rows)


def write_box_csv(table: OutcomeTable, path, outcomes: Sequence[str] = ("mean_tax", "mean_profit",
                                                                          "mean_donated_fraction")) -> None:
    """Tukey box summaries of per-cycle outcome values, one row per condition and outcome."""
    rows = []
    for c in table.conditions:
        for name in outcomes:
            box = tukey_summary(c.per_cycle[name])
            rows.append([table.spec.name, "" if c.value is None else c.value, name, *box.as_tuple()])
    write_rows(path, ["experiment", "condition", "outcome", "lower_staple", "lower_quartile",
                       "median", "upper_quartile", "upper_staple"], rows)


def write_warmup_csv(estimate: WarmupEstimate, path) -> None:
    rows = zip(range(len(estimate.cross_run_mean)), estimate.cross_run_mean.tolist(),
               estimate.moving_average.tolist())
    write_rows(path, ["cycle", "cross_run_mean", "moving_average"], rows)


def write_validation_csv(model_label: str, comparisons: Mapping[str, PollComparison], path) -> None:
    """Table-style rows: poll values, model means, model sds, Cohen's d."""
    metrics = [m for m in VALIDATION_METRICS if m in comparisons]
    rows = [
        ["polls", *[comparisons[m].poll_mean for m in metrics]],
        [model_label, *[comparisons[m].model_mean for m in metrics]],
        [f"{model_label}_sd", *[comparisons[m].model_sd for m in metrics]],
        ["cohens_d", *[comparisons[m].cohens_d for m in metrics]],
    ]
    write_rows(path, ["source", *metrics], rows)


def write_polls(series: PollSeries, path) -> None:
    rows = zip(series.periods, series.red_support.tolist(), series.blue_support.tolist())
    write_rows(path, POLL_HEADER, rows)


def write_csv(obj, path) -> None:
    """Write a trace, outcome table, poll series or warm-up estimate."""
    if isinstance(obj, RunTrace):
        write_trace_csv(obj, path)
    elif isinstance(obj, OutcomeTable):
        write_outcome_csv(obj, path)
    elif isinstance(obj, PollSeries):
        write_polls(obj, path)
    elif isinstance(obj, WarmupEstimate):
        write_warmup_csv(obj, path)
    else:
        raise TypeError(f"cannot write {type(obj).__name__} as CSV")


# -- CSV readers -------------------------------------------------------------------

def read_trace_csv(path, spec: RunSpec | None = None) -> RunTrace:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    unknown = [h for h in header if h not in RECORD_FIELDS]
    if unknown:
        raise ValueError(f"{path}: unknown trace columns {unknown}")
    cols = list(zip(*rows)) if rows else [() for _ in header]
    columns = {}
    for name, values in zip(header, cols):
        if name == "cycle":
            columns[name] = np.array([int(v) for v in values], dtype=np.int64)
        elif name == "incumbent":
            columns[name] = np.array(values, dtype="<U4")
        elif name in BOOL_FIELDS:
            columns[name] = np.array([v == "1" for v in values], dtype=bool)
        else:
            columns[name] = np.array([float(v) for v in values])
    if spec is None:
        n = len(rows)
        warm = int(columns["warmup"].sum()) if "warmup" in columns else 0
        spec = RunSpec(total_cycles=n, warmup_cycles=warm)
    return RunTrace(spec, columns)


def read_rows(path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def ingest_polls(path) -> PollSeries:
    """Read ``period,red_support,blue_support`` rows; errors cite the line."""
    periods, red, blue = [], [], []
    prev = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PollFormatError(path, 1, "empty file") from None
        if tuple(h.strip() for h in header) != POLL_HEADER:
            raise PollFormatError(path, 1, f"header must be {','.join(POLL_HEADER)}")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise PollFormatError(path, line, f"expected 3 fields, got {len(row)}")
            label = row[0].strip()
            try:
                key = period_key(label)
            except ValueError as err:
                raise PollFormatError(path, line, str(err)) from None
            if prev is not None and key <= prev:
                raise PollFormatError(path, line, f"period {label} is not after the previous row")
            prev = key
            values = []
            for name, text in zip(POLL_HEADER[1:], row[1:]):
                try:
                    v = float(text)
                except ValueError:
                    raise PollFormatError(path, line, f"{name} {text!r} is not a number") from None
                if not 0.0 <= v <= 100.0:
                    raise PollFormatError(path, line, f"{name} {v} outside [0, 100]")
                values.append(v)
            periods.append(label)
            red.append(values[0])
            blue.append(values[1])
    if len(periods) < 2:
        raise PollFormatError(path, 1, "need at least two poll records")
    return PollSeries(tuple(periods), np.array(red), np.array(blue))
