"""Experiment definitions, outcome aggregation, and validation against polls."""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from . import stats
from .config import ConfigError, ModelConfig
from .engine import RunSpec, RunTrace, run_many
from .rng import derive_seed

# outcomes aggregated per run (mean over measurement cycles)
OUTCOMES = (
    "mean_tax",
    "mean_party_olig",
    "abs_mean_party_ideo",
    "olig_defeats_center",
    "mean_profit",
    "mean_donated_fraction",
    "mean_donation_size",
    "mean_salience",
    "party_olig_gap",
    "mean_party_ideo",
    "red_ideo",
    "blue_ideo",
    "red_olig",
    "max_red_vote",
    "mean_abs_red_vote_change",
)

# outcomes correlated against a sweep parameter
SWEEP_OUTCOMES = ("mean_profit", "mean_donation_size", "mean_tax", "olig_defeats_center",
                  "mean_party_olig", "abs_mean_party_ideo")

_CYCLE_SOURCES = {
    "mean_tax": "tax_rate",
    "mean_party_olig": "mean_party_olig",
    "mean_profit": "mean_oligarch_profit",
    "mean_donated_fraction": "mean_donated_fraction",
    "mean_donation_size": "mean_donation_size",
    "mean_salience": "mean_voter_salience",
    "party_olig_gap": "party_olig_gap",
    "mean_party_ideo": "mean_party_ideo",
    "red_ideo": "red_ideo",
    "blue_ideo": "blue_ideo",
    "red_olig": "red_olig",
}


def olig_defeats_center(trace: RunTrace) -> np.ndarray:
    """Per measurement cycle: the winner had the higher olig and the less central ideo."""
    return trace.measurement("winner_higher_olig") & trace.measurement("winner_less_central_ideo")


def olig_defeats_center_fraction(trace: RunTrace) -> float:
    return float(olig_defeats_center(trace).mean())


def cycle_outcomes(trace: RunTrace) -> dict[str, np.ndarray]:
    """Per-cycle outcome values over the measurement segment."""
    out = {name: trace.measurement(src) for name, src in _CYCLE_SOURCES.items()
           if src in trace.columns}
    if "mean_party_ideo" in trace.columns:
        out["abs_mean_party_ideo"] = np.abs(trace.measurement("mean_party_ideo"))
    out["olig_defeats_center"] = olig_defeats_center(trace).astype(float)
    return out


def run_outcomes(trace: RunTrace) -> dict[str, float]:
    out = {name: float(v.mean()) for name, v in cycle_outcomes(trace).items()}
    votes = trace.measurement("red_vote_pct")
    out["max_red_vote"] = float(votes.max())
    out["mean_abs_red_vote_change"] = float(np.abs(np.diff(votes)).mean())
    return out


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    base: ModelConfig = field(default_factory=ModelConfig)
    overrides: Mapping[str, Any] = field(default_factory=dict)
    sweep_parameter: str | None = None
    sweep_values: tuple = ()
    runs: int = 100
    cycles: int = 1300
    warmup: int = 300
    master_seed: int = 0

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError("runs", "must be at least 1")
        if not 0 <= self.warmup < self.cycles:
            raise ConfigError("warmup", "must satisfy 0 <= warmup < cycles")
        known = set(ModelConfig.field_names())
        for key in self.overrides:
            if key not in known:
                raise ConfigError(key, "unknown override")
        if self.sweep_parameter is not None:
            if self.sweep_parameter not in known:
                raise ConfigError("sweep_parameter", f"unknown parameter {self.sweep_parameter!r}")
            if not self.sweep_values:
                raise ConfigError("sweep_values", "must be non-empty when a sweep parameter is named")

    def condition_configs(self) -> list[tuple[Any, ModelConfig]]:
        cfg = self.base.replace(**self.overrides)
        if self.sweep_parameter is None:
            return [(None, cfg)]
        return [(v, cfg.replace(**{self.sweep_parameter: v})) for v in self.sweep_values]

    def run_specs(self) -> list[list[RunSpec]]:
        return [
            [RunSpec(cfg, self.cycles, self.warmup, derive_seed(self.master_seed, ci, r))
             for r in range(self.runs)]
            for ci, (_, cfg) in enumerate(self.condition_configs())
        ]


@dataclass
class ConditionResult:
    value: Any
    config: ModelConfig
    per_run: dict[str, np.ndarray]
    per_cycle: dict[str, np.ndarray]
    traces: list[RunTrace] | None = None

    @property
    def runs(self) -> int:
        return len(next(iter(self.per_run.values())))

    def mean(self, outcome: str) -> float:
        return float(self.per_run[outcome].mean())

    def sd(self, outcome: str) -> float:
        v = self.per_run[outcome]
        return float(v.std(ddof=1)) if len(v) > 1 else 0.0


@dataclass
class OutcomeTable:
    spec: ExperimentSpec
    conditions: list[ConditionResult]
    correlations: dict[str, float] = field(default_factory=dict)

    def condition(self, value: Any = None) -> ConditionResult:
        for c in self.conditions:
            if c.value == value or (value is None and len(self.conditions) == 1):
                return c
        raise KeyError(f"no condition with value {value!r}")

    def mean(self, outcome: str, value: Any = None) -> float:
        return self.condition(value).mean(outcome)

    def compare(self, outcome: str, value_a: Any, value_b: Any, tails: str = "two") -> stats.TestResult:
        """Welch test between the per-run outcomes of two conditions."""
        return stats.welch_t_test(self.condition(value_a).per_run[outcome],
                                  self.condition(value_b).per_run[outcome], tails)

    def subset(self, values: Sequence) -> "OutcomeTable":
        conds = [c for c in self.conditions if c.value in values]
        table = OutcomeTable(self.spec, conds)
        table.correlations = sweep_correlations(conds)
        return table


def sweep_correlations(conditions: Sequence[ConditionResult],
                       outcomes: Sequence[str] = SWEEP_OUTCOMES) -> dict[str, float]:
    """Spearman correlation of the sweep value with each outcome.

    Continuous outcomes contribute one point per measurement cycle; the
    olig-defeats-center outcome is a per-run fraction, so it contributes
    one point per run.
    """
    out = {}
    for name in outcomes:
        xs, ys = [], []
        for c in conditions:
            if name == "olig_defeats_center":
                y = c.per_run[name]
            elif name in c.per_cycle:
                y = c.per_cycle[name]
            else:
                continue
            xs.append(np.full(len(y), float(c.value)))
            ys.append(y)
        if not ys:
            continue
        x, y = np.concatenate(xs), np.concatenate(ys)
        try:
            out[name] = stats.spearman(x, y)
        except stats.StatsError:
            out[name] = float("nan")
    return out


def summarize_condition(value: Any, config: ModelConfig, traces: Sequence[RunTrace],
                        keep_traces: bool = False) -> ConditionResult:
    rows = [run_outcomes(t) for t in traces]
    per_run = {k: np.array([r[k] for r in rows]) for k in rows[0]}
    cycles = [cycle_outcomes(t) for t in traces]
    per_cycle = {k: np.concatenate([c[k] for c in cycles]) for k in cycles[0]}
    return ConditionResult(value, config, per_run, per_cycle, list(traces) if keep_traces else None)


def run_experiment(spec: ExperimentSpec, workers: int | None = None,
                   keep_traces: bool = False) -> OutcomeTable:
    grouped = spec.run_specs()
    flat = [s for group in grouped for s in group]
    traces = run_many(flat, workers)
    conditions = []
    for ci, (value, cfg) in enumerate(spec.condition_configs()):
        chunk = traces[ci * spec.runs:(ci + 1) * spec.runs]
        conditions.append(summarize_condition(value, cfg, chunk, keep_traces))
    table = OutcomeTable(spec, conditions)
    if spec.sweep_parameter is not None:
        table.correlations = sweep_correlations(conditions)
    return table


def comparable_profit(profit: float, config: ModelConfig, reference_count: int = 5) -> float:
    """Per-oligarch profit rescaled to a population of ``reference_count`` oligarchs."""
    return profit * config.oligarch_count / reference_count


# -- named experiments ---------------------------------------------------------

def _income_variant(fraction: float) -> dict[str, float]:
    # total income stays at GDP, so voters receive the remainder
    base = ModelConfig()
    return {"oligarch_gdp_fraction": fraction,
            "voter_gross_income": base.gdp * (1 - fraction) / base.voter_count}


_SUITES: dict[str, dict[str, Any]] = {
    "base": dict(),
    "fixed_party_olig": dict(overrides={"fixed_party_olig": True}),
    "donation_size_sweep": dict(overrides={"fixed_donation_size": True},
                                sweep_parameter="oligarch_initial_donation",
                                sweep_values=(0.0, 0.2, 0.4, 0.6, 0.8, 1.0), runs=20),
    "ad_decay_sweep": dict(sweep_parameter="voter_ad_decay_factor",
                           sweep_values=(-0.12, -0.1, -0.08, -0.06, -0.04, -0.02), runs=20),
    "salience_sweep": dict(overrides={"fixed_salience": True},
                           sweep_parameter="voter_initial_salience",
                           sweep_values=(0.0, 0.2, 0.4, 0.6, 0.8, 1.0), runs=20),
    "memory_sweep": dict(sweep_parameter="voter_memory_strength",
                         sweep_values=(0.1, 0.3, 0.5, 0.7, 0.9), runs=20),
    "pimm": dict(overrides={"variant": "PIMM"}),
    "aimm": dict(overrides={"variant": "AIMM"}),
    "income_2pct": dict(overrides=_income_variant(0.02)),
    "income_10pct": dict(overrides=_income_variant(0.10)),
    "voters_50": dict(overrides={"voter_count": 50, "voter_gross_income": 19.0}),
    "oligarchs_10": dict(overrides={"oligarch_count": 10}),
    "oligarchs_50": dict(overrides={"oligarch_count": 50}),
    "bimodal": dict(overrides={"voter_distribution": "bimodal"}),
    "null_option": dict(overrides={"allow_null_donation_action": True}),
}

# the six computational experiments on the base model
CORE_EXPERIMENTS = ("base", "fixed_party_olig", "donation_size_sweep",
                    "ad_decay_sweep", "salience_sweep", "memory_sweep")
ROBUSTNESS = ("voters_50", "oligarchs_10", "oligarchs_50", "bimodal", "null_option")


def suite_names() -> tuple[str, ...]:
    return tuple(_SUITES)


def named_experiment(name: str, runs: int | None = None, master_seed: int = 0,
                     cycles: int = 1300, warmup: int = 300) -> ExperimentSpec:
    try:
        params = dict(_SUITES[name])
    except KeyError:
        raise KeyError(f"unknown experiment {name!r}; choose from {', '.join(_SUITES)}") from None
    if runs is not None:
        params["runs"] = runs
    return ExperimentSpec(name=name, master_seed=master_seed, cycles=cycles, warmup=warmup, **params)


# -- verification --------------------------------------------------------------

def verification_battery(table: OutcomeTable) -> dict[str, stats.TestResult]:
    """Calibration and non-degeneracy tests on per-run means of one condition."""
    cond = table.condition()
    cfg = cond.config
    r = cond.per_run
    return {
        "party_ideo_centred": stats.welch_t_test(r["mean_party_ideo"], 0.0, "two"),
        "party_olig_below_zero": stats.welch_t_test(r["mean_party_olig"], 0.0, "one_lower"),
        "party_olig_above_min_pos": stats.welch_t_test(r["mean_party_olig"], cfg.min_pos, "one_upper"),
        "salience_positive": stats.welch_t_test(r["mean_salience"], 0.0, "one_upper"),
        "tax_below_max": stats.welch_t_test(r["mean_tax"], cfg.voter_max_tax, "one_lower"),
        "donation_positive": stats.welch_t_test(r["mean_donation_size"], 0.0, "one_upper"),
    }


# -- validation against polling data ---------------------------------------------

VALIDATION_METRICS = ("mean_red", "min_red", "max_red",
                      "mean_abs_change", "max_abs_change", "sd_change")

# summary of Gallup monthly two-party support, 2004-2013
GALLUP_REFERENCE = {
    "mean_red": 42.0,
    "min_red": 34.0,
    "max_red": 50.0,
    "mean_abs_change": 2.28,
    "max_abs_change": 8.0,
    "sd_change": 2.87,
}

_PERIOD = re.compile(r"^(\d{4})-(\d{2})(?:-(\d{2}))?$")


def period_key(label: str) -> tuple[int, int, int]:
    m = _PERIOD.match(label.strip())
    if not m:
        raise ValueError(f"period {label!r} is not YYYY-MM or YYYY-MM-DD")
    year, month, day = int(m.group(1)), int(m.group(2)), int(m.group(3) or 1)
    if not 1 <= month <= 12:
        raise ValueError(f"period {label!r} has month {month}")
    return year, month, day


@dataclass(frozen=True)
class PollSeries:
    periods: tuple[str, ...]
    red_support: np.ndarray
    blue_support: np.ndarray

    def __post_init__(self):
        n = len(self.periods)
        if n < 2:
            raise ValueError("a poll series needs at least two records")
        if len(self.red_support) != n or len(self.blue_support) != n:
            raise ValueError("periods and support columns differ in length")
        for col in (self.red_support, self.blue_support):
            if np.any((col < 0) | (col > 100)):
                raise ValueError("support percentages must lie in [0, 100]")
        keys = [period_key(p) for p in self.periods]
        if any(b <= a for a, b in zip(keys, keys[1:])):
            raise ValueError("poll periods are not in chronological order")

    def __len__(self):
        return len(self.periods)

    def __eq__(self, other):
        if not isinstance(other, PollSeries):
            return NotImplemented
        return (self.periods == other.periods
                and np.array_equal(self.red_support, other.red_support)
                and np.array_equal(self.blue_support, other.blue_support))


def support_metrics(support) -> dict[str, float]:
    """The six summary statistics of a red-support percentage series."""
    s = np.asarray(support, dtype=float)
    if len(s) < 3:
        raise ValueError("need at least three support values")
    delta = np.diff(s)
    return {
        "mean_red": float(s.mean()),
        "min_red": float(s.min()),
        "max_red": float(s.max()),
        "mean_abs_change": float(np.abs(delta).mean()),
        "max_abs_change": float(np.abs(delta).max()),
        "sd_change": float(delta.std(ddof=1)),
    }


def validation_metrics(trace: RunTrace, window: int = 120) -> dict[str, float]:
    """Support metrics over the first ``window`` measurement cycles of a run."""
    support = trace.measurement("red_vote_pct")
    if window > len(support):
        raise ValueError(f"window {window} exceeds the {len(support)} measurement cycles")
    return support_metrics(support[:window])


@dataclass(frozen=True)
class PollComparison:
    metric: str
    model_mean: float
    model_sd: float
    poll_mean: float
    cohens_d: float


def compare_to_polls(model_metrics: Sequence[Mapping[str, float]],
                     polls: PollSeries | Mapping[str, float] | Sequence[Mapping[str, float]],
                     metrics: Sequence[str] = VALIDATION_METRICS) -> dict[str, PollComparison]:
    """Cohen's d of model metrics (one mapping per run) against the poll side.

    A single poll series or reference row counts as one observation, so its
    d is the model-side standardized distance from it.
    """
    if isinstance(polls, PollSeries):
        poll_rows = [support_metrics(polls.red_support)]
    elif isinstance(polls, Mapping):
        poll_rows = [polls]
    else:
        poll_rows = list(polls)
    if not poll_rows:
        raise ValueError("no poll observations")
    if not model_metrics:
        raise ValueError("no model observations")
    out = {}
    for m in metrics:
        a = np.array([row[m] for row in model_metrics], dtype=float)
        b = np.array([row[m] for row in poll_rows], dtype=float)
        out[m] = PollComparison(m, float(a.mean()), float(a.std(ddof=1)) if len(a) > 1 else 0.0,
                                float(b.mean()), stats.cohens_d(a, b))
    return out
