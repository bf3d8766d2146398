"""Hypothesis tests, correlations and summaries used to analyse model output.

Test statistics are computed here; scipy supplies only the t and normal
distribution tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats as _dist

TAILS = ("two", "one_lower", "one_upper")


class StatsError(ValueError):
    pass


@dataclass(frozen=True)
class TestResult:
    statistic: float
    degrees_of_freedom: float
    p_value: float
    confidence_interval: tuple[float, float]
    tails: str = "two"
    estimate: float = float("nan")

    __test__ = False  # not a pytest class


def _sample(x, name: str, min_n: int = 2) -> np.ndarray:
    a = np.asarray(x, dtype=float).ravel()
    if len(a) < min_n:
        raise StatsError(f"{name} needs at least {min_n} values, got {len(a)}")
    if not np.all(np.isfinite(a)):
        raise StatsError(f"{name} contains non-finite values")
    return a


def _t_result(t: float, df: float, estimate: float, se: float, tails: str,
              confidence: float) -> TestResult:
    if tails not in TAILS:
        raise StatsError(f"tails must be one of {TAILS}, got {tails!r}")
    dist = _dist.t(df) if math.isfinite(df) else _dist.norm()
    if tails == "two":
        p = 2 * dist.sf(abs(t))
        q = dist.ppf(0.5 + confidence / 2)
        ci = (estimate - q * se, estimate + q * se)
    elif tails == "one_upper":
        p = dist.sf(t)
        ci = (estimate - dist.ppf(confidence) * se, math.inf)
    else:
        p = dist.cdf(t)
        ci = (-math.inf, estimate + dist.ppf(confidence) * se)
    return TestResult(float(t), float(df), float(min(1.0, p)), ci, tails, float(estimate))


def welch_t_test(a, b=0.0, tails: str = "two", confidence: float = 0.95) -> TestResult:
    """Welch's unequal-variance t-test.

    ``b`` is either a second sample or a reference mean (one-sample test).
    ``one_upper`` tests mean(a) > mean(b); ``one_lower`` tests mean(a) < mean(b).
    The confidence interval is for mean(a) - mean(b), one-sided when the test is.
    """
    a = _sample(a, "a")
    va = a.var(ddof=1) / len(a)
    if np.ndim(b) == 0:
        se2, df, estimate = va, len(a) - 1.0, a.mean() - float(b)
    else:
        b = _sample(b, "b")
        vb = b.var(ddof=1) / len(b)
        se2 = va + vb
        estimate = a.mean() - b.mean()
        df = se2 ** 2 / (va ** 2 / (len(a) - 1) + vb ** 2 / (len(b) - 1)) if se2 > 0 else math.nan
    if not se2 > 0:
        raise StatsError("zero variance: the t statistic is undefined")
    se = math.sqrt(se2)
    return _t_result(estimate / se, df, estimate, se, tails, confidence)


def rankdata(x) -> np.ndarray:
    """Ranks starting at 1, ties sharing their average rank."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="mergesort")
    sorted_x = x[order]
    # boundaries of runs of equal values
    starts = np.concatenate([[True], sorted_x[1:] != sorted_x[:-1]])
    group = np.cumsum(starts) - 1
    first = np.nonzero(starts)[0]
    counts = np.diff(np.append(first, len(x)))
    avg = first + (counts + 1) / 2.0
    ranks = np.empty(len(x))
    ranks[order] = avg[group]
    return ranks


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx, dy = x - x.mean(), y - y.mean()
    denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if denom == 0:
        raise StatsError("correlation undefined for a constant series")
    return float(np.clip(dx @ dy / denom, -1.0, 1.0))


def spearman(x, y) -> float:
    x, y = _sample(x, "x", 3), _sample(y, "y", 3)
    if len(x) != len(y):
        raise StatsError(f"length mismatch: {len(x)} vs {len(y)}")
    return pearson(rankdata(x), rankdata(y))


@dataclass(frozen=True)
class CrossCorrelation:
    lags: np.ndarray
    values: np.ndarray

    def at(self, lag: int) -> float:
        return float(self.values[int(np.nonzero(self.lags == lag)[0][0])])

    @property
    def peak_lag(self) -> int:
        return int(self.lags[np.argmax(self.values)])


def cross_correlation(x, y, max_lag: int = 5) -> CrossCorrelation:
    """Lagged Pearson correlations between two series.

    The value at lag ``k`` correlates ``x[t + k]`` with ``y[t]`` over the
    overlapping window, so when ``x`` leads ``y`` the peak sits at a
    negative lag.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y):
        raise StatsError(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n <= 2 * max_lag:
        raise StatsError(f"series of length {n} too short for max_lag={max_lag}")
    lags = np.arange(-max_lag, max_lag + 1)
    vals = np.empty(len(lags))
    for i, k in enumerate(lags):
        if k >= 0:
            vals[i] = pearson(x[k:], y[:n - k])
        else:
            vals[i] = pearson(x[:n + k], y[-k:])
    return CrossCorrelation(lags, vals)


@dataclass(frozen=True)
class CrossCorrelationSummary:
    lags: np.ndarray
    mean: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    n_runs: int

    @property
    def peak_lag(self) -> int:
        return int(self.lags[np.argmax(self.mean)])

    @property
    def peak(self) -> float:
        return float(self.mean.max())

    def at(self, lag: int) -> float:
        return float(self.mean[int(np.nonzero(self.lags == lag)[0][0])])


def mean_cross_correlation(xs: Sequence, ys: Sequence, max_lag: int = 5,
                           confidence: float = 0.95) -> CrossCorrelationSummary:
    """Average per-run cross-correlations, with a t interval at each lag."""
    per_run = np.vstack([cross_correlation(x, y, max_lag).values for x, y in zip(xs, ys)])
    n = len(per_run)
    if n < 2:
        raise StatsError("need at least two runs for a confidence interval")
    mean = per_run.mean(axis=0)
    half = _dist.t(n - 1).ppf(0.5 + confidence / 2) * per_run.std(axis=0, ddof=1) / math.sqrt(n)
    return CrossCorrelationSummary(np.arange(-max_lag, max_lag + 1), mean, mean - half, mean + half, n)


def cohens_d(a, b) -> float:
    """Standardized mean difference using the (n-1)-weighted pooled sd.

    Either sample may hold a single value (a reference point), which then
    contributes nothing to the pooled variance.
    """
    a = _sample(a, "a", 1)
    b = _sample(b, "b", 1)
    na, nb = len(a), len(b)
    if na + nb < 3:
        raise StatsError("need at least three values in total")
    ss = (na - 1) * (a.var(ddof=1) if na > 1 else 0.0) + (nb - 1) * (b.var(ddof=1) if nb > 1 else 0.0)
    pooled = math.sqrt(ss / (na + nb - 2))
    if pooled == 0:
        raise StatsError("zero pooled standard deviation")
    return float((a.mean() - b.mean()) / pooled)


def fisher_r_to_z_compare(r1: float, n1: int, r2: float, n2: int,
                          tails: str = "two", confidence: float = 0.95) -> TestResult:
    """Test r1 == r2 for independent samples via Fisher's z transform."""
    for r in (r1, r2):
        if not -1 < r < 1:
            raise StatsError(f"correlation must lie in (-1, 1), got {r}")
    if min(n1, n2) < 4:
        raise StatsError("each correlation needs n >= 4")
    diff = math.atanh(r1) - math.atanh(r2)
    se = math.sqrt(1 / (n1 - 3) + 1 / (n2 - 3))
    return _t_result(diff / se, math.inf, diff, se, tails, confidence)


@dataclass(frozen=True)
class TukeySummary:
    lower_staple: float
    lower_quartile: float
    median: float
    upper_quartile: float
    upper_staple: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.lower_staple, self.lower_quartile, self.median,
                self.upper_quartile, self.upper_staple)


def tukey_summary(sample) -> TukeySummary:
    """Box-plot summary; quartiles by linear interpolation of order statistics."""
    x = np.sort(_sample(sample, "sample", 1))
    q1, med, q3 = np.percentile(x, [25, 50, 75], method="linear")
    reach = 1.5 * (q3 - q1)
    low = x[x >= q1 - reach].min()
    high = x[x <= q3 + reach].max()
    return TukeySummary(float(low), float(q1), float(med), float(q3), float(high))
