"""Run loop: the five-stage cycle, whole runs, and warm-up estimation."""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import model
from .config import ModelConfig
from .model import RED, WorldState
from .rng import RunStreams, run_streams


@dataclass(frozen=True, slots=True)
class CycleRecord:
    cycle: int
    tax_rate: float
    tax_collected: float
    red_ideo: float
    blue_ideo: float
    red_olig: float
    blue_olig: float
    mean_party_ideo: float
    mean_party_olig: float
    party_olig_gap: float
    mean_voter_salience: float
    total_donations: float
    mean_donation_size: float
    mean_donated_fraction: float
    mean_oligarch_profit: float
    incumbent: str
    red_vote_pct: float
    winner_closer_to_ideo_center: bool
    winner_higher_olig: bool
    winner_less_central_ideo: bool
    warmup: bool = False


RECORD_FIELDS = tuple(f.name for f in dataclasses.fields(CycleRecord))
BOOL_FIELDS = ("winner_closer_to_ideo_center", "winner_higher_olig",
               "winner_less_central_ideo", "warmup")

STAGES = ("update_oligarch_donations", "vote", "redistribute",
          "update_voter_olig_salience", "update_party_policies")

StageHook = Callable[[str, WorldState], None]


def step(world: WorldState, streams: RunStreams, hook: StageHook | None = None) -> CycleRecord:
    """Advance ``world`` by one cycle and return the end-of-cycle record."""
    model.update_oligarch_donations(world, streams.oligarchs, streams.ties)
    if hook:
        hook(STAGES[0], world)
    votes = model.vote(world, streams.voters, streams.ties)
    if hook:
        hook(STAGES[1], world)
    model.redistribute(world)
    if hook:
        hook(STAGES[2], world)
    model.update_voter_olig_salience(world, streams.voters)
    if hook:
        hook(STAGES[3], world)
    model.update_party_policies(world, streams.parties)
    if hook:
        hook(STAGES[4], world)

    cfg, red, blue, olig = world.config, world.red, world.blue, world.oligarchs
    mean_size = float(olig.donation_size.mean())
    record = CycleRecord(
        cycle=world.cycle,
        tax_rate=world.tax_rate,
        tax_collected=world.tax_collected,
        red_ideo=red.ideo,
        blue_ideo=blue.ideo,
        red_olig=red.olig,
        blue_olig=blue.olig,
        mean_party_ideo=0.5 * (red.ideo + blue.ideo),
        mean_party_olig=0.5 * (red.olig + blue.olig),
        party_olig_gap=abs(red.olig - blue.olig),
        mean_voter_salience=float(world.voters.olig_salience.mean()),
        total_donations=world.total_donations,
        mean_donation_size=mean_size,
        mean_donated_fraction=mean_size * world.donation_scale,
        mean_oligarch_profit=(world.tax_collected - world.total_donations) / cfg.oligarch_count,
        incumbent=world.incumbent,
        red_vote_pct=100.0 * votes[RED] / cfg.voter_count,
        winner_closer_to_ideo_center=world.winner_closer_to_ideo_center,
        winner_higher_olig=world.winner_higher_olig,
        winner_less_central_ideo=world.winner_less_central_ideo,
    )
    world.cycle += 1
    return record


@dataclass(frozen=True)
class RunSpec:
    config: ModelConfig = field(default_factory=ModelConfig)
    total_cycles: int = 1300
    warmup_cycles: int = 300
    seed: int = 0
    recorded_fields: tuple[str, ...] | None = None

    def __post_init__(self):
        if not 0 <= self.warmup_cycles < self.total_cycles:
            raise ValueError(
                f"need 0 <= warmup_cycles < total_cycles, got {self.warmup_cycles}, {self.total_cycles}")
        if self.recorded_fields is not None:
            unknown = set(self.recorded_fields) - set(RECORD_FIELDS)
            if unknown:
                raise ValueError(f"unknown record fields: {sorted(unknown)}")


class RunTrace:
    """All cycle records of one run, stored column-wise.

    ``records`` rebuilds the per-cycle :class:`CycleRecord` objects; the
    ``measurement`` columns skip the warm-up segment.
    """

    def __init__(self, spec: RunSpec, columns: dict[str, np.ndarray]):
        self.spec = spec
        self.columns = columns

    @classmethod
    def from_records(cls, spec: RunSpec, records: Sequence[CycleRecord]) -> "RunTrace":
        fields = spec.recorded_fields or RECORD_FIELDS
        keep = set(fields) | {"cycle", "warmup"}
        columns = {}
        for name in RECORD_FIELDS:
            if name not in keep:
                continue
            values = [getattr(r, name) for r in records]
            if name == "incumbent":
                columns[name] = np.array(values, dtype="<U4")
            elif name in BOOL_FIELDS:
                columns[name] = np.array(values, dtype=bool)
            elif name == "cycle":
                columns[name] = np.array(values, dtype=np.int64)
            else:
                columns[name] = np.array(values, dtype=float)
        return cls(spec, columns)

    def __len__(self):
        return len(self.columns["cycle"])

    def __eq__(self, other):
        if not isinstance(other, RunTrace) or self.spec != other.spec:
            return NotImplemented
        return (self.columns.keys() == other.columns.keys()
                and all(np.array_equal(self.columns[k], other.columns[k]) for k in self.columns))

    @property
    def fields(self) -> tuple[str, ...]:
        return tuple(self.columns)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise KeyError(f"field {name!r} was not recorded") from None

    def measurement(self, name: str) -> np.ndarray:
        return self.column(name)[~self.columns["warmup"]]

    @property
    def records(self) -> list[CycleRecord]:
        missing = [f for f in RECORD_FIELDS if f not in self.columns]
        if missing:
            raise ValueError(f"trace lacks fields {missing}; records need all fields")
        cols = [self.columns[f].tolist() for f in RECORD_FIELDS]
        return [CycleRecord(*row) for row in zip(*cols)]

    @property
    def summary(self) -> dict[str, float]:
        """Per-field means over the measurement cycles."""
        out = {}
        for name, col in self.columns.items():
            if name in ("cycle", "incumbent", "warmup"):
                continue
            out[name] = float(col[~self.columns["warmup"]].mean())
        return out


def run(spec: RunSpec, hook: StageHook | None = None) -> RunTrace:
    streams = run_streams(spec.seed)
    world = model.init_world(spec.config, streams.init)
    records = []
    for i in range(spec.total_cycles):
        rec = step(world, streams, hook)
        if i < spec.warmup_cycles:
            rec = dataclasses.replace(rec, warmup=True)
        records.append(rec)
    return RunTrace.from_records(spec, records)


def run_many(specs: Iterable[RunSpec], workers: int | None = None) -> list[RunTrace]:
    """Execute independent runs, in worker processes when ``workers`` > 1.

    Each run is seeded by its own spec, so results do not depend on the
    execution order.
    """
    specs = list(specs)
    if not workers or workers <= 1 or len(specs) < 2:
        return [run(s) for s in specs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, specs, chunksize=max(1, len(specs) // (4 * workers))))


# -- warm-up -----------------------------------------------------------------

@dataclass(frozen=True)
class WarmupEstimate:
    suggested_cycles: int
    cross_run_mean: np.ndarray
    moving_average: np.ndarray
    reference: float


def centered_moving_average(x: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average of odd width ``window`` (even widths round down).

    Near the start the window shrinks symmetrically; the last ``window // 2``
    points have no full window and are NaN.
    """
    if window < 1:
        raise ValueError("window must be at least 1")
    x = np.asarray(x, dtype=float)
    half = (window - 1) // 2
    if half == 0:
        return x.copy()
    n = len(x)
    out = np.full(n, np.nan)
    csum = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(max(0, n - half))
    w = np.minimum(idx, half)
    out[idx] = (csum[idx + w + 1] - csum[idx - w]) / (2 * w + 1)
    return out


def estimate_warmup(traces: Sequence[RunTrace], field: str = "mean_oligarch_profit",
                    smoothing_window: int = 301, band: float = 0.05) -> WarmupEstimate:
    """Welch's graphical procedure with an automated stationarity rule.

    The cross-run mean of ``field`` is smoothed; the suggestion is the first
    cycle after which the smoothed series stays within ``band`` (relative)
    of the cross-run mean over the final quarter of cycles.  With few runs
    the smoothed series wanders by a few percent, so the suggestion is only
    as stable as the band is wide relative to that noise.
    """
    if len(traces) < 2:
        raise ValueError("need at least two traces")
    if smoothing_window < 1:
        raise ValueError("smoothing_window must be at least 1")
    series = np.vstack([t.column(field) for t in traces]).astype(float)
    mean = series.mean(axis=0)
    ma = centered_moving_average(mean, smoothing_window)
    defined = ma[~np.isnan(ma)]
    if len(defined) == 0:
        raise ValueError("series shorter than half the smoothing window")
    ref = float(mean[len(mean) - max(1, len(mean) // 4):].mean())
    tol = band * abs(ref) if ref != 0 else band * float(np.max(np.abs(defined)))
    outside = np.nonzero(np.abs(defined - ref) > tol)[0]
    suggested = int(outside[-1] + 1) if len(outside) else 0
    return WarmupEstimate(suggested, mean, ma, ref)
