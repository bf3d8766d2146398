"""Seeded random streams.

Every run owns a handful of independent streams, one per purpose, all
derived from a single master seed.  Streams are backed by numpy's PCG64,
whose output is identical across platforms for a given seed sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .config import ConfigError

# stream ids of the per-purpose sub-streams of a run
INIT, OLIGARCHS, VOTERS, PARTIES, TIES = range(5)


@dataclass
class RandomStream:
    seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        seq = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def random(self, size=None):
        """Uniform draws on [0, 1)."""
        return self._gen.random(size)

    def uniform(self, lo: float, hi, size=None):
        if np.any(np.asarray(hi) < lo):
            raise ConfigError("uniform", f"need lo <= hi, got [{lo}, {hi}]")
        return lo + (hi - lo) * self._gen.random(size)

    def normal(self, mean: float, sd: float, size=None):
        if not sd > 0:
            raise ConfigError("normal", f"sd must be positive, got {sd}")
        return self._gen.normal(mean, sd, size)

    def lognormal(self, mu: float, sigma: float, size=None):
        if not sigma > 0:
            raise ConfigError("lognormal", f"sigma must be positive, got {sigma}")
        return np.exp(self.normal(mu, sigma, size))

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def coin(self, size=None):
        """Fair coin flips, True with probability 1/2."""
        return self._gen.random(size) < 0.5


class RunStreams(NamedTuple):
    init: RandomStream
    oligarchs: RandomStream
    voters: RandomStream
    parties: RandomStream
    ties: RandomStream


def derive_seed(master: int, *path: int) -> int:
    """64-bit seed for the child of ``master`` identified by ``path``."""
    seq = np.random.SeedSequence(int(master), spawn_key=tuple(int(p) for p in path))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def run_streams(seed: int) -> RunStreams:
    return RunStreams(*(RandomStream(seed, sid) for sid in (INIT, OLIGARCHS, VOTERS, PARTIES, TIES)))
