"""Global model parameters and their validation."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Mapping

VARIANTS = ("IIM", "PIMM", "AIMM")
VOTER_DISTRIBUTIONS = ("unimodal", "bimodal")

_UNIT_FRACTIONS = (
    "oligarch_epsilon",
    "oligarch_gdp_fraction",
    "oligarch_initial_donation",
    "oligarch_noise",
    "voter_initial_salience",
    "voter_max_tax",
    "voter_memory_strength",
    "voter_min_distance_scale",
    "swing_voter_fraction",
    "oligarch_ideo_olig_ratio",
    "bimodal_mix",
)


class ConfigError(ValueError):
    """Invalid parameter value; ``key`` names the offending field."""

    def __init__(self, key: str, message: str, location: str | None = None):
        self.key = key
        self.location = location
        where = f" ({location})" if location else ""
        super().__init__(f"{key}: {message}{where}")


@dataclass(frozen=True)
class ModelConfig:
    gdp: float = 1000.0
    max_pos: float = 100.0
    min_pos: float = -100.0
    oligarch_count: int = 5
    voter_count: int = 100
    oligarch_epsilon: float = 0.1
    oligarch_gdp_fraction: float = 0.05
    oligarch_initial_donation: float = 0.3
    oligarch_latency: int = 10
    oligarch_noise: float = 0.1
    party_difference_factor: float = -2.0
    party_epsilon: float = 5.0
    voter_ad_decay_factor: float = -0.03
    voter_awareness: float = 0.5
    voter_gross_income: float = 9.5
    voter_initial_salience: float = 0.0
    voter_max_tax: float = 0.5
    voter_memory_strength: float = 0.9
    voter_min_distance_scale: float = 0.3
    voter_olig: float = -100.0

    variant: str = "IIM"
    # PIMM / AIMM
    swing_voter_fraction: float = 0.33
    party_bliss_red: float = 33.0
    party_bliss_blue: float = -33.0
    # AIMM
    oligarch_ideo: float = 33.0
    oligarch_ideo_olig_ratio: float = 0.5
    # None means the full axis extent (max_pos - min_pos)
    aimm_ideo_extent: float | None = None

    voter_distribution: str = "unimodal"
    bimodal_means: float = 28.9
    bimodal_sd: float = 16.7
    bimodal_mix: float = 0.5

    allow_null_donation_action: bool = False
    null_action_threshold: float = 0.0

    # experiment overrides: these bypass the corresponding update rule
    fixed_party_olig: bool = False
    fixed_salience: bool = False
    fixed_donation_size: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.variant not in VARIANTS:
            raise ConfigError("variant", f"must be one of {VARIANTS}, got {self.variant!r}")
        if self.voter_distribution not in VOTER_DISTRIBUTIONS:
            raise ConfigError(
                "voter_distribution",
                f"must be one of {VOTER_DISTRIBUTIONS}, got {self.voter_distribution!r}",
            )
        if not self.min_pos < self.max_pos:
            raise ConfigError("min_pos", "must be less than max_pos")
        for key in _UNIT_FRACTIONS:
            value = getattr(self, key)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(key, f"must lie in [0, 1], got {value}")
        for key in ("oligarch_latency", "voter_count", "oligarch_count"):
            value = getattr(self, key)
            if int(value) != value or value < 1:
                raise ConfigError(key, f"must be a positive integer, got {value}")
        if self.party_difference_factor >= 0:
            raise ConfigError("party_difference_factor", "must be negative (decay rate)")
        if self.voter_ad_decay_factor >= 0:
            raise ConfigError("voter_ad_decay_factor", "must be negative (decay rate)")
        if self.gdp <= 0:
            raise ConfigError("gdp", "must be positive")
        if self.oligarch_gdp_fraction <= 0:
            raise ConfigError("oligarch_gdp_fraction", "must be positive")
        if self.voter_gross_income < 0:
            raise ConfigError("voter_gross_income", "must be non-negative")
        if self.party_epsilon < 0:
            raise ConfigError("party_epsilon", "must be non-negative")
        if self.voter_awareness <= 0:
            raise ConfigError("voter_awareness", "must be positive")
        if self.bimodal_sd <= 0:
            raise ConfigError("bimodal_sd", "must be positive")
        if self.null_action_threshold < 0:
            raise ConfigError("null_action_threshold", "must be non-negative")
        if self.aimm_ideo_extent is not None and self.aimm_ideo_extent <= 0:
            raise ConfigError("aimm_ideo_extent", "must be positive")
        for key in ("voter_olig", "party_bliss_red", "party_bliss_blue", "oligarch_ideo"):
            value = getattr(self, key)
            if not self.min_pos <= value <= self.max_pos:
                raise ConfigError(key, f"must lie in [min_pos, max_pos], got {value}")
        if self.variant != "IIM" and not self.party_bliss_blue < self.party_bliss_red:
            raise ConfigError("party_bliss_red", "must exceed party_bliss_blue")

    @property
    def axis_extent(self) -> float:
        return self.max_pos - self.min_pos

    @property
    def oligarch_total_income(self) -> float:
        return self.gdp * self.oligarch_gdp_fraction

    @property
    def has_party_ideology(self) -> bool:
        return self.variant in ("PIMM", "AIMM")

    def replace(self, **changes: Any) -> "ModelConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in dataclasses.fields(cls))

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "ModelConfig":
        known = set(cls.field_names())
        for key in values:
            if key not in known:
                raise ConfigError(str(key), "unknown parameter")
        return cls(**dict(values))
