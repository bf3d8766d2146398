"""Agents, world state, initialization, and the five per-cycle submodels.

Voters and Oligarchs are held as arrays (one entry per agent) so that each
stage acts on every agent at once; per-agent random draws are taken as
arrays indexed by agent, which makes the outcome of a stage independent of
any iteration order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import ConfigError, ModelConfig
from .rng import RandomStream, RunStreams

RED, BLUE = "red", "blue"
MAX_REDRAWS = 1000


@dataclass
class Party:
    id: str
    ideo: float
    olig: float
    last_increase_ideo: bool
    last_increase_olig: bool
    votes_current: int = 0
    votes_previous: int = 0
    donations_received_current_cycle: float = 0.0
    is_incumbent: bool = False

    @property
    def votes_increased(self) -> bool:
        return self.votes_current > self.votes_previous


@dataclass
class Voters:
    ideo: np.ndarray
    olig_salience: np.ndarray
    is_loyalist: np.ndarray
    last_vote: np.ndarray  # True for red

    def __len__(self):
        return len(self.ideo)


@dataclass
class Oligarchs:
    gross_income: np.ndarray
    donation_size: np.ndarray
    last_subsidy: np.ndarray
    agent_index: np.ndarray
    last_donation_increased: np.ndarray
    profit_at_last_update: np.ndarray
    # subsidy minus donation on the most recent latency cycle
    last_profit: np.ndarray
    # amount each oligarch donated in the current cycle
    donation: np.ndarray

    def __len__(self):
        return len(self.gross_income)

    def due(self, cycle: int, latency: int) -> np.ndarray:
        """Mask of oligarchs whose latency guard fires this cycle."""
        return (cycle + self.agent_index) % latency == 0


@dataclass
class WorldState:
    config: ModelConfig
    red: Party
    blue: Party
    voters: Voters
    oligarchs: Oligarchs
    cycle: int = 0

    # bookkeeping for the current cycle
    total_donations: float = 0.0
    donation_recipient: str | None = None
    donation_scale: float = 0.0
    tax_rate: float = 0.0
    tax_collected: float = 0.0
    incumbent: str | None = None
    winner_higher_olig: bool = False
    winner_closer_to_ideo_center: bool = False
    winner_less_central_ideo: bool = False

    @property
    def parties(self) -> tuple[Party, Party]:
        return self.red, self.blue

    def party(self, pid: str) -> Party:
        return self.red if pid == RED else self.blue

    def opponent(self, party: Party) -> Party:
        return self.blue if party is self.red else self.red


# -- initialization ---------------------------------------------------------

def lognormal_params(mean: float, sd: float) -> tuple[float, float]:
    """(mu, sigma) of the lognormal with the given mean and standard deviation."""
    var = sd * sd
    mu = math.log(mean * mean / math.sqrt(var + mean * mean))
    sigma = math.sqrt(math.log(1.0 + var / (mean * mean)))
    return mu, sigma


def truncated_normal(rng: RandomStream, mean, sd, lo: float, hi: float, size: int) -> np.ndarray:
    """Normal draws, redrawing any value outside [lo, hi]."""
    x = np.asarray(rng.normal(mean, sd, size), dtype=float)
    for _ in range(MAX_REDRAWS):
        bad = (x < lo) | (x > hi)
        if not bad.any():
            return x
        x[bad] = rng.normal(mean, sd, int(bad.sum()))
    raise ConfigError("min_pos", f"could not draw {size} values within [{lo}, {hi}]")


def _voter_positions(config: ModelConfig, rng: RandomStream) -> np.ndarray:
    lo, hi, n = config.min_pos, config.max_pos, config.voter_count
    if config.voter_distribution == "unimodal":
        return truncated_normal(rng, 0.5 * (lo + hi), config.axis_extent / 6, lo, hi, n)
    x = np.empty(n)
    todo = np.ones(n, dtype=bool)
    for _ in range(MAX_REDRAWS):
        k = int(todo.sum())
        if k == 0:
            return x
        upper = rng.random(k) < config.bimodal_mix
        means = np.where(upper, config.bimodal_means, -config.bimodal_means)
        x[todo] = rng.normal(0.0, config.bimodal_sd, k) + means
        todo = (x < lo) | (x > hi)
    raise ConfigError("bimodal_sd", "could not draw voter positions within the policy range")


def oligarch_incomes(config: ModelConfig, rng: RandomStream) -> np.ndarray:
    """Lognormal incomes shifted so their mean is exactly the target mean."""
    target = config.oligarch_total_income / config.oligarch_count
    mu, sigma = lognormal_params(target, target / 2)
    for _ in range(MAX_REDRAWS):
        income = rng.lognormal(mu, sigma, config.oligarch_count)
        income = income - (income.mean() - target)
        if (income > 0).all():
            return income
    raise ConfigError("oligarch_count", "moment matching kept producing non-positive incomes")


def init_world(config: ModelConfig, rng: RandomStream) -> WorldState:
    lo, hi = config.min_pos, config.max_pos
    centre, sd = 0.5 * (lo + hi), config.axis_extent / 6

    ideo = truncated_normal(rng, centre, sd, lo, hi, 2)
    olig = truncated_normal(rng, centre, sd, lo, hi, 2)
    if config.has_party_ideology:
        ideo = np.array([config.party_bliss_red, config.party_bliss_blue])
    flags = rng.coin(4)
    red = Party(RED, float(ideo[0]), float(olig[0]), bool(flags[0]), bool(flags[1]))
    blue = Party(BLUE, float(ideo[1]), float(olig[1]), bool(flags[2]), bool(flags[3]))

    n = config.voter_count
    loyalist = np.zeros(n, dtype=bool)
    if config.has_party_ideology:
        n_swing = int(round(config.swing_voter_fraction * n))
        loyalist[rng.permutation(n)[n_swing:]] = True
    voters = Voters(
        ideo=_voter_positions(config, rng),
        olig_salience=np.full(n, config.voter_initial_salience),
        is_loyalist=loyalist,
        last_vote=np.zeros(n, dtype=bool),
    )

    m = config.oligarch_count
    income = oligarch_incomes(config, rng)
    if config.fixed_donation_size:
        size = np.full(m, config.oligarch_initial_donation)
    else:
        size = np.asarray(rng.uniform(0.0, config.oligarch_initial_donation, m))
    oligarchs = Oligarchs(
        gross_income=income,
        donation_size=size,
        last_subsidy=np.zeros(m),
        agent_index=np.arange(m),
        last_donation_increased=rng.coin(m),
        profit_at_last_update=np.zeros(m),
        last_profit=np.zeros(m),
        donation=np.zeros(m),
    )
    return WorldState(config, red, blue, voters, oligarchs)


# -- donation scaling ------------------------------------------------------

def scaled_difference(d, config: ModelConfig):
    """Donation scaling factor for a normalized party difference ``d``."""
    return -np.expm1(config.party_difference_factor * d)


def party_olig_difference_scaled(red_olig: float, blue_olig: float, config: ModelConfig) -> float:
    d = (max(red_olig, blue_olig) - min(red_olig, blue_olig)) / config.axis_extent
    return float(scaled_difference(d, config))


def aimm_party_choice(red: Party, blue: Party, config: ModelConfig,
                      rng: RandomStream | None = None) -> tuple[Party, float]:
    """Party the ideologically biased oligarchs back, and their overall difference.

    Each party's distance from the oligarchs' ideal point (max olig,
    ``oligarch_ideo``) is a ratio-weighted Manhattan distance; the nearer
    party is chosen, ties by a fair coin from ``rng``.
    """
    if config.variant != "AIMM":
        raise ValueError(f"aimm_party_choice requires the AIMM variant, not {config.variant}")
    ratio = config.oligarch_ideo_olig_ratio
    ideo_extent = config.aimm_ideo_extent or config.axis_extent

    def axis_distances(p: Party) -> tuple[float, float]:
        return abs(p.olig - config.max_pos), abs(p.ideo - config.oligarch_ideo)

    red_olig, red_ideo = axis_distances(red)
    blue_olig, blue_ideo = axis_distances(blue)
    red_dist = (1 - ratio) * red_olig + ratio * red_ideo
    blue_dist = (1 - ratio) * blue_olig + ratio * blue_ideo
    overall = abs(((red_olig - blue_olig) / config.axis_extent
                   + (red_ideo - blue_ideo) / ideo_extent) / 2)
    overall = min(overall, 1.0)

    if red_dist < blue_dist:
        chosen = red
    elif blue_dist < red_dist:
        chosen = blue
    else:
        if rng is None:
            raise ValueError("a random stream is needed to break a tie")
        chosen = red if rng.coin() else blue
    return chosen, overall


# -- submodel 1: oligarch donations ----------------------------------------

def hunter_donation_step(donation_size, last_increased, profit_now, profit_before,
                         noise_draws, config: ModelConfig):
    """Win-stay-lose-shift update of donation sizes.

    Returns ``(new_size, new_last_increased)``.  Repeat the last direction when
    profit rose after an increase or fell after a decrease; a noise draw below
    ``oligarch_noise`` reverses the choice.
    """
    profit_increased = profit_now > profit_before
    will_increase = (last_increased == profit_increased) ^ (noise_draws < config.oligarch_noise)
    step = np.where(will_increase, config.oligarch_epsilon, -config.oligarch_epsilon)
    new_size = np.clip(donation_size + step, 0.0, 1.0)
    new_last = will_increase
    if config.allow_null_donation_action:
        hold = np.abs(profit_now - profit_before) <= config.null_action_threshold
        new_size = np.where(hold, donation_size, new_size)
        new_last = np.where(hold, last_increased, will_increase)
    return new_size, new_last


def update_oligarch_donations(world: WorldState, rng: RandomStream,
                              tie_rng: RandomStream | None = None) -> float:
    cfg, olig = world.config, world.oligarchs
    noise = rng.random(len(olig))
    if not cfg.fixed_donation_size:
        due = olig.due(world.cycle, cfg.oligarch_latency)
        if due.any():
            size, last = hunter_donation_step(
                olig.donation_size, olig.last_donation_increased,
                olig.last_profit, olig.profit_at_last_update, noise, cfg)
            olig.donation_size = np.where(due, size, olig.donation_size)
            olig.last_donation_increased = np.where(due, last, olig.last_donation_increased)
            olig.profit_at_last_update = np.where(due, olig.last_profit, olig.profit_at_last_update)

    red, blue = world.red, world.blue
    if cfg.variant == "AIMM":
        recipient, overall = aimm_party_choice(red, blue, cfg, tie_rng)
        scale = float(scaled_difference(overall, cfg))
    else:
        scale = party_olig_difference_scaled(red.olig, blue.olig, cfg)
        if red.olig > blue.olig:
            recipient = red
        elif blue.olig > red.olig:
            recipient = blue
        else:
            recipient = None

    olig.donation = olig.gross_income * olig.donation_size * scale
    total = float(olig.donation.sum()) if recipient is not None else 0.0
    if recipient is None:
        olig.donation = np.zeros(len(olig))
    red.donations_received_current_cycle = 0.0
    blue.donations_received_current_cycle = 0.0
    if recipient is not None:
        recipient.donations_received_current_cycle = total
    world.donation_scale = scale
    world.total_donations = total
    world.donation_recipient = recipient.id if recipient is not None else None
    return total


# -- submodel 2: vote --------------------------------------------------------

def advertising_scale(total_donations, config: ModelConfig):
    """Multiplier in (min scale, 1] applied to the perceived distance of the party receiving donations."""
    k = config.voter_min_distance_scale
    return k + (1 - k) * np.exp(config.voter_ad_decay_factor * total_donations)


def voter_distance(voter_ideo, olig_salience, party: Party, total_donations: float,
                   config: ModelConfig, advertised: bool):
    """Perceived distance from voter(s) to ``party``.

    ``advertised`` marks the party that received this cycle's donations (the
    higher-olig party outside AIMM); only its distance is shrunk.
    """
    base = (np.abs(voter_ideo - party.ideo) * (1 - olig_salience)
            + abs(config.voter_olig - party.olig) * olig_salience)
    if advertised:
        return advertising_scale(total_donations, config) * base
    return base


def ballots(world: WorldState, tie_draws: np.ndarray) -> np.ndarray:
    """Each voter's choice (True = red) given per-voter tie-break draws."""
    cfg, v = world.config, world.voters
    red, blue = world.red, world.blue
    recipient = world.donation_recipient
    total = world.total_donations
    d_red = voter_distance(v.ideo, v.olig_salience, red, total, cfg, recipient == RED)
    d_blue = voter_distance(v.ideo, v.olig_salience, blue, total, cfg, recipient == BLUE)
    if v.is_loyalist.any():
        d_red = np.where(v.is_loyalist, np.abs(v.ideo - red.ideo), d_red)
        d_blue = np.where(v.is_loyalist, np.abs(v.ideo - blue.ideo), d_blue)
    return np.where(d_red == d_blue, tie_draws < 0.5, d_red < d_blue)


def vote(world: WorldState, rng: RandomStream, tie_rng: RandomStream) -> dict[str, int]:
    choice = ballots(world, rng.random(len(world.voters)))
    election_coin = tie_rng.random()
    world.voters.last_vote = choice

    red, blue = world.red, world.blue
    n_red = int(choice.sum())
    n_blue = len(choice) - n_red
    for party, n in ((red, n_red), (blue, n_blue)):
        party.votes_previous = party.votes_current
        party.votes_current = n

    if n_red != n_blue:
        winner = red if n_red > n_blue else blue
    else:
        winner = red if election_coin < 0.5 else blue
    loser = world.opponent(winner)
    winner.is_incumbent, loser.is_incumbent = True, False
    world.incumbent = winner.id

    world.winner_higher_olig = winner.olig > loser.olig
    centre = 0.5 * (world.config.min_pos + world.config.max_pos)
    world.winner_closer_to_ideo_center = abs(winner.ideo - centre) < abs(loser.ideo - centre)
    world.winner_less_central_ideo = abs(winner.ideo - centre) > abs(loser.ideo - centre)
    return {RED: n_red, BLUE: n_blue}


# -- submodel 3: redistribute -------------------------------------------------

def tax_rate_for(incumbent_olig: float, config: ModelConfig) -> float:
    return (config.voter_max_tax / 2) * (1 + incumbent_olig / config.max_pos)


def redistribute(world: WorldState) -> tuple[float, float]:
    cfg, olig = world.config, world.oligarchs
    rate = tax_rate_for(world.party(world.incumbent).olig, cfg)
    collected = rate * cfg.voter_count * cfg.voter_gross_income
    due = olig.due(world.cycle, cfg.oligarch_latency)
    if due.any():
        share = collected * olig.gross_income / cfg.oligarch_total_income
        olig.last_subsidy = np.where(due, share, olig.last_subsidy)
        olig.last_profit = np.where(due, share - olig.donation, olig.last_profit)
    world.tax_rate = rate
    world.tax_collected = collected
    return rate, collected


def subsidy_shares(tax_collected: float, oligarchs: Oligarchs, config: ModelConfig) -> np.ndarray:
    """Every oligarch's share of the subsidy, proportional to gross income."""
    return tax_collected * oligarchs.gross_income / config.oligarch_total_income


# -- submodel 4: voter olig-salience --------------------------------------------

def salience_step(salience, tax_rate: float, notice_draws, amount_draws, config: ModelConfig):
    """New olig-salience values given per-voter uniform draws on [0, 1)."""
    decayed = salience * config.voter_memory_strength
    notices = notice_draws < tax_rate ** config.voter_awareness
    headroom = np.maximum(0.0, tax_rate - decayed)
    raised = np.minimum(decayed + amount_draws * headroom, tax_rate)
    return np.where(notices, raised, decayed)


def update_voter_olig_salience(world: WorldState, rng: RandomStream) -> None:
    n = len(world.voters)
    notice, amount = rng.random(n), rng.random(n)
    if world.config.fixed_salience:
        return
    world.voters.olig_salience = salience_step(
        world.voters.olig_salience, world.tax_rate, notice, amount, world.config)


# -- submodel 5: party policies ---------------------------------------------------

def hunter_directions(votes_increased: bool, last_ideo: bool, last_olig: bool, r: float) -> tuple[bool, bool]:
    if votes_increased:
        return last_ideo, last_olig
    if r < 0.5:
        return not last_ideo, not last_olig
    if r < 0.75:
        return not last_ideo, last_olig
    return last_ideo, not last_olig


def bliss_bias(party: Party, config: ModelConfig) -> float:
    """Pull toward the party's bliss point when it sits on the centre side of it."""
    eps = config.party_epsilon
    if party.id == RED:
        gap = config.party_bliss_red - party.ideo
        return eps / (1 + math.exp((50 - gap) / 8)) if gap > 0 else 0.0
    gap = party.ideo - config.party_bliss_blue
    return -eps / (1 + math.exp((50 - gap) / 8)) if gap > 0 else 0.0


def update_party_policies(world: WorldState, rng: RandomStream) -> None:
    cfg = world.config
    lo, hi, eps = cfg.min_pos, cfg.max_pos, cfg.party_epsilon
    draws = rng.random(2)
    start_ideo = {p.id: p.ideo for p in world.parties}
    new_ideo = {}

    for party, r in zip(world.parties, draws):
        inc_ideo, inc_olig = hunter_directions(
            party.votes_increased, party.last_increase_ideo, party.last_increase_olig, float(r))
        party.last_increase_ideo, party.last_increase_olig = inc_ideo, inc_olig

        if not cfg.fixed_party_olig:
            party.olig = min(hi, party.olig + eps) if inc_olig else max(lo, party.olig - eps)

        ideo = min(hi, party.ideo + eps) if inc_ideo else max(lo, party.ideo - eps)
        if cfg.has_party_ideology:
            ideo = min(hi, max(lo, ideo + bliss_bias(party, cfg)))
            other = start_ideo[BLUE if party.id == RED else RED]
            crossed = ideo <= other if party.id == RED else ideo >= other
            if crossed:
                ideo = party.ideo
        new_ideo[party.id] = ideo

    # two simultaneous legal moves can still swap the order; then neither moves
    if cfg.has_party_ideology and new_ideo[RED] <= new_ideo[BLUE]:
        new_ideo = start_ideo
    world.red.ideo, world.blue.ideo = new_ideo[RED], new_ideo[BLUE]
