"""Property tests for model invariants and statistical identities."""

import copy
import math

import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st

from oligo import model, stats
from oligo.config import ModelConfig
from oligo.engine import step
from oligo.model import BLUE, RED, Party
from oligo.rng import RandomStream, run_streams

seeds = st.integers(0, 2 ** 32 - 1)
unit = st.floats(0, 1)
coords = st.floats(-100, 100)
variants = st.sampled_from(["IIM", "PIMM", "AIMM"])


@st.composite
def configs(draw):
    return ModelConfig(
        variant=draw(variants),
        voter_count=draw(st.integers(1, 60)),
        oligarch_count=draw(st.integers(1, 12)),
        voter_memory_strength=draw(unit),
        voter_initial_salience=draw(unit),
        oligarch_initial_donation=draw(unit),
        voter_ad_decay_factor=-draw(st.floats(0.001, 1)),
        party_epsilon=draw(st.floats(0, 20)),
        allow_null_donation_action=draw(st.booleans()),
        null_action_threshold=draw(st.floats(0, 5)),
        voter_distribution=draw(st.sampled_from(["unimodal", "bimodal"])),
    )


def advance(cfg, seed, cycles):
    streams = run_streams(seed)
    world = model.init_world(cfg, streams.init)
    for _ in range(cycles):
        step(world, streams)
    return world, streams


# -- clamp and cap invariants -----------------------------------------------------

@given(configs(), seeds)
def test_state_stays_in_bounds(cfg, seed):
    streams = run_streams(seed)
    w = model.init_world(cfg, streams.init)
    for _ in range(40):
        rec = step(w, streams)
        for p in w.parties:
            assert cfg.min_pos <= p.ideo <= cfg.max_pos
            assert cfg.min_pos <= p.olig <= cfg.max_pos
        assert np.all((w.voters.olig_salience >= 0) & (w.voters.olig_salience <= 1))
        assert np.all((w.oligarchs.donation_size >= 0) & (w.oligarchs.donation_size <= 1))
        assert 0 <= rec.tax_rate <= cfg.voter_max_tax
        assert 0 <= rec.red_vote_pct <= 100
        assert w.red.is_incumbent != w.blue.is_incumbent
        # conservation
        assert rec.tax_collected == rec.tax_rate * cfg.voter_count * cfg.voter_gross_income
        shares = model.subsidy_shares(rec.tax_collected, w.oligarchs, cfg)
        assert math.isclose(shares.sum(), rec.tax_collected, rel_tol=1e-12, abs_tol=1e-12)
        if cfg.has_party_ideology:
            assert w.red.ideo > w.blue.ideo


@given(configs(), seeds)
def test_income_moment_matching(cfg, seed):
    w = model.init_world(cfg, RandomStream(seed))
    inc = w.oligarchs.gross_income
    assert (inc > 0).all()
    assert math.isclose(inc.sum(), cfg.oligarch_total_income, rel_tol=1e-12)


@given(st.integers(1, 10), st.integers(0, 10_000))
def test_latency_stagger(count, cycle):
    cfg = ModelConfig(oligarch_count=count)
    w = model.init_world(cfg, RandomStream(0))
    assert w.oligarchs.due(cycle, cfg.oligarch_latency).sum() <= 1


@given(st.lists(unit, min_size=1, max_size=50), st.floats(1e-9, 0.5), seeds)
def test_salience_cap_after_notice(sal, tax, seed):
    s = np.array(sal)
    rng = RandomStream(seed)
    out = model.salience_step(s, tax, np.zeros(len(s)), rng.random(len(s)), ModelConfig())
    assert np.all(out <= tax + 1e-15)
    assert np.all(out >= 0)


@given(st.lists(unit, min_size=1, max_size=50), st.floats(0, 0.5), seeds)
def test_salience_unit_interval(sal, tax, seed):
    rng = RandomStream(seed)
    n = len(sal)
    out = model.salience_step(np.array(sal), tax, rng.random(n), rng.random(n), ModelConfig())
    assert np.all((out >= 0) & (out <= 1))


# -- monotonicity ---------------------------------------------------------------------

@given(st.floats(-100, 100), unit, coords, coords, st.floats(0, 500), st.floats(0, 500))
def test_voter_distance_non_increasing_in_donations(vi, sal, pi, po, d1, d2):
    lo, hi = sorted((d1, d2))
    p = Party(RED, pi, po, True, True)
    cfg = ModelConfig()
    assert (model.voter_distance(vi, sal, p, hi, cfg, True)
            <= model.voter_distance(vi, sal, p, lo, cfg, True))


@given(st.floats(0, 0.999), st.floats(0.001, 1))
def test_scaled_difference_strictly_increasing(d, delta):
    cfg = ModelConfig()
    d2 = min(1.0, d + delta)
    assume(d2 > d)
    assert model.scaled_difference(d2, cfg) > model.scaled_difference(d, cfg)
    assert 0 <= model.scaled_difference(d, cfg) < 1 - math.exp(-2) + 1e-15


@given(seeds, coords, coords, st.floats(0, 1e4))
def test_loyalist_vote_independent_of_olig_and_donations(seed, ro, bo, donations):
    cfg = ModelConfig(variant="PIMM")
    w = model.init_world(cfg, RandomStream(seed))
    w.voters.olig_salience = RandomStream(seed + 1).random(cfg.voter_count)
    draws = RandomStream(seed + 2).random(cfg.voter_count)
    before = model.ballots(w, draws)
    w.red.olig, w.blue.olig = ro, bo
    w.total_donations = donations
    w.donation_recipient = RED if ro > bo else BLUE
    after = model.ballots(w, draws)
    loyal = w.voters.is_loyalist
    assert np.array_equal(before[loyal], after[loyal])


# -- stage-order independence ------------------------------------------------------------
# Each stage is compared against a scalar loop that visits agents in a shuffled
# order, with every agent keeping its own draws.

def _loop_ballots(w, draws, order):
    cfg = w.config
    out = np.zeros(len(draws), dtype=bool)
    for i in order:
        v_ideo, sal = w.voters.ideo[i], w.voters.olig_salience[i]
        dist = {}
        for p in w.parties:
            if w.voters.is_loyalist[i]:
                dist[p.id] = abs(v_ideo - p.ideo)
            else:
                base = abs(v_ideo - p.ideo) * (1 - sal) + abs(cfg.voter_olig - p.olig) * sal
                if w.donation_recipient == p.id:
                    k = cfg.voter_min_distance_scale
                    base *= k + (1 - k) * math.exp(cfg.voter_ad_decay_factor * w.total_donations)
                dist[p.id] = base
        out[i] = draws[i] < 0.5 if dist[RED] == dist[BLUE] else dist[RED] < dist[BLUE]
    return out


def _loop_salience(s, tax, notice, amount, cfg, order):
    out = np.empty(len(s))
    for i in order:
        decayed = s[i] * cfg.voter_memory_strength
        if notice[i] < tax ** cfg.voter_awareness:
            out[i] = min(decayed + amount[i] * max(0.0, tax - decayed), tax)
        else:
            out[i] = decayed
    return out


def _loop_donations(o, cycle, cfg, noise, order):
    size = o.donation_size.copy()
    for i in order:
        if (cycle + o.agent_index[i]) % cfg.oligarch_latency:
            continue
        inc = (o.last_donation_increased[i] == (o.last_profit[i] > o.profit_at_last_update[i]))
        if noise[i] < cfg.oligarch_noise:
            inc = not inc
        if cfg.allow_null_donation_action and \
                abs(o.last_profit[i] - o.profit_at_last_update[i]) <= cfg.null_action_threshold:
            continue
        size[i] = min(1.0, max(0.0, size[i] + (cfg.oligarch_epsilon if inc else -cfg.oligarch_epsilon)))
    return size


@given(configs(), seeds, st.randoms(use_true_random=False))
def test_vote_stage_order_independent(cfg, seed, rnd):
    w, s = advance(cfg, seed, 15)
    model.update_oligarch_donations(w, s.oligarchs, s.ties)
    draws = s.voters.random(cfg.voter_count)
    order = list(range(cfg.voter_count))
    rnd.shuffle(order)
    assert np.array_equal(model.ballots(w, draws), _loop_ballots(w, draws, order))

    perm = np.array(order)
    w2 = copy.deepcopy(w)
    for name in ("ideo", "olig_salience", "is_loyalist", "last_vote"):
        setattr(w2.voters, name, getattr(w.voters, name)[perm])
    permuted = model.ballots(w2, draws[perm])
    assert np.array_equal(permuted, model.ballots(w, draws)[perm])


@given(configs(), seeds, st.floats(0, 0.5), st.randoms(use_true_random=False))
def test_salience_stage_order_independent(cfg, seed, tax, rnd):
    w, s = advance(cfg, seed, 10)
    n = cfg.voter_count
    notice, amount = s.voters.random(n), s.voters.random(n)
    order = list(range(n))
    rnd.shuffle(order)
    sal = w.voters.olig_salience
    vec = model.salience_step(sal, tax, notice, amount, cfg)
    assert np.array_equal(vec, _loop_salience(sal, tax, notice, amount, cfg, order))
    perm = np.array(order)
    assert np.array_equal(model.salience_step(sal[perm], tax, notice[perm], amount[perm], cfg), vec[perm])


@given(configs(), seeds, st.integers(0, 9), st.randoms(use_true_random=False))
def test_donation_stage_order_independent(cfg, seed, extra, rnd):
    w, s = advance(cfg, seed, 20 + extra)
    m = cfg.oligarch_count
    order = list(range(m))
    rnd.shuffle(order)
    noise = RandomStream(seed).random(m)
    expected = _loop_donations(w.oligarchs, w.cycle, cfg, noise, order)

    w2 = copy.deepcopy(w)
    model.update_oligarch_donations(w2, _Replay(noise), s.ties)
    assert np.array_equal(w2.oligarchs.donation_size, expected)

    # permute oligarchs (with their indices) and their draws together
    perm = np.array(order)
    w3 = copy.deepcopy(w)
    o = w3.oligarchs
    for name in ("gross_income", "donation_size", "last_subsidy", "agent_index",
                 "last_donation_increased", "profit_at_last_update", "last_profit", "donation"):
        setattr(o, name, getattr(o, name)[perm])
    tie_state = copy.deepcopy(s.ties)
    model.update_oligarch_donations(w3, _Replay(noise[perm]), tie_state)
    assert np.array_equal(w3.oligarchs.donation_size, expected[perm])
    assert math.isclose(w3.total_donations, w2.total_donations, rel_tol=1e-12, abs_tol=1e-12)

    # redistribution on the permuted population matches too
    for world in (w2, w3):
        world.incumbent = RED
    model.redistribute(w2)
    model.redistribute(w3)
    assert np.array_equal(w3.oligarchs.last_subsidy, w2.oligarchs.last_subsidy[perm])


class _Replay:
    """Stream stand-in that returns pre-drawn values."""

    def __init__(self, values):
        self.values = values

    def random(self, size=None):
        return self.values


# -- determinism ----------------------------------------------------------------------------

@given(configs(), seeds)
def test_same_seed_same_cycle_records(cfg, seed):
    a, b = run_streams(seed), run_streams(seed)
    wa, wb = model.init_world(cfg, a.init), model.init_world(cfg, b.init)
    for _ in range(15):
        assert step(wa, a) == step(wb, b)


# -- statistical identities ------------------------------------------------------------------

samples = st.lists(st.floats(-1e3, 1e3, allow_subnormal=False), min_size=3, max_size=40)


def _spread(x):
    return np.ptp(x) > 1e-6 * (1 + np.max(np.abs(x)))


@given(samples, samples)
def test_welch_symmetry(a, b):
    assume(_spread(a) and _spread(b))
    r1, r2 = stats.welch_t_test(a, b), stats.welch_t_test(b, a)
    assert math.isclose(r1.statistic, -r2.statistic, rel_tol=1e-9, abs_tol=1e-12)
    assert math.isclose(r1.p_value, r2.p_value, rel_tol=1e-9, abs_tol=1e-12)
    assert 0 <= r1.p_value <= 1
    assert r1.confidence_interval[0] <= r1.confidence_interval[1]


ints = st.lists(st.integers(-1000, 1000), min_size=3, max_size=40)


@given(ints, st.data())
def test_spearman_monotone_invariance(x, data):
    # integer data keeps both transforms exactly order-preserving in floating point
    y = data.draw(st.lists(st.integers(-1000, 1000), min_size=len(x), max_size=len(x)))
    assume(len(set(x)) > 1 and len(set(y)) > 1)
    r = stats.spearman(x, y)
    assert -1 <= r <= 1
    assert math.isclose(stats.spearman(np.exp(np.array(x) / 1e3), y), r, abs_tol=1e-9)
    assert math.isclose(stats.spearman(x, 3 * np.array(y, dtype=float) ** 3 - 7), r, abs_tol=1e-9)


@given(st.integers(0, 2 ** 31), st.integers(12, 60), st.integers(0, 5))
def test_cross_correlation_lag_symmetry(seed, n, max_lag):
    rng = RandomStream(seed)
    x, y = rng.random(n), rng.random(n)
    a, b = stats.cross_correlation(x, y, max_lag), stats.cross_correlation(y, x, max_lag)
    for k in range(-max_lag, max_lag + 1):
        assert math.isclose(a.at(k), b.at(-k), abs_tol=1e-12)


@given(samples, samples, st.floats(0.01, 100), st.floats(-100, 100))
def test_cohens_d_affine_invariance(a, b, scale, shift):
    assume(_spread(a) or _spread(b))
    try:
        d = stats.cohens_d(a, b)
    except stats.StatsError:
        return
    t = stats.cohens_d(np.array(a) * scale + shift, np.array(b) * scale + shift)
    assert math.isclose(d, t, rel_tol=1e-6, abs_tol=1e-6)
