from types import SimpleNamespace
import math
import numpy as np
import pytest

from AssortmentOptimizer import optimal_series
from ChoiceModelTypes import ItemCatalog
from Environment import MnlEnvironment
from EpochUcbLearner import EpochUcbLearner
from LabErrors import DomainError, RefusedError
from StatVerifier import (check_concentration, check_conditions, check_epoch_length, check_sandwich, epoch_boundaries,
                          lower_tail_bound, sandwich_bounds, sandwich_from_deltas, simulate_epoch_purchases,
                          upper_tail_bound)

from conftest import stationary, two_phase


def logged_run(schedule, learner, rng):
    env = MnlEnvironment(schedule, learner.catalog, rng)
    assortments, chosen, reward, rhat = [], [], [], []
    while not env.done():
        offered = learner.act()
        rhat.append(learner.reward_upper_bound())
        outcome = env.advance(offered)
        learner.observe(outcome)
        assortments.append(offered)
        chosen.append(outcome.chosen)
        reward.append(outcome.reward)
    return SimpleNamespace(assortments=assortments, chosen=np.array(chosen), reward=np.array(reward),
                           rhat=np.array(rhat),
                           optimal_values=np.array([r.value for r in optimal_series(schedule, learner.catalog)]))


def synthetic_log(assortment, chosen):
    return SimpleNamespace(assortments=[assortment] * len(chosen), chosen=np.array(chosen),
                           reward=np.array([0.0 if c == 0 else 1.0 for c in chosen]),
                           rhat=np.zeros(len(chosen)), optimal_values=np.zeros(len(chosen)))


# Sampling

def test_stationary_epoch_purchase_mean(rng):
    sample = simulate_epoch_purchases(stationary([0.5, 0.8, 0.2]), 1, 1, (1, 2, 3), 1, 100_000, rng)
    sigma = math.sqrt(0.5 * 1.5 / len(sample))
    assert abs(sample.counts.mean() - 0.5) < 3 * sigma


def test_item_that_is_never_attractive_is_never_bought(rng):
    sample = simulate_epoch_purchases(stationary([0.0, 0.9]), 1, 1, (1, 2), 1, 10_000, rng)
    assert not sample.counts.any()


def test_epoch_after_the_freeze_is_geometric(rng):
    schedule = two_phase([0.2, 0.6], [0.7, 0.1], horizon=10, switch_at=4)
    sample = simulate_epoch_purchases(schedule, 5, 6, (1, 2), 1, 20_000, rng)
    omega_j = schedule.omega(5)[0]
    report = check_sandwich(sample, sandwich_from_deltas(omega_j, 0.0, 0.0))
    assert report.passed


def test_simulation_input_checks(rng):
    schedule = stationary([0.5, 0.5])
    with pytest.raises(DomainError):
        simulate_epoch_purchases(schedule, 1, 0, (1,), 1, 10, rng)
    with pytest.raises(DomainError):
        simulate_epoch_purchases(schedule, 1, 1, (2,), 1, 10, rng)
    with pytest.raises(DomainError):
        simulate_epoch_purchases(schedule, 11, 1, (1,), 1, 10, rng)


# Sandwich

def test_sandwich_formula_example():
    bounds = sandwich_from_deltas(0.4, 0.1, 0.2)
    assert bounds.mu_plus == pytest.approx(0.75)
    assert bounds.mu_minus == pytest.approx(0.2)


def test_sandwich_lower_mean_is_clamped_at_zero():
    assert sandwich_from_deltas(0.1, 0.3, 0.1).mu_minus == 0.0


def test_stationary_sandwich_collapses():
    bounds = sandwich_bounds(stationary([0.3, 0.6]), 1, 5, 2, 2)
    assert bounds.mu_minus == bounds.mu_plus == pytest.approx(0.6)


def test_sandwich_refused_when_drift_exceeds_one_half():
    schedule = two_phase([0.0, 0.0], [0.4, 0.4], horizon=4, switch_at=2)
    with pytest.raises(RefusedError):
        sandwich_bounds(schedule, 1, 3, 1, 1)


def test_dominance_check_needs_enough_samples(rng):
    sample = simulate_epoch_purchases(stationary([0.5]), 1, 1, (1,), 1, 9_999, rng)
    with pytest.raises(RefusedError):
        check_sandwich(sample, sandwich_from_deltas(0.5, 0.0, 0.0))


def test_dominance_report_uses_the_dkw_band(rng):
    sample = simulate_epoch_purchases(stationary([0.5]), 1, 1, (1,), 1, 10_000, rng)
    report = check_sandwich(sample, sandwich_from_deltas(0.5, 0.0, 0.0))
    assert report.dkw_epsilon == pytest.approx(0.01949, abs=1e-5)
    assert report.passed


@pytest.mark.slow
def test_drifting_schedule_is_sandwiched(rng):
    schedule = two_phase([0.4, 0.3], [0.5, 0.2], horizon=10, switch_at=3)
    bounds = sandwich_bounds(schedule, 1, 5, 1, 1)
    assert (bounds.mu_minus, bounds.mu_plus) == pytest.approx((0.2, 0.75))
    sample = simulate_epoch_purchases(schedule, 5, 1, (1, 2), 1, 100_000, rng)
    assert check_sandwich(sample, bounds).passed


def test_wrong_bounds_are_caught(rng):
    sample = simulate_epoch_purchases(stationary([0.5]), 1, 1, (1,), 1, 50_000, rng)
    assert not check_sandwich(sample, sandwich_from_deltas(0.9, 0.0, 0.0)).passed


# Concentration

def test_tail_bounds():
    assert lower_tail_bound(100, 0.5, 0.5) == pytest.approx(0.594, abs=1e-3)
    assert upper_tail_bound(1, 0.5, 0.5) < 1.0
    assert lower_tail_bound(0, 1e6, 0.5) == 1.0


def test_stationary_concentration(rng):
    report = check_concentration(stationary([0.5, 0.5]), 1, 1, 1, (10, 100), 300, rng, k_cap=1)
    assert report.passed
    assert len(report.cells) == 8
    assert report.to_dict()['cell_pass_fraction'] == report.cell_pass_fraction


@pytest.mark.slow
def test_large_batches_concentrate(rng):
    report = check_concentration(stationary([0.5, 0.5]), 1, 1, 1, (10_000,), 50, rng, k_cap=1, etas=(0.5,))
    cell = report.cells[0]
    assert cell.lower_frequency < 1e-2
    assert cell.upper_frequency < 1e-2


# Logged runs

def test_epoch_boundaries_include_the_cut_epoch():
    log = synthetic_log((1,), [1, 0, 0, 1, 1])
    assert epoch_boundaries(log) == [(1, 2), (3, 3), (4, 5)]


def test_epoch_boundaries_reject_mid_epoch_assortment_change():
    log = synthetic_log((1,), [1, 1, 0])
    log.assortments = [(1,), (2,), (2,)]
    with pytest.raises(RefusedError):
        epoch_boundaries(log)


def test_zero_attraction_epochs_last_one_round(rng):
    schedule = stationary([0.0] * 4, horizon=200)
    log = logged_run(schedule, EpochUcbLearner(ItemCatalog.uniform(4, 2), 200), rng)
    report = check_epoch_length(log, schedule, 2)
    assert report.epochs == 200
    assert report.violations == 0
    assert report.passed


def test_epoch_length_limit_example():
    schedule = stationary([0.5] * 10, horizon=10_000)
    s = (1, 2, 3, 4, 5)
    limit = 5 * math.log(1e5) * 3.5
    assert limit == pytest.approx(201.5, abs=0.05)
    within = check_epoch_length(synthetic_log(s, [1] * 200 + [0] * 9800), schedule, 5)
    assert within.violations == 0
    assert within.max_length_ratio == pytest.approx(201 / limit)
    beyond = check_epoch_length(synthetic_log(s, [1] * 202 + [0] * 9798), schedule, 5)
    assert beyond.violations == 1
    assert not beyond.passed


def test_truncated_multiplier_sees_violations(rng):
    schedule = stationary([0.5] * 10, horizon=2000)
    catalog = ItemCatalog.uniform(10, 5)
    log = logged_run(schedule, EpochUcbLearner(catalog, 2000, c_scale=1 / 192), rng)
    assert check_epoch_length(log, schedule, 5).passed
    assert check_epoch_length(log, schedule, 5, multiplier=0.1).violations > 0


def test_conditions_hold_with_theoretical_constants(rng):
    schedule = stationary(rng.random(10), horizon=1000)
    log = logged_run(schedule, EpochUcbLearner(ItemCatalog.uniform(10, 4), 1000), rng)
    report = check_conditions(log, schedule, 4)
    assert report.near_stationary_rounds == 1000
    assert report.first_departure is None
    assert report.passed


def test_zero_upper_bound_breaks_the_first_condition(rng):
    schedule = stationary(rng.random(10), horizon=300)
    log = logged_run(schedule, EpochUcbLearner(ItemCatalog.uniform(10, 4), 300), rng)
    log.rhat = np.zeros(300)
    report = check_conditions(log, schedule, 4)
    assert report.condition1_fraction < 1.0
    assert not report.passed
