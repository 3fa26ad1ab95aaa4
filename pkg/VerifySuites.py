"""
Named verification suites run by `lab.py verify --suite NAME`

    samplers        inverse-CDF and Gumbel samplers agree (chi-square), no-purchase floor
    optimizer       bisection vs enumeration, optimality vs random sets, monotonicity
    sandwich        stationary geometric law and the two-sided dominance on drifting schedules
    concentration   tail frequencies of k-sample means vs the exponential bounds
    epoch_length    no overlong epochs in learner runs, and a control that must fail
    conditions      near-stationarity conditions on stationary learner runs, and a control
    metrics         probability normalization, Delta(t) as a payoff-shift bound, variation
                    inequalities, l2k norm, rho shape, lower-bound instance certification

Sizes come from the `verify` section of the config. Each suite returns a SuiteReport whose
`details` hold the statistics and the thresholds they were compared against.
"""

from dataclasses import asdict, dataclass, field, replace
from itertools import combinations
import math
import numpy as np
import scipy.stats

from AdversaryGen import gen_variation_instance, variation_epsilon, variation_window_length, window_changes_within
from AssortmentOptimizer import brute_force_assortment, optimal_assortment
from ChoiceModel import choice_probs, expected_payoff
from ChoiceModelTypes import ItemCatalog, ParamSchedule
from Environment import sample_choices, sample_choices_gumbel
import Harness
from LabConfig import ExperimentConfig
from LabLoggers import LabLogger
from MasterScheduler import MasterSettings
from Schedules import ScheduleSpec
from StatVerifier import (check_concentration, check_conditions, check_epoch_length, check_sandwich,
                          sandwich_bounds, sandwich_from_deltas, simulate_epoch_purchases)
from utils import make_rng
from Variation import DELTA_FACTOR, l2k_norm, rho, variation_summary


SUITE_NAMES = ('samplers', 'optimizer', 'sandwich', 'concentration', 'epoch_length', 'conditions', 'metrics')

PAYOFF_TOLERANCE = 1e-12
CHI_SQUARE_MAX_REJECTIONS = 2
CONCENTRATION_K_VALUES = (10, 100, 1000, 10000)
EPOCH_LENGTH_CONTROL_MULTIPLIER = 0.1
SANDWICH_DRIFT = 0.07


@dataclass
class SuiteReport:
    suite: str
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _random_instance(rng: np.random.Generator, max_items: int, max_capacity: int) -> tuple[np.ndarray, ItemCatalog]:
    n = int(rng.integers(1, max_items + 1))
    k = int(rng.integers(1, min(n, max_capacity) + 1))
    catalog = ItemCatalog(n, k, rng.random(n))
    return rng.random(n), catalog


def _random_subset(rng: np.random.Generator, n_items: int, max_size: int, min_size: int=0) -> tuple[int, ...]:
    size = int(rng.integers(min_size, max_size + 1))
    return tuple(sorted(int(i) + 1 for i in rng.choice(n_items, size=size, replace=False)))


def _experiment(master_seed: int, catalog: ItemCatalog, schedule: ScheduleSpec, horizon: int,
                replications: int, c_scale: float) -> ExperimentConfig:
    return ExperimentConfig(catalog=catalog, schedule=schedule, learner_type='epoch_ucb', c_scale=c_scale,
                            master=MasterSettings(), horizon=horizon, replications=replications,
                            master_seed=master_seed, workers=1, output_dir='.', split_out_replication_logs=False)


def _drifting_schedule(rng: np.random.Generator, n_items: int, horizon: int, drift: float) -> ParamSchedule:
    start = rng.uniform(0.2, 0.8, n_items)
    end = np.clip(start + rng.uniform(-drift, drift, n_items), 0.0, 1.0)
    frac = np.arange(horizon, dtype=float)[:, np.newaxis] / (horizon - 1)
    return ParamSchedule(start + frac * (end - start))


def samplers_suite(settings: dict, rng: np.random.Generator) -> SuiteReport:
    cases = settings['samplers_cases']
    draws = settings['samplers_draws']
    significance = settings['confidence']
    rejections = 0
    floor_violations = 0
    p_values = []
    for _ in range(cases):
        omega, catalog = _random_instance(rng, 12, 12)
        s = _random_subset(rng, catalog.n_items, catalog.capacity, 1)
        labels = np.concatenate(([0], s))
        inverse = sample_choices(omega, s, rng, draws)
        gumbel = sample_choices_gumbel(omega, s, rng, draws)
        table = np.array([[np.count_nonzero(inverse == j) for j in labels],
                          [np.count_nonzero(gumbel == j) for j in labels]])
        table = table[:, table.sum(axis=0) > 0]
        if table.shape[1] > 1:
            _, p_value, _, _ = scipy.stats.chi2_contingency(table)
        else:
            p_value = 1.0
        p_values.append(float(p_value))
        if p_value < significance:
            rejections += 1

        floor = 1.0 / (1 + catalog.n_items)
        rate = np.mean(inverse == 0)
        if rate < floor - 3.0 * math.sqrt(floor * (1.0 - floor) / draws):
            floor_violations += 1

    return SuiteReport('samplers', rejections <= CHI_SQUARE_MAX_REJECTIONS and floor_violations == 0,
                       {'cases': cases, 'draws': draws, 'significance': significance,
                        'rejections': rejections, 'max_rejections': CHI_SQUARE_MAX_REJECTIONS,
                        'no_purchase_floor_violations': floor_violations, 'min_p_value': min(p_values)})


def optimizer_suite(settings: dict, rng: np.random.Generator) -> SuiteReport:
    instances = settings['optimizer_instances']
    mismatched_sets = 0
    max_gap = 0.0
    dominated = 0
    for _ in range(instances):
        omega, catalog = _random_instance(rng, 12, 6)
        fast = optimal_assortment(omega, catalog)
        exact = brute_force_assortment(omega, catalog)
        max_gap = max(max_gap, abs(fast.value - exact.value))
        if fast.assortment != exact.assortment:
            mismatched_sets += 1

        # random feasible sets never beat the optimum
        keys = rng.random((1000, catalog.n_items))
        sizes = rng.integers(0, catalog.capacity + 1, size=(1000, 1))
        mask = np.argsort(np.argsort(keys, axis=1), axis=1) < sizes
        weights = mask * omega
        values = (weights * catalog.payoffs).sum(axis=1) / (1.0 + weights.sum(axis=1))
        if np.any(values > fast.value + PAYOFF_TOLERANCE):
            dominated += 1

    trials = settings['monotonicity_trials']
    monotonicity_violations = 0
    for _ in range(trials):
        omega, catalog = _random_instance(rng, 12, 6)
        s = optimal_assortment(omega, catalog).assortment
        raised = omega + rng.random(catalog.n_items) * rng.integers(0, 2, catalog.n_items)
        if expected_payoff(raised, catalog, s) < expected_payoff(omega, catalog, s) - PAYOFF_TOLERANCE:
            monotonicity_violations += 1

    passed = mismatched_sets == 0 and max_gap <= PAYOFF_TOLERANCE and dominated == 0 and monotonicity_violations == 0
    return SuiteReport('optimizer', passed,
                       {'instances': instances, 'mismatched_assortments': mismatched_sets, 'max_value_gap': max_gap,
                        'tolerance': PAYOFF_TOLERANCE, 'instances_beaten_by_random_sets': dominated,
                        'monotonicity_trials': trials, 'monotonicity_violations': monotonicity_violations})


def sandwich_suite(settings: dict, rng: np.random.Generator) -> SuiteReport:
    samples = settings['sandwich_samples']
    confidence = settings['confidence']

    # stationary: epoch purchases are geometric with mean omega_j
    n_items, k_cap = 10, 4
    omega = rng.uniform(0.1, 0.9, n_items)
    stationary = ParamSchedule(np.tile(omega, (2, 1)))
    s = _random_subset(rng, n_items, k_cap, k_cap)
    j = s[0]
    draws = simulate_epoch_purchases(stationary, 1, 1, s, j, samples, rng)
    mu = float(omega[j-1])
    sigma = math.sqrt(mu * (1.0 + mu) / samples)
    mean = float(draws.counts.mean())
    geometric = check_sandwich(draws, sandwich_from_deltas(mu, 0.0, 0.0), confidence)
    mean_ok = abs(mean - mu) <= 3.0 * sigma

    reports = []
    for _ in range(settings['sandwich_schedules']):
        horizon, n_items, k_cap = 40, 6, 2
        schedule = _drifting_schedule(rng, n_items, horizon, SANDWICH_DRIFT)
        s = _random_subset(rng, n_items, k_cap, k_cap)
        j = s[int(rng.integers(len(s)))]
        tau = int(rng.integers(1, horizon + 1))
        bounds = sandwich_bounds(schedule, k_cap, horizon, tau, j)
        draws = simulate_epoch_purchases(schedule, horizon, tau, s, j, samples, rng)
        report = check_sandwich(draws, bounds, confidence)
        report_dict = report.to_dict()
        report_dict['delta'] = variation_summary(schedule, k_cap).delta(horizon)
        reports.append(report_dict)

    passed = mean_ok and geometric.passed and all(r['passed'] for r in reports)
    return SuiteReport('sandwich', passed,
                       {'geometric': {'mu': mu, 'mean': mean, 'sigma': sigma, 'mean_within_3_sigma': mean_ok,
                                      **geometric.to_dict()},
                        'drifting': reports})


def concentration_suite(settings: dict, rng: np.random.Generator) -> SuiteReport:
    reps = settings['concentration_reps']
    stationary = ParamSchedule(np.full((2, 4), 0.5))
    drifting = _drifting_schedule(rng, 4, 40, SANDWICH_DRIFT)
    reports = [check_concentration(stationary, 1, 1, 1, CONCENTRATION_K_VALUES, reps, rng, k_cap=2),
               check_concentration(drifting, 40, 1, 1, CONCENTRATION_K_VALUES, reps, rng, k_cap=2)]
    return SuiteReport('concentration', all(r.passed for r in reports),
                       {'k_values': list(CONCENTRATION_K_VALUES), 'schedules': [r.to_dict() for r in reports]})


def epoch_length_suite(settings: dict, master_seed: int) -> SuiteReport:
    n_items, k_cap = 10, 5
    config = _experiment(master_seed, ItemCatalog.uniform(n_items, k_cap),
                         ScheduleSpec('stationary', {'omega': [0.5] * n_items}),
                         settings['epoch_length_horizon'], settings['epoch_length_seeds'], 1.0 / 192)
    result = Harness.run_experiment(config, write=False)
    reports = [check_epoch_length(record, result.schedule, k_cap) for record in result.records]
    controls = [check_epoch_length(record, result.schedule, k_cap, EPOCH_LENGTH_CONTROL_MULTIPLIER)
                for record in result.records]
    control_violations = sum(r.violations for r in controls)
    passed = all(r.passed for r in reports) and control_violations > 0
    return SuiteReport('epoch_length', passed,
                       {'runs': [r.to_dict() for r in reports],
                        'control_multiplier': EPOCH_LENGTH_CONTROL_MULTIPLIER,
                        'control_violations': control_violations})


def conditions_suite(settings: dict, master_seed: int) -> SuiteReport:
    n_items, k_cap = 10, 4
    config = _experiment(master_seed, ItemCatalog.uniform(n_items, k_cap), ScheduleSpec('stationary', {}),
                         settings['conditions_horizon'], settings['conditions_seeds'], 1.0)
    result = Harness.run_experiment(config, write=False)
    reports = [check_conditions(record, result.schedule, k_cap, 1.0) for record in result.records]
    control = check_conditions(replace(result.records[0], rhat=np.zeros(config.horizon)), result.schedule, k_cap, 1.0)
    passed = all(r.passed for r in reports) and control.condition1_fraction < 1.0
    return SuiteReport('conditions', passed,
                       {'runs': [r.to_dict() for r in reports], 'zero_rhat_control': control.to_dict()})


def metrics_suite(settings: dict, rng: np.random.Generator) -> SuiteReport:
    details = {}

    draws = settings['normalization_draws']
    worst = 0.0
    for _ in range(draws):
        omega, catalog = _random_instance(rng, 12, 12)
        s = _random_subset(rng, catalog.n_items, catalog.capacity)
        worst = max(worst, abs(choice_probs(omega, s).sum() - 1.0))
    details['normalization'] = {'draws': draws, 'max_error': worst, 'tolerance': PAYOFF_TOLERANCE}

    pairs = settings['metrics_pairs']
    shift_violations = 0
    for _ in range(pairs):
        before, catalog = _random_instance(rng, 8, 8)
        after = np.clip(before + rng.normal(0.0, rng.choice([0.01, 0.1, 1.0]), catalog.n_items), 0.0, 1.0)
        s = _random_subset(rng, catalog.n_items, catalog.capacity, 1)
        shift = abs(expected_payoff(before, catalog, s) - expected_payoff(after, catalog, s))
        if shift > DELTA_FACTOR * l2k_norm(before - after, catalog.capacity) + PAYOFF_TOLERANCE:
            shift_violations += 1
    details['payoff_shift'] = {'pairs': pairs, 'violations': shift_violations}

    schedules = settings['metrics_schedules']
    variation_violations = 0
    for _ in range(schedules):
        n = int(rng.integers(1, 9))
        k = int(rng.integers(1, n + 1))
        values = rng.random((int(rng.integers(2, 21)), n))
        # freeze some items so not every coordinate moves
        values[:, rng.random(n) < 0.3] = rng.random()
        summary = variation_summary(ParamSchedule(values), k)
        if summary.var_2k > 2 * k * summary.var_inf * (1.0 + 1e-12) + 1e-15:
            variation_violations += 1
    details['variation_inequality'] = {'schedules': schedules, 'violations': variation_violations}

    norm_mismatches = 0
    for _ in range(200):
        n = int(rng.integers(1, 13))
        k = int(rng.integers(1, n + 1))
        x = rng.normal(size=n)
        size = min(2 * k, n)
        brute = max(sum(abs(x[i]) for i in c) for c in combinations(range(n), size))
        if abs(brute - l2k_norm(x, k)) > 1e-12:
            norm_mismatches += 1
    details['l2k_norm'] = {'vectors': 200, 'mismatches': norm_mismatches}

    t = np.unique(np.logspace(0, 6, 400).astype(int))
    values = rho(t, 10, 10**6)
    rho_ok = bool(np.all(values >= 1.0 / np.sqrt(t)) and np.all(np.diff(t * values) >= 0)
                  and np.all(np.diff(values) <= 0))
    details['rho_shape'] = {'rounds_checked': int(t.size), 'holds': rho_ok}

    certified = True
    cases = []
    for n_items, k_cap, horizon, budget in ((8, 2, 1024, 1.0), (12, 3, 2000, 2.5), (20, 5, 5000, 10.0), (16, 4, 800, 0.5)):
        instance = gen_variation_instance(n_items, k_cap, horizon, budget, int(rng.integers(2**63)))
        meta = instance.metadata
        eps = meta.epsilon
        ok = (meta.M == variation_window_length(n_items, horizon, budget)
              and eps == variation_epsilon(n_items, horizon, budget, meta.M)
              and meta.var_2k <= budget
              and meta.var_2k >= 0.5 * k_cap * meta.var_inf
              and window_changes_within(instance, eps / (2 * k_cap) * (1 - 1e-9), eps / k_cap * (1 + 1e-9), k_cap))
        certified = certified and ok
        cases.append({'n_items': n_items, 'k_cap': k_cap, 'horizon': horizon, 'budget': budget, 'M': meta.M,
                      'epsilon': eps, 'var_2k': meta.var_2k, 'var_inf': meta.var_inf, 'certified': ok})
    details['variation_instances'] = cases

    passed = (worst <= PAYOFF_TOLERANCE and shift_violations == 0 and variation_violations == 0
              and norm_mismatches == 0 and rho_ok and certified)
    return SuiteReport('metrics', passed, details)


def run_suite(name: str, settings: dict, master_seed: int) -> SuiteReport:
    """ Run one named suite with its own random stream """
    rng = make_rng(master_seed, f"verify.{name}")
    if name == 'samplers':
        report = samplers_suite(settings, rng)
    elif name == 'optimizer':
        report = optimizer_suite(settings, rng)
    elif name == 'sandwich':
        report = sandwich_suite(settings, rng)
    elif name == 'concentration':
        report = concentration_suite(settings, rng)
    elif name == 'epoch_length':
        report = epoch_length_suite(settings, master_seed)
    elif name == 'conditions':
        report = conditions_suite(settings, master_seed)
    elif name == 'metrics':
        report = metrics_suite(settings, rng)
    else:
        raise ValueError(f"Unknown verification suite: {name}")
    LabLogger().info(f"Suite {name} {'passed' if report.passed else 'FAILED'}")
    return report
