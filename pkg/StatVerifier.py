"""
Monte Carlo checks of the distributional claims behind the learner

- simulate_epoch_purchases: draws of "purchases of item j in one epoch" when the environment
  is frozen at omega(t) from round t on
- sandwich_bounds / check_sandwich: the draws are stochastically between two geometric laws,
  tested with DKW bands on the empirical CDF
- check_concentration: tail frequencies of k-sample means against the exponential bounds
- check_epoch_length: no epoch of a run is longer than 5 log NT (1 + sum_S (omega + delta_j))
- check_conditions: the two near-stationarity conditions on a logged run

Every report serializes with to_dict() and carries the thresholds it was judged against.
"""

from dataclasses import asdict, dataclass, field
import math
import numpy as np
from typing import Optional, Protocol, Sequence

from ChoiceModel import choice_probs
from ChoiceModelTypes import Assortment, NO_PURCHASE, ParamSchedule
from LabErrors import DomainError, RefusedError
from LabLoggers import LabLogger
from utils import dkw_epsilon, geometric_cdf
from Variation import DELTA_FACTOR, near_stationary_part, rho, variation_summary


SANDWICH_MIN_SAMPLES = 10_000
SANDWICH_MAX_DELTA = 0.5
CELL_PASS_FRACTION = 0.95
EPOCH_LENGTH_MULTIPLIER = 5.0
DEFAULT_ETAS = (0.25, 0.5, 1.0, 2.0)
SAMPLE_CHUNK = 1 << 20


class RunLog(Protocol):
    """ What the checkers read from one replication """
    assortments: Sequence[Assortment]
    chosen: np.ndarray
    reward: np.ndarray
    rhat: np.ndarray
    optimal_values: np.ndarray


@dataclass(frozen=True, eq=False)
class EpochPurchaseSample:
    """ Independent draws of the purchase count of `item` in one epoch starting at `start_round` """
    start_round: int
    item: int
    freeze_round: int
    assortment: Assortment
    counts: np.ndarray

    def __len__(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class SandwichBounds:
    mu_minus: float
    mu_plus: float


@dataclass
class DominanceReport:
    n_samples: int
    max_violation_lower: float
    max_violation_upper: float
    dkw_epsilon: float
    confidence: float
    mu_minus: float
    mu_plus: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ConcentrationCell:
    k: int
    eta: float
    lower_frequency: float
    lower_bound: float
    upper_frequency: float
    upper_bound: float
    lower_threshold: float
    upper_threshold: float
    passed: bool


@dataclass
class ConcentrationReport:
    reps: int
    mu_minus: float
    mu_plus: float
    cells: list[ConcentrationCell] = field(default_factory=list)

    @property
    def cell_pass_fraction(self) -> float:
        if not self.cells:
            return 1.0
        return sum(cell.passed for cell in self.cells) / len(self.cells)

    @property
    def passed(self) -> bool:
        return self.cell_pass_fraction >= CELL_PASS_FRACTION

    def to_dict(self) -> dict:
        report = asdict(self)
        report['cell_pass_fraction'] = self.cell_pass_fraction
        report['passed'] = self.passed
        return report


@dataclass
class EpochLengthReport:
    epochs: int
    checked_epochs: int
    violations: int
    violation_frequency: float
    allowed_violations: float
    max_length_ratio: float
    multiplier: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ConditionReport:
    near_stationary_rounds: int
    first_departure: Optional[int]
    condition1_fraction: float
    condition2_fraction: float
    c_scale: float

    @property
    def passed(self) -> bool:
        return self.condition1_fraction == 1.0 and self.condition2_fraction == 1.0

    def to_dict(self) -> dict:
        report = asdict(self)
        report['passed'] = self.passed
        return report


# Sampling

def _draw_epoch_counts(schedule: ParamSchedule, freeze_round: int, start: int, s: Assortment, j: int,
                       reps: int, rng: np.random.Generator) -> np.ndarray:
    counts = np.zeros(reps, dtype=np.int64)
    active = np.arange(reps)
    position = s.index(j) + 1
    r = start
    while active.size:
        probs = choice_probs(schedule.omega(min(r, freeze_round)), s)
        u = rng.random(active.size)
        p0 = probs[NO_PURCHASE]
        bought_j = (u >= p0 + probs[1:position].sum()) & (u < p0 + probs[1:position+1].sum())
        counts[active[bought_j]] += 1
        active = active[u >= p0]
        r += 1
    return counts


def simulate_epoch_purchases(schedule: ParamSchedule, freeze_round: int, start: int, assortment: Assortment,
                             item: int, reps: int, rng: np.random.Generator) -> EpochPurchaseSample:
    if start < 1:
        raise DomainError(f"Epoch start must be at least 1, got {start}")
    if not 1 <= freeze_round <= schedule.horizon:
        raise DomainError(f"Freeze round {freeze_round} is outside 1..{schedule.horizon}")
    s = tuple(sorted(assortment))
    if item not in s:
        raise DomainError(f"Item {item} is not in the assortment {s}")
    counts = np.concatenate([_draw_epoch_counts(schedule, freeze_round, start, s, item, min(SAMPLE_CHUNK, reps - done), rng)
                             for done in range(0, reps, SAMPLE_CHUNK)]) if reps > 0 else np.zeros(0, dtype=np.int64)
    return EpochPurchaseSample(start, item, freeze_round, s, counts)


# Stochastic dominance

def sandwich_from_deltas(omega_j: float, delta_j: float, delta: float) -> SandwichBounds:
    mu_plus = max(omega_j + delta_j, 0.0) * (1.0 + delta) / (1.0 - delta)
    mu_minus = max(omega_j - delta_j, 0.0) * (1.0 - delta) / (1.0 + delta)
    return SandwichBounds(mu_minus, mu_plus)


def sandwich_bounds(schedule: ParamSchedule, k_cap: int, t: int, tau: int, item: int) -> SandwichBounds:
    summary = variation_summary(schedule, k_cap)
    delta = summary.delta(t)
    if delta > SANDWICH_MAX_DELTA:
        raise RefusedError(f"delta^({t}) = {delta:.4f} exceeds {SANDWICH_MAX_DELTA}", "delta <= 1/2")
    return sandwich_from_deltas(float(schedule.omega(tau)[item-1]), summary.delta_item(item, t), delta)


def check_sandwich(samples: EpochPurchaseSample, bounds: SandwichBounds, confidence: float=1e-3) -> DominanceReport:
    n = len(samples)
    if n < SANDWICH_MIN_SAMPLES:
        raise RefusedError(f"Dominance check needs at least {SANDWICH_MIN_SAMPLES} samples, got {n}", "n >= 10^4")
    eps = dkw_epsilon(n, confidence)
    counts = np.sort(samples.counts)
    a = np.arange(int(counts[-1]) + 1)
    empirical = np.searchsorted(counts, a, side='right') / n
    lower = float(np.max(geometric_cdf(a, bounds.mu_plus) - empirical))
    upper = float(np.max(empirical - geometric_cdf(a, bounds.mu_minus)))
    return DominanceReport(n_samples=n,
                           max_violation_lower=max(lower, 0.0),
                           max_violation_upper=max(upper, 0.0),
                           dkw_epsilon=eps,
                           confidence=confidence,
                           mu_minus=bounds.mu_minus,
                           mu_plus=bounds.mu_plus,
                           passed=lower <= eps and upper <= eps)


# Concentration

def lower_tail_bound(k: int, eta: float, mu_minus: float) -> float:
    return min(1.0, math.exp(-k * eta**2 * mu_minus / 24.0))


def upper_tail_bound(k: int, eta: float, mu_plus: float) -> float:
    return min(1.0, math.exp(-k * min(eta, eta**2) * mu_plus / 196.0))


def sampling_slack(bound: float, reps: int) -> float:
    return 3.0 * math.sqrt(bound * (1.0 - bound) / reps) + 10.0 / reps


def check_concentration(schedule: ParamSchedule, t: int, tau: int, j: int, k_values: Sequence[int], reps: int,
                        rng: np.random.Generator, k_cap: int, start: int=1, assortment: Optional[Assortment]=None,
                        etas: Sequence[float]=DEFAULT_ETAS) -> ConcentrationReport:
    bounds = sandwich_bounds(schedule, k_cap, t, tau, j)
    s = assortment if assortment is not None else (j,)
    report = ConcentrationReport(reps, bounds.mu_minus, bounds.mu_plus)
    for k in k_values:
        sample = simulate_epoch_purchases(schedule, t, start, s, j, k * reps, rng)
        means = sample.counts.reshape(reps, k).mean(axis=1)
        for eta in etas:
            lo_threshold = (1.0 - eta) * bounds.mu_minus
            hi_threshold = (1.0 + eta) * bounds.mu_plus
            lo_freq = float(np.mean(means < lo_threshold))
            hi_freq = float(np.mean(means > hi_threshold))
            lo_bound = lower_tail_bound(k, eta, bounds.mu_minus)
            hi_bound = upper_tail_bound(k, eta, bounds.mu_plus)
            passed = (lo_freq <= lo_bound + sampling_slack(lo_bound, reps)
                      and hi_freq <= hi_bound + sampling_slack(hi_bound, reps))
            report.cells.append(ConcentrationCell(k, eta, lo_freq, lo_bound, hi_freq, hi_bound,
                                                  lo_threshold, hi_threshold, passed))
    return report


# Checks on logged runs

def epoch_boundaries(run_log: RunLog) -> list[tuple[int, int]]:
    """ (start, end) rounds of each epoch; the last one may be cut by the horizon """
    chosen = np.asarray(run_log.chosen)
    if len(run_log.assortments) != len(chosen):
        raise RefusedError(f"Run log has {len(run_log.assortments)} assortments but {len(chosen)} choices", "log shape")
    epochs = []
    start = 1
    for t in range(1, len(chosen) + 1):
        if run_log.assortments[t-1] != run_log.assortments[start-1]:
            raise RefusedError(f"Assortment changed inside the epoch starting at round {start}", "epoch assortment")
        if chosen[t-1] == NO_PURCHASE:
            epochs.append((start, t))
            start = t + 1
    if start <= len(chosen):
        epochs.append((start, len(chosen)))
    return epochs


def check_epoch_length(run_log: RunLog, schedule: ParamSchedule, k_cap: int,
                       multiplier: float=EPOCH_LENGTH_MULTIPLIER) -> EpochLengthReport:
    if len(run_log.chosen) > schedule.horizon:
        raise RefusedError(f"Run log is longer than the schedule horizon {schedule.horizon}", "log length")
    summary = variation_summary(schedule, k_cap)
    n, horizon = schedule.n_items, schedule.horizon
    log_nt = math.log(n * horizon)
    epochs = epoch_boundaries(run_log)

    checked = 0
    violations = 0
    max_ratio = 0.0
    for start, end in epochs:
        if summary.delta(end) > SANDWICH_MAX_DELTA:
            continue
        s = run_log.assortments[start-1]
        omega = schedule.omega(start)
        load = sum(omega[k-1] + summary.delta_item(k, end) for k in s)
        limit = multiplier * log_nt * (1.0 + load)
        length = end - start + 1
        checked += 1
        max_ratio = max(max_ratio, length / limit)
        if length > limit:
            violations += 1

    p = 1.0 / (n * horizon**3)
    allowed = checked * p + 3.0 * math.sqrt(checked * p * (1.0 - p))
    report = EpochLengthReport(epochs=len(epochs),
                               checked_epochs=checked,
                               violations=violations,
                               violation_frequency=violations / checked if checked else 0.0,
                               allowed_violations=allowed,
                               max_length_ratio=max_ratio,
                               multiplier=multiplier,
                               passed=violations <= allowed)
    LabLogger().debug(f"Epoch length check: {violations} of {checked} epochs too long")
    return report


def check_conditions(run_log: RunLog, schedule: ParamSchedule, k_cap: int, c_scale: float=1.0) -> ConditionReport:
    rounds = len(run_log.rhat)
    if rounds > schedule.horizon:
        raise RefusedError(f"Run log is longer than the schedule horizon {schedule.horizon}", "log length")
    summary = variation_summary(schedule, k_cap)
    drift = DELTA_FACTOR * summary.delta_budget[:rounds]
    rhat = np.asarray(run_log.rhat, dtype=float)
    reward = np.asarray(run_log.reward, dtype=float)
    best_so_far = np.minimum.accumulate(np.asarray(run_log.optimal_values, dtype=float))
    t = np.arange(1, rounds + 1)

    condition1 = rhat >= best_so_far - drift
    condition2 = np.cumsum(rhat - reward) / t <= rho(t, schedule.n_items, schedule.horizon, c_scale) + drift

    near = near_stationary_part(schedule, k_cap, c_scale)
    near = near[near <= rounds]
    outside = np.setdiff1d(t, near)
    return ConditionReport(near_stationary_rounds=int(near.size),
                           first_departure=int(outside[0]) if outside.size else None,
                           condition1_fraction=float(condition1[near-1].mean()) if near.size else 1.0,
                           condition2_fraction=float(condition2[near-1].mean()) if near.size else 1.0,
                           c_scale=c_scale)
