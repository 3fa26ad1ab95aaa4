"""
Non-stationarity metrics of a parameter schedule

Number of switches L, variation in the L^{2K}_inf norm, the per-round non-stationarity
measure Delta(t) = 26 ||omega(t) - omega(t+1)||, the accumulated budgets delta^(t) and
delta_j^(t), the tolerance rho(t) and the near-stationary part built from them.
"""

from dataclasses import dataclass
from itertools import combinations
import math
import numpy as np

from ChoiceModel import expected_payoff
from ChoiceModelTypes import ItemCatalog, ParamSchedule
from LabErrors import ConfigError, DomainError, RefusedError


DELTA_FACTOR = 26.0

RHO_SQRT_CONSTANT = 149.0
RHO_LINEAR_CONSTANT = 55.0


def l2k_norm(x, k_cap: int) -> float:
    """ Sum of the 2K largest absolute coordinates (all of them when N <= 2K) """
    a = np.sort(np.abs(np.asarray(x, dtype=float)))[::-1]
    return float(a[:2*k_cap].sum())


def _row_l2k_norms(diffs: np.ndarray, k_cap: int) -> np.ndarray:
    if diffs.shape[0] == 0:
        return np.zeros(0)
    a = -np.sort(-np.abs(diffs), axis=1)
    return a[:, :2*k_cap].sum(axis=1)


@dataclass(frozen=True, eq=False)
class VariationSummary:
    switches: int
    var_2k: float
    var_inf: float
    per_step_delta: np.ndarray      # Delta(t), t = 1..T-1
    delta_budget: np.ndarray        # delta^(t), t = 1..T
    delta_budget_item: np.ndarray   # delta_j^(t), N x T

    def delta(self, t: int) -> float:
        return float(self.delta_budget[t-1])

    def delta_item(self, j: int, t: int) -> float:
        return float(self.delta_budget_item[j-1, t-1])

    def accumulated_delta(self) -> np.ndarray:
        """ sum_{tau < t} Delta(tau) for t = 1..T """
        return DELTA_FACTOR * self.delta_budget


def variation_summary(schedule: ParamSchedule, k_cap: int) -> VariationSummary:
    values = schedule.values
    diffs = values[:-1] - values[1:]
    norms = _row_l2k_norms(diffs, k_cap)
    abs_diffs = np.abs(diffs)
    changed = np.any(diffs != 0, axis=1)

    delta_budget = np.concatenate(([0.0], np.cumsum(norms)))
    item_budget = np.concatenate((np.zeros((1, schedule.n_items)), np.cumsum(abs_diffs, axis=0)), axis=0).T
    var_inf = float(abs_diffs.max(axis=1).sum()) if diffs.shape[0] else 0.0

    for arr in (norms, delta_budget, item_budget):
        arr.flags.writeable = False
    per_step = DELTA_FACTOR * norms
    per_step.flags.writeable = False
    return VariationSummary(switches=1 + int(changed.sum()),
                            var_2k=float(norms.sum()),
                            var_inf=var_inf,
                            per_step_delta=per_step,
                            delta_budget=delta_budget,
                            delta_budget_item=item_budget)


def _log_nt(n_items: int, horizon: int) -> float:
    if n_items * horizon < 3:
        raise ConfigError("n_items*horizon", f"N*T must be at least 3 so that log NT >= 1, got {n_items * horizon}")
    return math.log(n_items * horizon)


def rho(t, n_items: int, horizon: int, c_scale: float=1.0):
    """ Tolerance of the near-stationary part

    rho(t) = (c*149 log NT)^{3/2} sqrt(N/t) + (c*55 log NT)^3 N/t + sqrt(2 log T / t)

    Accepts a scalar round or an array of rounds.
    """
    log_nt = _log_nt(n_items, horizon)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 1):
        raise DomainError(f"rho is defined for t >= 1, got {t}")
    value = ((c_scale * RHO_SQRT_CONSTANT * log_nt) ** 1.5 * np.sqrt(n_items / t_arr)
             + (c_scale * RHO_LINEAR_CONSTANT * log_nt) ** 3 * (n_items / t_arr)
             + np.sqrt(2.0 * math.log(horizon) / t_arr))
    if np.ndim(value) == 0:
        return float(value)
    return value


def near_stationary_part(schedule: ParamSchedule, k_cap: int, c_scale: float=1.0) -> np.ndarray:
    """ Rounds t (1-based, ascending) with sum_{tau < t} Delta(tau) <= rho(t) """
    summary = variation_summary(schedule, k_cap)
    rounds = np.arange(1, schedule.horizon + 1)
    tolerance = rho(rounds, schedule.n_items, schedule.horizon, c_scale)
    return rounds[summary.accumulated_delta() <= tolerance]


def max_payoff_shift(schedule: ParamSchedule, catalog: ItemCatalog, t: int) -> float:
    """ sup over |S| <= K of |R(S, omega(t)) - R(S, omega(t+1))|, by enumeration

    Oracle for checking that Delta(t) is a non-stationarity measure.
    """
    if catalog.n_items > 12:
        raise RefusedError(f"Payoff shift enumeration limited to N <= 12, got {catalog.n_items}", "n_items")
    before = schedule.omega(t)
    after = schedule.omega(t+1)
    shift = 0.0
    for size in range(1, catalog.capacity + 1):
        for s in combinations(range(1, catalog.n_items + 1), size):
            shift = max(shift, abs(expected_payoff(before, catalog, s) - expected_payoff(after, catalog, s)))
    return shift
