"""
Lower-bound instance families

Both generators cut the horizon into windows and draw a fresh uniformly random "good"
K-subset per window. Good items get attraction (1+eta)/K, every other item 1/K, payoffs
are all 1.

switching:  L windows of length ceil(T/L), eta = min(1/2, sqrt(N/ceil(T/L))/17)
variation:  windows of length M = ceil(N^(1/3) (T/Delta)^(2/3)),
            eps = min(sqrt(N/M)/17, Delta M/(2T)),
            even windows use eta = eps, odd windows eta = eps/2
"""

from dataclasses import asdict, dataclass, field
import json
import math
import numpy as np
import os
from typing import Optional

from ChoiceModelTypes import ItemCatalog, ParamSchedule
from LabErrors import RefusedError
from LabLoggers import LabLogger
from ScheduleFiles import write_schedule_file
from Variation import variation_summary


ETA_CAP = 0.5
WINDOW_CONSTANT = 17.0


@dataclass
class InstanceMetadata:
    kind: str
    L: int
    window_length: int
    windows: int
    var_2k: float
    var_inf: float
    switches: int
    M: Optional[int] = None
    epsilon: Optional[float] = None
    eta: Optional[float] = None
    budget: Optional[float] = None
    window_lower_bound: float = 0.0
    lower_bound_shape: float = 0.0
    window_starts: list[int] = field(default_factory=list)
    good_subsets: list[list[int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class AdversarialInstance:
    schedule: ParamSchedule
    catalog: ItemCatalog
    metadata: InstanceMetadata


def _check_capacity(n_items: int, k_cap: int):
    if k_cap < 2:
        raise RefusedError(f"Generators need K >= 2, got K={k_cap}", "K >= 2")
    if 4 * k_cap > n_items:
        raise RefusedError(f"Generators need K <= N/4, got K={k_cap}, N={n_items}", "K <= N/4")


def window_lower_bound(n_items: int, window_length: int) -> float:
    """ Shape of the stationary regret lower bound over one window, min(sqrt(N w), w) """
    return min(math.sqrt(n_items * window_length), float(window_length))


def _windowed_values(n_items: int, k_cap: int, horizon: int, window_length: int, etas: list[float],
                     rng: np.random.Generator) -> tuple[np.ndarray, list[int], list[list[int]]]:
    values = np.full((horizon, n_items), 1.0 / k_cap)
    starts = []
    subsets = []
    for w, eta in enumerate(etas):
        start = w * window_length
        end = min(start + window_length, horizon)
        good = np.sort(rng.choice(n_items, size=k_cap, replace=False))
        values[start:end, good] = (1.0 + eta) / k_cap
        starts.append(start + 1)
        subsets.append([int(i) + 1 for i in good])
    return values, starts, subsets


def gen_switching_instance(n_items: int, k_cap: int, horizon: int, switches: int, seed: int) -> AdversarialInstance:
    _check_capacity(n_items, k_cap)
    if switches < 1:
        raise RefusedError(f"Number of switches must be at least 1, got {switches}", "L >= 1")
    if switches > horizon:
        raise RefusedError(f"Number of switches {switches} exceeds the horizon {horizon}", "L <= T")

    window_length = math.ceil(horizon / switches)
    windows = math.ceil(horizon / window_length)
    eta = min(ETA_CAP, math.sqrt(n_items / window_length) / WINDOW_CONSTANT)

    rng = np.random.default_rng(seed)
    values, starts, subsets = _windowed_values(n_items, k_cap, horizon, window_length, [eta] * windows, rng)
    schedule = ParamSchedule(values)
    summary = variation_summary(schedule, k_cap)
    if summary.switches > switches:
        raise AssertionError(f"Generated {summary.switches} switches, more than L={switches}")

    lb = window_lower_bound(n_items, window_length)
    metadata = InstanceMetadata(kind="switching",
                                L=switches,
                                window_length=window_length,
                                windows=windows,
                                var_2k=summary.var_2k,
                                var_inf=summary.var_inf,
                                switches=summary.switches,
                                eta=eta,
                                window_lower_bound=lb,
                                lower_bound_shape=windows * lb,
                                window_starts=starts,
                                good_subsets=subsets)
    LabLogger().info(f"Switching instance N={n_items} K={k_cap} T={horizon} L={switches}: window {window_length}, eta {eta:.6f}")
    return AdversarialInstance(schedule, ItemCatalog.uniform(n_items, k_cap), metadata)


def variation_window_length(n_items: int, horizon: int, budget: float) -> int:
    return math.ceil(n_items**(1/3) * (horizon / budget)**(2/3))


def variation_epsilon(n_items: int, horizon: int, budget: float, window_length: int) -> float:
    return min(math.sqrt(n_items / window_length) / WINDOW_CONSTANT, 0.5 * budget * window_length / horizon)


def gen_variation_instance(n_items: int, k_cap: int, horizon: int, budget: float, seed: int) -> AdversarialInstance:
    _check_capacity(n_items, k_cap)
    if not budget * n_items >= 1:
        raise RefusedError(f"Variation budget {budget} is below 1/N = {1/n_items}", "Delta >= 1/N")
    if not budget * n_items <= horizon:
        raise RefusedError(f"Variation budget {budget} is above T/N = {horizon/n_items}", "Delta <= T/N")

    window_length = variation_window_length(n_items, horizon, budget)
    epsilon = variation_epsilon(n_items, horizon, budget, window_length)
    windows = math.ceil(horizon / window_length)
    etas = [epsilon if w % 2 == 0 else epsilon / 2 for w in range(windows)]

    rng = np.random.default_rng(seed)
    values, starts, subsets = _windowed_values(n_items, k_cap, horizon, window_length, etas, rng)
    schedule = ParamSchedule(values)
    summary = variation_summary(schedule, k_cap)
    if summary.var_2k > budget:
        raise AssertionError(f"Generated variation {summary.var_2k} exceeds the budget {budget}")
    if summary.var_2k < 0.5 * k_cap * summary.var_inf:
        raise AssertionError(f"Generated variation {summary.var_2k} is below (K/2) * {summary.var_inf}")

    lb = window_lower_bound(n_items, window_length)
    metadata = InstanceMetadata(kind="variation",
                                L=summary.switches,
                                window_length=window_length,
                                windows=windows,
                                var_2k=summary.var_2k,
                                var_inf=summary.var_inf,
                                switches=summary.switches,
                                M=window_length,
                                epsilon=epsilon,
                                budget=budget,
                                window_lower_bound=lb,
                                lower_bound_shape=windows * lb,
                                window_starts=starts,
                                good_subsets=subsets)
    LabLogger().info(f"Variation instance N={n_items} K={k_cap} T={horizon} budget={budget}: M {window_length}, epsilon {epsilon:.6f}")
    return AdversarialInstance(schedule, ItemCatalog.uniform(n_items, k_cap), metadata)


def window_changes_within(instance: AdversarialInstance, low: float, high: float, min_count: int) -> bool:
    """ Every window boundary moves >= min_count coordinates by at least `low` and none by more than `high` """
    values = instance.schedule.values
    for start in instance.metadata.window_starts[1:]:
        change = np.abs(values[start-1] - values[start-2])
        if np.any(change > high) or np.count_nonzero(change >= low) < min_count:
            return False
    return True


def metadata_path(path: str) -> str:
    base, _ = os.path.splitext(path)
    return base + ".meta.json"


def write_instance(instance: AdversarialInstance, path: str) -> str:
    """ Write the schedule file plus its metadata sidecar, returns the sidecar path """
    write_schedule_file(instance.schedule, path, instance.metadata.window_starts)
    meta_path = metadata_path(path)
    with open(meta_path, 'w', encoding='utf-8') as f:
        json.dump(instance.metadata.to_dict(), f, indent=2)
        f.write("\n")
    return meta_path
