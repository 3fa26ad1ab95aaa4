"""
Capacitated MNL assortment optimization

optimal_assortment finds argmax_{|S| <= K} R(S, omega) by bisection on the revenue
threshold lambda. For a fixed lambda the best set holds the (at most K) items with the
largest positive omega_j (r_j - lambda); its score f(lambda) is continuous and
non-increasing and the optimal revenue is the fixed point f(lambda*) = lambda*. The
bisection result is polished by fixed-point iteration lambda <- R(S(lambda)) so the final
set is exact.

Ties among payoff-equal optima go to the smaller set, then to the lexicographically
smallest sorted index tuple. The learner caches its assortment across an epoch and relies
on this rule being deterministic.
"""

from dataclasses import dataclass
from itertools import combinations
import numpy as np

from ChoiceModel import expected_payoff
from ChoiceModelTypes import Assortment, ItemCatalog, ParamSchedule
from LabErrors import DomainError, RefusedError


BISECTION_TOLERANCE = 1e-12
PAYOFF_TIE_TOLERANCE = 1e-12
BRUTE_FORCE_MAX_ITEMS = 20
MAX_POLISH_STEPS = 100


@dataclass(frozen=True)
class OptResult:
    assortment: Assortment
    value: float


def _check_omega(omega, catalog: ItemCatalog) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    if w.shape != (catalog.n_items,):
        raise DomainError(f"Expected {catalog.n_items} attraction values, got shape {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise DomainError(f"Attraction values must be finite and non-negative: {w.tolist()}")
    return w


def _best_set(w: np.ndarray, r: np.ndarray, k_cap: int, lam: float) -> tuple[Assortment, float]:
    """ Top-K strictly positive scores w_j (r_j - lam), index order breaking score ties """
    scores = w * (r - lam)
    positive = np.flatnonzero(scores > 0)
    if positive.size == 0:
        return (), 0.0
    # lexsort sorts by the last key first: descending score, then ascending index
    order = positive[np.lexsort((positive, -scores[positive]))][:k_cap]
    return tuple(sorted(int(i) + 1 for i in order)), float(scores[order].sum())


def _shortest_tied_prefix(w: np.ndarray, r: np.ndarray, catalog: ItemCatalog, s: Assortment, value: float) -> OptResult:
    """ Shortest score-ordered prefix of s whose payoff is within PAYOFF_TIE_TOLERANCE of value """
    idx = np.array(s, dtype=int) - 1
    scores = w[idx] * (r[idx] - value)
    order = idx[np.lexsort((idx, -scores))]
    for size in range(order.size + 1):
        prefix = tuple(sorted(int(i) + 1 for i in order[:size]))
        prefix_value = expected_payoff(w, catalog, prefix)
        if prefix_value >= value - PAYOFF_TIE_TOLERANCE:
            return OptResult(prefix, prefix_value)
    return OptResult(s, value)


def optimal_assortment(omega, catalog: ItemCatalog) -> OptResult:
    w = _check_omega(omega, catalog)
    r = catalog.payoffs
    k_cap = catalog.capacity

    lo, hi = 0.0, float(r.max()) if r.size else 0.0
    while hi - lo > BISECTION_TOLERANCE:
        mid = 0.5 * (lo + hi)
        _, f_mid = _best_set(w, r, k_cap, mid)
        if abs(f_mid - mid) <= BISECTION_TOLERANCE:
            lo = hi = mid
            break
        if f_mid > mid:
            lo = mid
        else:
            hi = mid

    # R(S(lam)) >= lam whenever f(lam) >= lam, so iterating from below climbs to the optimum
    lam = lo
    s, _ = _best_set(w, r, k_cap, lam)
    value = expected_payoff(w, catalog, s)
    for _ in range(MAX_POLISH_STEPS):
        next_s, _ = _best_set(w, r, k_cap, value)
        next_value = expected_payoff(w, catalog, next_s)
        if next_value <= value:
            break
        s, value = next_s, next_value
    return _shortest_tied_prefix(w, r, catalog, s, value)


def brute_force_assortment(omega, catalog: ItemCatalog) -> OptResult:
    """ Exhaustive maximum over all subsets of size <= K (test oracle, N <= 20) """
    if catalog.n_items > BRUTE_FORCE_MAX_ITEMS:
        raise RefusedError(f"Brute force limited to N <= {BRUTE_FORCE_MAX_ITEMS}, got {catalog.n_items}", "n_items")
    w = _check_omega(omega, catalog)
    r = catalog.payoffs

    candidates: list[Assortment] = [()]
    values = [0.0]
    for size in range(1, catalog.capacity + 1):
        combos = np.array(list(combinations(range(catalog.n_items), size)), dtype=int)
        ws = w[combos]
        revenue = (ws * r[combos]).sum(axis=1) / (1.0 + ws.sum(axis=1))
        candidates.extend(tuple(int(i) + 1 for i in c) for c in combos)
        values.extend(revenue.tolist())

    best = max(values)
    # enumeration order is cardinality first, then lexicographic
    for s, v in zip(candidates, values):
        if v >= best - PAYOFF_TIE_TOLERANCE:
            return OptResult(s, expected_payoff(w, catalog, s))
    raise AssertionError("unreachable")


def optimal_series(schedule: ParamSchedule, catalog: ItemCatalog) -> list[OptResult]:
    """ S*(t) and R(S*(t), omega(t)) for t = 1..T, solved once per distinct run of rows """
    values = schedule.values
    series = []
    for t in range(schedule.horizon):
        if t > 0 and np.array_equal(values[t], values[t-1]):
            series.append(series[-1])
        else:
            series.append(optimal_assortment(values[t], catalog))
    return series
