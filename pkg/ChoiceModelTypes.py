"""
Static problem data for the MNL choice model

Items are indexed 1..N everywhere outside of numpy arrays. Index 0 is the no-purchase option
and its attraction parameter is fixed to 1.
"""

from dataclasses import dataclass, field
from typing import Iterable
import numpy as np

from LabErrors import DomainError


NO_PURCHASE = 0

# An attraction vector is a read-only float array of length N (omega_1..omega_N)
AttractionVector = np.ndarray

# Sorted tuple of distinct 1-based item indices, empty tuple allowed
Assortment = tuple[int, ...]


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


def attraction_vector(values: Iterable[float]) -> AttractionVector:
    """ Validate true environment parameters: 0 <= omega_j <= 1 """
    omega = _frozen(list(values))
    if omega.ndim != 1:
        raise DomainError(f"Attraction vector must be one dimensional, got shape {omega.shape}")
    if not np.all(np.isfinite(omega)) or np.any(omega < 0) or np.any(omega > 1):
        raise DomainError(f"Attraction parameters must lie in [0, 1]: {omega.tolist()}")
    return omega


@dataclass(frozen=True, eq=False)
class ItemCatalog:
    """ N items with payoffs r_j in [0, 1], offered at most K at a time """
    n_items: int
    capacity: int
    payoffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        payoffs = _frozen(self.payoffs)
        object.__setattr__(self, 'payoffs', payoffs)
        if self.n_items < 1:
            raise DomainError(f"Catalog needs at least one item, got {self.n_items}")
        if not 1 <= self.capacity <= self.n_items:
            raise DomainError(f"Capacity must satisfy 1 <= K <= N, got K={self.capacity} N={self.n_items}")
        if payoffs.shape != (self.n_items,):
            raise DomainError(f"Expected {self.n_items} payoffs, got shape {payoffs.shape}")
        if not np.all(np.isfinite(payoffs)) or np.any(payoffs < 0) or np.any(payoffs > 1):
            raise DomainError(f"Payoffs must lie in [0, 1]: {payoffs.tolist()}")

    @classmethod
    def uniform(cls, n_items: int, capacity: int, payoff: float=1.0) -> "ItemCatalog":
        return cls(n_items, capacity, np.full(n_items, payoff))

    def payoff(self, j: int) -> float:
        """ r_j, with r_0 = 0 for the no-purchase option """
        if j == NO_PURCHASE:
            return 0.0
        return float(self.payoffs[j-1])


def make_assortment(items: Iterable[int], catalog: ItemCatalog) -> Assortment:
    """ Sort and validate a candidate assortment against the catalog """
    s = tuple(sorted(int(i) for i in items))
    if len(set(s)) != len(s):
        raise DomainError(f"Assortment has repeated items: {s}")
    if len(s) > catalog.capacity:
        raise DomainError(f"Assortment {s} exceeds capacity {catalog.capacity}")
    if s and (s[0] < 1 or s[-1] > catalog.n_items):
        raise DomainError(f"Assortment {s} has items outside [1, {catalog.n_items}]")
    return s


class ParamSchedule:
    """ The adversary's full trajectory omega(1..T), stored as a read-only T x N matrix """

    def __init__(self, values):
        matrix = np.array(values, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
            raise DomainError(f"Schedule must be a non-empty T x N matrix, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)) or np.any(matrix < 0) or np.any(matrix > 1):
            bad = np.argwhere(~((matrix >= 0) & (matrix <= 1)))[0]
            raise DomainError(f"Schedule value out of [0, 1] at round {bad[0]+1}, item {bad[1]+1}")
        matrix.flags.writeable = False
        self._values = matrix

    @property
    def horizon(self) -> int:
        return self._values.shape[0]

    @property
    def n_items(self) -> int:
        return self._values.shape[1]

    @property
    def values(self) -> np.ndarray:
        return self._values

    def omega(self, t: int) -> AttractionVector:
        """ omega(t) for 1 <= t <= T """
        if not 1 <= t <= self.horizon:
            raise DomainError(f"Round {t} outside [1, {self.horizon}]")
        return self._values[t-1]

    def is_stationary(self) -> bool:
        return bool(np.all(self._values == self._values[0]))

    def __eq__(self, other) -> bool:
        return isinstance(other, ParamSchedule) and np.array_equal(self._values, other._values)

    def __repr__(self) -> str:
        return f"ParamSchedule(horizon={self.horizon}, n_items={self.n_items})"
