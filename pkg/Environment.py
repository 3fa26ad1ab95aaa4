"""
Nature's side of the round protocol

Given the offered assortment and the current attraction parameters, sample which item is
purchased. The inverse-CDF sampler spends exactly one uniform draw per call. The Gumbel
sampler draws |S|+1 Gumbel(0,1) utilities and is kept for cross-validation.
"""

from dataclasses import dataclass
from typing import Optional
import numpy as np

from ChoiceModel import choice_probs
from ChoiceModelTypes import Assortment, ItemCatalog, NO_PURCHASE, ParamSchedule


@dataclass(frozen=True)
class ChoiceOutcome:
    """ Purchased item j(t) (0 for no-purchase) and collected payoff r(t) """
    chosen: int
    reward: float

    @property
    def is_no_purchase(self) -> bool:
        return self.chosen == NO_PURCHASE


def _outcome(chosen: int, catalog: Optional[ItemCatalog]) -> ChoiceOutcome:
    if catalog is None:
        return ChoiceOutcome(chosen, 0.0 if chosen == NO_PURCHASE else 1.0)
    return ChoiceOutcome(chosen, catalog.payoff(chosen))


def _sample_index(omega: np.ndarray, s: Assortment, rng: np.random.Generator) -> int:
    u = rng.random()
    if not s:
        return NO_PURCHASE
    cdf = np.cumsum(choice_probs(omega, s))
    k = int(np.searchsorted(cdf, u, side='right'))
    # cdf[-1] can round just below 1
    k = min(k, len(s))
    return NO_PURCHASE if k == 0 else s[k-1]


def sample_choice(omega: np.ndarray, s: Assortment, rng: np.random.Generator, catalog: Optional[ItemCatalog]=None) -> ChoiceOutcome:
    """ Inverse-CDF categorical draw. Without a catalog every item pays 1. """
    return _outcome(_sample_index(omega, s, rng), catalog)


def sample_choice_gumbel(omega: np.ndarray, s: Assortment, rng: np.random.Generator, catalog: Optional[ItemCatalog]=None) -> ChoiceOutcome:
    """ argmax over S + {0} of log(omega_u) + G_u, with log(omega_0) = 0 and log(0) = -inf """
    noise = rng.gumbel(size=len(s) + 1)
    if not s:
        return _outcome(NO_PURCHASE, catalog)
    w = np.asarray(omega, dtype=float)[np.asarray(s, dtype=int) - 1]
    log_w = np.full(len(s), -np.inf)
    np.log(w, out=log_w, where=w > 0)
    utilities = np.concatenate(([0.0], log_w)) + noise
    k = int(np.argmax(utilities))
    return _outcome(NO_PURCHASE if k == 0 else s[k-1], catalog)


def sample_choices(omega: np.ndarray, s: Assortment, rng: np.random.Generator, size: int) -> np.ndarray:
    """ `size` inverse-CDF draws; consumes the stream like `size` calls to sample_choice """
    u = rng.random(size)
    if not s:
        return np.zeros(size, dtype=np.int64)
    cdf = np.cumsum(choice_probs(omega, s))
    k = np.minimum(np.searchsorted(cdf, u, side='right'), len(s))
    return np.concatenate(([NO_PURCHASE], s)).astype(np.int64)[k]


def sample_choices_gumbel(omega: np.ndarray, s: Assortment, rng: np.random.Generator, size: int) -> np.ndarray:
    noise = rng.gumbel(size=(size, len(s) + 1))
    if not s:
        return np.zeros(size, dtype=np.int64)
    w = np.asarray(omega, dtype=float)[np.asarray(s, dtype=int) - 1]
    log_w = np.full(len(s), -np.inf)
    np.log(w, out=log_w, where=w > 0)
    k = np.argmax(np.concatenate(([0.0], log_w)) + noise, axis=1)
    return np.concatenate(([NO_PURCHASE], s)).astype(np.int64)[k]


def step(schedule: ParamSchedule, t: int, s: Assortment, catalog: ItemCatalog, rng: np.random.Generator) -> ChoiceOutcome:
    """ One round: sample from omega(t) and collect r_{j(t)} (0 on no-purchase) """
    omega = schedule.omega(t)
    return sample_choice(omega, s, rng, catalog)


class MnlEnvironment:
    """ A schedule, a catalog and an owned random stream, advanced one round at a time """

    def __init__(self, schedule: ParamSchedule, catalog: ItemCatalog, rng: np.random.Generator):
        self.schedule = schedule
        self.catalog = catalog
        self.rng = rng
        self.round = 0

    @property
    def horizon(self) -> int:
        return self.schedule.horizon

    def done(self) -> bool:
        return self.round >= self.schedule.horizon

    def advance(self, s: Assortment) -> ChoiceOutcome:
        self.round += 1
        return step(self.schedule, self.round, s, self.catalog, self.rng)
