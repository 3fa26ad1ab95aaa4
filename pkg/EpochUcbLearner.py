"""
Epoch-based exploration-exploitation learner for near-stationary MNL environments.

The same assortment is offered until a no-purchase ends the epoch. At the end of an epoch
every offered item gets one more sample of "purchases per epoch", its running mean is
updated and its upper confidence bound is recomputed:

    n_j      <- n_j + 1
    mean_j   <- (n_j - 1)/n_j * mean_j + purchases_j / n_j
    ucb_j    <- mean_j + sqrt(c*192 * mean_j * log NT / n_j) + c*192 * log NT / n_j

The offered assortment maximizes the expected payoff under the UCBs. Since the UCBs only
move at epoch ends, the argmax is recomputed once per epoch and cached.
"""

from dataclasses import dataclass, field
import math
import numpy as np

from AssortmentOptimizer import optimal_assortment
from ChoiceModel import expected_payoff
from ChoiceModelTypes import Assortment, ItemCatalog
from Environment import ChoiceOutcome
from LabErrors import ConfigError
from Learner import Learner


TYPE_NAME = "epoch_ucb"

UCB_CONSTANT = 192.0


@dataclass
class LearnerState:
    """ Per-item epoch statistics plus the cached assortment of the running epoch """
    n_items: int
    horizon: int
    k_cap: int
    c_scale: float
    log_nt: float
    epochs_completed: np.ndarray        # n_j
    epoch_purchases: np.ndarray         # purchases of j in the running epoch
    mean_purchases: np.ndarray          # mean purchases per completed epoch
    ucb: np.ndarray                     # optimistic attraction estimates
    cached_assortment: Assortment = ()
    round: int = 0
    epoch_start: int = 1
    epochs_finished: int = 0
    epoch_lengths: list[int] = field(default_factory=list)

    @property
    def bonus_constant(self) -> float:
        return self.c_scale * UCB_CONSTANT * self.log_nt


class EpochUcbLearner(Learner):
    """ UCB learner that updates its estimates once per epoch """

    def __init__(self, catalog: ItemCatalog, horizon: int, c_scale: float=1.0):
        super().__init__(catalog, horizon)
        if not c_scale > 0 or not math.isfinite(c_scale):
            raise ConfigError("learner.c_scale", f"must be positive, got {c_scale}")
        if catalog.n_items * horizon < 3:
            raise ConfigError("experiment.horizon", f"N*T must be at least 3, got {catalog.n_items * horizon}")
        n = catalog.n_items
        log_nt = math.log(n * horizon)
        self.state = LearnerState(n_items=n,
                                  horizon=horizon,
                                  k_cap=catalog.capacity,
                                  c_scale=c_scale,
                                  log_nt=log_nt,
                                  epochs_completed=np.zeros(n, dtype=int),
                                  epoch_purchases=np.zeros(n, dtype=int),
                                  mean_purchases=np.zeros(n),
                                  ucb=np.full(n, c_scale * UCB_CONSTANT * log_nt))
        self._refresh_assortment()

    def _refresh_assortment(self):
        self.state.cached_assortment = optimal_assortment(self.state.ucb, self.catalog).assortment

    def _choose(self) -> Assortment:
        return self.state.cached_assortment

    def _learn(self, offered: Assortment, outcome: ChoiceOutcome):
        state = self.state
        state.round = self.round
        if not outcome.is_no_purchase:
            state.epoch_purchases[outcome.chosen-1] += 1
            return

        # epoch ends at this round
        for j in offered:
            i = j - 1
            state.epochs_completed[i] += 1
            n = state.epochs_completed[i]
            state.mean_purchases[i] = (n - 1) / n * state.mean_purchases[i] + state.epoch_purchases[i] / n
            state.ucb[i] = (state.mean_purchases[i]
                            + math.sqrt(state.bonus_constant * state.mean_purchases[i] / n)
                            + state.bonus_constant / n)
            state.epoch_purchases[i] = 0
        state.epoch_lengths.append(self.round - state.epoch_start + 1)
        state.epoch_start = self.round + 1
        state.epochs_finished += 1
        self._refresh_assortment()

    def reward_upper_bound(self) -> float:
        """ R(S, ucb) for the cached assortment; in [0, 1] since payoffs are """
        return expected_payoff(self.state.ucb, self.catalog, self.state.cached_assortment)

    def stats(self) -> dict:
        stats = super().stats()
        stats['epochs'] = self.state.epochs_finished
        return stats
