"""
This learner offers a uniformly random K-subset every round and learns nothing.
"""

import numpy as np

from ChoiceModelTypes import Assortment, ItemCatalog
from Environment import ChoiceOutcome
from Learner import Learner


TYPE_NAME = "random"


class RandomLearner(Learner):
    """ Baseline with constant-gap play, hence linear pseudo-regret """

    def __init__(self, catalog: ItemCatalog, horizon: int, rng: np.random.Generator):
        super().__init__(catalog, horizon)
        self.rng = rng

    def _choose(self) -> Assortment:
        items = self.rng.choice(self.catalog.n_items, size=self.catalog.capacity, replace=False)
        return tuple(sorted(int(i) + 1 for i in items))

    def _learn(self, offered: Assortment, outcome: ChoiceOutcome):
        pass

    def reward_upper_bound(self) -> float:
        """ Payoffs are bounded by 1 """
        return 1.0
