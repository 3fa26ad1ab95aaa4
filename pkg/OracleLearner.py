"""
This learner knows the true schedule and always offers S*(t). Its pseudo-regret is zero.
"""

from typing import Optional

from AssortmentOptimizer import OptResult, optimal_series
from ChoiceModelTypes import Assortment, ItemCatalog, ParamSchedule
from Environment import ChoiceOutcome
from Learner import Learner


TYPE_NAME = "oracle"


class OracleLearner(Learner):
    """ Baseline playing the per-round optimal assortment """

    def __init__(self, catalog: ItemCatalog, horizon: int, schedule: ParamSchedule,
                 optimal: Optional[list[OptResult]]=None):
        super().__init__(catalog, horizon)
        if optimal is None:
            optimal = optimal_series(schedule, catalog)
        self.optimal = optimal

    def _choose(self) -> Assortment:
        return self.optimal[self.round].assortment

    def _learn(self, offered: Assortment, outcome: ChoiceOutcome):
        pass

    def reward_upper_bound(self) -> float:
        if self.round >= len(self.optimal):
            return 0.0
        return self.optimal[self.round].value
