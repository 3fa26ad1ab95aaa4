"""
The base learner doesn't choose anything but provides the core round protocol.

Responsibilities:
- Keep the round counter
- Remember the assortment offered this round
- Reject outcomes that could not have come from that assortment
- Report a reward upper bound in [0, 1] at the start of every round

Children override _choose, _learn and reward_upper_bound. MASTER relies on instances being
independent and on them tolerating arbitrarily long pauses between calls.
"""

from ChoiceModelTypes import Assortment, ItemCatalog, NO_PURCHASE
from Environment import ChoiceOutcome
from LabErrors import ProtocolError


TYPE_NAME = "base"


class Learner:
    """ Learner contract: act() -> Assortment, observe(outcome), reward_upper_bound() """

    def __init__(self, catalog: ItemCatalog, horizon: int):
        self.catalog = catalog
        self.horizon = horizon
        self.round = 0
        self._offered: Assortment | None = None

    def _choose(self) -> Assortment:
        raise NotImplementedError("Learners must implement _choose")

    def _learn(self, offered: Assortment, outcome: ChoiceOutcome):
        raise NotImplementedError("Learners must implement _learn")

    def reward_upper_bound(self) -> float:
        raise NotImplementedError("Learners must implement reward_upper_bound")

    def act(self) -> Assortment:
        """ Assortment for the current round. Repeated calls within a round agree. """
        if self._offered is None:
            self._offered = self._choose()
        return self._offered

    def observe(self, outcome: ChoiceOutcome):
        """ Feed back the customer's choice for the round that act() opened """
        if self._offered is None:
            raise ProtocolError("observe called before act for this round")
        offered = self._offered
        if outcome.chosen != NO_PURCHASE and outcome.chosen not in offered:
            raise ProtocolError(f"Item {outcome.chosen} was chosen but the offered assortment is {offered}")
        self.round += 1
        self._offered = None
        self._learn(offered, outcome)

    def stats(self) -> dict:
        """ Run-summary statistics, extended by children """
        return {'rounds': self.round}
