"""
Multi-scale restart shell around a base learner

Time is cut into blocks of length 2^n, n = 0, 1, 2, ... At the start of a block, for every
order m <= n and every aligned sub-interval of length 2^m, an order-m instance of the base
learner is scheduled with probability min(1, rho(2^n) / rho(2^m)); the order-n instance
covering the whole block always exists. Each round the scheduled instance with the smallest
order covering the round acts, the longer ones stay paused.

Two tests compare realized rewards with u_min, the running minimum of the acting
instances' reward upper bounds over the block:

    test1 (instance of interval I finishes):  mean_{tau in I} r(tau) >= u_min + c1 rho(|I|)
    test2 (every round t of the block):        mean_{tau in [t_n, t]} r(tau) <= u_min - c2 rho(t - t_n + 1)

Either firing restarts the block sequence at n = 0 from the next round.
"""

from dataclasses import dataclass, field
import math
import numpy as np
from typing import Callable, Optional

from ChoiceModelTypes import Assortment, ItemCatalog
from Environment import ChoiceOutcome, MnlEnvironment
from LabLoggers import LabLogger
from Learner import Learner


TYPE_NAME = "master_epoch_ucb"

RhoFunction = Callable[[int], float]


@dataclass(frozen=True)
class MasterSettings:
    c1: float = 9.0
    c2: float = 3.0
    enable_test1: bool = True
    enable_test2: bool = True
    force_full_block_only: bool = False


@dataclass
class InstanceSlot:
    """ A scheduled base-learner instance; the learner is built the first time it acts """
    order: int
    start: int
    end: int
    learner: Optional[Learner] = None

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    def covers(self, t: int) -> bool:
        return self.start <= t <= self.end


def scheduling_probability(n: int, m: int, rho_fn: RhoFunction) -> float:
    return min(1.0, rho_fn(2**n) / rho_fn(2**m))


def schedule_block(n: int, rho_fn: RhoFunction, rng: np.random.Generator, block_start: int=1,
                   horizon: Optional[int]=None, full_block_only: bool=False) -> list[InstanceSlot]:
    """ Draw the instances of a block of order n starting at block_start

    One uniform draw is spent per candidate slot, even past the horizon, so the stream use
    does not depend on truncation.
    """
    if n < 0:
        raise ValueError(f"Block order must be non-negative, got {n}")
    last = block_start + 2**n - 1
    if horizon is not None:
        last = min(last, horizon)
    slots = [InstanceSlot(n, block_start, last)]
    for m in range(n-1, -1, -1):
        count = 2**(n-m)
        draws = rng.random(count)
        if full_block_only:
            continue
        p = scheduling_probability(n, m, rho_fn)
        for k in np.flatnonzero(draws < p):
            start = block_start + int(k) * 2**m
            if start > last:
                break
            slots.append(InstanceSlot(m, start, min(start + 2**m - 1, last)))
    return slots


@dataclass
class MasterState:
    block_order: int
    block_start: int
    block_end: int
    slots: list[InstanceSlot]
    u_min: float = math.inf
    block_reward_sum: float = 0.0
    block_rewards: list[float] = field(default_factory=list)
    restarts: list[int] = field(default_factory=list)


def active_instance(state: MasterState, t: int) -> InstanceSlot:
    """ Smallest-order scheduled instance whose interval contains t """
    covering = [slot for slot in state.slots if slot.covers(t)]
    if not covering:
        raise ValueError(f"No scheduled instance covers round {t} of block [{state.block_start}, {state.block_end}]")
    return min(covering, key=lambda slot: (slot.order, slot.start))


@dataclass(frozen=True)
class MasterStep:
    restart: bool
    offered: Assortment
    outcome: ChoiceOutcome
    rhat: float
    instance_order: int


class MasterLearner(Learner):
    """ Runs the multi-scale schedule and the restart tests over fresh base-learner instances """

    def __init__(self, catalog: ItemCatalog, horizon: int, make_base: Callable[[], Learner],
                 rho_fn: RhoFunction, rng: np.random.Generator, settings: MasterSettings=MasterSettings(),
                 logger_id: Optional[str]=None):
        super().__init__(catalog, horizon)
        self.make_base = make_base
        self.rho_fn = rho_fn
        self.rng = rng
        self.settings = settings
        self.logger = LabLogger(logger_id)
        self.restarted = False
        self.instance_order: Optional[int] = None
        self._active: Optional[InstanceSlot] = None
        self._rhat = 0.0
        self.state = self._new_block(0, 1, [])

    def _new_block(self, n: int, start: int, restarts: list[int]) -> MasterState:
        slots = schedule_block(n, self.rho_fn, self.rng, start, self.horizon, self.settings.force_full_block_only)
        return MasterState(block_order=n, block_start=start, block_end=slots[0].end, slots=slots, restarts=restarts)

    def _choose(self) -> Assortment:
        t = self.round + 1
        slot = active_instance(self.state, t)
        if slot.learner is None:
            slot.learner = self.make_base()
        self._active = slot
        self.instance_order = slot.order
        self._rhat = slot.learner.reward_upper_bound()
        return slot.learner.act()

    def reward_upper_bound(self) -> float:
        self.act()
        return self._rhat

    def _test1(self, t: int) -> bool:
        rewards = self.state.block_rewards
        for slot in self.state.slots:
            if slot.end != t:
                continue
            offset = slot.start - self.state.block_start
            mean = sum(rewards[offset:offset + slot.length]) / slot.length
            if mean >= self.state.u_min + self.settings.c1 * self.rho_fn(slot.length):
                self.logger.info(f"Test 1 fired at round {t}: order {slot.order} instance mean {mean:.4f}, u_min {self.state.u_min:.4f}")
                return True
        return False

    def _test2(self, t: int) -> bool:
        elapsed = t - self.state.block_start + 1
        mean = self.state.block_reward_sum / elapsed
        if mean <= self.state.u_min - self.settings.c2 * self.rho_fn(elapsed):
            self.logger.info(f"Test 2 fired at round {t}: block mean {mean:.4f}, u_min {self.state.u_min:.4f}")
            return True
        return False

    def _learn(self, offered: Assortment, outcome: ChoiceOutcome):
        t = self.round
        self._active.learner.observe(outcome)
        state = self.state
        state.u_min = min(state.u_min, self._rhat)
        state.block_rewards.append(outcome.reward)
        state.block_reward_sum += outcome.reward

        fire = False
        if self.settings.enable_test1 and self._test1(t):
            fire = True
        if self.settings.enable_test2 and not fire and self._test2(t):
            fire = True

        self.restarted = fire
        if fire:
            state.restarts.append(t)
        if t >= self.horizon:
            return
        if fire:
            self.state = self._new_block(0, t + 1, state.restarts)
        elif t == state.block_end:
            self.state = self._new_block(state.block_order + 1, t + 1, state.restarts)

    def step(self, env: MnlEnvironment) -> MasterStep:
        """ One full round against the environment """
        offered = self.act()
        rhat = self.reward_upper_bound()
        order = self.instance_order
        outcome = env.advance(offered)
        self.observe(outcome)
        return MasterStep(self.restarted, offered, outcome, rhat, order)

    def stats(self) -> dict:
        stats = super().stats()
        stats['restarts'] = len(self.state.restarts)
        stats['restart_rounds'] = list(self.state.restarts)
        return stats
