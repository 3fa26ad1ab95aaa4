import math
import numpy as np
import pytest

from ChoiceModelTypes import ItemCatalog
from Environment import ChoiceOutcome, MnlEnvironment
from EpochUcbLearner import EpochUcbLearner
from LabErrors import ProtocolError
from Learner import Learner
from MasterScheduler import (InstanceSlot, MasterLearner, MasterSettings, MasterState, active_instance, schedule_block,
                             scheduling_probability)
from Variation import rho

from conftest import stationary, two_phase


class FixedLearner(Learner):
    """ Always offers item 1 and reports a fixed reward upper bound """

    def __init__(self, catalog, horizon, rhat):
        super().__init__(catalog, horizon)
        self.rhat = rhat

    def _choose(self):
        return (1,)

    def _learn(self, offered, outcome):
        pass

    def reward_upper_bound(self):
        return self.rhat


def constant_rho(t):
    return 0.1


def decaying_rho(t):
    return 0.5 / math.sqrt(t)


def make_master(catalog, horizon, seed=0, make_base=None, rho_fn=constant_rho, **settings):
    if make_base is None:
        make_base = lambda: FixedLearner(catalog, horizon, 0.5)
    return MasterLearner(catalog, horizon, make_base, rho_fn, np.random.default_rng(seed), MasterSettings(**settings))


def run(master, env):
    steps = []
    while not env.done():
        steps.append(master.step(env))
    return steps


def test_scheduling_probability():
    assert scheduling_probability(3, 3, decaying_rho) == 1.0
    assert scheduling_probability(4, 0, decaying_rho) == pytest.approx(0.25)
    assert scheduling_probability(4, 2, constant_rho) == 1.0


def test_block_always_holds_its_full_length_instance(rng):
    for n in range(6):
        slots = schedule_block(n, decaying_rho, rng, block_start=5)
        assert slots[0] == InstanceSlot(n, 5, 5 + 2**n - 1)
        for slot in slots[1:]:
            assert slot.order < n
            assert slot.length == 2**slot.order
            assert (slot.start - 5) % 2**slot.order == 0


def test_full_block_only_schedules_one_instance(rng):
    assert len(schedule_block(5, constant_rho, rng, full_block_only=True)) == 1
    assert len(schedule_block(5, constant_rho, rng)) == 2**6 - 1


def test_truncation_does_not_change_stream_use():
    a = np.random.default_rng(8)
    b = np.random.default_rng(8)
    truncated = schedule_block(5, decaying_rho, a, block_start=1, horizon=10)
    schedule_block(5, decaying_rho, b, block_start=1)
    assert a.random() == b.random()
    assert all(slot.end <= 10 for slot in truncated)


def test_active_instance_is_the_shortest_covering_one():
    state = MasterState(2, 1, 4, [InstanceSlot(2, 1, 4), InstanceSlot(1, 3, 4), InstanceSlot(0, 4, 4)])
    assert active_instance(state, 2).order == 2
    assert active_instance(state, 3).order == 1
    assert active_instance(state, 4).order == 0


def test_test1_fires_when_an_instance_beats_u_min():
    catalog = ItemCatalog.uniform(4, 1)
    master = make_master(catalog, 10, c1=3.0)
    master.state = MasterState(0, 1, 1, [InstanceSlot(0, 1, 1)], u_min=0.5, block_rewards=[0.9])
    assert master._test1(1)
    master.state.block_rewards = [0.7]
    assert not master._test1(1)


def test_test2_fires_when_the_block_falls_below_u_min():
    catalog = ItemCatalog.uniform(4, 1)
    master = make_master(catalog, 10, c2=3.0)
    master.state = MasterState(0, 1, 1, [InstanceSlot(0, 1, 1)], u_min=0.8, block_reward_sum=0.1)
    assert master._test2(1)
    master.state.block_reward_sum = 0.6
    assert not master._test2(1)


def test_blocks_double_without_restarts(rng):
    catalog = ItemCatalog.uniform(1, 1)
    env = MnlEnvironment(stationary([1.0], horizon=40), catalog, rng)
    master = make_master(catalog, 40, enable_test1=False, enable_test2=False)
    starts = []
    for _ in range(40):
        if master.round + 1 == master.state.block_start:
            starts.append(master.state.block_start)
        master.step(env)
    assert starts == [1, 2, 4, 8, 16, 32]
    assert master.stats()['restarts'] == 0


def test_no_restarts_under_the_theoretical_tolerance(rng):
    catalog = ItemCatalog.uniform(8, 2)
    env = MnlEnvironment(stationary(rng.random(8), horizon=300), catalog, rng)
    master = make_master(catalog, 300, make_base=lambda: EpochUcbLearner(catalog, 300),
                         rho_fn=lambda t: rho(t, 8, 300), c1=9.0, c2=3.0)
    steps = run(master, env)
    assert not any(step.restart for step in steps)
    assert all(0.0 <= step.rhat <= 1.0 for step in steps)


def test_restart_after_the_customer_stops_buying():
    catalog = ItemCatalog.uniform(2, 1)
    env = MnlEnvironment(two_phase([1.0, 1.0], [0.0, 0.0], horizon=600, switch_at=300), catalog,
                         np.random.default_rng(4))
    master = make_master(catalog, 600, rho_fn=decaying_rho, enable_test1=False, c2=3.0)
    run(master, env)
    assert any(t >= 300 for t in master.stats()['restart_rounds'])


def test_restart_starts_a_fresh_order_zero_block():
    catalog = ItemCatalog.uniform(2, 1)
    master = make_master(catalog, 50, rho_fn=constant_rho, enable_test2=False, c1=1.0)
    env = MnlEnvironment(stationary([1.0, 1.0], horizon=50), catalog, np.random.default_rng(1))
    # any purchase makes an order-0 instance mean 1 >= 0.5 + 0.1
    steps = run(master, env)
    for i, step in enumerate(steps[:-1]):
        if step.restart:
            assert steps[i+1].instance_order == 0


def test_same_seed_same_schedule():
    catalog = ItemCatalog.uniform(2, 1)

    def trace(seed):
        env = MnlEnvironment(stationary([0.5, 0.5], horizon=100), catalog, np.random.default_rng(seed))
        master = make_master(catalog, 100, seed=seed, rho_fn=decaying_rho)
        return [(s.restart, s.instance_order, s.outcome.chosen) for s in run(master, env)]

    assert trace(3) == trace(3)


def test_observe_without_act_is_rejected():
    master = make_master(ItemCatalog.uniform(2, 1), 10)
    with pytest.raises(ProtocolError):
        master.observe(ChoiceOutcome(0, 0.0))
