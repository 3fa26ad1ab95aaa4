"""
Experiment runner

Wires a schedule, a learner and the environment together for each replication, computes
the per-round regret decomposition and writes the artifacts:

    <output_dir>/run_<id>.csv     one row per round
    <output_dir>/summary.json     mean/std of the final regrets across replications
    <output_dir>/sweep.csv        (sweep only) one row per grid value
    <output_dir>/sweep.json       (sweep only) slope fits

Every random stream is derived from (master_seed, purpose, replication id) so outputs do not
depend on how replications are spread over worker processes.
"""

import csv
from dataclasses import dataclass, field, replace
import json
import math
from multiprocessing import Pool
import numpy as np
import os
from typing import Optional

from AssortmentOptimizer import OptResult, optimal_series
from ChoiceModel import expected_payoff
from ChoiceModelTypes import Assortment, ParamSchedule, make_assortment
from Environment import MnlEnvironment
import EpochUcbLearner
from LabConfig import ExperimentConfig
from LabErrors import RefusedError
from LabLoggers import LabLogger, setup_replication_logger
from Learner import Learner
import MasterScheduler
import OracleLearner
import RandomLearner
from Schedules import ScheduleSpec, make_schedule
from utils import make_rng
from Variation import rho, variation_summary


CSV_COLUMNS = ('run_id', 't', 'assortment', 'chosen', 'reward', 'rhat', 'inst_pseudo_regret',
               'cum_pseudo_regret', 'cum_realized_regret', 'restart', 'instance_order')

SWEEP_MIN_POINTS = 4
SWEEP_MIN_REPLICATIONS = 10


@dataclass(eq=False)
class RunRecord:
    """ Per-round log of one replication, stored column-wise """
    run_id: int
    assortments: list[Assortment]
    chosen: np.ndarray
    reward: np.ndarray
    rhat: np.ndarray
    optimal_values: np.ndarray
    inst_pseudo_regret: np.ndarray
    restart: np.ndarray
    instance_order: list[Optional[int]]
    stats: dict = field(default_factory=dict)

    @property
    def horizon(self) -> int:
        return len(self.chosen)

    @property
    def cum_pseudo_regret(self) -> np.ndarray:
        return np.cumsum(self.inst_pseudo_regret)

    @property
    def cum_realized_regret(self) -> np.ndarray:
        return np.cumsum(self.optimal_values - self.reward)

    @property
    def final_pseudo_regret(self) -> float:
        return float(self.inst_pseudo_regret.sum())

    @property
    def final_realized_regret(self) -> float:
        return float((self.optimal_values - self.reward).sum())


@dataclass(eq=False)
class ExperimentResult:
    config: ExperimentConfig
    schedule: ParamSchedule
    records: list[RunRecord]
    summary: dict


@dataclass
class SweepResult:
    parameter: str
    rows: list[dict]
    slope: Optional[float]
    bound_slope: Optional[float]
    degenerate: bool

    def to_dict(self) -> dict:
        return {'parameter': self.parameter, 'rows': self.rows, 'slope': self.slope,
                'bound_slope': self.bound_slope, 'degenerate': self.degenerate}


def build_schedule(config: ExperimentConfig) -> ParamSchedule:
    """ The same instance is shared by every replication of an experiment """
    rng = make_rng(config.master_seed, "schedule", 0)
    return make_schedule(config.schedule, config.catalog.n_items, config.horizon, config.catalog.capacity, rng)


def build_learner(config: ExperimentConfig, schedule: ParamSchedule, optimal: list[OptResult],
                  replication_id: int, logger_id: Optional[str]=None) -> Learner:
    """ Call the correct constructor for the learner type """
    catalog = config.catalog
    horizon = config.horizon
    if config.learner_type == EpochUcbLearner.TYPE_NAME:
        return EpochUcbLearner.EpochUcbLearner(catalog, horizon, config.c_scale)
    elif config.learner_type == MasterScheduler.TYPE_NAME:
        n_items = catalog.n_items
        return MasterScheduler.MasterLearner(catalog, horizon,
                                             make_base=lambda: EpochUcbLearner.EpochUcbLearner(catalog, horizon, config.c_scale),
                                             rho_fn=lambda t: rho(t, n_items, horizon, config.c_scale),
                                             rng=make_rng(config.master_seed, "master", replication_id),
                                             settings=config.master,
                                             logger_id=logger_id)
    elif config.learner_type == OracleLearner.TYPE_NAME:
        return OracleLearner.OracleLearner(catalog, horizon, schedule, optimal)
    elif config.learner_type == RandomLearner.TYPE_NAME:
        return RandomLearner.RandomLearner(catalog, horizon, make_rng(config.master_seed, "learner", replication_id))
    raise ValueError(f"Invalid learner type: {config.learner_type}")


def run_replication(config: ExperimentConfig, replication_id: int, schedule: ParamSchedule,
                    optimal: list[OptResult]) -> RunRecord:
    logger_id = setup_replication_logger(replication_id, config.output_dir, config.split_out_replication_logs)
    logger = LabLogger(logger_id)
    learner = build_learner(config, schedule, optimal, replication_id, logger_id)
    env = MnlEnvironment(schedule, config.catalog, make_rng(config.master_seed, "env", replication_id))
    is_master = isinstance(learner, MasterScheduler.MasterLearner)

    horizon = config.horizon
    assortments = []
    chosen = np.zeros(horizon, dtype=np.int64)
    reward = np.zeros(horizon)
    rhat = np.zeros(horizon)
    optimal_values = np.array([opt.value for opt in optimal])
    inst_pseudo = np.zeros(horizon)
    restart = np.zeros(horizon, dtype=bool)
    instance_order = []

    for i in range(horizon):
        s = make_assortment(learner.act(), config.catalog)
        rhat[i] = learner.reward_upper_bound()
        instance_order.append(learner.instance_order if is_master else None)
        inst_pseudo[i] = optimal[i].value - expected_payoff(schedule.values[i], config.catalog, s)
        outcome = env.advance(s)
        learner.observe(outcome)
        assortments.append(s)
        chosen[i] = outcome.chosen
        reward[i] = outcome.reward
        restart[i] = is_master and learner.restarted

    stats = learner.stats()
    logger.info(f"Replication {replication_id} finished: pseudo-regret {inst_pseudo.sum():.4f}, stats {stats}")
    return RunRecord(replication_id, assortments, chosen, reward, rhat, optimal_values, inst_pseudo,
                     restart, instance_order, stats)


def write_run_csv(record: RunRecord, path: str):
    cum_pseudo = record.cum_pseudo_regret
    cum_realized = record.cum_realized_regret
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS, lineterminator='\n')
        writer.writeheader()
        for i in range(record.horizon):
            order = record.instance_order[i]
            writer.writerow({'run_id': record.run_id,
                             't': i + 1,
                             'assortment': ";".join(str(j) for j in record.assortments[i]),
                             'chosen': int(record.chosen[i]),
                             'reward': float(record.reward[i]),
                             'rhat': float(record.rhat[i]),
                             'inst_pseudo_regret': float(record.inst_pseudo_regret[i]),
                             'cum_pseudo_regret': float(cum_pseudo[i]),
                             'cum_realized_regret': float(cum_realized[i]),
                             'restart': int(record.restart[i]),
                             'instance_order': "" if order is None else order})


def summarize(config: ExperimentConfig, records: list[RunRecord]) -> dict:
    pseudo = np.array([r.final_pseudo_regret for r in records])
    realized = np.array([r.final_realized_regret for r in records])
    summary = {'learner': config.learner_type,
               'horizon': config.horizon,
               'replications': len(records),
               'master_seed': config.master_seed,
               'final_pseudo_regret': {'mean': float(pseudo.mean()), 'std': float(pseudo.std())},
               'final_realized_regret': {'mean': float(realized.mean()), 'std': float(realized.std())},
               'per_replication': [{'run_id': r.run_id,
                                    'final_pseudo_regret': r.final_pseudo_regret,
                                    'final_realized_regret': r.final_realized_regret,
                                    **r.stats} for r in records]}
    return summary


def run_experiment(config: ExperimentConfig, write: bool=True) -> ExperimentResult:
    logger = LabLogger()
    logger.info(f"Experiment started: learner {config.learner_type}, T={config.horizon}, "
                f"R={config.replications}, seed {config.master_seed}")
    schedule = build_schedule(config)
    optimal = optimal_series(schedule, config.catalog)
    if write:
        os.makedirs(config.output_dir, exist_ok=True)

    args = [(config, rid, schedule, optimal) for rid in range(config.replications)]
    if config.workers > 1 and config.replications > 1:
        with Pool(min(config.workers, config.replications)) as pool:
            records = pool.starmap(run_replication, args)
    else:
        records = [run_replication(*a) for a in args]
    records.sort(key=lambda r: r.run_id)

    summary = summarize(config, records)
    if write:
        for record in records:
            write_run_csv(record, os.path.join(config.output_dir, f"run_{record.run_id}.csv"))
        with open(os.path.join(config.output_dir, "summary.json"), 'w', encoding='utf-8') as f:
            json.dump(summary, f, indent=2)
            f.write("\n")
    logger.info(f"Experiment finished: mean final pseudo-regret {summary['final_pseudo_regret']['mean']:.4f}")
    return ExperimentResult(config, schedule, records, summary)


def with_sweep_value(config: ExperimentConfig, parameter: str, value) -> ExperimentConfig:
    """ Copy of the config with one grid value applied """
    output_dir = os.path.join(config.output_dir, f"{parameter}_{value}")
    if parameter == 'horizon':
        return replace(config, horizon=int(value), output_dir=output_dir)
    kind = {'switches': 'switching', 'budget': 'variation'}[parameter]
    if config.schedule.kind != kind:
        raise RefusedError(f"Sweeping {parameter} needs a {kind} schedule, got {config.schedule.kind}", "sweep.parameter")
    params = dict(config.schedule.params)
    params[parameter] = value
    return replace(config, schedule=ScheduleSpec(kind, params), output_dir=output_dir)


def bound_shape(config: ExperimentConfig, schedule: ParamSchedule) -> float:
    """ Order of growth of the regret upper bound on the generated instance, constants dropped """
    n_items = config.catalog.n_items
    horizon = config.horizon
    summary = variation_summary(schedule, config.catalog.capacity)
    if config.schedule.kind == 'variation':
        return n_items**(1/3) * summary.var_2k**(1/3) * horizon**(2/3) + math.sqrt(n_items * horizon)
    return math.sqrt(n_items * horizon * summary.switches)


def _log_slope(x: np.ndarray, y: np.ndarray) -> Optional[float]:
    if np.any(y <= 0) or np.any(x <= 0) or np.unique(x).size < 2:
        return None
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def sweep(config: ExperimentConfig, parameter: str, values: list, write: bool=True) -> SweepResult:
    if len(values) < SWEEP_MIN_POINTS:
        raise RefusedError(f"Sweeps need at least {SWEEP_MIN_POINTS} grid points, got {len(values)}", "sweep.values")
    if config.replications < SWEEP_MIN_REPLICATIONS:
        raise RefusedError(f"Sweeps need at least {SWEEP_MIN_REPLICATIONS} replications, got {config.replications}",
                           "experiment.replications")

    rows = []
    for value in values:
        point = with_sweep_value(config, parameter, value)
        result = run_experiment(point, write)
        regret = result.summary['final_pseudo_regret']
        rows.append({'value': value, 'mean_regret': regret['mean'], 'std_regret': regret['std'],
                     'bound_shape': bound_shape(point, result.schedule)})

    x = np.array([float(r['value']) for r in rows])
    slope = _log_slope(x, np.array([r['mean_regret'] for r in rows]))
    bound_slope = _log_slope(x, np.array([r['bound_shape'] for r in rows]))
    result = SweepResult(parameter, rows, slope, bound_slope, degenerate=slope is None)
    if result.degenerate:
        LabLogger().warning(f"Sweep over {parameter} is degenerate: regret is not positive at every grid point")

    if write:
        os.makedirs(config.output_dir, exist_ok=True)
        with open(os.path.join(config.output_dir, "sweep.csv"), 'w', encoding='utf-8', newline='') as f:
            writer = csv.DictWriter(f, fieldnames=('value', 'mean_regret', 'std_regret', 'bound_shape'), lineterminator='\n')
            writer.writeheader()
            writer.writerows(rows)
        with open(os.path.join(config.output_dir, "sweep.json"), 'w', encoding='utf-8') as f:
            json.dump(result.to_dict(), f, indent=2)
            f.write("\n")
    return result
