"""
Configuration Manager

This includes both the default configuration values and a reader for YAML config files.
YAML is a superset of JSON so JSON config files load the same way.

Config files are overrides from the default so they can be just a subset of settings.
Unknown keys are collected and logged instead of failing the run. Values are checked when
validate() builds the ExperimentConfig; every problem is reported with its dotted key path.

Comments to what each parameter does are in configs/base.yaml
"""

from copy import deepcopy
from dataclasses import dataclass
import math
import os
import random
import sys
import yaml

from ChoiceModelTypes import ItemCatalog
from LabErrors import ConfigError, DomainError
from MasterScheduler import MasterSettings
from Schedules import ScheduleSpec
from typing import Optional
from utils import copy_override_dict, is_valid_key_chain


LEARNER_TYPES = ('epoch_ucb', 'master_epoch_ucb', 'oracle', 'random')
SWEEP_PARAMETERS = ('horizon', 'switches', 'budget')

DefaultScheduleConfigs = {
    'stationary': {
        'omega': None           # None draws omega uniformly from [0, 1]^N
    },
    'piecewise': {
        'breakpoints': []
    },
    'drift': {
        'start': None,
        'end': None
    },
    'file': {
        'path': None            # This is invalid!
    },
    'switching': {
        'switches': 1
    },
    'variation': {
        'budget': 1.0
    }
}

DefaultLabConfig = {
    'experiment': {
        'output_dir': 'output',
        'log_file': 'lab.log',
        'split_out_replication_logs': False,
        'horizon': 1024,
        'replications': 1,
        'master_seed': None,
        'workers': 1
        },
    'catalog': {
        'n_items': 10,
        'capacity': 4,
        'payoffs': None
        },
    'schedule': {},
    'learner': {
        'type': 'epoch_ucb',
        'c_scale': 1.0
        },
    'master': {
        'c1': 9.0,
        'c2': 3.0,
        'enable_test1': True,
        'enable_test2': True,
        'force_full_block_only': False
        },
    'sweep': {
        'parameter': 'horizon',
        'values': []
        },
    'verify': {
        'confidence': 1.0e-3,
        'samplers_cases': 50,
        'samplers_draws': 100000,
        'optimizer_instances': 1000,
        'monotonicity_trials': 10000,
        'sandwich_samples': 100000,
        'sandwich_schedules': 10,
        'concentration_reps': 1000,
        'epoch_length_seeds': 20,
        'epoch_length_horizon': 10000,
        'conditions_seeds': 20,
        'conditions_horizon': 1000,
        'metrics_schedules': 1000,
        'metrics_pairs': 10000,
        'normalization_draws': 100000
        }
    }

hdd_config_file = None
unrecognized_settings = {}


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """ Validated, immutable view of one experiment; safe to ship to worker processes """
    catalog: ItemCatalog
    schedule: ScheduleSpec
    learner_type: str
    c_scale: float
    master: MasterSettings
    horizon: int
    replications: int
    master_seed: int
    workers: int
    output_dir: str
    split_out_replication_logs: bool


def _positive_int(value, field: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(field, f"must be a positive integer, got {value!r}")
    return value

def _positive_real(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
        raise ConfigError(field, f"must be a positive number, got {value!r}")
    return float(value)

def _flag(value, field: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(field, f"must be true or false, got {value!r}")
    return value


class LabConfig:
    def __init__(self):
        global hdd_config_file
        if hdd_config_file is None:
            hdd_config_file = deepcopy(DefaultLabConfig)
            hdd_config_file['schedule'] = {'stationary': deepcopy(DefaultScheduleConfigs['stationary'])}

    def _set_schedule_config(self, override_config: Optional[dict]):
        global hdd_config_file
        global unrecognized_settings
        if is_valid_key_chain(override_config, ['schedule']) and isinstance(override_config['schedule'], dict):
            hdd_config_file['schedule'] = {}
            for key, defaultconfig in DefaultScheduleConfigs.items():
                if key in override_config['schedule']:
                    hdd_config_file['schedule'][key] = deepcopy(defaultconfig)
            schedule_unrecognized = copy_override_dict(hdd_config_file['schedule'], override_config['schedule'])
            if schedule_unrecognized != {}:
                unrecognized_settings['schedule'] = schedule_unrecognized
            else:
                unrecognized_settings.pop('schedule', None)
        if not hdd_config_file['schedule']:
            hdd_config_file['schedule']['stationary'] = deepcopy(DefaultScheduleConfigs['stationary'])

    def set_config_dict(self, override_config: Optional[dict]):
        """ Reset to the defaults, then apply the overrides """
        global hdd_config_file
        global unrecognized_settings
        hdd_config_file = deepcopy(DefaultLabConfig)
        unrecognized_settings = {}
        if override_config is not None:
            if not isinstance(override_config, dict):
                raise ConfigError("<root>", f"config must be a mapping, got {type(override_config).__name__}")
            overrides = {}
            for section, value in override_config.items():
                if section in DefaultLabConfig and isinstance(DefaultLabConfig[section], dict):
                    if value is None:
                        # An empty section keeps its defaults
                        continue
                    if not isinstance(value, dict):
                        raise ConfigError(section, f"must be a mapping, got {type(value).__name__}")
                # Schedule kinds are merged separately
                if section != 'schedule':
                    overrides[section] = value
            unrecognized_settings = copy_override_dict(hdd_config_file, overrides)
        self._set_schedule_config(override_config)

    def set_config(self, fname: Optional[str]):
        override_config = None
        if fname is not None:
            try:
                with open(fname, 'r', encoding='utf-8') as file:
                    override_config = yaml.safe_load(file)
            except OSError as e:
                raise ConfigError("--config", f"cannot read {fname}: {e}")
            except yaml.YAMLError as e:
                raise ConfigError("--config", f"{fname} is not valid YAML/JSON: {e}")
        self.set_config_dict(override_config)

    def reset_config(self):
        self.set_config_dict(None)

    def unrecognized_user_settings(self) -> dict:
        return unrecognized_settings

    def unrecognized_user_settings_as_str(self) -> str:
        return yaml.dump(deepcopy(unrecognized_settings))

    def as_dict(self) -> dict:
        return deepcopy(hdd_config_file)

    def output_dir(self) -> str:
        return hdd_config_file['experiment']['output_dir']

    def set_output_dir(self, output_dir: str):
        hdd_config_file['experiment']['output_dir'] = output_dir

    def log_file(self, fname: Optional[str]=None) -> str:
        if fname is not None:
            # Set it here in case another module wants to create additional logs based on the main log name
            hdd_config_file['experiment']['log_file'] = fname
        return os.path.join(hdd_config_file['experiment']['output_dir'], hdd_config_file['experiment']['log_file'])

    def horizon(self) -> int:
        return hdd_config_file['experiment']['horizon']

    def replications(self) -> int:
        return hdd_config_file['experiment']['replications']

    def set_replications(self, replications: int):
        hdd_config_file['experiment']['replications'] = replications

    def master_seed(self) -> int:
        if hdd_config_file['experiment']['master_seed'] is None:
            # Draw a seed and store it so config.yaml reproduces this run
            hdd_config_file['experiment']['master_seed'] = random.randrange(sys.maxsize)
        return hdd_config_file['experiment']['master_seed']

    def set_master_seed(self, seed: int):
        hdd_config_file['experiment']['master_seed'] = seed

    def schedule_type(self) -> str:
        params = hdd_config_file['schedule']
        for key in DefaultScheduleConfigs:
            if key in params:
                return key
        return 'stationary'

    def schedule_settings(self) -> dict:
        return deepcopy(hdd_config_file['schedule'].get(self.schedule_type(), {}))

    def set_schedule_parameter(self, name: str, value):
        hdd_config_file['schedule'][self.schedule_type()][name] = value

    def verify_settings(self) -> dict:
        return deepcopy(hdd_config_file['verify'])

    def _catalog(self) -> ItemCatalog:
        settings = hdd_config_file['catalog']
        n_items = _positive_int(settings['n_items'], "catalog.n_items")
        capacity = _positive_int(settings['capacity'], "catalog.capacity")
        if capacity > n_items:
            raise ConfigError("catalog.capacity", f"must not exceed catalog.n_items={n_items}, got {capacity}")
        payoffs = settings['payoffs']
        if payoffs is None:
            payoffs = [1.0] * n_items
        try:
            return ItemCatalog(n_items, capacity, payoffs)
        except (DomainError, TypeError, ValueError) as e:
            raise ConfigError("catalog.payoffs", str(e))

    def _master(self) -> MasterSettings:
        settings = hdd_config_file['master']
        return MasterSettings(c1=_positive_real(settings['c1'], "master.c1"),
                              c2=_positive_real(settings['c2'], "master.c2"),
                              enable_test1=_flag(settings['enable_test1'], "master.enable_test1"),
                              enable_test2=_flag(settings['enable_test2'], "master.enable_test2"),
                              force_full_block_only=_flag(settings['force_full_block_only'], "master.force_full_block_only"))

    def validate(self) -> ExperimentConfig:
        """ Check every value and build the immutable experiment description """
        experiment = hdd_config_file['experiment']
        catalog = self._catalog()
        horizon = _positive_int(experiment['horizon'], "experiment.horizon")
        if catalog.n_items * horizon < 3:
            raise ConfigError("experiment.horizon", f"N*T must be at least 3, got {catalog.n_items * horizon}")

        learner = hdd_config_file['learner']
        if learner['type'] not in LEARNER_TYPES:
            raise ConfigError("learner.type", f"must be one of {', '.join(LEARNER_TYPES)}, got {learner['type']!r}")

        kinds = [key for key in hdd_config_file['schedule'] if key in DefaultScheduleConfigs]
        if len(kinds) != 1:
            raise ConfigError("schedule", f"exactly one schedule kind must be given, got {kinds}")
        kind = kinds[0]
        params = self.schedule_settings()
        if kind == 'file':
            path = params.get('path')
            if path is None or not os.path.isfile(path):
                raise ConfigError("schedule.file.path", f"file does not exist: {path!r}")

        seed = self.master_seed()
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError("experiment.master_seed", f"must be a non-negative integer, got {seed!r}")

        return ExperimentConfig(catalog=catalog,
                                schedule=ScheduleSpec(kind, params),
                                learner_type=learner['type'],
                                c_scale=_positive_real(learner['c_scale'], "learner.c_scale"),
                                master=self._master(),
                                horizon=horizon,
                                replications=_positive_int(experiment['replications'], "experiment.replications"),
                                master_seed=seed,
                                workers=_positive_int(experiment['workers'], "experiment.workers"),
                                output_dir=str(experiment['output_dir']),
                                split_out_replication_logs=_flag(experiment['split_out_replication_logs'],
                                                                 "experiment.split_out_replication_logs"))

    def sweep_grid(self) -> tuple[str, list]:
        settings = hdd_config_file['sweep']
        parameter = settings['parameter']
        if parameter not in SWEEP_PARAMETERS:
            raise ConfigError("sweep.parameter", f"must be one of {', '.join(SWEEP_PARAMETERS)}, got {parameter!r}")
        values = settings['values']
        if not isinstance(values, list):
            raise ConfigError("sweep.values", f"must be a list, got {values!r}")
        return parameter, list(values)

    def __str__(self) -> str:
        return yaml.dump(deepcopy(hdd_config_file))
