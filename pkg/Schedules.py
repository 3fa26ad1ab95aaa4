"""
Builders that turn a schedule description into a full parameter trajectory omega(1..T)

Each builder class handles one kind and is selected by its TYPE_NAME. Adding a kind means
writing a child of ScheduleBuilder and adding it to make_schedule.

The file kind reads the breakpoint format of ScheduleFiles.
"""

from dataclasses import dataclass, field
import numpy as np
from typing import Optional

import AdversaryGen
from ChoiceModelTypes import ParamSchedule
from LabErrors import ConfigError
from ScheduleFiles import load_schedule_file, parse_anchor, parse_breakpoints, step_function


@dataclass(frozen=True)
class ScheduleSpec:
    kind: str
    params: dict = field(default_factory=dict)


class ScheduleBuilder:
    """ Base builder, never selected directly """
    TYPE_NAME = "base"

    def __init__(self, params: dict, n_items: int, horizon: int, k_cap: Optional[int]=None):
        self.params = params if params is not None else {}
        self.n_items = n_items
        self.horizon = horizon
        self.k_cap = k_cap

    def _field(self, name: str) -> str:
        return f"schedule.{self.TYPE_NAME}.{name}"

    def _require(self, name: str):
        if self.params.get(name) is None:
            raise ConfigError(self._field(name), "required")
        return self.params[name]

    def _anchor(self, values, name: str) -> np.ndarray:
        return parse_anchor(values, self.n_items, self._field(name))

    def build(self, rng: Optional[np.random.Generator]=None) -> ParamSchedule:
        raise NotImplementedError("Schedule builders must implement build")


class StationarySchedule(ScheduleBuilder):
    """ omega(t) = omega for every round. Without an omega, draw one uniformly in [0, 1]^N. """
    TYPE_NAME = "stationary"

    def build(self, rng: Optional[np.random.Generator]=None) -> ParamSchedule:
        omega = self.params.get('omega')
        if omega is None:
            if rng is None:
                raise ConfigError(self._field('omega'), "required when no random stream is available")
            anchor = rng.random(self.n_items)
        else:
            anchor = self._anchor(omega, 'omega')
        return ParamSchedule(np.tile(anchor, (self.horizon, 1)))


class PiecewiseSchedule(ScheduleBuilder):
    """ Step function with anchors at strictly increasing breakpoints, the first at t=1 """
    TYPE_NAME = "piecewise"

    def breakpoints(self) -> list[tuple[int, np.ndarray]]:
        return parse_breakpoints(self._require('breakpoints'), self.n_items, self.horizon, self._field('breakpoints'))

    def build(self, rng: Optional[np.random.Generator]=None) -> ParamSchedule:
        return ParamSchedule(step_function(self.breakpoints(), self.horizon))


class DriftSchedule(ScheduleBuilder):
    """ Per-round linear interpolation from `start` (t=1) to `end` (t=T), clamped to [0, 1] """
    TYPE_NAME = "drift"

    def build(self, rng: Optional[np.random.Generator]=None) -> ParamSchedule:
        start = self._anchor(self._require('start'), 'start')
        end = self._anchor(self._require('end'), 'end')
        if self.horizon == 1:
            return ParamSchedule(start[np.newaxis, :])
        frac = np.arange(self.horizon, dtype=float)[:, np.newaxis] / (self.horizon - 1)
        return ParamSchedule(np.clip(start + frac * (end - start), 0.0, 1.0))


class FileSchedule(ScheduleBuilder):
    """ Breakpoint JSON file, e.g. emitted by the adversarial instance generators """
    TYPE_NAME = "file"

    def build(self, rng: Optional[np.random.Generator]=None) -> ParamSchedule:
        path = self._require('path')
        try:
            schedule = load_schedule_file(path)
        except OSError as e:
            raise ConfigError(self._field('path'), f"cannot read {path}: {e}")
        if schedule.n_items != self.n_items:
            raise ConfigError(self._field('path'), f"file has {schedule.n_items} items, catalog has {self.n_items}")
        if schedule.horizon != self.horizon:
            raise ConfigError(self._field('path'), f"file horizon {schedule.horizon} differs from experiment horizon {self.horizon}")
        return schedule


class SwitchingSchedule(ScheduleBuilder):
    """ Lower-bound instance with at most L switches (random good subset per window) """
    TYPE_NAME = "switching"

    def build(self, rng: Optional[np.random.Generator]=None) -> ParamSchedule:
        switches = self._require('switches')
        seed = int(rng.integers(2**63)) if rng is not None else 0
        return AdversaryGen.gen_switching_instance(self.n_items, self.k_cap, self.horizon, int(switches), seed).schedule


class VariationSchedule(ScheduleBuilder):
    """ Lower-bound instance with variation budget Delta """
    TYPE_NAME = "variation"

    def build(self, rng: Optional[np.random.Generator]=None) -> ParamSchedule:
        budget = self._require('budget')
        seed = int(rng.integers(2**63)) if rng is not None else 0
        return AdversaryGen.gen_variation_instance(self.n_items, self.k_cap, self.horizon, float(budget), seed).schedule


def make_schedule(spec: ScheduleSpec, n_items: int, horizon: int, k_cap: Optional[int]=None,
                  rng: Optional[np.random.Generator]=None) -> ParamSchedule:
    """ Call the correct builder for the schedule kind """
    if horizon < 1:
        raise ConfigError("experiment.horizon", f"must be positive, got {horizon}")
    if spec.kind == StationarySchedule.TYPE_NAME:
        builder = StationarySchedule(spec.params, n_items, horizon, k_cap)
    elif spec.kind == PiecewiseSchedule.TYPE_NAME:
        builder = PiecewiseSchedule(spec.params, n_items, horizon, k_cap)
    elif spec.kind == DriftSchedule.TYPE_NAME:
        builder = DriftSchedule(spec.params, n_items, horizon, k_cap)
    elif spec.kind == FileSchedule.TYPE_NAME:
        builder = FileSchedule(spec.params, n_items, horizon, k_cap)
    elif spec.kind == SwitchingSchedule.TYPE_NAME:
        builder = SwitchingSchedule(spec.params, n_items, horizon, k_cap)
    elif spec.kind == VariationSchedule.TYPE_NAME:
        builder = VariationSchedule(spec.params, n_items, horizon, k_cap)
    else:
        raise ConfigError("schedule", f"Unrecognized schedule kind: {spec.kind}")
    return builder.build(rng)

