"""
Breakpoint schedule format shared by the file schedule kind and the instance generators

    { "horizon": T, "n_items": N, "breakpoints": [ { "t": 1, "omega": [...] }, ... ] }

omega is constant between consecutive breakpoints and the first breakpoint is at t=1.
Errors carry the dotted config path of the offending entry.
"""

import json
import numpy as np
from typing import Optional

from ChoiceModelTypes import ParamSchedule, attraction_vector
from LabErrors import ConfigError, DomainError


def parse_anchor(values, n_items: int, field: str) -> np.ndarray:
    """ A length-N vector in [0, 1] """
    try:
        arr = np.array(values, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(field, f"not a vector of reals: {values!r}")
    if arr.shape != (n_items,):
        raise ConfigError(field, f"expected {n_items} values, got shape {arr.shape}")
    try:
        return attraction_vector(arr)
    except DomainError as e:
        raise ConfigError(field, str(e))


def parse_breakpoints(raw, n_items: int, horizon: int, field: str) -> list[tuple[int, np.ndarray]]:
    """ Strictly increasing (t, omega) pairs within [1, T], the first at t=1 """
    if not isinstance(raw, list) or not raw:
        raise ConfigError(field, "must be a non-empty list")
    parsed = []
    previous = 0
    for i, bp in enumerate(raw):
        name = f"{field}[{i}]"
        if not isinstance(bp, dict) or 't' not in bp or 'omega' not in bp:
            raise ConfigError(name, "each breakpoint needs 't' and 'omega'")
        t = bp['t']
        if isinstance(t, bool) or not isinstance(t, int):
            raise ConfigError(name + ".t", f"must be an integer, got {t!r}")
        if i == 0 and t != 1:
            raise ConfigError(name + ".t", f"first breakpoint must be at t=1, got {t}")
        if t <= previous or t > horizon:
            raise ConfigError(name + ".t", f"breakpoints must be strictly increasing within [1, {horizon}], got {t}")
        parsed.append((t, parse_anchor(bp['omega'], n_items, name + ".omega")))
        previous = t
    return parsed


def step_function(breakpoints: list[tuple[int, np.ndarray]], horizon: int) -> np.ndarray:
    """ Right-continuous step function: each anchor holds until the next breakpoint """
    starts = [b[0] for b in breakpoints] + [horizon + 1]
    return np.concatenate([np.tile(anchor, (starts[i+1] - starts[i], 1)) for i, (_, anchor) in enumerate(breakpoints)])


def schedule_breakpoints(schedule: ParamSchedule) -> list[dict]:
    """ One breakpoint per round where omega differs from the previous round """
    values = schedule.values
    changed = np.flatnonzero(np.any(values[1:] != values[:-1], axis=1)) + 2
    rounds = [1] + changed.tolist()
    return [{'t': int(t), 'omega': values[t-1].tolist()} for t in rounds]


def schedule_to_dict(schedule: ParamSchedule, breakpoints: Optional[list[int]]=None) -> dict:
    if breakpoints is None:
        entries = schedule_breakpoints(schedule)
    else:
        entries = [{'t': int(t), 'omega': schedule.omega(t).tolist()} for t in breakpoints]
    return {'horizon': schedule.horizon, 'n_items': schedule.n_items, 'breakpoints': entries}


def schedule_from_dict(data: dict) -> ParamSchedule:
    for key in ('horizon', 'n_items', 'breakpoints'):
        if key not in data:
            raise ConfigError(f"schedule.file.{key}", "missing from schedule file")
    horizon = int(data['horizon'])
    breakpoints = parse_breakpoints(data['breakpoints'], int(data['n_items']), horizon, "schedule.file.breakpoints")
    try:
        return ParamSchedule(step_function(breakpoints, horizon))
    except DomainError as e:
        raise ConfigError("schedule.file.breakpoints", str(e))


def load_schedule_file(path: str) -> ParamSchedule:
    with open(path, 'r', encoding='utf-8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError("schedule.file.path", f"{path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise ConfigError("schedule.file.path", f"{path} must hold a JSON object")
    return schedule_from_dict(data)


def write_schedule_file(schedule: ParamSchedule, path: str, breakpoints: Optional[list[int]]=None):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(schedule_to_dict(schedule, breakpoints), f, indent=2)
        f.write("\n")
