import json
import numpy as np
import pytest

from ChoiceModelTypes import ParamSchedule
from LabErrors import ConfigError
from ScheduleFiles import load_schedule_file, parse_breakpoints, schedule_breakpoints, schedule_to_dict, write_schedule_file
from Schedules import ScheduleSpec, make_schedule
from Variation import variation_summary

from conftest import two_phase


def test_stationary_with_explicit_omega():
    schedule = make_schedule(ScheduleSpec('stationary', {'omega': [0.3, 0.3]}), 2, 5)
    summary = variation_summary(schedule, 1)
    assert schedule.horizon == 5
    assert summary.switches == 1
    assert summary.var_2k == 0.0


def test_stationary_without_omega_draws_from_the_stream():
    a = make_schedule(ScheduleSpec('stationary', {'omega': None}), 3, 4, rng=np.random.default_rng(1))
    b = make_schedule(ScheduleSpec('stationary', {'omega': None}), 3, 4, rng=np.random.default_rng(1))
    assert a == b
    assert a.is_stationary()
    with pytest.raises(ConfigError):
        make_schedule(ScheduleSpec('stationary', {}), 3, 4)


def test_piecewise_holds_each_anchor_until_the_next_breakpoint():
    spec = ScheduleSpec('piecewise', {'breakpoints': [{'t': 1, 'omega': [0.1, 0.2]}, {'t': 4, 'omega': [0.9, 0.2]}]})
    schedule = make_schedule(spec, 2, 6)
    assert schedule.omega(3).tolist() == [0.1, 0.2]
    assert schedule.omega(4).tolist() == [0.9, 0.2]
    assert schedule.omega(6).tolist() == [0.9, 0.2]


@pytest.mark.parametrize("breakpoints, field", [
    ([{'t': 2, 'omega': [0.1]}], "schedule.piecewise.breakpoints[0].t"),
    ([{'t': 1, 'omega': [0.1]}, {'t': 1, 'omega': [0.2]}], "schedule.piecewise.breakpoints[1].t"),
    ([{'t': 1, 'omega': [1.5]}], "schedule.piecewise.breakpoints[0].omega"),
    ([{'t': 1, 'omega': [0.1, 0.2]}], "schedule.piecewise.breakpoints[0].omega"),
    ([{'omega': [0.1]}], "schedule.piecewise.breakpoints[0]"),
    ([], "schedule.piecewise.breakpoints"),
])
def test_piecewise_errors_name_the_offending_field(breakpoints, field):
    with pytest.raises(ConfigError) as e:
        make_schedule(ScheduleSpec('piecewise', {'breakpoints': breakpoints}), 1, 10)
    assert e.value.field == field


def test_drift_variation_telescopes():
    schedule = make_schedule(ScheduleSpec('drift', {'start': [0.0] * 4, 'end': [1.0] * 4}), 4, 101)
    assert schedule.omega(1).tolist() == [0.0] * 4
    assert schedule.omega(101).tolist() == [1.0] * 4
    assert variation_summary(schedule, 2).var_2k == pytest.approx(4.0)


def test_drift_with_single_round():
    schedule = make_schedule(ScheduleSpec('drift', {'start': [0.2], 'end': [0.8]}), 1, 1)
    assert schedule.values.tolist() == [[0.2]]


def test_unknown_kind_is_a_config_error():
    with pytest.raises(ConfigError):
        make_schedule(ScheduleSpec('sinusoid', {}), 2, 10)


def test_breakpoints_only_where_omega_changes():
    schedule = two_phase([0.1, 0.2], [0.3, 0.2], horizon=8, switch_at=5)
    assert [bp['t'] for bp in schedule_breakpoints(schedule)] == [1, 5]
    assert schedule_to_dict(schedule)['horizon'] == 8


def test_file_schedule_reproduces_the_written_schedule(tmp_path, rng):
    schedule = ParamSchedule(np.repeat(rng.random((4, 3)), 5, axis=0))
    path = str(tmp_path / "schedule.json")
    write_schedule_file(schedule, path)
    assert load_schedule_file(path) == schedule
    assert make_schedule(ScheduleSpec('file', {'path': path}), 3, 20) == schedule


def test_file_schedule_must_match_the_experiment(tmp_path):
    path = str(tmp_path / "schedule.json")
    write_schedule_file(two_phase([0.1, 0.2], [0.3, 0.4], horizon=6, switch_at=3), path)
    with pytest.raises(ConfigError):
        make_schedule(ScheduleSpec('file', {'path': path}), 2, 7)
    with pytest.raises(ConfigError):
        make_schedule(ScheduleSpec('file', {'path': path}), 3, 6)


def test_malformed_schedule_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{ not json")
    with pytest.raises(ConfigError):
        load_schedule_file(str(path))
    path.write_text(json.dumps({'horizon': 3, 'n_items': 1}))
    with pytest.raises(ConfigError):
        load_schedule_file(str(path))


def test_schedule_file_must_hold_an_object(tmp_path):
    path = tmp_path / "list.json"
    path.write_text(json.dumps([{'t': 1, 'omega': [0.5]}]))
    with pytest.raises(ConfigError) as e:
        load_schedule_file(str(path))
    assert e.value.field == "schedule.file.path"


def test_breakpoint_errors_use_the_given_field_prefix():
    with pytest.raises(ConfigError) as e:
        parse_breakpoints([{'t': 1, 'omega': [0.5, 2.0]}], 2, 10, "schedule.file.breakpoints")
    assert e.value.field == "schedule.file.breakpoints[0].omega"


def test_switching_kind_builds_a_generator_instance():
    schedule = make_schedule(ScheduleSpec('switching', {'switches': 4}), 8, 100, k_cap=2, rng=np.random.default_rng(5))
    assert variation_summary(schedule, 2).switches <= 4
