import pytest

from LabConfig import DefaultLabConfig
from VerifySuites import SUITE_NAMES, run_suite

SMALL = dict(DefaultLabConfig['verify'],
             samplers_cases=5, samplers_draws=2000,
             optimizer_instances=30, monotonicity_trials=200,
             sandwich_samples=10_000, sandwich_schedules=2,
             concentration_reps=20,
             epoch_length_seeds=2, epoch_length_horizon=1000,
             conditions_seeds=2, conditions_horizon=200,
             metrics_schedules=50, metrics_pairs=200, normalization_draws=500)


@pytest.mark.slow
@pytest.mark.parametrize("name", SUITE_NAMES)
def test_suites_pass_at_small_sizes(name):
    report = run_suite(name, SMALL, master_seed=2024)
    assert report.suite == name
    assert report.passed, report.details


def test_suite_reports_carry_their_thresholds():
    details = run_suite('samplers', SMALL, master_seed=1).to_dict()['details']
    assert details['significance'] == SMALL['confidence']
    assert details['max_rejections'] == 2


def test_epoch_length_control_fails_as_expected():
    details = run_suite('epoch_length', SMALL, master_seed=3).details
    assert details['control_violations'] > 0
    assert all(run['violations'] == 0 for run in details['runs'])


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite('everything', SMALL, master_seed=0)
