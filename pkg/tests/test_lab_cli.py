import glob
import json
import os
import sys
import pytest
import yaml

import lab
from LabConfig import LabConfig
from VerifySuites import SuiteReport


@pytest.fixture(autouse=True)
def keep_excepthook(monkeypatch):
    monkeypatch.setattr(sys, 'excepthook', sys.excepthook)


def write_config(path, config):
    path.write_text(yaml.dump(config))
    return str(path)


def small_config(tmp_path, **extra):
    config = {'experiment': {'horizon': 100, 'master_seed': 5},
              'catalog': {'n_items': 8, 'capacity': 2}}
    config.update(extra)
    return write_config(tmp_path / "config.yaml", config)


def test_run_writes_artifacts(tmp_path):
    out = tmp_path / "out"
    assert lab.main(['run', '--config', small_config(tmp_path), '--out', str(out), '--reps', '2']) == lab.EXIT_OK
    assert (out / "run_0.csv").exists()
    assert (out / "run_1.csv").exists()
    assert (out / "summary.json").exists()
    assert (out / "lab.log").exists()
    assert yaml.safe_load((out / "config.yaml").read_text())['experiment']['replications'] == 2


def test_seed_flag_is_recorded(tmp_path):
    out = tmp_path / "out"
    lab.main(['run', '--config', small_config(tmp_path), '--out', str(out), '--seed', '77'])
    assert yaml.safe_load((out / "config.yaml").read_text())['experiment']['master_seed'] == 77
    assert json.loads((out / "summary.json").read_text())['master_seed'] == 77


def test_log_file_flag(tmp_path):
    out = tmp_path / "out"
    lab.main(['run', '--config', small_config(tmp_path), '--out', str(out), '-l', 'other.log'])
    lines = (out / "other.log").read_text().splitlines()
    assert any(json.loads(line)['severity'] == "INFO" for line in lines)


def test_invalid_config_exits_with_2(tmp_path, capsys):
    config = small_config(tmp_path, learner={'type': 'psychic'})
    assert lab.main(['run', '--config', config, '--out', str(tmp_path / "out")]) == lab.EXIT_CONFIG
    assert "learner.type" in capsys.readouterr().err


def test_scalar_config_section_exits_with_2(tmp_path, capsys):
    config = write_config(tmp_path / "config.yaml", {'experiment': 5})
    assert lab.main(['run', '--config', config, '--out', str(tmp_path / "out")]) == lab.EXIT_CONFIG
    assert "experiment" in capsys.readouterr().err


def test_missing_config_file_exits_with_2(tmp_path):
    assert lab.main(['run', '--config', str(tmp_path / "nope.yaml"), '--out', str(tmp_path)]) == lab.EXIT_CONFIG


def test_sweep_refusal_exits_with_2(tmp_path, capsys):
    config = small_config(tmp_path, sweep={'parameter': 'horizon', 'values': [50, 100]})
    assert lab.main(['sweep', '--config', config, '--out', str(tmp_path / "out"), '--reps', '10']) == lab.EXIT_CONFIG
    assert "at least 4" in capsys.readouterr().err


def test_gen_instance_writes_schedule_and_metadata(tmp_path):
    out = tmp_path / "out"
    assert lab.main(['gen-instance', '--config', small_config(tmp_path), '--out', str(out),
                     '--kind', 'switching', '--switches', '4']) == lab.EXIT_OK
    meta = json.loads((out / "switching_instance.meta.json").read_text())
    assert meta['L'] == 4
    assert meta['window_length'] == 25
    schedule = json.loads((out / "switching_instance.json").read_text())
    assert schedule['horizon'] == 100


def test_generated_instance_feeds_a_file_schedule(tmp_path):
    out = tmp_path / "out"
    lab.main(['gen-instance', '--config', small_config(tmp_path), '--out', str(out), '--kind', 'variation',
              '--budget', '0.5'])
    config = small_config(tmp_path, schedule={'file': {'path': str(out / "variation_instance.json")}})
    assert lab.main(['run', '--config', config, '--out', str(tmp_path / "run")]) == lab.EXIT_OK


def test_refused_generator_parameters_exit_with_2(tmp_path, capsys):
    config = small_config(tmp_path, catalog={'n_items': 6, 'capacity': 2})
    assert lab.main(['gen-instance', '--config', config, '--out', str(tmp_path / "out")]) == lab.EXIT_CONFIG
    assert "K <= N/4" in capsys.readouterr().err


def test_verify_needs_a_suite(tmp_path):
    assert lab.main(['verify', '--out', str(tmp_path)]) == lab.EXIT_CONFIG


def test_verify_exit_codes(tmp_path, monkeypatch):
    monkeypatch.setattr(lab, 'run_suite', lambda name, settings, seed: SuiteReport(name, True, {'seed': seed}))
    assert lab.main(['verify', '--suite', 'metrics', '--out', str(tmp_path), '--seed', '4']) == lab.EXIT_OK
    report = json.loads((tmp_path / "verify_metrics.json").read_text())
    assert report == {'suite': 'metrics', 'passed': True, 'details': {'seed': 4}}

    monkeypatch.setattr(lab, 'run_suite', lambda name, settings, seed: SuiteReport(name, False, {}))
    assert lab.main(['verify', '--suite', 'optimizer', '--out', str(tmp_path)]) == lab.EXIT_FAILED


def test_shipped_configs_validate(monkeypatch):
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    monkeypatch.chdir(root)
    for path in glob.glob(os.path.join("configs", "*.yaml")) + glob.glob(os.path.join("configs", "*.json")):
        LabConfig().set_config(path)
        LabConfig().validate()
