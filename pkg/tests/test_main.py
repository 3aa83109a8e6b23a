"""Tests for the command-line entry point."""

import json

import pytest

import config
import main
from scripts.errors import ConfigError, WireFormatError


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / 'scenario.json'
    path.write_text(json.dumps({'seed': 3, 'horizon_days': 2, 'pricing': {'policy': 'fixed_margin'}}))
    return path


def _simulate(scenario_file, out):
    return main.main(['simulate', '--config', str(scenario_file), '--out', str(out)])


@pytest.mark.parametrize(
    'exc, code',
    [
        (ConfigError("bad", field='seed'), 1),
        (WireFormatError("bad"), 1),
        (FileNotFoundError("x"), 1),
        (RuntimeError("boom"), 2),
        (ValueError("plain"), 2),
    ],
)
def test_exit_codes(exc, code):
    assert main.exit_code_for(exc) == code


def test_run_step_exits_with_mapped_code():
    def fail():
        raise ConfigError("bad", field='seed')

    with pytest.raises(SystemExit) as excinfo:
        main.run_step("failing step", fail)
    assert excinfo.value.code == config.EXIT_INPUT_ERROR


def test_run_step_false_is_a_runtime_failure():
    with pytest.raises(SystemExit) as excinfo:
        main.run_step("falsy step", lambda: False)
    assert excinfo.value.code == config.EXIT_RUNTIME_ERROR


def test_simulate_replay_report(tmp_path, scenario_file, capsys):
    run_dir = tmp_path / 'run'
    assert _simulate(scenario_file, run_dir) == config.EXIT_OK
    assert (run_dir / config.EVENTS_FILE).exists()
    assert (run_dir / config.KPI_FILE).exists()
    assert any((run_dir / config.FRAMES_DIR).glob('*.vib'))

    replay_dir = tmp_path / 'replay'
    assert main.main(['replay', '--log', str(run_dir / config.EVENTS_FILE), '--out', str(replay_dir)]) == 0
    assert (replay_dir / config.KPI_FILE).read_bytes() == (run_dir / config.KPI_FILE).read_bytes()

    capsys.readouterr()
    assert main.main(['report', '--run', str(run_dir)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split()[0] == 'period_start'
    assert len(lines) == 3


def test_tampered_log_fails_replay(tmp_path, scenario_file):
    run_dir = tmp_path / 'run'
    _simulate(scenario_file, run_dir)
    log_path = run_dir / config.EVENTS_FILE
    data = log_path.read_bytes()
    log_path.write_bytes(data.replace(b'"stockouts":', b'"stockouts":9', 1))
    with pytest.raises(SystemExit) as excinfo:
        main.main(['replay', '--log', str(log_path), '--out', str(tmp_path / 'replay')])
    assert excinfo.value.code == config.EXIT_RUNTIME_ERROR


def test_malformed_log(tmp_path):
    log_path = tmp_path / config.EVENTS_FILE
    log_path.write_bytes(b'not a log\n')
    with pytest.raises(SystemExit) as excinfo:
        main.main(['replay', '--log', str(log_path), '--out', str(tmp_path / 'out')])
    assert excinfo.value.code == config.EXIT_INPUT_ERROR


def test_invalid_scenario(tmp_path):
    path = tmp_path / 'scenario.json'
    path.write_text('{"station": {"elasticity_beta": -1}}')
    with pytest.raises(SystemExit) as excinfo:
        main.main(['simulate', '--config', str(path), '--out', str(tmp_path / 'out')])
    assert excinfo.value.code == config.EXIT_INPUT_ERROR


def test_missing_scenario(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        main.main(['simulate', '--config', str(tmp_path / 'nope.json'), '--out', str(tmp_path / 'out')])
    assert excinfo.value.code == config.EXIT_INPUT_ERROR


def test_report_of_missing_run(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        main.main(['report', '--run', str(tmp_path / 'nope')])
    assert excinfo.value.code == config.EXIT_INPUT_ERROR


def test_bad_arguments():
    assert main.main([]) == config.EXIT_INPUT_ERROR
    assert main.main(['simulate']) == config.EXIT_INPUT_ERROR
    assert main.main(['simulate', '--out', 'x', '--policy', 'surge']) == config.EXIT_INPUT_ERROR


def test_version(capsys):
    assert main.main(['--version']) == config.EXIT_OK
    assert capsys.readouterr().out.strip().startswith('forecourt ')
