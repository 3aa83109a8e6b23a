"""Tests for the logging setup and helpers."""

import json
import logging
from pathlib import Path

import pytest

from scripts.utils import logging_system as log


def _read_log() -> str:
    for handler in log.get_logger().handlers:
        handler.flush()
    return Path(log.get_log_file_path()).read_text(encoding='utf-8')


def test_no_file_before_setup():
    assert log.get_log_file_path() is None


def test_setup_is_a_singleton():
    first = log.setup_logging(log_level='DEBUG')
    second = log.setup_logging(log_level='ERROR')
    assert first is second
    assert first.level == logging.DEBUG
    assert first.name == log.ROOT_LOGGER_NAME


def test_log_file_under_log_dir(monkeypatch, tmp_path):
    monkeypatch.setenv('LOG_DIR', str(tmp_path))
    log.setup_logging()
    path = Path(log.get_log_file_path())
    assert path.parent == tmp_path / log.ROOT_LOGGER_NAME
    assert path.name.startswith(f"{log.ROOT_LOGGER_NAME}_")


def test_verbose_mode_uses_category_folders(monkeypatch, tmp_path):
    monkeypatch.setenv('LOG_DIR', str(tmp_path))
    log.setup_logging(module_name='scripts.pricing.training', verbose=True)
    path = Path(log.get_log_file_path())
    assert path.parent == tmp_path / log.ROOT_LOGGER_NAME / 'engines'
    assert path.name.startswith('training_')


def test_module_loggers_reach_the_file():
    log.setup_logging(log_level='DEBUG')
    log.get_logger('scripts.sim.episode').debug("hour 12 simulated")
    log.success("run written")
    text = _read_log()
    assert "forecourt.scripts.sim.episode" in text
    assert "hour 12 simulated" in text
    assert "SUCCESS" in text and "run written" in text


def test_json_format(monkeypatch):
    monkeypatch.setenv('LOG_FORMAT', 'json')
    log.setup_logging()
    log.info("digest abc")
    lines = [json.loads(line) for line in _read_log().splitlines()]
    assert lines[-1]['message'] == "digest abc"
    assert lines[-1]['level'] == 'INFO'


def test_error_points_at_the_log_file(caplog):
    logger = log.setup_logging()
    logger.propagate = True
    with caplog.at_level(logging.ERROR, logger=log.ROOT_LOGGER_NAME):
        log.error("replay failed")
        log.error("quiet failure", include_log_path=False)
    messages = [r.getMessage() for r in caplog.records]
    assert messages[0].startswith("replay failed\nFor more details, check the log file at: ")
    assert messages[1] == "quiet failure"


def test_default_console_shows_success_and_errors_only(capsys):
    log.setup_logging()
    log.info("hidden")
    log.warning("also hidden")
    log.success("shown")
    log.error("broken", include_log_path=False)
    err = capsys.readouterr().err
    assert "hidden" not in err
    assert "SUCCESS: shown" in err
    assert "ERROR: broken" in err


def test_simple_mode_adds_warnings(capsys):
    log.setup_logging(simple_mode=True)
    log.info("hidden")
    log.warning("tank conservation does not hold")
    assert "WARNING: tank conservation does not hold" in capsys.readouterr().err


def test_console_never_writes_stdout(capsys):
    log.setup_logging(verbose=True)
    log.info("to stderr")
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "to stderr" in captured.err


@pytest.mark.parametrize(
    'module, category',
    [
        ('scripts.sim.episode', 'simulation'),
        ('scripts.pricing.qlearning', 'engines'),
        ('scripts.monitor.tank', 'operations'),
        ('scripts.telemetry.wire', 'telemetry'),
        ('scripts.experiments', 'main'),
        ('scripts.simulator', 'main'),
    ],
)
def test_category_mapping(module, category):
    assert log._get_log_category(module) == category


def test_log_time_reraises_and_logs():
    log.setup_logging()

    @log.log_time()
    def explode():
        raise RuntimeError("diverged")

    with pytest.raises(RuntimeError):
        explode()
    assert "explode failed after" in _read_log()


def test_log_execution_time():
    log.setup_logging()
    with log.log_execution_time("bench-pricing"):
        pass
    assert "bench-pricing completed in" in _read_log()


def test_verbose_logger_is_silent_above_debug():
    log.setup_logging(log_level='INFO')
    vlog = log.get_verbose_logger()
    with vlog.step("Pricing benchmark"):
        vlog.metric("Seeds", 10)
    assert "Seeds: 10" not in _read_log()


def test_verbose_logger_tree_at_debug():
    log.setup_logging(log_level='DEBUG')
    vlog = log.get_verbose_logger()
    with vlog.step("Pricing benchmark"):
        vlog.metric("Seeds", 10)
    text = _read_log()
    assert "├─ Pricing benchmark" in text
    assert "  ├─ Seeds: 10" in text
