"""Centralized logging for forecourt.

Features:
- Custom SUCCESS log level (25, between INFO and WARNING)
- Thread-safe singleton initialization of the ``forecourt`` logger
- Log files organized by module category (simulation, engines, operations,
  telemetry, main) in verbose mode
- Log rotation and optional JSON output for log shippers
- Convenience functions (debug, info, success, error, ...)
- Timing decorator and context manager
- VerboseLogger for tree-view DEBUG output of experiment summaries

Library modules only *declare* loggers (``logger = get_logger(__name__)``);
handlers and the log file are created by :func:`setup_logging`, which the
CLI calls once at startup. Importing a module never creates files.

Configuration is read from environment variables when the matching
argument is not given:
    - LOG_LEVEL: DEBUG, INFO, WARNING, ERROR or CRITICAL
    - LOG_VERBOSE: 'true' for category folders and module-named files
    - LOG_FORMAT: 'json' for JSON lines
    - LOG_DIR: base directory (default: ``config.LOGS_DIR``)

Console output goes to stderr; stdout is reserved for command output such
as ``report``.

Example:
    Entry point::

        from scripts.utils import logging_system as log

        log.setup_logging(module_name='__main__', log_level='INFO')
        log.info("Simulating 90 days")
        log.success("Run written to out/run-1")

    Library module::

        logger = log.get_logger(__name__)
        logger.debug("trained %d episodes", n)
"""

import functools
import json
import logging
import logging.handlers
import os
import sys
import threading
import time
import types
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Optional

import config

__all__ = [
    # Logging setup
    'setup_logging',
    'reset_logging',
    'get_logger',
    'get_log_file_path',
    'get_verbose_logger',

    # Convenience functions
    'debug',
    'info',
    'warning',
    'error',
    'critical',
    'success',
    'exception',

    # Decorators and context managers
    'log_time',
    'log_execution_time',

    # Constants
    'SUCCESS',
    'ROOT_LOGGER_NAME',
    'MODULE_CATEGORY_MAP',

    # Classes
    'VerboseLogger',
    'CustomFormatter',
    'JSONFormatter',
]

# Custom SUCCESS level
SUCCESS = 25
logging.addLevelName(SUCCESS, "SUCCESS")

ROOT_LOGGER_NAME = 'forecourt'

# Global configuration
_logger: Optional[logging.Logger] = None
_log_file_path: Optional[str] = None
_logger_lock = threading.Lock()

# Module to category mapping; submodules match by prefix
MODULE_CATEGORY_MAP = {
    # Station simulation
    'scripts.sim': 'simulation',

    # Learning engines
    'scripts.pricing': 'engines',
    'scripts.forecast': 'engines',
    'scripts.recommender': 'engines',

    # Monitoring and governance
    'scripts.monitor': 'operations',
    'scripts.governance': 'operations',

    # Event log
    'scripts.telemetry': 'telemetry',

    # Main application
    'scripts.scenario': 'main',
    'scripts.experiments': 'main',
    '__main__': 'main',
    'main': 'main',
}


class CustomFormatter(logging.Formatter):
    """Formatter that names the SUCCESS level.

    Example:
        >>> formatter = CustomFormatter('%(levelname)s: %(message)s')
        >>> record = logging.LogRecord("t", SUCCESS, "", 0, "Done", (), None)
        >>> formatter.format(record)
        'SUCCESS: Done'
    """

    def format(self, record: logging.LogRecord) -> str:
        if record.levelno == SUCCESS:
            record.levelname = "SUCCESS"
        return super().format(record)


class JSONFormatter(logging.Formatter):
    """One JSON object per record, for log aggregation tools.

    Fields: timestamp, level, logger, module, function, line, message,
    thread_name, process_id and, when present, exception.
    """

    def format(self, record: logging.LogRecord) -> str:
        log_data = {
            'timestamp': datetime.fromtimestamp(record.created).isoformat(),
            'level': record.levelname,
            'logger': record.name,
            'module': record.module,
            'function': record.funcName,
            'line': record.lineno,
            'message': record.getMessage(),
            'thread_name': record.threadName,
            'process_id': record.process,
        }

        if record.exc_info:
            log_data['exception'] = self.formatException(record.exc_info)

        return json.dumps(log_data)


def _get_log_category(module_name: str) -> str:
    """Map a module name to its log folder, defaulting to ``main``.

    Example:
        >>> _get_log_category('scripts.pricing.qlearning')
        'engines'
        >>> _get_log_category('somewhere.else')
        'main'
    """
    if module_name in MODULE_CATEGORY_MAP:
        return MODULE_CATEGORY_MAP[module_name]

    for prefix, category in MODULE_CATEGORY_MAP.items():
        if module_name.startswith(prefix + '.'):
            return category

    return 'main'


def _get_log_directory(category: str, base_dir: Optional[Path] = None, use_category: bool = True) -> Path:
    """Return (and create) the directory log files are written to."""
    if base_dir is None:
        base_dir = Path(os.getenv('LOG_DIR') or config.LOGS_DIR)

    log_dir = base_dir / ROOT_LOGGER_NAME
    if use_category:
        log_dir = log_dir / category

    log_dir.mkdir(parents=True, exist_ok=True)
    return log_dir


def setup_logging(
    module_name: str = '__main__',
    log_level: Optional[str] = None,
    simple_mode: bool = False,
    verbose: bool = False,
    json_format: bool = False,
    max_bytes: int = 10 * 1024 * 1024,  # 10MB
    backup_count: int = 10
) -> logging.Logger:
    """Initialize the singleton ``forecourt`` logger.

    Subsequent calls return the existing logger unchanged; call
    :func:`reset_logging` first to reconfigure.

    Console Output Filtering:
        - Default mode: SUCCESS, ERROR and CRITICAL
        - Simple mode: SUCCESS, WARNING, ERROR and CRITICAL
        - Verbose mode: everything at or above ``log_level``

    Args:
        module_name: Module used for category mapping and, in verbose
            mode, the log file name.
        log_level: Level name. Defaults to ``LOG_LEVEL`` or INFO.
        simple_mode: Show warnings on the console too.
        verbose: Category folders, module-named files and a full console.
            Also enabled by ``LOG_VERBOSE=true``.
        json_format: JSON file output. Also enabled by ``LOG_FORMAT=json``.
        max_bytes: Rotation threshold of the log file.
        backup_count: Rotated files kept.

    Returns:
        The configured ``forecourt`` logger.

    Raises:
        OSError: If the log directory cannot be created.
    """
    global _logger, _log_file_path

    if _logger is not None:
        return _logger

    with _logger_lock:
        if _logger is not None:
            return _logger

        if log_level is None:
            log_level = os.getenv('LOG_LEVEL', 'INFO')
        numeric_level = getattr(logging, log_level.upper(), logging.INFO)

        if not verbose:
            verbose = os.getenv('LOG_VERBOSE', '').lower() == 'true'
        if not json_format:
            json_format = os.getenv('LOG_FORMAT', '').lower() == 'json'

        logger = logging.getLogger(ROOT_LOGGER_NAME)
        logger.setLevel(numeric_level)
        logger.handlers.clear()
        logger.propagate = False

        category = _get_log_category(module_name)
        log_dir = _get_log_directory(category, use_category=verbose)

        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        if verbose and module_name != '__main__':
            log_file = log_dir / f"{module_name.split('.')[-1]}_{timestamp}.log"
        else:
            log_file = log_dir / f"{ROOT_LOGGER_NAME}_{timestamp}.log"

        file_handler = logging.handlers.RotatingFileHandler(
            log_file,
            maxBytes=max_bytes,
            backupCount=backup_count,
            encoding='utf-8'
        )
        file_handler.setLevel(numeric_level)

        if json_format:
            file_handler.setFormatter(JSONFormatter())
        elif numeric_level == logging.DEBUG:
            file_handler.setFormatter(CustomFormatter(
                '%(asctime)s - [PID:%(process)d] - %(name)s - %(levelname)s - '
                '[%(filename)s:%(lineno)d:%(funcName)s] - %(message)s'
            ))
        else:
            file_handler.setFormatter(CustomFormatter(
                '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
            ))

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(CustomFormatter('%(levelname)s: %(message)s'))
        if verbose:
            console_handler.setLevel(numeric_level)
        elif simple_mode:
            console_handler.setLevel(SUCCESS)

            class SimpleFilter(logging.Filter):
                """Allow SUCCESS, WARNING, ERROR and CRITICAL."""
                def filter(self, record: logging.LogRecord) -> bool:
                    return record.levelno == SUCCESS or record.levelno >= logging.WARNING

            console_handler.addFilter(SimpleFilter())
        else:
            console_handler.setLevel(SUCCESS)

            class SuccessOrErrorFilter(logging.Filter):
                """Allow SUCCESS, ERROR and CRITICAL."""
                def filter(self, record: logging.LogRecord) -> bool:
                    return record.levelno == SUCCESS or record.levelno >= logging.ERROR

            console_handler.addFilter(SuccessOrErrorFilter())

        logger.addHandler(file_handler)
        logger.addHandler(console_handler)

        _logger = logger
        _log_file_path = str(log_file)

        mode = "verbose" if verbose else "default"
        logger.info(f"Logging initialized. Mode: {mode}, Category: {category}, Log file: {log_file}")
        return logger


def reset_logging() -> None:
    """Close and detach all handlers so the next setup starts fresh.

    Mainly for tests.
    """
    global _logger, _log_file_path

    with _logger_lock:
        if _logger is not None:
            for handler in _logger.handlers[:]:
                handler.close()
                _logger.removeHandler(handler)
        _logger = None
        _log_file_path = None


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """Return the ``forecourt`` logger or its child ``forecourt.{name}``.

    Without a name the root logger is initialized on first use. Named
    loggers are plain children: records reach the handlers once
    :func:`setup_logging` has run and are dropped by the logging module's
    last-resort handler below WARNING otherwise.
    """
    if name is None:
        return _logger if _logger is not None else setup_logging()
    return logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}")


def get_log_file_path() -> Optional[str]:
    """Path of the current log file, or ``None`` before setup."""
    return _log_file_path


def _append_log_path(msg: str, include_log_path: bool) -> str:
    if include_log_path and _log_file_path:
        return f"{msg}\nFor more details, check the log file at: {_log_file_path}"
    return msg


# ============================================================================
# Convenience functions
# ============================================================================

def debug(msg: str, *args: Any, **kwargs: Any) -> None:
    """Log a DEBUG message on the root logger."""
    get_logger().debug(msg, *args, **kwargs)


def info(msg: str, *args: Any, **kwargs: Any) -> None:
    """Log an INFO message on the root logger."""
    get_logger().info(msg, *args, **kwargs)


def warning(msg: str, *args: Any, include_log_path: bool = False, **kwargs: Any) -> None:
    """Log a WARNING message, optionally pointing at the log file."""
    get_logger().warning(_append_log_path(msg, include_log_path), *args, **kwargs)


def error(msg: str, *args: Any, include_log_path: bool = True, **kwargs: Any) -> None:
    """Log an ERROR message; by default the log file path is appended.

    Example:
        >>> error("Replay disagrees with the embedded KPIs")  # doctest: +SKIP
        ERROR: Replay disagrees with the embedded KPIs
        For more details, check the log file at: .logs/forecourt/forecourt_20261017_101500.log
    """
    get_logger().error(_append_log_path(msg, include_log_path), *args, **kwargs)


def critical(msg: str, *args: Any, include_log_path: bool = True, **kwargs: Any) -> None:
    get_logger().critical(_append_log_path(msg, include_log_path), *args, **kwargs)


def success(msg: str, *args: Any, **kwargs: Any) -> None:
    """Log at SUCCESS level; shown on the console in every mode."""
    get_logger().log(SUCCESS, msg, *args, **kwargs)


def exception(msg: str, *args: Any, include_log_path: bool = True, **kwargs: Any) -> None:
    """Log an ERROR with the active traceback. Call from an ``except`` block."""
    get_logger().exception(_append_log_path(msg, include_log_path), *args, **kwargs)


def _success_method(self: logging.Logger, msg: str, *args: Any, **kwargs: Any) -> None:
    if self.isEnabledFor(SUCCESS):
        self._log(SUCCESS, msg, args, **kwargs)


# Every logger gets .success()
logging.Logger.success = _success_method  # type: ignore[attr-defined]


# ============================================================================
# Timing
# ============================================================================

def log_time(logger_name: Optional[str] = None, level: int = logging.INFO):
    """Decorator logging how long the wrapped function took.

    Failures are logged at ERROR with their elapsed time and re-raised.

    Example:
        >>> @log_time(level=logging.DEBUG)
        ... def train(scenario):
        ...     ...
    """
    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            logger = get_logger(logger_name or func.__module__)
            start_time = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                elapsed = time.perf_counter() - start_time
                logger.error(f"{func.__name__} failed after {elapsed:.2f}s: {e}")
                raise
            elapsed = time.perf_counter() - start_time
            logger.log(level, f"{func.__name__} completed in {elapsed:.2f}s")
            return result
        return wrapper
    return decorator


@contextmanager
def log_execution_time(operation_name: str, logger_name: Optional[str] = None):
    """Context manager logging the duration of a block.

    Example:
        >>> with log_execution_time("bench-pricing"):  # doctest: +SKIP
        ...     frame = bench_pricing(scenario, seeds, table=table)
    """
    logger = get_logger(logger_name)
    start_time = time.perf_counter()
    try:
        yield
    except Exception as e:
        elapsed = time.perf_counter() - start_time
        logger.error(f"{operation_name} failed after {elapsed:.2f}s: {e}")
        raise
    elapsed = time.perf_counter() - start_time
    logger.info(f"{operation_name} completed in {elapsed:.2f}s")


# ============================================================================
# Verbose Logging
# ============================================================================

class VerboseLogger:
    """Tree-view DEBUG output, silent unless the logger is at DEBUG.

    Example:
        >>> vlog = get_verbose_logger()
        >>> with vlog.step("bench-pricing"):
        ...     vlog.metric("Seeds", 10)
        ...     vlog.timing("Evaluation", 12.5)
        # ├─ bench-pricing
        #   ├─ Seeds: 10
        #   ├─ ⏱ Evaluation: 12.50s
    """

    def __init__(self, logger_module: types.ModuleType) -> None:
        self.log = logger_module
        self._indent = 0

    def __call__(self, message: str) -> None:
        if self._is_verbose():
            self.log.debug(message)

    def _is_verbose(self) -> bool:
        # Safe before setup: never initializes logging itself
        if _logger is None:
            return False
        return _logger.level == logging.DEBUG

    def _log_tree(self, prefix: str, message: str) -> None:
        if self._is_verbose():
            indent = "  " * self._indent
            self.log.debug(f"{indent}{prefix}{message}")

    class _ContextManager:
        """Indents everything logged inside the block."""

        def __init__(self, vlog: 'VerboseLogger', prefix: str, header: str, footer: Optional[str] = None):
            self.vlog = vlog
            self.prefix = prefix
            self.header = header
            self.footer = footer

        def __enter__(self):
            self.vlog._log_tree(self.prefix, self.header)
            self.vlog._indent += 1
            return self

        def __exit__(self, *args):
            self.vlog._indent -= 1
            if self.footer:
                self.vlog._log_tree("└─ ", self.footer)

    def step(self, step_name: str, footer: Optional[str] = None):
        """Context manager for one step of a command."""
        return self._ContextManager(self, "├─ ", step_name, footer)

    def detail(self, message: str) -> None:
        self._log_tree("│  ", message)

    def metric(self, label: str, value: Any) -> None:
        """Log ``label: value`` at the current depth."""
        self._log_tree("├─ ", f"{label}: {value}")

    def timing(self, operation: str, seconds: float) -> None:
        self._log_tree("├─ ", f"⏱ {operation}: {seconds:.2f}s")


def get_verbose_logger() -> VerboseLogger:
    """Return a VerboseLogger bound to this module."""
    return VerboseLogger(sys.modules[__name__])
