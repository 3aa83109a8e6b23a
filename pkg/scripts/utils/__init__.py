"""Cross-cutting utilities for forecourt.

Currently the centralized logging system (:mod:`.logging_system`). Modules
import it as a namespace::

    from scripts.utils import logging_system as log

    logger = log.get_logger(__name__)
"""

from .logging_system import (
    SUCCESS,
    get_log_file_path,
    get_logger,
    get_verbose_logger,
    reset_logging,
    setup_logging,
)

__all__ = [
    'SUCCESS',
    'get_log_file_path',
    'get_logger',
    'get_verbose_logger',
    'reset_logging',
    'setup_logging',
]
