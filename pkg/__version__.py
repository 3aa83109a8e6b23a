"""forecourt version information.

The version follows SemVer 2.0.0 (MAJOR.MINOR.PATCH) and is used for the
CLI ``--version`` output and the Sphinx documentation. The event log
carries its own ``format_version``; bump it in
:mod:`scripts.telemetry.wire`, not here, when the wire format changes.

Module Attributes:
    __version__ (str): The canonical version string.
    __version_info__ (tuple[int, int, int]): Derived version tuple for
        comparisons.

Example:
    >>> from __version__ import __version_info__
    >>> __version_info__ >= (0, 1, 0)
    True

Raises:
    ValueError: At import time if ``__version__`` is not MAJOR.MINOR.PATCH.
"""

import re

__version__: str = "0.1.0"
"""Canonical version string (MAJOR.MINOR.PATCH)."""

if not re.match(r'^\d+\.\d+\.\d+$', __version__):
    raise ValueError(
        f"Invalid version format: {__version__}. "
        f"Must follow semantic versioning: MAJOR.MINOR.PATCH"
    )

__version_info__: tuple[int, int, int] = tuple(map(int, __version__.split('.')))
"""Version tuple parsed from ``__version__``."""

__all__ = ['__version__', '__version_info__']
