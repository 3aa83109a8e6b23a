"""Exception types shared across the forecourt packages.

Every error subclasses a built-in (``ValueError`` or ``RuntimeError``) so
callers that only know the built-in still catch it, while the CLI can map
each type to its exit code:

    - :class:`ConfigError` and :class:`WireFormatError` are input problems
      (exit code 1).
    - Everything else, including module-specific runtime errors raised by
      the engines, is a runtime failure (exit code 2).

Engine-specific errors (rank deficiency, divergence, governance stage
failures) live next to the code that raises them.
"""

from __future__ import annotations

from typing import Optional

__all__ = ['ConfigError', 'WireFormatError']


class ConfigError(ValueError):
    """A scenario or parameter set violates a documented invariant.

    Attributes:
        message: What is wrong with the value.
        field: Dotted name of the offending key (``station.elasticity_beta``).
        line: 1-based line in the configuration text, when known.
    """

    def __init__(self, message: str, *, field: str, line: Optional[int] = None) -> None:
        self.message = message
        self.field = field
        self.line = line
        location = f" (line {line})" if line is not None else ""
        super().__init__(f"{field}{location}: {message}")


class WireFormatError(ValueError):
    """A telemetry line or event log is not in canonical form.

    Attributes:
        offset: Byte offset of the first offending byte within the line
            (or within the file for log-level errors).
        reason: Short human-readable cause.
        line_number: 1-based line in the log, when the error came from a file.
        seq_pair: ``(previous, current)`` sequence numbers of an out-of-order record.
    """

    def __init__(
        self,
        reason: str,
        *,
        offset: int = 0,
        line_number: Optional[int] = None,
        seq_pair: Optional[tuple[int, int]] = None,
    ) -> None:
        self.offset = offset
        self.reason = reason
        self.line_number = line_number
        self.seq_pair = seq_pair
        where = f"line {line_number}, " if line_number is not None else ""
        super().__init__(f"{where}byte {offset}: {reason}")
