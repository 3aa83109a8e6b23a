"""Alerts raised by the station monitors.

Every alert carries the estimated service cost of its kind from a fixed
cost table, so maintenance scheduling and KPI reports never have to look
the cost up again.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

__all__ = ['AlertKind', 'Severity', 'Alert', 'ALERT_COST_CENTS', 'make_alert']


class AlertKind(str, Enum):
    LEAK = 'leak'
    VIBRATION_FAULT = 'vibration_fault'
    BATTERY = 'battery'
    TIRE = 'tire'
    FRAUD = 'fraud'


class Severity(str, Enum):
    ADVISORY = 'advisory'
    URGENT = 'urgent'


ALERT_COST_CENTS: dict[AlertKind, int] = {
    AlertKind.LEAK: 250_000,
    AlertKind.VIBRATION_FAULT: 40_000,
    AlertKind.BATTERY: 18_000,
    AlertKind.TIRE: 2_500,
    AlertKind.FRAUD: 0,
}
"""Estimated service cost per alert kind, in cents."""


@dataclass(frozen=True)
class Alert:
    """A monitor finding.

    Attributes:
        asset_id: Asset the alert is about (``tank-1``, ``dispenser-2``, ``vehicle-17``).
        kind: What was detected.
        severity: ``advisory`` or ``urgent``.
        timestamp: Simulation hour the evidence belongs to.
        detail: Short human-readable ASCII explanation.
        estimated_cost_cents: Service cost from :data:`ALERT_COST_CENTS`.
    """

    asset_id: str
    kind: AlertKind
    severity: Severity
    timestamp: int
    detail: str
    estimated_cost_cents: int

    @property
    def estimated_cost(self) -> float:
        return self.estimated_cost_cents / 100.0

    @property
    def is_urgent(self) -> bool:
        return self.severity is Severity.URGENT


def make_alert(kind: AlertKind, asset_id: str, severity: Severity, timestamp: int, detail: str) -> Alert:
    """Build an alert priced from the cost table."""
    return Alert(
        asset_id=asset_id,
        kind=kind,
        severity=severity,
        timestamp=timestamp,
        detail=detail,
        estimated_cost_cents=ALERT_COST_CENTS[kind],
    )
