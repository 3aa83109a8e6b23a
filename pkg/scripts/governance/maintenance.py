"""Service slots and alert-driven maintenance booking.

Alerts are served urgent first, then by alert timestamp, then by asset id.
Each alert takes the earliest free slot starting at or after its
timestamp; alerts with no feasible slot stay unbooked.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from scripts.monitor.alerts import Alert
from scripts.utils import logging_system as log

__all__ = [
    'MaintenanceSlot',
    'Booking',
    'ServiceCalendar',
    'alert_priority',
    'schedule_service',
    'slot_id',
    'SLOT_HOURS',
    'BOOKING_DAYS_AHEAD',
]

logger = log.get_logger(__name__)

SLOT_HOURS = (9, 14)
BOOKING_DAYS_AHEAD = 7


def slot_id(start_hour: int) -> str:
    return f"S{start_hour:06d}"


@dataclass(frozen=True)
class MaintenanceSlot:
    slot_id: str
    start_hour: int
    asset_id: Optional[str] = None
    booked: bool = False
    estimated_cost_cents: int = 0


@dataclass(frozen=True)
class Booking:
    slot_id: str
    start_hour: int
    alert: Alert
    cost_cents: int


def alert_priority(alert: Alert) -> tuple[int, int, str]:
    return (0 if alert.is_urgent else 1, alert.timestamp, alert.asset_id)


def schedule_service(alerts: Iterable[Alert], slots: Sequence[MaintenanceSlot]) -> list[Booking]:
    """Greedy earliest-feasible assignment of alerts to free slots.

    Raises:
        ValueError: ``slots`` are not ordered by start hour.
    """
    for before, after in zip(slots, slots[1:]):
        if after.start_hour < before.start_hour:
            raise ValueError(f"slots are not time-ordered at {after.slot_id}")
    free = [not slot.booked for slot in slots]
    bookings: list[Booking] = []
    for alert in sorted(alerts, key=alert_priority):
        for index, slot in enumerate(slots):
            if free[index] and slot.start_hour >= alert.timestamp:
                free[index] = False
                bookings.append(Booking(slot.slot_id, slot.start_hour, alert, alert.estimated_cost_cents))
                break
        else:
            logger.debug(f"no service slot for {alert.kind.value} alert on {alert.asset_id}")
    return bookings


class ServiceCalendar:
    """Rolling calendar of service slots, two per day, a week ahead.

    Only open slots are held: booking drops the slots it fills and every
    slot starting at or before ``now``.
    """

    def __init__(self, slot_hours: Sequence[int] = SLOT_HOURS, days_ahead: int = BOOKING_DAYS_AHEAD) -> None:
        self.slot_hours = tuple(sorted(slot_hours))
        self.days_ahead = days_ahead
        self.slots: list[MaintenanceSlot] = []
        self._last_day = -1

    def open_through(self, today: int) -> None:
        """Make sure slots exist for the ``days_ahead`` days after ``today``."""
        for day in range(max(self._last_day + 1, today + 1), today + self.days_ahead + 1):
            for hour in self.slot_hours:
                start = day * 24 + hour
                self.slots.append(MaintenanceSlot(slot_id(start), start))
            self._last_day = day

    def free_slots(self, after_hour: int) -> list[MaintenanceSlot]:
        return [s for s in self.slots if not s.booked and s.start_hour > after_hour]

    def book(self, alerts: Iterable[Alert], now: int) -> list[Booking]:
        bookings = schedule_service(alerts, self.free_slots(now))
        taken = {b.slot_id for b in bookings}
        self.slots = [s for s in self.slots if s.start_hour > now and not s.booked and s.slot_id not in taken]
        return bookings
