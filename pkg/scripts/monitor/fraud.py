"""Unauthorized dispensing: fuel flow with no recent authorization on the same dispenser."""

from __future__ import annotations

from typing import Sequence

from scripts.monitor.alerts import Alert, AlertKind, Severity, make_alert
from scripts.sim.faults import dispenser_asset
from scripts.sim.sensors import AuthEvent, FlowEvent

__all__ = ['dispenser_fraud', 'DEFAULT_AUTH_WINDOW_S']

DEFAULT_AUTH_WINDOW_S = 120


def _check_ordered(events: Sequence[AuthEvent] | Sequence[FlowEvent], name: str) -> None:
    for before, after in zip(events, events[1:]):
        if after.t_s < before.t_s:
            raise ValueError(f"{name} events are not time-ordered at t={after.t_s}s")


def dispenser_fraud(
    flow_events: Sequence[FlowEvent],
    authorization_events: Sequence[AuthEvent],
    window: int = DEFAULT_AUTH_WINDOW_S,
) -> list[Alert]:
    """One fraud alert per flow with no same-dispenser authorization in the ``window`` seconds before it.

    Both inputs must be sorted by time. An authorization at the same second
    as the flow counts. Runs in a single merged pass.
    """
    if window < 0:
        raise ValueError(f"window must be >= 0, got {window}")
    _check_ordered(flow_events, 'flow')
    _check_ordered(authorization_events, 'authorization')

    last_auth: dict[int, int] = {}
    alerts: list[Alert] = []
    cursor = 0
    for flow in flow_events:
        while cursor < len(authorization_events) and authorization_events[cursor].t_s <= flow.t_s:
            auth = authorization_events[cursor]
            last_auth[auth.dispenser] = auth.t_s
            cursor += 1
        seen = last_auth.get(flow.dispenser)
        if seen is None or flow.t_s - seen > window:
            alerts.append(
                make_alert(
                    AlertKind.FRAUD,
                    dispenser_asset(flow.dispenser),
                    Severity.ADVISORY,
                    flow.t_s // 3600,
                    f"flow of {flow.volume_mgal} mgal at t={flow.t_s}s without authorization",
                )
            )
    return alerts
