"""Station and vehicle monitors.

Each detector is a pure function or a frozen state machine (state in,
state out), so per-asset detectors can be advanced independently:

    - tank.py: mass-balance residual and the CUSUM leak detector
    - spectrum.py: radix-2 FFT and the vibration band-energy rule
    - vehicle.py: battery AR(1) residual rule and tire pressure bands
    - fraud.py: flow events without a matching authorization
    - alerts.py: the :class:`Alert` record and service cost table
"""

from .alerts import ALERT_COST_CENTS, Alert, AlertKind, Severity, make_alert

__all__ = ['ALERT_COST_CENTS', 'Alert', 'AlertKind', 'Severity', 'make_alert']
