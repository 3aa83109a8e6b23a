"""Operations governance: replenishment, maintenance, the daily tick and KPIs.

    - inventory.py: reorder point, demand forecaster, ordering rule
    - maintenance.py: service slots and alert-driven booking
    - kpi.py: daily KPI reports and their CSV/text forms
    - hub.py: the station controller running the daily governance tick
"""

from .hub import GovernanceHub, GovernanceStageError, MonitorSettings
from .inventory import (
    DemandForecaster,
    ForecasterSettings,
    InventoryPolicy,
    InventoryPolicyKind,
    ReplenishmentController,
    inventory_decision,
    reorder_point,
)
from .kpi import KpiReport, emit_kpi_report
from .maintenance import Booking, MaintenanceSlot, schedule_service

__all__ = [
    'Booking',
    'DemandForecaster',
    'ForecasterSettings',
    'GovernanceHub',
    'GovernanceStageError',
    'InventoryPolicy',
    'InventoryPolicyKind',
    'KpiReport',
    'MaintenanceSlot',
    'MonitorSettings',
    'ReplenishmentController',
    'emit_kpi_report',
    'inventory_decision',
    'reorder_point',
    'schedule_service',
]
