"""Injected equipment and behaviour faults.

A fault is active from ``start_hour`` until a booked repair clears its
asset. Each kind reads ``magnitude`` differently:

========== ================================ =====================
kind       magnitude                        default asset
========== ================================ =====================
leak       loss per hour, fraction of level ``tank-1``
vibration  fault tone amplitude multiplier  ``dispenser-1``
battery    one-shot voltage dropout (V)     ``vehicle-0``
tire       reported pressure (psi)          ``vehicle-0``
fraud      probability a fill skips auth    any dispenser
========== ================================ =====================
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

__all__ = ['FaultKind', 'FaultInjection', 'TANK_ASSET', 'dispenser_asset', 'vehicle_asset', 'active_faults']

TANK_ASSET = 'tank-1'


def dispenser_asset(dispenser: int) -> str:
    return f"dispenser-{dispenser}"


def vehicle_asset(user_id: int) -> str:
    return f"vehicle-{user_id}"


class FaultKind(str, Enum):
    LEAK = 'leak'
    VIBRATION = 'vibration'
    BATTERY = 'battery'
    TIRE = 'tire'
    FRAUD = 'fraud'


_DEFAULT_ASSET = {
    FaultKind.LEAK: TANK_ASSET,
    FaultKind.VIBRATION: dispenser_asset(1),
    FaultKind.BATTERY: vehicle_asset(0),
    FaultKind.TIRE: vehicle_asset(0),
    FaultKind.FRAUD: None,
}


@dataclass(frozen=True)
class FaultInjection:
    kind: FaultKind
    start_hour: int
    magnitude: float
    asset: Optional[str] = None

    def __post_init__(self) -> None:
        if self.start_hour < 0:
            raise ValueError(f"fault start_hour must be >= 0, got {self.start_hour}")
        if self.magnitude < 0:
            raise ValueError(f"fault magnitude must be >= 0, got {self.magnitude}")

    @property
    def asset_id(self) -> Optional[str]:
        """Target asset, ``None`` meaning every dispenser (fraud only)."""
        return self.asset if self.asset is not None else _DEFAULT_ASSET[self.kind]

    def targets(self, asset_id: str) -> bool:
        return self.asset_id is None or self.asset_id == asset_id

    @property
    def user_id(self) -> Optional[int]:
        """User index of a ``vehicle-<n>`` asset."""
        asset = self.asset_id
        if asset is None or not asset.startswith('vehicle-'):
            return None
        return int(asset.split('-', 1)[1])


def active_faults(
    faults: Iterable[FaultInjection], hour: int, cleared: frozenset[int]
) -> list[tuple[int, FaultInjection]]:
    """``(index, fault)`` pairs active at ``hour`` and not yet repaired."""
    return [
        (index, fault)
        for index, fault in enumerate(faults)
        if fault.start_hour <= hour and index not in cleared
    ]
