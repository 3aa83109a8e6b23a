"""Simulated IoT streams: tank gauge, dispenser auth/flow, vehicle scans, vibration.

Each hour draws from its own sensor substream, and each vibration frame
from its own frame substream, so sensor randomness never shifts demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from scripts.sim.demand import CustomerVisit, VisitKind
from scripts.sim.faults import FaultInjection, FaultKind, dispenser_asset, vehicle_asset
from scripts.sim.rng import Stream, gaussians, substream, uniforms
from scripts.sim.station import MGAL_PER_GALLON, StationParams, VibrationProfile

__all__ = [
    'TankReading',
    'AuthEvent',
    'FlowEvent',
    'VehicleReading',
    'VibrationFrame',
    'SensorState',
    'SensorBatch',
    'sense_hour',
    'vibration_frame',
    'FLOW_DELAY_S',
]

FLOW_DELAY_S = 30
_INT16_MIN, _INT16_MAX = -32768, 32767


@dataclass(frozen=True)
class TankReading:
    """Hourly tank telemetry. Volumes in mgal, temperature in centi-degrees C."""

    timestamp: int
    level_mgal: int
    temperature_cdeg: int
    metered_sales_mgal: int
    deliveries_mgal: int

    def __post_init__(self) -> None:
        if self.level_mgal < 0 or self.metered_sales_mgal < 0 or self.deliveries_mgal < 0:
            raise ValueError(f"tank reading at hour {self.timestamp} has negative volume")

    @property
    def level(self) -> float:
        return self.level_mgal / MGAL_PER_GALLON

    @property
    def temperature(self) -> float:
        return self.temperature_cdeg / 100.0

    @property
    def metered_sales(self) -> float:
        return self.metered_sales_mgal / MGAL_PER_GALLON

    @property
    def deliveries(self) -> float:
        return self.deliveries_mgal / MGAL_PER_GALLON


@dataclass(frozen=True)
class AuthEvent:
    t_s: int
    dispenser: int
    user_id: int


@dataclass(frozen=True)
class FlowEvent:
    t_s: int
    dispenser: int
    volume_mgal: int


@dataclass(frozen=True)
class VehicleReading:
    timestamp: int
    offset_s: int
    user_id: int
    tire_dpsi: int
    battery_mv: int

    @property
    def tire_psi(self) -> float:
        return self.tire_dpsi / 10.0

    @property
    def battery_v(self) -> float:
        return self.battery_mv / 1000.0


@dataclass(frozen=True, eq=False)
class VibrationFrame:
    frame_id: str
    asset_id: str
    hour: int
    sample_rate_hz: int
    samples: np.ndarray

    def signal(self, scale: float) -> np.ndarray:
        return self.samples.astype(np.float64) / scale


@dataclass
class SensorState:
    """Per-episode sensor memory: battery AR(1) levels and spent one-shot faults."""

    battery_v: dict[int, float] = field(default_factory=dict)
    fired: set[int] = field(default_factory=set)


@dataclass
class SensorBatch:
    tank: TankReading
    auths: list[AuthEvent] = field(default_factory=list)
    flows: list[FlowEvent] = field(default_factory=list)
    vehicles: list[VehicleReading] = field(default_factory=list)
    frames: list[VibrationFrame] = field(default_factory=list)


def vibration_frame(
    profile: VibrationProfile,
    *,
    seed: int,
    hour: int,
    dispenser: int,
    fault_amplitude: float = 0.0,
) -> VibrationFrame:
    """One int16-quantized accelerometer frame for ``dispenser``."""
    rng = substream(seed, Stream.FRAMES, hour, dispenser)
    rng, phases = uniforms(rng, len(profile.tones) + 1)
    _, noise = gaussians(rng, profile.n_samples)
    t = np.arange(profile.n_samples) / profile.sample_rate
    signal = profile.noise_sd * noise
    for (freq, amp), phase in zip(profile.tones, phases):
        signal = signal + amp * np.sin(2.0 * np.pi * (freq * t + phase))
    if fault_amplitude > 0:
        signal = signal + fault_amplitude * np.sin(2.0 * np.pi * (profile.fault_hz * t + phases[-1]))
    samples = np.clip(np.rint(signal * profile.sample_scale), _INT16_MIN, _INT16_MAX).astype(np.int16)
    asset = dispenser_asset(dispenser)
    return VibrationFrame(
        frame_id=f"h{hour:05d}-{asset}",
        asset_id=asset,
        hour=hour,
        sample_rate_hz=int(round(profile.sample_rate)),
        samples=samples,
    )


def sense_hour(
    *,
    seed: int,
    hour: int,
    visits: Sequence[CustomerVisit],
    tank_level_mgal: int,
    sold_mgal: int,
    delivered_mgal: int,
    faults: Sequence[tuple[int, FaultInjection]],
    params: StationParams,
    state: SensorState,
) -> SensorBatch:
    """All sensor output of one hour.

    Args:
        seed: Episode seed.
        hour: Absolute simulation hour.
        visits: The hour's visits in arrival order.
        tank_level_mgal: True tank level at the end of the hour.
        sold_mgal: Metered sales this hour.
        delivered_mgal: Delivered volume this hour.
        faults: Active ``(index, fault)`` pairs.
        params: Station parameters.
        state: Mutable sensor memory, updated in place.
    """
    rng = substream(seed, Stream.SENSORS, hour)
    rng, z = gaussians(rng, 2)
    noise_mgal = int(round(params.gauge_noise_sd * z[0] * MGAL_PER_GALLON))
    gauge = min(max(tank_level_mgal + noise_mgal, 0), params.tank_capacity_mgal)
    hod = hour % 24
    temperature = 15.0 + 8.0 * math.sin(2.0 * math.pi * (hod - 9) / 24.0) + 0.3 * z[1]
    batch = SensorBatch(
        tank=TankReading(
            timestamp=hour,
            level_mgal=gauge,
            temperature_cdeg=int(round(temperature * 100)),
            metered_sales_mgal=sold_mgal,
            deliveries_mgal=delivered_mgal,
        )
    )

    fraud = [f for _, f in faults if f.kind is FaultKind.FRAUD]
    fueled = [v for v in visits if v.kind is VisitKind.FUEL]
    rng, skip_draws = uniforms(rng, len(fueled))
    for visit, u in zip(fueled, skip_draws):
        asset = dispenser_asset(visit.dispenser)
        skip = sum(f.magnitude for f in fraud if f.targets(asset))
        if u >= skip:
            batch.auths.append(AuthEvent(visit.time_s, visit.dispenser, visit.user_id))
        batch.flows.append(FlowEvent(visit.time_s + FLOW_DELAY_S, visit.dispenser, visit.gallons_mgal))

    vehicle = params.vehicle
    for visit in fueled:
        if visit.user_id < 0:
            continue
        rng, u = uniforms(rng, 1)
        if u[0] >= vehicle.scan_prob:
            continue
        rng, zz = gaussians(rng, 2)
        tire = vehicle.tire_mean_psi + vehicle.tire_sd_psi * zz[0]
        prev = state.battery_v.get(visit.user_id, vehicle.battery_mean_v)
        volts = vehicle.battery_mean_v + vehicle.battery_phi * (prev - vehicle.battery_mean_v)
        volts += vehicle.battery_sd_v * zz[1]
        state.battery_v[visit.user_id] = volts
        reported = volts
        asset = vehicle_asset(visit.user_id)
        for index, fault in faults:
            if fault.asset_id != asset:
                continue
            if fault.kind is FaultKind.TIRE:
                tire = fault.magnitude
            elif fault.kind is FaultKind.BATTERY and index not in state.fired:
                state.fired.add(index)
                reported = volts - fault.magnitude
        batch.vehicles.append(
            VehicleReading(
                timestamp=hour,
                offset_s=visit.offset_s,
                user_id=visit.user_id,
                tire_dpsi=max(0, int(round(tire * 10))),
                battery_mv=max(0, int(round(reported * 1000))),
            )
        )

    if hod == params.vibration.frame_hour:
        for dispenser in range(1, params.n_dispensers + 1):
            asset = dispenser_asset(dispenser)
            amplitude = sum(
                f.magnitude * params.vibration.reference_amplitude
                for _, f in faults
                if f.kind is FaultKind.VIBRATION and f.asset_id == asset
            )
            batch.frames.append(
                vibration_frame(params.vibration, seed=seed, hour=hour, dispenser=dispenser,
                                fault_amplitude=amplitude)
            )
    return batch
