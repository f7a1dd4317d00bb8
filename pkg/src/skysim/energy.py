"""Multirotor power and battery model.

Instantaneous electric power is built from momentum-theory induced velocity,
parasite body drag, and a thrust vector that balances weight plus drag at the
current climb angle.  Blade profile losses are folded into the induced-power
factor; descent never regenerates (mechanical power is clamped at zero), so
electric power never drops below the constant avionics draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

# Relative tolerance on the momentum-equation residual.
SOLVER_RTOL = 1e-9

WH_PER_JOULE = 1.0 / 3600.0


class EnergyModelError(Exception):
    """Non-finite input or intermediate in a power computation."""


class BatteryDepletedError(Exception):
    """A discharge would push state of charge below zero."""


@dataclass(frozen=True)
class DroneSpec:
    """Physical drone parameters feeding the power model.

    Defaults describe a generic 5 kg quadrotor (4 kg frame + 1 kg battery)
    with 0.5 m^2 of total disc area.
    """

    mass_frame_kg: float = 4.0
    mass_battery_kg: float = 1.0
    payload_capacity_kg: float = 2.0
    rotor_count: int = 4
    rotor_disc_area_m2: float = 0.125
    drag_coefficient: float = 1.0
    frontal_area_m2: float = 0.05
    induced_power_factor: float = 1.15
    powertrain_efficiency: float = 0.7
    avionics_power_w: float = 10.0
    cruise_speed_mps: float = 10.0
    vertical_speed_mps: float = 2.0
    battery_capacity_wh: float = 100.0
    charge_efficiency: float = 0.95

    def __post_init__(self):
        positive = (
            ("mass_frame_kg", self.mass_frame_kg),
            ("mass_battery_kg", self.mass_battery_kg),
            ("rotor_count", self.rotor_count),
            ("rotor_disc_area_m2", self.rotor_disc_area_m2),
            ("cruise_speed_mps", self.cruise_speed_mps),
            ("vertical_speed_mps", self.vertical_speed_mps),
            ("battery_capacity_wh", self.battery_capacity_wh),
        )
        for name, value in positive:
            if not value > 0:
                raise ValueError(f"{name} must be > 0, got {value}")
        if self.payload_capacity_kg < 0:
            raise ValueError("payload_capacity_kg must be >= 0")
        if self.drag_coefficient < 0 or self.frontal_area_m2 < 0:
            raise ValueError("drag terms must be >= 0")
        if self.induced_power_factor < 1:
            raise ValueError("induced_power_factor must be >= 1")
        if not 0 < self.powertrain_efficiency <= 1:
            raise ValueError("powertrain_efficiency must be in (0, 1]")
        if not 0 < self.charge_efficiency <= 1:
            raise ValueError("charge_efficiency must be in (0, 1]")
        if self.avionics_power_w < 0:
            raise ValueError("avionics_power_w must be >= 0")

    @property
    def mass_empty_kg(self) -> float:
        return self.mass_frame_kg + self.mass_battery_kg

    @property
    def total_disc_area_m2(self) -> float:
        return self.rotor_count * self.rotor_disc_area_m2

    def total_mass_kg(self, payload_kg: float) -> float:
        return self.mass_empty_kg + payload_kg


@dataclass(frozen=True)
class EnvironmentParams:
    gravity_mps2: float = 9.81
    air_density_kgpm3: float = 1.225

    def __post_init__(self):
        if not self.gravity_mps2 > 0:
            raise ValueError("gravity_mps2 must be > 0")
        if not self.air_density_kgpm3 > 0:
            raise ValueError("air_density_kgpm3 must be > 0")


@dataclass(frozen=True)
class FlightPoint:
    """One steady flight condition: airspeed, climb angle, all-up mass."""

    airspeed_mps: float
    climb_angle_rad: float
    total_mass_kg: float

    def __post_init__(self):
        if self.airspeed_mps < 0:
            raise ValueError("airspeed_mps must be >= 0")
        if not -math.pi / 2 <= self.climb_angle_rad <= math.pi / 2:
            raise ValueError("climb_angle_rad must lie in [-pi/2, pi/2]")
        if self.total_mass_kg <= 0:
            raise ValueError("total_mass_kg must be > 0")


@dataclass(frozen=True)
class BatteryState:
    """Battery bookkeeping in watt-hours.

    ``cumulative_consumed_wh`` only ever grows; charging does not reduce it.
    """

    capacity_wh: float
    soc_wh: float
    cumulative_consumed_wh: float = 0.0

    def __post_init__(self):
        if self.capacity_wh <= 0:
            raise ValueError("capacity_wh must be > 0")
        if not 0 <= self.soc_wh <= self.capacity_wh:
            raise ValueError(
                f"soc_wh must lie in [0, {self.capacity_wh}], got {self.soc_wh}"
            )
        if self.cumulative_consumed_wh < 0:
            raise ValueError("cumulative_consumed_wh must be >= 0")

    @classmethod
    def full(cls, capacity_wh: float) -> "BatteryState":
        return cls(capacity_wh=capacity_wh, soc_wh=capacity_wh)

    @property
    def soc_pct(self) -> float:
        return 100.0 * self.soc_wh / self.capacity_wh


def solve_induced_velocity(
    thrust_n: float, airspeed_mps: float, air_density: float, disc_area_m2: float
) -> float:
    """Solve the momentum equation v_i * sqrt(v^2 + v_i^2) = T / (2 rho A).

    The left side is strictly increasing in v_i, and the hover value
    v_h = sqrt(T / (2 rho A)) always brackets the root from above, so a
    bisection on [0, v_h] is guaranteed; a short Newton polish tightens the
    residual to SOLVER_RTOL relative.
    """
    for name, value in (
        ("thrust_n", thrust_n),
        ("airspeed_mps", airspeed_mps),
        ("air_density", air_density),
        ("disc_area_m2", disc_area_m2),
    ):
        if not math.isfinite(value):
            raise EnergyModelError(f"non-finite {name}: {value}")
    if thrust_n < 0:
        raise EnergyModelError(f"thrust_n must be >= 0, got {thrust_n}")
    if airspeed_mps < 0:
        raise EnergyModelError(f"airspeed_mps must be >= 0, got {airspeed_mps}")
    if air_density <= 0 or disc_area_m2 <= 0:
        raise EnergyModelError("air_density and disc_area_m2 must be > 0")

    target = thrust_n / (2.0 * air_density * disc_area_m2)
    if target == 0.0:
        return 0.0
    v = airspeed_mps
    v_h = math.sqrt(target)

    def residual(x: float) -> float:
        return x * math.sqrt(v * v + x * x) - target

    lo, hi = 0.0, v_h
    for _ in range(48):
        mid = 0.5 * (lo + hi)
        if residual(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    # Newton polish; derivative is bounded away from zero near the root.
    for _ in range(8):
        hyp = math.sqrt(v * v + x * x)
        slope = hyp + x * x / hyp
        step = residual(x) / slope
        x -= step
        if abs(step) <= 1e-16 * max(1.0, x):
            break
    x = min(max(x, 0.0), v_h)
    if abs(residual(x)) > SOLVER_RTOL * max(1.0, target):
        raise EnergyModelError(
            f"induced-velocity solver failed to converge (T={thrust_n}, v={airspeed_mps})"
        )
    return x


def electric_power(spec: DroneSpec, env: EnvironmentParams, pt: FlightPoint) -> float:
    """Electric power draw in watts at one flight point.

    Drag opposes the flight path; thrust balances weight plus the drag
    components; mechanical power (induced + climb + drag) is clamped at zero
    before dividing by the powertrain efficiency, so the result is always at
    least the avionics power.
    """
    v = pt.airspeed_mps
    theta = pt.climb_angle_rad
    m = pt.total_mass_kg
    rho = env.air_density_kgpm3
    g = env.gravity_mps2

    drag = 0.5 * rho * spec.drag_coefficient * spec.frontal_area_m2 * v * v
    weight = m * g
    thrust = math.hypot(weight + drag * math.sin(theta), drag * math.cos(theta))
    v_i = solve_induced_velocity(thrust, v, rho, spec.total_disc_area_m2)
    p_mech = (
        spec.induced_power_factor * thrust * v_i
        + weight * v * math.sin(theta)
        + drag * v
    )
    power = max(0.0, p_mech) / spec.powertrain_efficiency + spec.avionics_power_w
    if not math.isfinite(power):
        raise EnergyModelError(f"non-finite power at {pt}")
    return power


def hover_power(spec: DroneSpec, env: EnvironmentParams, total_mass_kg: float) -> float:
    """Power at zero airspeed carrying ``total_mass_kg``."""
    return electric_power(spec, env, FlightPoint(0.0, 0.0, total_mass_kg))


def leg_energy(
    spec: DroneSpec,
    env: EnvironmentParams,
    leg: tuple[float, float],
    speed_mps: float,
    payload_kg: float,
) -> tuple[float, float]:
    """Energy (Wh) and duration (s) to fly one constant-speed leg.

    ``leg`` is a (length_m, climb_angle_rad) pair.
    """
    length_m, climb_angle_rad = leg
    if length_m <= 0:
        raise ValueError(f"leg length must be > 0, got {length_m}")
    if speed_mps <= 0:
        raise ValueError(f"speed must be > 0, got {speed_mps}")
    duration_s = length_m / speed_mps
    power = electric_power(
        spec, env, FlightPoint(speed_mps, climb_angle_rad, spec.total_mass_kg(payload_kg))
    )
    return power * duration_s * WH_PER_JOULE, duration_s


def segment_energy(
    spec: DroneSpec,
    env: EnvironmentParams,
    legs: list[tuple[float, float]],
    payload_kg: float,
    hover_takeoff_s: float = 0.0,
    hover_landing_s: float = 0.0,
) -> float:
    """Predicted energy (Wh) for a full segment traversal.

    Sums the cruise legs and adds the takeoff/landing hovers at hover power
    for the same all-up mass.
    """
    total = 0.0
    for leg in legs:
        wh, _ = leg_energy(spec, env, leg, spec.cruise_speed_mps, payload_kg)
        total += wh
    hover_s = hover_takeoff_s + hover_landing_s
    if hover_s > 0:
        p_hover = hover_power(spec, env, spec.total_mass_kg(payload_kg))
        total += p_hover * hover_s * WH_PER_JOULE
    return total


def charge(
    battery: BatteryState, pad_power_w: float, charge_efficiency: float, duration_s: float
) -> BatteryState:
    """Linear charging at the pad power, saturating at capacity."""
    if duration_s < 0:
        raise ValueError("duration_s must be >= 0")
    if pad_power_w < 0:
        raise ValueError("pad_power_w must be >= 0")
    gained = pad_power_w * charge_efficiency * duration_s * WH_PER_JOULE
    return replace(battery, soc_wh=min(battery.capacity_wh, battery.soc_wh + gained))


def discharge(battery: BatteryState, power_w: float, dt_s: float) -> BatteryState:
    """Draw ``power_w`` for ``dt_s`` seconds; exact depletion to zero is legal."""
    if dt_s < 0:
        raise ValueError("dt_s must be >= 0")
    if power_w < 0:
        raise ValueError("power_w must be >= 0")
    used = power_w * dt_s * WH_PER_JOULE
    new_soc = battery.soc_wh - used
    if new_soc < 0:
        raise BatteryDepletedError(
            f"discharge of {used:.6f} Wh exceeds remaining {battery.soc_wh:.6f} Wh"
        )
    return BatteryState(
        capacity_wh=battery.capacity_wh,
        soc_wh=new_soc,
        cumulative_consumed_wh=battery.cumulative_consumed_wh + used,
    )
