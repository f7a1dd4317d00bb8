"""Explore the drone power model: hover, cruise, climb, descent, charging.

Run:  python demos/02_energy_model.py
"""

import math

from skysim import (
    BatteryState,
    DroneSpec,
    EnvironmentParams,
    FlightPoint,
    charge,
    discharge,
    electric_power,
    leg_energy,
    solve_induced_velocity,
)

spec = DroneSpec()
env = EnvironmentParams()
mass = spec.total_mass_kg(payload_kg=1.0)

print(f"drone: {spec.mass_empty_kg:.1f} kg empty + 1.0 kg payload, "
      f"{spec.total_disc_area_m2:.2f} m^2 disc area\n")

# Power vs airspeed at level flight: the classic bathtub shape — induced
# power falls with speed while parasite drag grows with v^3.
print("airspeed sweep (level flight):")
print("  v [m/s]   v_i [m/s]   power [W]")
for v in [0, 2, 4, 6, 8, 10, 12, 15, 18, 22, 26, 30]:
    drag = 0.5 * env.air_density_kgpm3 * spec.drag_coefficient * spec.frontal_area_m2 * v * v
    thrust = math.hypot(mass * env.gravity_mps2, drag)
    v_i = solve_induced_velocity(thrust, v, env.air_density_kgpm3, spec.total_disc_area_m2)
    power = electric_power(spec, env, FlightPoint(v, 0.0, mass))
    print(f"  {v:7.1f}   {v_i:9.3f}   {power:9.1f}")

# Climb angle sweep at cruise speed: ascent costs, descent saves until the
# clamp floors the draw at avionics power.
print("\nclimb-angle sweep at cruise speed:")
print("  angle [deg]   power [W]")
for deg in [-90, -60, -30, -10, 0, 10, 30, 60, 90]:
    theta = math.radians(deg)
    power = electric_power(spec, env, FlightPoint(spec.cruise_speed_mps, theta, mass))
    print(f"  {deg:10d}   {power:9.1f}")

# Energy for a 500 m leg climbing 10 degrees vs the same leg back down.
up_wh, duration = leg_energy(spec, env, (500.0, math.radians(10)), spec.cruise_speed_mps, 1.0)
down_wh, _ = leg_energy(spec, env, (500.0, math.radians(-10)), spec.cruise_speed_mps, 1.0)
print(f"\n500 m leg at +10 deg: {up_wh:.3f} Wh over {duration:.0f} s; back down: {down_wh:.3f} Wh")

# Battery bookkeeping: drain during a hover, then a pad recharge.
battery = BatteryState.full(spec.battery_capacity_wh)
hover = electric_power(spec, env, FlightPoint(0.0, 0.0, mass))
battery = discharge(battery, hover, 120.0)
print(f"\nafter 120 s hover at {hover:.0f} W: soc {battery.soc_wh:.2f} Wh "
      f"({battery.soc_pct:.1f} %), consumed {battery.cumulative_consumed_wh:.2f} Wh")
battery = charge(battery, pad_power_w=200.0, charge_efficiency=spec.charge_efficiency,
                 duration_s=300.0)
print(f"after 300 s on a 200 W pad: soc {battery.soc_wh:.2f} Wh ({battery.soc_pct:.1f} %)")
