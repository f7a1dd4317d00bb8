"""Swarm coordination at a single charging pad.

Three drones fly as one swarm over two long hops. The midpoint rooftop has
one pad, so the members queue and charge one at a time, then the whole swarm
departs in the same frame.

Run:  python demos/06_swarm_charging.py
"""

from skysim import (
    DroneSpec,
    GreedyReactivePolicy,
    InProcessController,
    Node,
    Segment,
    SimSettings,
    SkywayNetwork,
    World,
    parse_scenario,
    validate_network,
)

settings = SimSettings(
    drone=DroneSpec(battery_capacity_wh=20.0),
    hover_takeoff_s=0.0,
    hover_landing_s=0.0,
)
net = SkywayNetwork(
    nodes=(
        Node(id="a", position=(0.0, 0.0, 10.0), pad_count=1, charge_power_w=400.0),
        Node(id="b", position=(1000.0, 0.0, 10.0), pad_count=1, charge_power_w=400.0),
        Node(id="c", position=(2000.0, 0.0, 10.0), pad_count=1, charge_power_w=400.0),
    ),
    segments=(
        Segment(id="ab", from_node="a", to_node="b"),
        Segment(id="bc", from_node="b", to_node="c"),
    ),
    settings=settings,
)
validate_network(net)

scenario = parse_scenario(
    {
        "requests": [
            {"id": "crate", "origin": "a", "destination": "c",
             "payload_kg": 1.0, "swarm_size": 3, "release_time_s": 0}
        ],
        "faults": [],
        "max_time_s": 3600,
        "seed": 3,
    }
)
result = World(net, scenario, InProcessController(GreedyReactivePolicy())).run()

print("pad timeline at the midpoint (one pad, three drones):")
for event in result.events:
    if event.kind in ("charge_start", "charge_end") and event.location_id == "b":
        print(f"  t={event.time_s:7.1f}s  {event.drone_id}  {event.kind}")

departures = sorted(
    {e.time_s for e in result.events if e.kind == "segment_start" and e.location_id == "bc"}
)
print(f"\nall members left for the final hop at the same instant: t={departures[0]:.1f} s "
      f"({len(departures)} distinct departure time)")
print("outcomes:", ", ".join(d["outcome"] for d in result.summary["drones"]))
