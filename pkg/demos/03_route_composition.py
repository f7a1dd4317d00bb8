"""Compose minimum-energy routes and compare with the brute-force oracle.

Run:  python demos/03_route_composition.py
"""

from skysim import CompositionQuery, brute_force_min_energy, compose_min_energy
from skysim.fixtures import demo_city

net = demo_city()
usable = net.settings.drone.battery_capacity_wh * (1 - net.settings.reserve_fraction)


def availability(**overrides):
    out = {s.id: True for s in net.segments}
    out.update(overrides)
    return out


def show(title, path):
    if path is None:
        print(f"{title}: no feasible route")
        return
    hops = " -> ".join(f"{s.segment_id}({s.energy_wh:.2f} Wh)" for s in path.steps)
    print(f"{title}: {hops or '(already there)'}  total {path.total_energy_wh:.2f} Wh")


query = CompositionQuery(
    availability=availability(),
    origin="depot",
    destination="clinic",
    payload_kg=1.0,
    usable_capacity_wh=usable,
)
best = compose_min_energy(net, query)
oracle = brute_force_min_energy(net, query)
show("depot -> clinic", best)
assert best.segment_ids == oracle.segment_ids, "search must match exhaustive enumeration"

# Knock out the winning route's first segment: composition adapts.
blocked = CompositionQuery(
    availability=availability(**{best.steps[0].segment_id: False}),
    origin="depot",
    destination="clinic",
    payload_kg=1.0,
    usable_capacity_wh=usable,
)
show(f"depot -> clinic without {best.steps[0].segment_id}", compose_min_energy(net, blocked))

# A tight battery makes long segments infeasible even when available.
tight = CompositionQuery(
    availability=availability(),
    origin="depot",
    destination="clinic",
    payload_kg=1.0,
    usable_capacity_wh=best.steps[0].energy_wh * 0.9,
)
show("depot -> clinic with a battery too small for the direct hop",
     compose_min_energy(net, tight))

# Heavier payloads shift energies; the optimum can change with load.
for payload in (0.0, 2.0):
    q = CompositionQuery(
        availability=availability(),
        origin="campus",
        destination="tower",
        payload_kg=payload,
        usable_capacity_wh=usable,
    )
    show(f"campus -> tower with {payload:.0f} kg", compose_min_energy(net, q))
