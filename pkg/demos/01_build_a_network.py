"""Build a skyway network from scratch, edit it, and round-trip it as JSON.

Run:  python demos/01_build_a_network.py
"""

from skysim import (
    Node,
    Segment,
    SkywayNetwork,
    add_node,
    add_segment,
    leg_profiles,
    load_network,
    remove_node,
    save_network,
    segment_length,
    set_segment_availability,
    validate_network,
)

# Start empty, add three rooftops at different heights.
net = SkywayNetwork()
net = add_node(net, Node(id="depot", position=(0.0, 0.0, 15.0), pad_count=2))
net = add_node(net, Node(id="office", position=(350.0, 120.0, 60.0)))
net = add_node(net, Node(id="clinic", position=(150.0, 400.0, 25.0)))

# A direct segment, then one that detours over a waypoint to clear the
# height difference gradually.
net = add_segment(net, Segment(id="d-o", from_node="depot", to_node="office"))
net = add_segment(
    net,
    Segment(
        id="d-c",
        from_node="depot",
        to_node="clinic",
        waypoints=((60.0, 220.0, 45.0),),
    ),
)
net = add_segment(net, Segment(id="o-c", from_node="office", to_node="clinic"))
validate_network(net)

print("segments and their flight profiles (from the depot side):")
for seg in net.segments:
    length = segment_length(net, seg.id)
    legs = leg_profiles(net, seg.id, seg.from_node)
    angles = ", ".join(f"{leg.climb_angle_rad:+.3f} rad" for leg in legs)
    print(f"  {seg.id}: {length:7.1f} m over {len(legs)} leg(s), climb angles {angles}")

# Availability is an edit-mode toggle; unavailable segments are skipped by
# the route composer at the next decision.
net = set_segment_availability(net, "d-o", False)
print("\nd-o marked unavailable:", not net.segment("d-o").available)

# Canonical JSON round trip: equal networks produce identical bytes.
raw = save_network(net)
reloaded = load_network(raw)
assert reloaded == net
assert save_network(reloaded) == raw
print(f"saved {len(raw)} bytes of canonical JSON; reload is a fixed point")

# Removing a node cascades to its segments.
smaller = remove_node(net, "office")
print(f"after removing 'office': {len(smaller.nodes)} nodes, {len(smaller.segments)} segment(s)")
