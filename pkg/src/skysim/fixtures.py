"""Small ready-made networks for demos and tests."""

from __future__ import annotations

import math

from .energy import DroneSpec, EnvironmentParams
from .model import Node, Segment, SimSettings, SkywayNetwork, validate_network


def two_node_line(
    length_m: float = 100.0,
    altitude_m: float = 20.0,
    settings: SimSettings | None = None,
) -> SkywayNetwork:
    """Two rooftops joined by one level segment."""
    net = SkywayNetwork(
        nodes=(
            Node(id="a", position=(0.0, 0.0, altitude_m)),
            Node(id="b", position=(length_m, 0.0, altitude_m)),
        ),
        segments=(Segment(id="ab", from_node="a", to_node="b"),),
        settings=settings if settings is not None else SimSettings(),
    )
    validate_network(net)
    return net


def ring(
    n: int = 6,
    radius_m: float = 300.0,
    altitude_m: float = 30.0,
    settings: SimSettings | None = None,
) -> SkywayNetwork:
    """n rooftops on a circle, consecutive pairs joined: two routes everywhere."""
    nodes = []
    for k in range(n):
        angle = 2.0 * math.pi * k / n
        nodes.append(
            Node(
                id=f"n{k}",
                position=(radius_m * math.cos(angle), radius_m * math.sin(angle), altitude_m),
            )
        )
    segments = tuple(
        Segment(id=f"s{k}", from_node=f"n{k}", to_node=f"n{(k + 1) % n}") for k in range(n)
    )
    net = SkywayNetwork(
        nodes=tuple(nodes),
        segments=segments,
        settings=settings if settings is not None else SimSettings(),
    )
    validate_network(net)
    return net


def complete_graph(
    n: int = 4,
    spacing_m: float = 250.0,
    settings: SimSettings | None = None,
) -> SkywayNetwork:
    """Every rooftop pair connected; altitudes vary so climb angles matter."""
    nodes = tuple(
        Node(
            id=f"n{k}",
            position=(
                spacing_m * math.cos(2 * math.pi * k / n),
                spacing_m * math.sin(2 * math.pi * k / n),
                20.0 + 10.0 * k,
            ),
        )
        for k in range(n)
    )
    segments = []
    idx = 0
    for i in range(n):
        for j in range(i + 1, n):
            segments.append(Segment(id=f"s{idx}", from_node=f"n{i}", to_node=f"n{j}"))
            idx += 1
    net = SkywayNetwork(
        nodes=nodes,
        segments=tuple(segments),
        settings=settings if settings is not None else SimSettings(),
    )
    validate_network(net)
    return net


def demo_city(settings: SimSettings | None = None) -> SkywayNetwork:
    """A small irregular skyway with a waypoint detour and mixed rooftop heights."""
    if settings is None:
        settings = SimSettings()
    nodes = (
        Node(id="depot", position=(0.0, 0.0, 15.0), pad_count=2, charge_power_w=300.0),
        Node(id="mall", position=(400.0, 100.0, 40.0)),
        Node(id="tower", position=(250.0, 350.0, 90.0)),
        Node(id="clinic", position=(650.0, 300.0, 25.0)),
        Node(id="campus", position=(550.0, -150.0, 30.0)),
    )
    segments = (
        Segment(id="d-m", from_node="depot", to_node="mall"),
        Segment(
            id="d-t",
            from_node="depot",
            to_node="tower",
            waypoints=((100.0, 150.0, 60.0),),
        ),
        Segment(id="m-t", from_node="mall", to_node="tower"),
        Segment(id="m-c", from_node="mall", to_node="clinic"),
        Segment(id="t-c", from_node="tower", to_node="clinic"),
        Segment(id="m-u", from_node="mall", to_node="campus"),
        Segment(id="u-c", from_node="campus", to_node="clinic"),
    )
    net = SkywayNetwork(nodes=nodes, segments=segments, settings=settings)
    validate_network(net)
    return net
