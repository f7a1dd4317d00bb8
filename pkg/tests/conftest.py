"""Shared fixtures: small networks, scripted controllers, run helpers."""

from __future__ import annotations

import random

import pytest

from skysim.composer import GreedyReactivePolicy
from skysim.energy import DroneSpec, EnvironmentParams
from skysim.engine import Scenario, World, parse_scenario
from skysim.fixtures import ring, two_node_line
from skysim.model import Node, Segment, SimSettings, SkywayNetwork, validate_network
from skysim.protocol import (
    PROTOCOL_VERSION,
    Arrival,
    Decision,
    Hello,
    InProcessController,
    Ready,
)
from skysim.telemetry import TelemetryLog


@pytest.fixture
def zero_hover_settings() -> SimSettings:
    return SimSettings(hover_takeoff_s=0.0, hover_landing_s=0.0)


@pytest.fixture
def line_net(zero_hover_settings) -> SkywayNetwork:
    return two_node_line(settings=zero_hover_settings)


@pytest.fixture
def ring_net() -> SkywayNetwork:
    return ring(6)


def run_greedy(net, scenario_doc, dt_override=None):
    scenario = scenario_doc if isinstance(scenario_doc, Scenario) else parse_scenario(scenario_doc)
    controller = InProcessController(GreedyReactivePolicy())
    world = World(net, scenario, controller, dt_override=dt_override)
    return world.run()


def single_request(origin="a", destination="b", payload=1.0, swarm_size=1, release=0.0, **extra):
    doc = {
        "requests": [
            {
                "id": "r1",
                "origin": origin,
                "destination": destination,
                "payload_kg": payload,
                "swarm_size": swarm_size,
                "release_time_s": release,
            }
        ],
        "faults": [],
        "max_time_s": 3600,
        "seed": 42,
    }
    doc.update(extra)
    return doc


class ScriptedPolicy:
    """Replays a fixed list of decisions and records everything it sees."""

    def __init__(self, decisions):
        self.decisions = list(decisions)
        self.seen = []

    def on_message(self, message):
        self.seen.append(message)
        if isinstance(message, Hello):
            return Ready(protocol_version=PROTOCOL_VERSION)
        if isinstance(message, Arrival):
            if not self.decisions:
                raise AssertionError("scripted policy ran out of decisions")
            action = self.decisions.pop(0)
            if callable(action):
                return action(message)
            return action
        return None


def random_network(rng: random.Random, max_nodes=8, max_segments=12) -> SkywayNetwork:
    """Connected-ish random network with varied altitudes and availability."""
    n = rng.randint(2, max_nodes)
    nodes = tuple(
        Node(
            id=f"n{k}",
            position=(
                rng.uniform(-400, 400),
                rng.uniform(-400, 400),
                rng.uniform(5, 120),
            ),
            pad_count=rng.randint(1, 3),
            charge_power_w=rng.choice([100.0, 200.0, 400.0]),
        )
        for k in range(n)
    )
    segments = []
    seen_pairs = set()
    # A spanning chain first so most node pairs are reachable.
    order = list(range(n))
    rng.shuffle(order)
    for i in range(n - 1):
        a, b = order[i], order[i + 1]
        seen_pairs.add((min(a, b), max(a, b)))
        segments.append(Segment(id=f"s{len(segments)}", from_node=f"n{a}", to_node=f"n{b}"))
    attempts = 0
    target = rng.randint(n - 1, max_segments)
    while len(segments) < target and attempts < 40:
        attempts += 1
        a, b = rng.randrange(n), rng.randrange(n)
        if a == b or (min(a, b), max(a, b)) in seen_pairs:
            continue
        seen_pairs.add((min(a, b), max(a, b)))
        segments.append(Segment(id=f"s{len(segments)}", from_node=f"n{a}", to_node=f"n{b}"))
    segments = [
        s if rng.random() > 0.2 else Segment(s.id, s.from_node, s.to_node, s.waypoints, False)
        for s in segments
    ]
    net = SkywayNetwork(
        nodes=nodes,
        segments=tuple(segments),
        settings=SimSettings(
            drone=DroneSpec(battery_capacity_wh=rng.choice([50.0, 100.0, 200.0])),
            environment=EnvironmentParams(),
        ),
    )
    validate_network(net)
    return net
