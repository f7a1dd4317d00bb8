"""Service composition: energy-optimal path search and built-in controllers.

Costs are traversal energies from the power model at cruise speed, direction
dependent because climb angles flip when a segment is flown the other way.
Recharge-to-full is assumed available at every node, so feasibility is a
per-segment cap (usable battery capacity) and path cost is a plain sum.

Ties are broken by (fewer segments, then lexicographic segment-id sequence),
which makes the returned path unique and replays deterministic.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import Mapping

from . import protocol
from .energy import segment_energy
from .model import SkywayNetwork, leg_profiles, load_network, network_from_document
from .protocol import Arrival, Decision, Fault, Hello, Message, Ready


@dataclass(frozen=True)
class CompositionQuery:
    """One routing question: a snapshot, endpoints, payload, battery cap."""

    availability: Mapping[str, bool]
    origin: str
    destination: str
    payload_kg: float
    usable_capacity_wh: float

    def __post_init__(self):
        if self.usable_capacity_wh <= 0:
            raise ValueError("usable_capacity_wh must be > 0")


@dataclass(frozen=True)
class PathStep:
    segment_id: str
    from_node: str
    to_node: str
    energy_wh: float


@dataclass(frozen=True)
class ComposedPath:
    steps: tuple[PathStep, ...]
    total_energy_wh: float

    @property
    def segment_ids(self) -> tuple[str, ...]:
        return tuple(step.segment_id for step in self.steps)


def edge_energies(net: SkywayNetwork, query: CompositionQuery) -> dict[tuple[str, str], float]:
    """Traversal energy for every available (segment, origin-node) pair."""
    settings = net.settings
    out: dict[tuple[str, str], float] = {}
    for seg in net.segments:
        if not query.availability.get(seg.id, False):
            continue
        for origin in seg.endpoints():
            legs = leg_profiles(net, seg.id, origin)
            out[(seg.id, origin)] = segment_energy(
                settings.drone,
                settings.environment,
                legs,
                query.payload_kg,
                settings.hover_takeoff_s,
                settings.hover_landing_s,
            )
    return out


def compose_min_energy(net: SkywayNetwork, query: CompositionQuery) -> ComposedPath | None:
    """Minimum-total-energy path under the per-segment feasibility cap.

    Label-setting search over (energy, hop count, segment-id sequence); the
    tie-break order is preserved by appending an edge to two tied labels, so
    the first label settled at a node is its unique optimum.
    """
    _check_query(net, query)
    if query.origin == query.destination:
        return ComposedPath(steps=(), total_energy_wh=0.0)

    weights = edge_energies(net, query)
    counter = itertools.count()
    start = (0.0, 0, (), next(counter), query.origin, ())
    heap = [start]
    settled: set[str] = set()
    while heap:
        energy, hops, seq, _, node, steps = heapq.heappop(heap)
        if node in settled:
            continue
        settled.add(node)
        if node == query.destination:
            return ComposedPath(steps=steps, total_energy_wh=energy)
        for seg in net.segments_at(node):
            key = (seg.id, node)
            if key not in weights:
                continue
            weight = weights[key]
            if weight > query.usable_capacity_wh:
                continue
            nxt = seg.other_end(node)
            if nxt in settled:
                continue
            step = PathStep(seg.id, node, nxt, weight)
            heapq.heappush(
                heap,
                (
                    energy + weight,
                    hops + 1,
                    seq + (seg.id,),
                    next(counter),
                    nxt,
                    steps + (step,),
                ),
            )
    return None


def brute_force_min_energy(net: SkywayNetwork, query: CompositionQuery) -> ComposedPath | None:
    """Exhaustive simple-path enumeration; the test oracle for the search."""
    _check_query(net, query)
    if query.origin == query.destination:
        return ComposedPath(steps=(), total_energy_wh=0.0)
    weights = edge_energies(net, query)

    best: tuple[float, int, tuple[str, ...]] | None = None
    best_path: ComposedPath | None = None

    def visit(node: str, visited: frozenset[str], steps: tuple[PathStep, ...]):
        nonlocal best, best_path
        if node == query.destination:
            # Sum in path order so totals are bit-identical with the search.
            total = 0.0
            for step in steps:
                total += step.energy_wh
            key = (total, len(steps), tuple(s.segment_id for s in steps))
            if best is None or key < best:
                best = key
                best_path = ComposedPath(steps=steps, total_energy_wh=total)
            return
        for seg in net.segments_at(node):
            weight = weights.get((seg.id, node))
            if weight is None or weight > query.usable_capacity_wh:
                continue
            nxt = seg.other_end(node)
            if nxt in visited:
                continue
            visit(nxt, visited | {nxt}, steps + (PathStep(seg.id, node, nxt, weight),))

    visit(query.origin, frozenset({query.origin}), ())
    return best_path


def enumerate_simple_paths(net: SkywayNetwork, origin: str, destination: str) -> list[tuple[str, ...]]:
    """All simple paths as segment-id sequences, ignoring availability and energy."""
    paths: list[tuple[str, ...]] = []

    def visit(node: str, visited: frozenset[str], seq: tuple[str, ...]):
        if node == destination:
            paths.append(seq)
            return
        for seg in net.segments_at(node):
            nxt = seg.other_end(node)
            if nxt in visited:
                continue
            visit(nxt, visited | {nxt}, seq + (seg.id,))

    visit(origin, frozenset({origin}), ())
    return paths


def _check_query(net: SkywayNetwork, query: CompositionQuery) -> None:
    net.node(query.origin)
    net.node(query.destination)


# ---------------------------------------------------------------------------
# Built-in controller policies (message level, used via the protocol adapter)


def request_id_for(arrival: Arrival) -> str:
    """Recover the request id a drone or swarm belongs to.

    Drone ids are '<request>-<index>'; swarm arrivals carry the request id
    directly as swarm_id.
    """
    if arrival.swarm_id:
        return arrival.swarm_id
    return arrival.drone_id.rsplit("-", 1)[0]


class _PolicyBase:
    """Shared session state: parse hello, track requests, answer arrivals."""

    def __init__(self):
        self._net: SkywayNetwork | None = None
        self._requests: dict[str, dict] = {}
        self._reserve = 0.0
        self._capacity = 0.0

    def on_message(self, message: Message) -> Message | None:
        if isinstance(message, Hello):
            self._net = network_from_document(message.network)
            self._requests = {req["id"]: req for req in message.requests}
            settings = self._net.settings
            self._reserve = settings.reserve_fraction
            self._capacity = settings.drone.battery_capacity_wh
            return Ready(protocol_version=protocol.PROTOCOL_VERSION)
        if isinstance(message, Arrival):
            return self._decide(message)
        # Faults, rejections, errors, end: nothing to answer.
        return None

    def _decide(self, arrival: Arrival) -> Decision:
        raise NotImplementedError

    def _reply(self, arrival: Arrival, **kwargs) -> Decision:
        if arrival.swarm_id:
            return Decision(swarm_id=arrival.swarm_id, **kwargs)
        return Decision(drone_id=arrival.drone_id, **kwargs)

    def _destination(self, arrival: Arrival) -> str:
        req = self._requests[request_id_for(arrival)]
        return req["destination"]

    def _query(self, arrival: Arrival, destination: str) -> CompositionQuery:
        return CompositionQuery(
            availability=arrival.availability,
            origin=arrival.node_id,
            destination=destination,
            payload_kg=arrival.payload_kg,
            usable_capacity_wh=self._capacity * (1.0 - self._reserve),
        )

    def _act_on_path(self, arrival: Arrival, path: ComposedPath | None) -> Decision:
        if path is None:
            return self._reply(arrival, action="wait", duration_s=30.0)
        first = path.steps[0]
        required = first.energy_wh * (1.0 + self._reserve)
        if arrival.soc_wh < required:
            return self._reply(arrival, action="charge", target_wh=required)
        return self._reply(arrival, action="traverse", segment=first.segment_id)


class GreedyReactivePolicy(_PolicyBase):
    """Recompose the min-energy path at every arrival; charge just enough.

    This is the default controller: it reacts to availability changes the
    moment the next decision is requested.
    """

    def _decide(self, arrival: Arrival) -> Decision:
        destination = self._destination(arrival)
        if arrival.node_id == destination:
            return self._reply(arrival, action="complete")
        path = compose_min_energy(self._net, self._query(arrival, destination))
        return self._act_on_path(arrival, path)


class StaticComposeOncePolicy(_PolicyBase):
    """Compose once at the origin and never replan.

    A baseline that stalls when a planned segment fails: it waits for the
    segment to come back instead of rerouting.
    """

    def __init__(self):
        super().__init__()
        self._plans: dict[str, list[PathStep]] = {}

    def _decide(self, arrival: Arrival) -> Decision:
        destination = self._destination(arrival)
        if arrival.node_id == destination:
            return self._reply(arrival, action="complete")
        key = request_id_for(arrival)
        if key not in self._plans:
            path = compose_min_energy(self._net, self._query(arrival, destination))
            if path is None:
                return self._reply(arrival, action="wait", duration_s=30.0)
            self._plans[key] = list(path.steps)
        plan = self._plans[key]
        while plan and plan[0].from_node != arrival.node_id:
            plan.pop(0)
        if not plan:
            return self._reply(arrival, action="wait", duration_s=30.0)
        first = plan[0]
        if not arrival.availability.get(first.segment_id, False):
            return self._reply(arrival, action="wait", duration_s=30.0)
        required = first.energy_wh * (1.0 + self._reserve)
        if arrival.soc_wh < required:
            return self._reply(arrival, action="charge", target_wh=required)
        return self._reply(arrival, action="traverse", segment=first.segment_id)


BUILTIN_POLICIES = {
    "greedy": GreedyReactivePolicy,
    "static": StaticComposeOncePolicy,
}
