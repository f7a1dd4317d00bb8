"""Fixed-timestep simulation engine.

The world advances in exact dt ticks; the clock holds still while controller
decisions are outstanding, so identical inputs and seed reproduce identical
telemetry byte-for-byte regardless of transport or wall-clock pacing.
Segment availability is a departure-time gate only: a drone already flying a
segment always reaches the far node.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from . import energy as em
from .model import (
    LegProfile,
    NetworkSchemaError,
    NetworkValidationError,
    SkywayNetwork,
    Vec3,
    leg_profiles,
    network_to_document,
    polyline,
    settings_to_document,
)
from .protocol import (
    Arrival,
    ControllerHandle,
    Decision,
    End,
    Error,
    Fault as FaultMsg,
    Hello,
    ProtocolError,
    Rejection,
    PROTOCOL_VERSION,
)
from .telemetry import TelemetryFrame, TelemetryLog, TripEvent

# Phases a drone can be in; these strings appear in the frames CSV.
IDLE = "idle"
TAKEOFF = "takeoff"
CRUISE = "cruise"
LANDING = "landing"
CHARGING = "charging"
WAITING_PAD = "waiting_pad"
WAITING_DECISION = "waiting_decision"
DONE = "done"
FAILED = "failed"

_AT_NODE = (IDLE, CHARGING, WAITING_PAD, WAITING_DECISION)
_FLYING = (TAKEOFF, CRUISE, LANDING)

# Guard against controllers that loop without consuming sim time
# (e.g. endless rejected decisions at one boundary).
MAX_ASKS_PER_BOUNDARY = 100

DEFAULT_MAX_TIME_S = 3600.0
DEFAULT_STALL_TIMEOUT_S = 600.0


class ScenarioError(Exception):
    """Scenario document is malformed or inadmissible for the network."""


class SplitMix64:
    """Deterministic 64-bit stream for scenario generation needs."""

    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self._state = seed & self.MASK

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & self.MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return self.next_u64() / 2**64

    def randrange(self, n: int) -> int:
        return self.next_u64() % n


@dataclass(frozen=True)
class DeliveryRequest:
    id: str
    origin: str
    destination: str
    payload_kg: float
    swarm_size: int = 1
    release_time_s: float = 0.0

    def __post_init__(self):
        if self.origin == self.destination:
            raise ScenarioError(f"request '{self.id}': origin equals destination")
        if self.swarm_size < 1:
            raise ScenarioError(f"request '{self.id}': swarm_size must be >= 1")
        if self.payload_kg < 0:
            raise ScenarioError(f"request '{self.id}': payload_kg must be >= 0")
        if self.release_time_s < 0:
            raise ScenarioError(f"request '{self.id}': release_time_s must be >= 0")


@dataclass(frozen=True)
class FaultEvent:
    time_s: float
    segment: str
    available: bool

    def __post_init__(self):
        if self.time_s < 0:
            raise ScenarioError("fault time_s must be >= 0")


@dataclass(frozen=True)
class Scenario:
    requests: tuple[DeliveryRequest, ...] = ()
    faults: tuple[FaultEvent, ...] = ()
    max_time_s: float = DEFAULT_MAX_TIME_S
    seed: int = 0
    stall_timeout_s: float = DEFAULT_STALL_TIMEOUT_S


def parse_scenario(document: bytes | str | dict) -> Scenario:
    """Strictly parse a scenario document; unknown keys are errors."""
    if isinstance(document, (bytes, str)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"malformed JSON: {exc}") from exc
    else:
        doc = document
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    allowed = {"requests", "faults", "max_time_s", "seed", "stall_timeout_s"}
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ScenarioError(f"unknown scenario field '{unknown[0]}'")

    requests = []
    for i, item in enumerate(doc.get("requests", [])):
        if not isinstance(item, dict):
            raise ScenarioError(f"requests[{i}] must be an object")
        extra = sorted(
            set(item)
            - {"id", "origin", "destination", "payload_kg", "swarm_size", "release_time_s"}
        )
        if extra:
            raise ScenarioError(f"requests[{i}]: unknown field '{extra[0]}'")
        try:
            requests.append(
                DeliveryRequest(
                    id=_req_str(item, "id", i),
                    origin=_req_str(item, "origin", i),
                    destination=_req_str(item, "destination", i),
                    payload_kg=float(item.get("payload_kg", 0.0)),
                    swarm_size=int(item.get("swarm_size", 1)),
                    release_time_s=float(item.get("release_time_s", 0.0)),
                )
            )
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"requests[{i}]: {exc}") from exc
    ids = [r.id for r in requests]
    if len(set(ids)) != len(ids):
        raise ScenarioError("request ids must be unique")

    faults = []
    for i, item in enumerate(doc.get("faults", [])):
        if not isinstance(item, dict):
            raise ScenarioError(f"faults[{i}] must be an object")
        extra = sorted(set(item) - {"time_s", "segment", "available"})
        if extra:
            raise ScenarioError(f"faults[{i}]: unknown field '{extra[0]}'")
        try:
            faults.append(
                FaultEvent(
                    time_s=float(item["time_s"]),
                    segment=str(item["segment"]),
                    available=bool(item["available"]),
                )
            )
        except KeyError as exc:
            raise ScenarioError(f"faults[{i}]: missing field {exc}") from exc
    return Scenario(
        requests=tuple(requests),
        faults=tuple(faults),
        max_time_s=float(doc.get("max_time_s", DEFAULT_MAX_TIME_S)),
        seed=int(doc.get("seed", 0)),
        stall_timeout_s=float(doc.get("stall_timeout_s", DEFAULT_STALL_TIMEOUT_S)),
    )


def _req_str(obj: dict, key: str, index: int) -> str:
    if key not in obj or not isinstance(obj[key], str) or not obj[key]:
        raise ScenarioError(f"requests[{index}].{key}: required non-empty string")
    return obj[key]


def validate_scenario(net: SkywayNetwork, scenario: Scenario) -> None:
    """Admission checks that need the network: ids, payload capacity."""
    for req in scenario.requests:
        for node_id in (req.origin, req.destination):
            if not net.has_node(node_id):
                raise ScenarioError(f"request '{req.id}': unknown node '{node_id}'")
        if req.payload_kg > net.settings.drone.payload_capacity_kg:
            raise ScenarioError(
                f"request '{req.id}': payload {req.payload_kg} kg exceeds capacity "
                f"{net.settings.drone.payload_capacity_kg} kg"
            )
    for fault in scenario.faults:
        if not net.has_segment(fault.segment):
            raise ScenarioError(f"fault references unknown segment '{fault.segment}'")


@dataclass
class SimClock:
    """Tick counter; ``now`` is always an exact multiple of dt.

    ``speed_multiplier`` is wall-clock pacing only and never touches
    simulated trajectories.
    """

    dt_s: float
    speed_multiplier: float = 1.0
    tick: int = 0

    @property
    def now(self) -> float:
        return self.tick * self.dt_s


@dataclass
class _Drone:
    id: str
    request_id: str
    swarm_label: str
    destination: str
    payload_kg: float
    battery: em.BatteryState
    position: Vec3
    phase: str = WAITING_DECISION
    node_id: str = ""
    segment_id: str = ""
    origin_node: str = ""
    legs: list[LegProfile] = field(default_factory=list)
    points: list[Vec3] = field(default_factory=list)
    leg_index: int = 0
    leg_progress_m: float = 0.0
    timer_ticks: int = 0
    charge_target_wh: float = 0.0
    tick_power_w: float = 0.0
    failed_reason: str = ""
    arrived_pending: bool = False
    terminal_emitted: bool = False

    @property
    def terminal(self) -> bool:
        return self.phase in (DONE, FAILED)


@dataclass
class _Group:
    id: str
    request: DeliveryRequest
    member_ids: list[str]
    swarm_label: str
    spawned: bool = False
    pending_ask: bool = False
    ready_since: float = 0.0
    wait_until: float | None = None
    asks_at_boundary: int = 0
    last_progress_s: float = 0.0

    @property
    def leader_id(self) -> str:
        return self.member_ids[0]


@dataclass
class RunResult:
    frames: list[TelemetryFrame]
    events: list[TripEvent]
    summary: dict


class World:
    """One simulation run: drone state machines plus the availability map.

    Drive it with start() / step() (the gateway does) or run() in one call.
    All external inputs land through inject_fault() and the controller
    handle; there is no other mutable entry point.
    """

    def __init__(
        self,
        net: SkywayNetwork,
        scenario: Scenario,
        controller: ControllerHandle,
        log: TelemetryLog | None = None,
        dt_override: float | None = None,
    ):
        validate_scenario(net, scenario)
        self.net = net
        self.scenario = scenario
        self.controller = controller
        self.log = log if log is not None else TelemetryLog()
        settings = net.settings
        if dt_override is not None:
            if dt_override <= 0:
                raise ScenarioError("dt override must be > 0")
            self.dt = float(dt_override)
        else:
            self.dt = settings.dt_s
        self.clock = SimClock(dt_s=self.dt)
        self.rng = SplitMix64(scenario.seed)
        self.settings = settings
        self.spec = settings.drone
        self.env = settings.environment

        self.availability: dict[str, bool] = {s.id: s.available for s in net.segments}
        self._scheduled_faults = sorted(
            enumerate(scenario.faults), key=lambda item: (item[1].time_s, item[0])
        )
        self._fault_cursor = 0
        self._injected: list[tuple[str, bool]] = []

        self.drones: dict[str, _Drone] = {}
        self.groups: dict[str, _Group] = {}
        for req in scenario.requests:
            swarm_label = req.id if req.swarm_size > 1 else ""
            member_ids = [f"{req.id}-{k}" for k in range(req.swarm_size)]
            self.groups[req.id] = _Group(
                id=req.id, request=req, member_ids=member_ids, swarm_label=swarm_label
            )

        self._charging: dict[str, set[str]] = {n.id: set() for n in net.nodes}
        self._pad_queue: dict[str, list[tuple[float, str]]] = {n.id: [] for n in net.nodes}

        self._energy_cache: dict[tuple[str, str, float], float] = {}
        self._leg_power_cache: dict[tuple[str, str, int, float], float] = {}
        self._hover_power_cache: dict[float, float] = {}
        self._started = False
        self._ended = False

    # -- public driving interface ------------------------------------------

    @property
    def now(self) -> float:
        return self.clock.now

    @property
    def done(self) -> bool:
        all_spawned = all(g.spawned for g in self.groups.values())
        return all_spawned and all(d.terminal for d in self.drones.values())

    def inject_fault(self, segment_id: str, available: bool) -> None:
        """Queue a live availability toggle; applied at the next frame boundary."""
        self.net.segment(segment_id)
        self._injected.append((segment_id, available))

    def start(self) -> None:
        if self._started:
            raise RuntimeError("world already started")
        self._started = True
        self.controller.start(self._hello())
        # Faults and releases scheduled at t=0 apply before the first decision.
        self._fire_scheduled_faults(-math.inf, 0.0)
        self._spawn_due(-math.inf, 0.0)
        self._resolve_decisions()
        self._emit_frames()

    def step(self) -> None:
        """Advance exactly one dt tick, then settle all pending decisions."""
        if not self._started:
            raise RuntimeError("world not started")
        t_prev = self.now
        self.clock.tick += 1
        t = self.now
        for group in self.groups.values():
            group.asks_at_boundary = 0

        self._integrate_motion()
        self._discharge()
        self._progress_charging(t)
        self._resolve_pad_queues(t)
        self._apply_injected(t)
        self._fire_scheduled_faults(t_prev, t)
        self._spawn_due(t_prev, t)
        self._settle_arrivals(t)
        self._check_stalls(t)
        self._resolve_decisions()
        self._emit_frames()

    def run(self) -> RunResult:
        self.start()
        while not self.done and self.now < self.scenario.max_time_s - 1e-9:
            self.step()
        return self.finish()

    def finish(self) -> RunResult:
        summary = self.summary()
        if not self._ended:
            self._ended = True
            self.controller.finish(End(time_s=self.now, summary=summary))
        frames, events = self.log.snapshot()
        return RunResult(frames=frames, events=events, summary=summary)

    def summary(self) -> dict:
        drones = []
        counts = {"completed": 0, "failed": 0, "active": 0}
        for drone in self.drones.values():
            if drone.phase == DONE:
                outcome = "done"
                counts["completed"] += 1
            elif drone.phase == FAILED:
                outcome = f"failed:{drone.failed_reason}"
                counts["failed"] += 1
            else:
                outcome = f"active:{drone.phase}"
                counts["active"] += 1
            drones.append(
                {
                    "id": drone.id,
                    "request_id": drone.request_id,
                    "swarm_id": drone.swarm_label,
                    "outcome": outcome,
                    "final_soc_wh": drone.battery.soc_wh,
                    "cum_energy_wh": drone.battery.cumulative_consumed_wh,
                }
            )
        return {
            "total_time_s": self.now,
            "seed": self.scenario.seed,
            "drones": drones,
            **counts,
        }

    # -- hello --------------------------------------------------------------

    def _hello(self) -> Hello:
        requests = [
            {
                "id": r.id,
                "origin": r.origin,
                "destination": r.destination,
                "payload_kg": r.payload_kg,
                "swarm_size": r.swarm_size,
                "release_time_s": r.release_time_s,
            }
            for r in self.scenario.requests
        ]
        return Hello(
            protocol_version=PROTOCOL_VERSION,
            network=network_to_document(self.net),
            settings=settings_to_document(self.settings),
            requests=tuple(requests),
        )

    # -- step internals ------------------------------------------------------

    def _integrate_motion(self) -> None:
        for drone in self.drones.values():
            if drone.phase == TAKEOFF:
                drone.timer_ticks -= 1
                if drone.timer_ticks <= 0:
                    drone.phase = CRUISE
                    drone.leg_index = 0
                    drone.leg_progress_m = 0.0
            elif drone.phase == CRUISE:
                self._move_along_legs(drone, self.spec.cruise_speed_mps * self.dt)
            elif drone.phase == LANDING:
                drone.timer_ticks -= 1
                if drone.timer_ticks <= 0:
                    drone.arrived_pending = True

    def _move_along_legs(self, drone: _Drone, budget_m: float) -> None:
        while budget_m > 1e-12 and drone.leg_index < len(drone.legs):
            leg = drone.legs[drone.leg_index]
            remaining = leg.length_m - drone.leg_progress_m
            if budget_m < remaining - 1e-12:
                drone.leg_progress_m += budget_m
                budget_m = 0.0
            else:
                budget_m -= remaining
                drone.leg_index += 1
                drone.leg_progress_m = 0.0
        if drone.leg_index >= len(drone.legs):
            drone.position = drone.points[-1]
            ticks = self._ticks_for(self.settings.hover_landing_s)
            if ticks <= 0:
                drone.phase = LANDING
                drone.arrived_pending = True
            else:
                drone.phase = LANDING
                drone.timer_ticks = ticks
        else:
            a = drone.points[drone.leg_index]
            b = drone.points[drone.leg_index + 1]
            frac = drone.leg_progress_m / drone.legs[drone.leg_index].length_m
            drone.position = (
                a[0] + (b[0] - a[0]) * frac,
                a[1] + (b[1] - a[1]) * frac,
                a[2] + (b[2] - a[2]) * frac,
            )

    def _discharge(self) -> None:
        for drone in self.drones.values():
            drone.tick_power_w = 0.0
            if drone.terminal:
                continue
            power = self._phase_power(drone)
            if power <= 0.0:
                continue
            try:
                drone.battery = em.discharge(drone.battery, power, self.dt)
                drone.tick_power_w = power
            except em.BatteryDepletedError:
                # Spend what is left so the energy integral stays exact.
                left_wh = drone.battery.soc_wh
                drone.tick_power_w = left_wh * 3600.0 / self.dt
                drone.battery = em.BatteryState(
                    capacity_wh=drone.battery.capacity_wh,
                    soc_wh=0.0,
                    cumulative_consumed_wh=drone.battery.cumulative_consumed_wh + left_wh,
                )
                self._fail(drone, "depleted")

    def _phase_power(self, drone: _Drone) -> float:
        if drone.phase in (TAKEOFF, LANDING):
            return self._hover_power(drone.payload_kg)
        if drone.phase == CRUISE:
            idx = min(drone.leg_index, len(drone.legs) - 1)
            return self._leg_power(drone, idx)
        return 0.0

    def _progress_charging(self, t: float) -> None:
        for drone in self.drones.values():
            if drone.phase != CHARGING:
                continue
            node = self.net.node(drone.node_id)
            before = drone.battery.soc_wh
            drone.battery = em.charge(
                drone.battery, node.charge_power_w, self.spec.charge_efficiency, self.dt
            )
            group = self.groups[drone.request_id]
            if drone.battery.soc_wh > before:
                group.last_progress_s = t
            if drone.battery.soc_wh >= min(
                drone.charge_target_wh, drone.battery.capacity_wh
            ):
                self._charging[drone.node_id].discard(drone.id)
                drone.phase = IDLE
                self._event(t, drone.id, "charge_end", drone.node_id)
                self._group_barrier_check(group, t)

    def _resolve_pad_queues(self, t: float) -> None:
        for node_id in sorted(self._pad_queue):
            queue = self._pad_queue[node_id]
            pads = self.net.node(node_id).pad_count
            while queue and len(self._charging[node_id]) < pads:
                _, drone_id = queue.pop(0)
                drone = self.drones[drone_id]
                if drone.terminal:
                    continue
                drone.phase = CHARGING
                self._charging[node_id].add(drone_id)
                self._event(t, drone_id, "charge_start", node_id)

    def _apply_injected(self, t: float) -> None:
        injected, self._injected = self._injected, []
        for segment_id, available in injected:
            self._set_availability(t, segment_id, available)

    def _fire_scheduled_faults(self, t_prev: float, t: float) -> None:
        while self._fault_cursor < len(self._scheduled_faults):
            _, fault = self._scheduled_faults[self._fault_cursor]
            if fault.time_s > t + 1e-9:
                break
            if fault.time_s > t_prev + 1e-9 or t_prev == -math.inf:
                self._set_availability(t, fault.segment, fault.available)
            self._fault_cursor += 1

    def _set_availability(self, t: float, segment_id: str, available: bool) -> None:
        self.availability[segment_id] = available
        self.controller.notify(FaultMsg(time_s=t, segment=segment_id, available=available))

    def _spawn_due(self, t_prev: float, t: float) -> None:
        for group in self.groups.values():
            if group.spawned:
                continue
            release = group.request.release_time_s
            if release <= t + 1e-9 and (t_prev == -math.inf or release > t_prev + 1e-9):
                self._spawn_group(group, t)

    def _spawn_group(self, group: _Group, t: float) -> None:
        req = group.request
        origin = self.net.node(req.origin)
        for drone_id in group.member_ids:
            drone = _Drone(
                id=drone_id,
                request_id=req.id,
                swarm_label=group.swarm_label,
                destination=req.destination,
                payload_kg=req.payload_kg,
                battery=em.BatteryState.full(self.spec.battery_capacity_wh),
                position=origin.position,
                phase=WAITING_DECISION,
                node_id=req.origin,
            )
            self.drones[drone_id] = drone
            self._event(t, drone_id, "node_arrive", req.origin)
        group.spawned = True
        group.pending_ask = True
        group.ready_since = t
        group.last_progress_s = t

    def _settle_arrivals(self, t: float) -> None:
        for drone in self.drones.values():
            if drone.arrived_pending:
                drone.arrived_pending = False
                destination_node = drone.points[-1]
                arrival_node = self._node_at_segment_end(drone)
                self._event(t, drone.id, "segment_end", drone.segment_id)
                self._event(t, drone.id, "node_arrive", arrival_node)
                drone.phase = WAITING_DECISION
                drone.node_id = arrival_node
                drone.segment_id = ""
                drone.origin_node = ""
                drone.position = destination_node
                drone.legs = []
                drone.points = []
                group = self.groups[drone.request_id]
                group.last_progress_s = t
                self._group_barrier_check(group, t)
        # Wait decisions resume once their hold expires.
        for group in self.groups.values():
            if group.wait_until is not None and t >= group.wait_until - 1e-9:
                group.wait_until = None
                group.pending_ask = True
                group.ready_since = t

    def _node_at_segment_end(self, drone: _Drone) -> str:
        seg = self.net.segment(drone.segment_id)
        return seg.other_end(drone.origin_node)

    def _group_barrier_check(self, group: _Group, t: float) -> None:
        """A group re-asks only when every living member is back at the node."""
        members = [self.drones[d] for d in group.member_ids if d in self.drones]
        alive = [d for d in members if not d.terminal]
        if not alive:
            return
        if group.wait_until is not None:
            return
        if all(d.phase in (IDLE, WAITING_DECISION) for d in alive):
            for d in alive:
                d.phase = WAITING_DECISION
            if not group.pending_ask:
                group.pending_ask = True
                group.ready_since = t

    def _check_stalls(self, t: float) -> None:
        timeout = self.scenario.stall_timeout_s
        if timeout <= 0:
            return
        for group in self.groups.values():
            if not group.spawned:
                continue
            alive = [
                self.drones[d]
                for d in group.member_ids
                if d in self.drones and not self.drones[d].terminal
            ]
            if not alive:
                continue
            if all(d.phase in _AT_NODE for d in alive) and (
                t - group.last_progress_s > timeout + 1e-9
            ):
                self._strand_group(group, t)

    def _strand_group(self, group: _Group, t: float) -> None:
        group.pending_ask = False
        group.wait_until = None
        for drone_id in group.member_ids:
            drone = self.drones.get(drone_id)
            if drone is not None and not drone.terminal:
                self._fail(drone, "stranded")

    def _fail(self, drone: _Drone, reason: str) -> None:
        location = drone.segment_id or drone.node_id
        drone.phase = FAILED
        drone.failed_reason = reason
        drone.arrived_pending = False
        self._charging.get(drone.node_id, set()).discard(drone.id)
        if drone.node_id in self._pad_queue:
            self._pad_queue[drone.node_id] = [
                entry for entry in self._pad_queue[drone.node_id] if entry[1] != drone.id
            ]
        drone.node_id = ""
        drone.segment_id = ""
        self._event(self.now, drone.id, "failed", location)

    # -- decisions ------------------------------------------------------------

    def _resolve_decisions(self) -> None:
        while True:
            pending = [g for g in self.groups.values() if g.pending_ask]
            if not pending:
                return
            group = min(pending, key=lambda g: (g.ready_since, g.id))
            group.pending_ask = False
            self._exchange(group)

    def _exchange(self, group: _Group) -> None:
        t = self.now
        while True:
            group.asks_at_boundary += 1
            if group.asks_at_boundary > MAX_ASKS_PER_BOUNDARY:
                self._strand_group(group, t)
                return
            arrival = self._arrival_for(group, t)
            try:
                decision = self.controller.decide(arrival)
            except ProtocolError as exc:
                self.controller.notify(Error(code=exc.code, detail=exc.detail))
                continue
            if not self._decision_targets(decision, group):
                self.controller.notify(
                    Error(
                        code="unknown-target",
                        detail=f"decision does not answer the arrival of '{arrival.drone_id}'",
                    )
                )
                continue
            outcome = self._apply_decision(group, decision, t)
            if outcome is None:
                return
            self.controller.notify(Rejection(ref=_decision_doc(decision), reason=outcome))

    def _decision_targets(self, decision: Decision, group: _Group) -> bool:
        if decision.swarm_id is not None:
            return group.swarm_label != "" and decision.swarm_id == group.swarm_label
        return decision.drone_id in group.member_ids

    def _arrival_for(self, group: _Group, t: float) -> Arrival:
        alive = [
            self.drones[d]
            for d in group.member_ids
            if d in self.drones and not self.drones[d].terminal
        ]
        soc = min(d.battery.soc_wh for d in alive)
        leader = alive[0]
        return Arrival(
            time_s=t,
            drone_id=leader.id,
            swarm_id=group.swarm_label or None,
            node_id=leader.node_id,
            soc_wh=soc,
            payload_kg=leader.payload_kg,
            availability=dict(self.availability),
        )

    def _apply_decision(self, group: _Group, decision: Decision, t: float) -> str | None:
        """Apply one decision; returns a rejection reason or None on success."""
        alive = [
            self.drones[d]
            for d in group.member_ids
            if d in self.drones and not self.drones[d].terminal
        ]
        node_id = alive[0].node_id
        if decision.action == "traverse":
            if not self.net.has_segment(decision.segment):
                return f"unknown segment '{decision.segment}'"
            seg = self.net.segment(decision.segment)
            if node_id not in seg.endpoints():
                return f"segment '{seg.id}' is not incident to node '{node_id}'"
            if not self.availability.get(seg.id, False):
                return f"segment '{seg.id}' is unavailable"
            needed = self._segment_energy(seg.id, node_id, alive[0].payload_kg) * (
                1.0 + self.settings.reserve_fraction
            )
            for drone in alive:
                if drone.battery.soc_wh < needed:
                    return (
                        f"insufficient charge on '{drone.id}': "
                        f"{drone.battery.soc_wh:.3f} Wh < required {needed:.3f} Wh"
                    )
            for drone in alive:
                self._depart(drone, seg.id, node_id, t)
            group.last_progress_s = t
            return None
        if decision.action == "charge":
            target = min(decision.target_wh, self.spec.battery_capacity_wh)
            all_ready = True
            for drone in alive:
                if drone.battery.soc_wh >= target:
                    self._event(t, drone.id, "charge_start", node_id)
                    self._event(t, drone.id, "charge_end", node_id)
                    drone.phase = WAITING_DECISION
                else:
                    drone.charge_target_wh = target
                    drone.phase = WAITING_PAD
                    self._enqueue_pad(node_id, t, drone.id)
                    all_ready = False
            if all_ready:
                group.pending_ask = True
                group.ready_since = t
            else:
                self._resolve_pad_queues(t)
            return None
        if decision.action == "wait":
            group.wait_until = t + decision.duration_s
            for drone in alive:
                drone.phase = IDLE
            if decision.duration_s <= 0:
                group.wait_until = None
                group.pending_ask = True
                group.ready_since = t
            return None
        if decision.action == "complete":
            if node_id != group.request.destination:
                return (
                    f"complete at '{node_id}' but destination is "
                    f"'{group.request.destination}'"
                )
            for drone in alive:
                drone.phase = DONE
                drone.node_id = ""
                self._event(t, drone.id, "complete", node_id)
            return None
        return f"unsupported action '{decision.action}'"

    def _enqueue_pad(self, node_id: str, t: float, drone_id: str) -> None:
        queue = self._pad_queue[node_id]
        queue.append((t, drone_id))
        queue.sort(key=lambda entry: (entry[0], entry[1]))

    def _depart(self, drone: _Drone, segment_id: str, origin: str, t: float) -> None:
        self._event(t, drone.id, "node_depart", origin)
        self._event(t, drone.id, "segment_start", segment_id)
        drone.node_id = ""
        drone.segment_id = segment_id
        drone.origin_node = origin
        drone.points = polyline(self.net, segment_id, origin)
        drone.legs = leg_profiles(self.net, segment_id, origin)
        drone.leg_index = 0
        drone.leg_progress_m = 0.0
        drone.position = drone.points[0]
        ticks = self._ticks_for(self.settings.hover_takeoff_s)
        if ticks > 0:
            drone.phase = TAKEOFF
            drone.timer_ticks = ticks
        else:
            drone.phase = CRUISE

    # -- telemetry -------------------------------------------------------------

    def _emit_frames(self) -> None:
        t = self.now
        for drone in self.drones.values():
            if drone.terminal_emitted:
                continue
            if drone.terminal:
                drone.terminal_emitted = True
            speed = self.spec.cruise_speed_mps if drone.phase == CRUISE else 0.0
            self.log.record_frame(
                TelemetryFrame(
                    time_s=t,
                    drone_id=drone.id,
                    swarm_id=drone.swarm_label,
                    x_m=drone.position[0],
                    y_m=drone.position[1],
                    z_m=drone.position[2],
                    phase=drone.phase,
                    speed_mps=speed,
                    power_w=drone.tick_power_w,
                    soc_wh=drone.battery.soc_wh,
                    soc_pct=drone.battery.soc_pct,
                    cum_energy_wh=drone.battery.cumulative_consumed_wh,
                    node_id=drone.node_id,
                    segment_id=drone.segment_id,
                    payload_kg=drone.payload_kg,
                )
            )

    def _event(self, t: float, drone_id: str, kind: str, location: str) -> None:
        self.log.record_event(
            TripEvent(time_s=t, drone_id=drone_id, kind=kind, location_id=location)
        )

    # -- cached physics ----------------------------------------------------------

    def _ticks_for(self, duration_s: float) -> int:
        if duration_s <= 0:
            return 0
        return max(1, math.ceil(duration_s / self.dt - 1e-9))

    def _segment_energy(self, segment_id: str, origin: str, payload_kg: float) -> float:
        key = (segment_id, origin, payload_kg)
        if key not in self._energy_cache:
            legs = leg_profiles(self.net, segment_id, origin)
            self._energy_cache[key] = em.segment_energy(
                self.spec,
                self.env,
                legs,
                payload_kg,
                self.settings.hover_takeoff_s,
                self.settings.hover_landing_s,
            )
        return self._energy_cache[key]

    def _leg_power(self, drone: _Drone, leg_index: int) -> float:
        key = (drone.segment_id, drone.origin_node, leg_index, drone.payload_kg)
        if key not in self._leg_power_cache:
            leg = drone.legs[leg_index]
            self._leg_power_cache[key] = em.electric_power(
                self.spec,
                self.env,
                em.FlightPoint(
                    self.spec.cruise_speed_mps,
                    leg.climb_angle_rad,
                    self.spec.total_mass_kg(drone.payload_kg),
                ),
            )
        return self._leg_power_cache[key]

    def _hover_power(self, payload_kg: float) -> float:
        if payload_kg not in self._hover_power_cache:
            self._hover_power_cache[payload_kg] = em.hover_power(
                self.spec, self.env, self.spec.total_mass_kg(payload_kg)
            )
        return self._hover_power_cache[payload_kg]


def _decision_doc(decision: Decision) -> dict:
    doc = {"type": "decision", "action": decision.action}
    for key in ("drone_id", "swarm_id", "segment", "target_wh", "duration_s"):
        value = getattr(decision, key)
        if value is not None:
            doc[key] = value
    return doc


def run(
    net: SkywayNetwork,
    scenario: Scenario,
    controller: ControllerHandle,
    dt_override: float | None = None,
) -> RunResult:
    """Run a scenario to completion and return its telemetry and summary."""
    world = World(net, scenario, controller, dt_override=dt_override)
    return world.run()
