"""Skyway network model: rooftop nodes, waypoint segments, JSON persistence.

Networks are immutable values; every edit operation returns a new, validated
network.  The JSON document format is strict: unknown keys are rejected so
typos in hand-edited files surface immediately, and serialization is
canonical (sorted keys, nodes/segments ordered by id, shortest round-trip
floats) so equal networks produce identical bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple

from .energy import DroneSpec, EnvironmentParams

FORMAT_VERSION = "skysim/1"

Vec3 = tuple[float, float, float]


class NetworkError(Exception):
    """Base class for network document problems."""


class NetworkParseError(NetworkError):
    """The document is not valid JSON."""


class NetworkSchemaError(NetworkError):
    """A field is missing, has the wrong type, or is unknown; names the path."""


class NetworkValidationError(NetworkError):
    """A structural invariant is violated (dangling id, zero-length leg, ...)."""


class UnknownIdError(NetworkValidationError):
    """An operation referenced a node or segment id that does not exist."""


class DuplicateIdError(NetworkValidationError):
    """An added element reused an existing id."""


@dataclass(frozen=True)
class Node:
    """Rooftop vertex with a limited number of landing/charging pads."""

    id: str
    position: Vec3
    pad_count: int = 1
    charge_power_w: float = 200.0

    def __post_init__(self):
        object.__setattr__(self, "position", _as_vec3(self.position))


@dataclass(frozen=True)
class Segment:
    """Bidirectional aerial corridor between two nodes through waypoints."""

    id: str
    from_node: str
    to_node: str
    waypoints: tuple[Vec3, ...] = ()
    available: bool = True

    def __post_init__(self):
        object.__setattr__(
            self, "waypoints", tuple(_as_vec3(w) for w in self.waypoints)
        )

    def endpoints(self) -> tuple[str, str]:
        return self.from_node, self.to_node

    def other_end(self, node_id: str) -> str:
        if node_id == self.from_node:
            return self.to_node
        if node_id == self.to_node:
            return self.from_node
        raise UnknownIdError(f"node '{node_id}' is not an endpoint of segment '{self.id}'")


@dataclass(frozen=True)
class SimSettings:
    """Simulation parameters saved alongside the network."""

    drone: DroneSpec = field(default_factory=DroneSpec)
    environment: EnvironmentParams = field(default_factory=EnvironmentParams)
    dt_s: float = 0.1
    reserve_fraction: float = 0.1
    hover_takeoff_s: float = 5.0
    hover_landing_s: float = 10.0

    def __post_init__(self):
        if not self.dt_s > 0:
            raise ValueError("dt_s must be > 0")
        if not 0 <= self.reserve_fraction < 1:
            raise ValueError("reserve_fraction must lie in [0, 1)")
        if self.hover_takeoff_s < 0 or self.hover_landing_s < 0:
            raise ValueError("hover times must be >= 0")


@dataclass(frozen=True)
class SkywayNetwork:
    """Validated graph of nodes and segments plus the run settings.

    Nodes and segments are kept sorted by id, which makes structural
    equality insensitive to construction order and serialization canonical.
    """

    nodes: tuple[Node, ...] = ()
    segments: tuple[Segment, ...] = ()
    settings: SimSettings = field(default_factory=SimSettings)

    def __post_init__(self):
        object.__setattr__(
            self, "nodes", tuple(sorted(self.nodes, key=lambda n: n.id))
        )
        object.__setattr__(
            self, "segments", tuple(sorted(self.segments, key=lambda s: s.id))
        )

    def node(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise UnknownIdError(f"unknown node '{node_id}'")

    def segment(self, segment_id: str) -> Segment:
        for s in self.segments:
            if s.id == segment_id:
                return s
        raise UnknownIdError(f"unknown segment '{segment_id}'")

    def has_node(self, node_id: str) -> bool:
        return any(n.id == node_id for n in self.nodes)

    def has_segment(self, segment_id: str) -> bool:
        return any(s.id == segment_id for s in self.segments)

    def segments_at(self, node_id: str) -> tuple[Segment, ...]:
        return tuple(s for s in self.segments if node_id in s.endpoints())


def _as_vec3(value) -> Vec3:
    if not isinstance(value, (tuple, list)) or len(value) != 3:
        raise ValueError(f"expected a 3-vector, got {value!r}")
    x, y, z = value
    for c in (x, y, z):
        if not isinstance(c, (int, float)) or isinstance(c, bool):
            raise ValueError(f"vector components must be numbers, got {value!r}")
    return (float(x), float(y), float(z))


# ---------------------------------------------------------------------------
# Geometry


class LegProfile(NamedTuple):
    length_m: float
    climb_angle_rad: float


def polyline(net: SkywayNetwork, segment_id: str, origin_node_id: str | None = None) -> list[Vec3]:
    """Full point sequence of a segment, oriented to start at ``origin_node_id``."""
    seg = net.segment(segment_id)
    points = [net.node(seg.from_node).position, *seg.waypoints, net.node(seg.to_node).position]
    if origin_node_id is None or origin_node_id == seg.from_node:
        return points
    if origin_node_id == seg.to_node:
        return points[::-1]
    raise UnknownIdError(
        f"node '{origin_node_id}' is not an endpoint of segment '{segment_id}'"
    )


def segment_length(net: SkywayNetwork, segment_id: str) -> float:
    """Sum of Euclidean leg lengths along the segment polyline."""
    pts = polyline(net, segment_id)
    return sum(_dist(a, b) for a, b in zip(pts, pts[1:]))


def leg_profiles(
    net: SkywayNetwork, segment_id: str, origin_node_id: str | None = None
) -> list[LegProfile]:
    """Per-leg (length, climb angle) pairs in flight order.

    Reversing the direction reverses the leg order and negates every angle.
    """
    pts = polyline(net, segment_id, origin_node_id)
    legs = []
    for a, b in zip(pts, pts[1:]):
        horizontal = math.hypot(b[0] - a[0], b[1] - a[1])
        dz = b[2] - a[2]
        legs.append(LegProfile(_dist(a, b), math.atan2(dz, horizontal)))
    return legs


def _dist(a: Vec3, b: Vec3) -> float:
    return math.sqrt((b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2 + (b[2] - a[2]) ** 2)


# ---------------------------------------------------------------------------
# Validation


def validate_network(net: SkywayNetwork) -> None:
    """Check every structural invariant; raise NetworkValidationError on the first failure."""
    seen_nodes: set[str] = set()
    for node in net.nodes:
        if node.id in seen_nodes:
            raise NetworkValidationError(f"duplicate node id '{node.id}'")
        seen_nodes.add(node.id)
        if not node.id:
            raise NetworkValidationError("node id must be non-empty")
        if node.pad_count < 1:
            raise NetworkValidationError(
                f"node '{node.id}': pad_count must be >= 1, got {node.pad_count}"
            )
        if node.position[2] < 0:
            raise NetworkValidationError(
                f"node '{node.id}': altitude must be >= 0, got {node.position[2]}"
            )
        if node.charge_power_w < 0:
            raise NetworkValidationError(
                f"node '{node.id}': charge_power_w must be >= 0"
            )

    seen_segments: set[str] = set()
    geometries: set[tuple] = set()
    for seg in net.segments:
        if seg.id in seen_segments:
            raise NetworkValidationError(f"duplicate segment id '{seg.id}'")
        seen_segments.add(seg.id)
        if not seg.id:
            raise NetworkValidationError("segment id must be non-empty")
        if seg.from_node == seg.to_node:
            raise NetworkValidationError(
                f"segment '{seg.id}': endpoints must differ, both are '{seg.from_node}'"
            )
        for endpoint in seg.endpoints():
            if endpoint not in seen_nodes:
                raise NetworkValidationError(
                    f"segment '{seg.id}' references unknown node '{endpoint}'"
                )
        pts = polyline(net, seg.id)
        for k, (a, b) in enumerate(zip(pts, pts[1:])):
            if _dist(a, b) <= 0.0:
                raise NetworkValidationError(
                    f"segment '{seg.id}': leg {k} has zero length"
                )
        # Geometric duplicate: same unordered endpoints with the same waypoint
        # run (compared in a direction-independent orientation).
        if seg.from_node <= seg.to_node:
            geom = (seg.from_node, seg.to_node, seg.waypoints)
        else:
            geom = (seg.to_node, seg.from_node, tuple(reversed(seg.waypoints)))
        if geom in geometries:
            raise NetworkValidationError(
                f"segment '{seg.id}' duplicates another segment between "
                f"'{seg.from_node}' and '{seg.to_node}' with identical waypoints"
            )
        geometries.add(geom)


# ---------------------------------------------------------------------------
# Edit operations (each returns a new validated network)


def add_node(net: SkywayNetwork, node: Node) -> SkywayNetwork:
    if net.has_node(node.id):
        raise DuplicateIdError(f"node id '{node.id}' already exists")
    out = replace(net, nodes=net.nodes + (node,))
    validate_network(out)
    return out


def remove_node(net: SkywayNetwork, node_id: str) -> SkywayNetwork:
    """Remove a node and cascade-remove every incident segment."""
    net.node(node_id)
    out = replace(
        net,
        nodes=tuple(n for n in net.nodes if n.id != node_id),
        segments=tuple(s for s in net.segments if node_id not in s.endpoints()),
    )
    validate_network(out)
    return out


def move_node(net: SkywayNetwork, node_id: str, position: Vec3) -> SkywayNetwork:
    node = net.node(node_id)
    out = replace(
        net,
        nodes=tuple(
            replace(n, position=_as_vec3(position)) if n.id == node_id else n
            for n in net.nodes
        ),
    )
    validate_network(out)
    return out


def add_segment(net: SkywayNetwork, segment: Segment) -> SkywayNetwork:
    if net.has_segment(segment.id):
        raise DuplicateIdError(f"segment id '{segment.id}' already exists")
    if segment.from_node == segment.to_node:
        raise NetworkValidationError(
            f"segment '{segment.id}': endpoints must differ"
        )
    for endpoint in segment.endpoints():
        if not net.has_node(endpoint):
            raise UnknownIdError(f"segment '{segment.id}' references unknown node '{endpoint}'")
    out = replace(net, segments=net.segments + (segment,))
    validate_network(out)
    return out


def remove_segment(net: SkywayNetwork, segment_id: str) -> SkywayNetwork:
    net.segment(segment_id)
    out = replace(
        net, segments=tuple(s for s in net.segments if s.id != segment_id)
    )
    validate_network(out)
    return out


def set_segment_availability(
    net: SkywayNetwork, segment_id: str, available: bool
) -> SkywayNetwork:
    net.segment(segment_id)
    out = replace(
        net,
        segments=tuple(
            replace(s, available=available) if s.id == segment_id else s
            for s in net.segments
        ),
    )
    validate_network(out)
    return out


def update_settings(net: SkywayNetwork, settings: SimSettings) -> SkywayNetwork:
    out = replace(net, settings=settings)
    validate_network(out)
    return out


# ---------------------------------------------------------------------------
# JSON persistence

_DRONE_FIELDS = {
    "mass_frame_kg": float,
    "mass_battery_kg": float,
    "payload_capacity_kg": float,
    "rotor_count": int,
    "rotor_disc_area_m2": float,
    "drag_coefficient": float,
    "frontal_area_m2": float,
    "induced_power_factor": float,
    "powertrain_efficiency": float,
    "avionics_power_w": float,
    "cruise_speed_mps": float,
    "vertical_speed_mps": float,
    "battery_capacity_wh": float,
    "charge_efficiency": float,
}

_ENV_FIELDS = {"gravity_mps2": float, "air_density_kgpm3": float}


def load_network(document: bytes | str) -> SkywayNetwork:
    """Parse, schema-check, and validate a network document."""
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise NetworkParseError(f"document is not UTF-8: {exc}") from exc
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise NetworkParseError(f"malformed JSON: {exc}") from exc
    return network_from_document(doc)


def network_from_document(doc) -> SkywayNetwork:
    obj = _expect_object(doc, "$")
    _reject_unknown(obj, {"format", "nodes", "segments", "settings"}, "$")
    fmt = _expect(obj, "format", str, "$")
    if fmt != FORMAT_VERSION:
        raise NetworkSchemaError(
            f"$.format: expected '{FORMAT_VERSION}', got '{fmt}'"
        )
    nodes = []
    for i, item in enumerate(_expect(obj, "nodes", list, "$")):
        path = f"$.nodes[{i}]"
        node_obj = _expect_object(item, path)
        _reject_unknown(node_obj, {"id", "position", "pad_count", "charge_power_w"}, path)
        nodes.append(
            Node(
                id=_expect(node_obj, "id", str, path),
                position=_expect_vec3(node_obj, "position", path),
                pad_count=_expect(node_obj, "pad_count", int, path),
                charge_power_w=_expect_number(node_obj, "charge_power_w", path),
            )
        )
    segments = []
    for i, item in enumerate(_expect(obj, "segments", list, "$")):
        path = f"$.segments[{i}]"
        seg_obj = _expect_object(item, path)
        _reject_unknown(seg_obj, {"id", "from", "to", "waypoints", "available"}, path)
        raw_wps = _expect(seg_obj, "waypoints", list, path)
        waypoints = tuple(
            _coerce_vec3(w, f"{path}.waypoints[{k}]") for k, w in enumerate(raw_wps)
        )
        segments.append(
            Segment(
                id=_expect(seg_obj, "id", str, path),
                from_node=_expect(seg_obj, "from", str, path),
                to_node=_expect(seg_obj, "to", str, path),
                waypoints=waypoints,
                available=_expect(seg_obj, "available", bool, path),
            )
        )
    settings = settings_from_document(_expect(obj, "settings", dict, "$"), "$.settings")
    net = SkywayNetwork(nodes=tuple(nodes), segments=tuple(segments), settings=settings)
    validate_network(net)
    return net


def settings_from_document(obj, path: str = "$.settings") -> SimSettings:
    obj = _expect_object(obj, path)
    _reject_unknown(
        obj,
        {"dt_s", "reserve_fraction", "hover_takeoff_s", "hover_landing_s", "drone", "environment"},
        path,
    )
    drone_obj = _expect_object(_expect(obj, "drone", dict, path), f"{path}.drone")
    _reject_unknown(drone_obj, set(_DRONE_FIELDS), f"{path}.drone")
    drone_kwargs = {}
    for name, kind in _DRONE_FIELDS.items():
        if kind is int:
            drone_kwargs[name] = _expect(drone_obj, name, int, f"{path}.drone")
        else:
            drone_kwargs[name] = _expect_number(drone_obj, name, f"{path}.drone")
    env_obj = _expect_object(_expect(obj, "environment", dict, path), f"{path}.environment")
    _reject_unknown(env_obj, set(_ENV_FIELDS), f"{path}.environment")
    env_kwargs = {
        name: _expect_number(env_obj, name, f"{path}.environment") for name in _ENV_FIELDS
    }
    try:
        return SimSettings(
            drone=DroneSpec(**drone_kwargs),
            environment=EnvironmentParams(**env_kwargs),
            dt_s=_expect_number(obj, "dt_s", path),
            reserve_fraction=_expect_number(obj, "reserve_fraction", path),
            hover_takeoff_s=_expect_number(obj, "hover_takeoff_s", path),
            hover_landing_s=_expect_number(obj, "hover_landing_s", path),
        )
    except ValueError as exc:
        raise NetworkValidationError(f"{path}: {exc}") from exc


def network_to_document(net: SkywayNetwork) -> dict:
    return {
        "format": FORMAT_VERSION,
        "nodes": [
            {
                "id": n.id,
                "position": list(n.position),
                "pad_count": n.pad_count,
                "charge_power_w": n.charge_power_w,
            }
            for n in net.nodes
        ],
        "segments": [
            {
                "id": s.id,
                "from": s.from_node,
                "to": s.to_node,
                "waypoints": [list(w) for w in s.waypoints],
                "available": s.available,
            }
            for s in net.segments
        ],
        "settings": settings_to_document(net.settings),
    }


def settings_to_document(settings: SimSettings) -> dict:
    return {
        "dt_s": settings.dt_s,
        "reserve_fraction": settings.reserve_fraction,
        "hover_takeoff_s": settings.hover_takeoff_s,
        "hover_landing_s": settings.hover_landing_s,
        "drone": {name: getattr(settings.drone, name) for name in _DRONE_FIELDS},
        "environment": {name: getattr(settings.environment, name) for name in _ENV_FIELDS},
    }


def save_network(net: SkywayNetwork) -> bytes:
    """Canonical serialization: sorted keys, id-ordered elements, stable floats."""
    doc = network_to_document(net)
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# Strict schema helpers


def _expect_object(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise NetworkSchemaError(f"{path}: expected an object, got {type(value).__name__}")
    return value


def _reject_unknown(obj: dict, allowed: set[str], path: str) -> None:
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise NetworkSchemaError(f"{path}: unknown field '{unknown[0]}'")


def _expect(obj: dict, key: str, kind: type, path: str):
    if key not in obj:
        raise NetworkSchemaError(f"{path}.{key}: missing required field")
    value = obj[key]
    if kind is int and isinstance(value, bool):
        raise NetworkSchemaError(f"{path}.{key}: expected int, got bool")
    if not isinstance(value, kind):
        raise NetworkSchemaError(
            f"{path}.{key}: expected {kind.__name__}, got {type(value).__name__}"
        )
    return value


def _expect_number(obj: dict, key: str, path: str) -> float:
    if key not in obj:
        raise NetworkSchemaError(f"{path}.{key}: missing required field")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise NetworkSchemaError(
            f"{path}.{key}: expected number, got {type(value).__name__}"
        )
    return float(value)


def _expect_vec3(obj: dict, key: str, path: str) -> Vec3:
    if key not in obj:
        raise NetworkSchemaError(f"{path}.{key}: missing required field")
    return _coerce_vec3(obj[key], f"{path}.{key}")


def _coerce_vec3(value, path: str) -> Vec3:
    try:
        return _as_vec3(value)
    except ValueError as exc:
        raise NetworkSchemaError(f"{path}: {exc}") from exc
