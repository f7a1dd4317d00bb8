"""Run telemetry: per-frame drone records, trip milestones, CSV export.

Exports are byte-stable: fixed 6-decimal floats, rows sorted by
(time, drone id), '\\n' line endings.  Identical runs therefore serialize to
identical bytes, which is what the replay tests compare.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

FRAMES_HEADER = (
    "time_s,drone_id,swarm_id,x_m,y_m,z_m,phase,speed_mps,power_w,"
    "soc_wh,soc_pct,cum_energy_wh,node_id,segment_id,payload_kg"
)
EVENTS_HEADER = "time_s,drone_id,kind,location_id,duration_s"

EVENT_KINDS = (
    "node_arrive",
    "node_depart",
    "segment_start",
    "segment_end",
    "charge_start",
    "charge_end",
    "complete",
    "failed",
)

# Closing kind -> the opening kind whose timestamp defines the duration.
_PAIRED = {
    "node_depart": "node_arrive",
    "segment_end": "segment_start",
    "charge_end": "charge_start",
}


@dataclass(frozen=True)
class TelemetryFrame:
    time_s: float
    drone_id: str
    swarm_id: str
    x_m: float
    y_m: float
    z_m: float
    phase: str
    speed_mps: float
    power_w: float
    soc_wh: float
    soc_pct: float
    cum_energy_wh: float
    node_id: str
    segment_id: str
    payload_kg: float


@dataclass(frozen=True)
class TripEvent:
    time_s: float
    drone_id: str
    kind: str
    location_id: str

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown trip event kind '{self.kind}'")


@dataclass
class TelemetryLog:
    """Accumulates a run's frames and events; thread-safe for one writer."""

    frames: list[TelemetryFrame] = field(default_factory=list)
    events: list[TripEvent] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def record_frame(self, frame: TelemetryFrame) -> None:
        with self._lock:
            self.frames.append(frame)

    def record_event(self, event: TripEvent) -> None:
        with self._lock:
            self.events.append(event)

    def snapshot(self) -> tuple[list[TelemetryFrame], list[TripEvent]]:
        with self._lock:
            return list(self.frames), list(self.events)


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def export_frames_csv(frames: list[TelemetryFrame]) -> bytes:
    rows = [FRAMES_HEADER]
    for f in sorted(frames, key=lambda f: (f.time_s, f.drone_id)):
        rows.append(
            ",".join(
                (
                    _fmt(f.time_s),
                    f.drone_id,
                    f.swarm_id,
                    _fmt(f.x_m),
                    _fmt(f.y_m),
                    _fmt(f.z_m),
                    f.phase,
                    _fmt(f.speed_mps),
                    _fmt(f.power_w),
                    _fmt(f.soc_wh),
                    _fmt(f.soc_pct),
                    _fmt(f.cum_energy_wh),
                    f.node_id,
                    f.segment_id,
                    _fmt(f.payload_kg),
                )
            )
        )
    return ("\n".join(rows) + "\n").encode("utf-8")


def export_events_csv(events: list[TripEvent]) -> bytes:
    """Events CSV with derived durations on each closing event.

    Dwell lands on node_depart, travel on segment_end, charge time on
    charge_end; opening and terminal events leave the duration blank.
    """
    ordered = sorted(
        enumerate(events), key=lambda item: (item[1].time_s, item[1].drone_id, item[0])
    )
    open_times: dict[tuple[str, str], float] = {}
    rows = [EVENTS_HEADER]
    for _, ev in ordered:
        duration = ""
        opener = _PAIRED.get(ev.kind)
        if opener is not None:
            start = open_times.pop((ev.drone_id, opener), None)
            if start is not None:
                duration = _fmt(ev.time_s - start)
        elif ev.kind in ("node_arrive", "segment_start", "charge_start"):
            open_times[(ev.drone_id, ev.kind)] = ev.time_s
        rows.append(
            ",".join((_fmt(ev.time_s), ev.drone_id, ev.kind, ev.location_id, duration))
        )
    return ("\n".join(rows) + "\n").encode("utf-8")
