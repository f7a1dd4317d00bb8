"""Run sessions: one simulation driven on a background thread.

All external inputs (pause/resume, speed, fault injection) are serialized
through a single command queue and applied at frame boundaries, so concurrent
API calls can never corrupt engine state.  Wall-clock pacing follows the
speed multiplier but simulated trajectories ignore it entirely.
"""

from __future__ import annotations

import queue
import threading
import time

from ..engine import World
from ..telemetry import TelemetryFrame, TripEvent

PAUSED = "paused"
RUNNING = "running"
FINISHED = "finished"
ABORTED = "aborted"


def frame_message(frame: TelemetryFrame) -> dict:
    return {
        "type": "frame",
        "time_s": frame.time_s,
        "drone_id": frame.drone_id,
        "swarm_id": frame.swarm_id,
        "x_m": frame.x_m,
        "y_m": frame.y_m,
        "z_m": frame.z_m,
        "phase": frame.phase,
        "speed_mps": frame.speed_mps,
        "power_w": frame.power_w,
        "soc_wh": frame.soc_wh,
        "soc_pct": frame.soc_pct,
        "cum_energy_wh": frame.cum_energy_wh,
        "node_id": frame.node_id,
        "segment_id": frame.segment_id,
        "payload_kg": frame.payload_kg,
    }


def event_message(event: TripEvent) -> dict:
    return {
        "type": "event",
        "time_s": event.time_s,
        "drone_id": event.drone_id,
        "kind": event.kind,
        "location_id": event.location_id,
    }


class RunSession:
    """Owns one World and the thread that advances it."""

    def __init__(self, world: World, speed_multiplier: float = 1.0):
        self.world = world
        self.state = PAUSED
        self.error: str | None = None
        self._speed = speed_multiplier
        self._commands: queue.Queue = queue.Queue()
        self._subscribers: list[queue.Queue] = []
        self._sub_lock = threading.Lock()
        self._frames_sent = 0
        self._events_sent = 0
        self._thread = threading.Thread(target=self._loop, daemon=True)
        self._thread.start()

    # -- control (thread-safe) -------------------------------------------

    def pause(self) -> None:
        self._commands.put(("pause",))

    def resume(self) -> None:
        self._commands.put(("resume",))

    def set_speed(self, multiplier: float) -> None:
        if multiplier <= 0:
            raise ValueError("speed multiplier must be > 0")
        self._commands.put(("speed", multiplier))

    def inject_fault(self, segment_id: str, available: bool) -> None:
        self._commands.put(("fault", segment_id, available))

    def stop(self) -> None:
        self._commands.put(("stop",))

    @property
    def active(self) -> bool:
        return self.state in (PAUSED, RUNNING)

    @property
    def speed_multiplier(self) -> float:
        return self._speed

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=65536)
        with self._sub_lock:
            self._subscribers.append(q)
        self._offer(q, self.status_message())
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._sub_lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def status_message(self) -> dict:
        return {
            "type": "status",
            "state": self.state,
            "time_s": self.world.now,
            "speed_multiplier": self._speed,
            "error": self.error,
        }

    def join(self, timeout: float | None = None) -> None:
        self._thread.join(timeout)

    # -- run loop ------------------------------------------------------------

    def _loop(self) -> None:
        started = False
        try:
            while True:
                self._drain_commands()
                if self.state == ABORTED:
                    return
                if self.state == PAUSED:
                    time.sleep(0.005)
                    continue
                if not started:
                    # Deferred to first resume so a stream attached while
                    # paused sees every frame from t=0.
                    self.world.start()
                    started = True
                    self._broadcast_new()
                if self.world.done or self.world.now >= self.world.scenario.max_time_s - 1e-9:
                    break
                self.world.step()
                self._broadcast_new()
                time.sleep(self.world.dt / self._speed)
            self.world.finish()
            self._broadcast_new()
            self.state = FINISHED
            self._broadcast({"type": "end", "summary": self.world.summary()})
        except Exception as exc:  # surfaced via /sim/status and the stream
            self.state = ABORTED
            self.error = str(exc)
            self._broadcast({"type": "error", "detail": str(exc)})

    def _drain_commands(self) -> None:
        while True:
            try:
                cmd = self._commands.get_nowait()
            except queue.Empty:
                return
            kind = cmd[0]
            if kind == "pause" and self.state == RUNNING:
                self.state = PAUSED
                self._broadcast(self.status_message())
            elif kind == "resume" and self.state == PAUSED:
                self.state = RUNNING
                self._broadcast(self.status_message())
            elif kind == "speed":
                self._speed = cmd[1]
                self.world.clock.speed_multiplier = cmd[1]
                self._broadcast(self.status_message())
            elif kind == "fault":
                self.world.inject_fault(cmd[1], cmd[2])
            elif kind == "stop":
                self.state = ABORTED

    def _broadcast_new(self) -> None:
        frames, events = self.world.log.snapshot()
        for frame in frames[self._frames_sent :]:
            self._broadcast(frame_message(frame))
        self._frames_sent = len(frames)
        for event in events[self._events_sent :]:
            self._broadcast(event_message(event))
        self._events_sent = len(events)

    def _broadcast(self, message: dict) -> None:
        with self._sub_lock:
            subscribers = list(self._subscribers)
        for q in subscribers:
            self._offer(q, message)

    @staticmethod
    def _offer(q: queue.Queue, message: dict) -> None:
        # Slow consumers lose oldest messages rather than stalling the run.
        while True:
            try:
                q.put_nowait(message)
                return
            except queue.Full:
                try:
                    q.get_nowait()
                except queue.Empty:
                    pass
