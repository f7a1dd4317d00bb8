"""Newline-delimited JSON control protocol.

An external process can act as the routing algorithm: the engine listens on a
TCP port, the controller connects, and every message is one UTF-8 JSON object
per line.  Built-in controllers run through the identical encode/decode path
via the in-process adapter, which is what makes transport equivalence testable.

The full grammar lives in docs/protocol.md; the example lines there are
normative fixtures exercised by the test suite.
"""

from __future__ import annotations

import json
import socket
import threading
from dataclasses import dataclass, field
from typing import Protocol as TypingProtocol

PROTOCOL_VERSION = 1
DEFAULT_PORT = 7401
DEFAULT_DECISION_TIMEOUT_S = 30.0

ACTIONS = ("traverse", "charge", "wait", "complete")


class ProtocolError(Exception):
    """A line failed to decode; ``code`` distinguishes the failure class."""

    def __init__(self, code: str, detail: str):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail


class ControllerSessionError(Exception):
    """The controller session is unusable (timeout, disconnect, bad handshake)."""


@dataclass(frozen=True)
class Hello:
    protocol_version: int
    network: dict
    settings: dict
    requests: tuple[dict, ...]


@dataclass(frozen=True)
class Ready:
    protocol_version: int


@dataclass(frozen=True)
class Arrival:
    time_s: float
    drone_id: str
    swarm_id: str | None
    node_id: str
    soc_wh: float
    payload_kg: float
    availability: dict[str, bool]


@dataclass(frozen=True)
class Decision:
    action: str
    drone_id: str | None = None
    swarm_id: str | None = None
    segment: str | None = None
    target_wh: float | None = None
    duration_s: float | None = None

    def __post_init__(self):
        if self.action not in ACTIONS:
            raise ValueError(f"unknown action '{self.action}'")
        if self.drone_id is None and self.swarm_id is None:
            raise ValueError("decision must name a drone_id or swarm_id")
        if self.action == "traverse" and not self.segment:
            raise ValueError("traverse decision requires a segment")
        if self.action == "charge" and self.target_wh is None:
            raise ValueError("charge decision requires target_wh")
        if self.action == "wait" and (self.duration_s is None or self.duration_s < 0):
            raise ValueError("wait decision requires duration_s >= 0")


@dataclass(frozen=True)
class Rejection:
    ref: dict
    reason: str


@dataclass(frozen=True)
class Fault:
    time_s: float
    segment: str
    available: bool


@dataclass(frozen=True)
class End:
    time_s: float
    summary: dict


@dataclass(frozen=True)
class Error:
    code: str
    detail: str


Message = Hello | Ready | Arrival | Decision | Rejection | Fault | End | Error


def encode(msg: Message) -> bytes:
    """One message -> one '\\n'-terminated UTF-8 JSON line."""
    if isinstance(msg, Hello):
        body = {
            "type": "hello",
            "protocol_version": msg.protocol_version,
            "network": msg.network,
            "settings": msg.settings,
            "requests": list(msg.requests),
        }
    elif isinstance(msg, Ready):
        body = {"type": "ready", "protocol_version": msg.protocol_version}
    elif isinstance(msg, Arrival):
        body = {
            "type": "arrival",
            "time_s": msg.time_s,
            "drone_id": msg.drone_id,
            "swarm_id": msg.swarm_id,
            "node_id": msg.node_id,
            "soc_wh": msg.soc_wh,
            "payload_kg": msg.payload_kg,
            "availability": msg.availability,
        }
    elif isinstance(msg, Decision):
        body = {"type": "decision", "action": msg.action}
        for key in ("drone_id", "swarm_id", "segment", "target_wh", "duration_s"):
            value = getattr(msg, key)
            if value is not None:
                body[key] = value
    elif isinstance(msg, Rejection):
        body = {"type": "rejection", "ref": msg.ref, "reason": msg.reason}
    elif isinstance(msg, Fault):
        body = {
            "type": "fault",
            "time_s": msg.time_s,
            "segment": msg.segment,
            "available": msg.available,
        }
    elif isinstance(msg, End):
        body = {"type": "end", "time_s": msg.time_s, "summary": msg.summary}
    elif isinstance(msg, Error):
        body = {"type": "error", "code": msg.code, "detail": msg.detail}
    else:
        raise TypeError(f"not a protocol message: {msg!r}")
    line = json.dumps(body, sort_keys=True, separators=(",", ":"))
    if "\n" in line:  # json.dumps never emits raw newlines, but be explicit
        raise ProtocolError("encode", "message contains a newline")
    return line.encode("utf-8") + b"\n"


def decode(line: bytes | str) -> Message:
    """Inverse of encode: decode(encode(m)) == m for every message."""
    if isinstance(line, bytes):
        line = line.decode("utf-8", errors="replace")
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError("parse", f"malformed JSON: {exc}") from exc
    if not isinstance(obj, dict) or "type" not in obj:
        raise ProtocolError("unknown-type", "message has no 'type' field")
    mtype = obj["type"]
    try:
        if mtype == "hello":
            return Hello(
                protocol_version=_get(obj, "protocol_version", int),
                network=_get(obj, "network", dict),
                settings=_get(obj, "settings", dict),
                requests=tuple(_get(obj, "requests", list)),
            )
        if mtype == "ready":
            return Ready(protocol_version=_get(obj, "protocol_version", int))
        if mtype == "arrival":
            return Arrival(
                time_s=_num(obj, "time_s"),
                drone_id=_get(obj, "drone_id", str),
                swarm_id=_opt(obj, "swarm_id", str),
                node_id=_get(obj, "node_id", str),
                soc_wh=_num(obj, "soc_wh"),
                payload_kg=_num(obj, "payload_kg"),
                availability=_availability(obj),
            )
        if mtype == "decision":
            try:
                return Decision(
                    action=_get(obj, "action", str),
                    drone_id=_opt(obj, "drone_id", str),
                    swarm_id=_opt(obj, "swarm_id", str),
                    segment=_opt(obj, "segment", str),
                    target_wh=_opt_num(obj, "target_wh"),
                    duration_s=_opt_num(obj, "duration_s"),
                )
            except ValueError as exc:
                raise ProtocolError("bad-field", str(exc)) from exc
        if mtype == "rejection":
            return Rejection(ref=_get(obj, "ref", dict), reason=_get(obj, "reason", str))
        if mtype == "fault":
            return Fault(
                time_s=_num(obj, "time_s"),
                segment=_get(obj, "segment", str),
                available=_get(obj, "available", bool),
            )
        if mtype == "end":
            return End(time_s=_num(obj, "time_s"), summary=_get(obj, "summary", dict))
        if mtype == "error":
            return Error(code=_get(obj, "code", str), detail=_get(obj, "detail", str))
    except ProtocolError:
        raise
    raise ProtocolError("unknown-type", f"unknown message type {mtype!r}")


def _get(obj: dict, key: str, kind: type):
    if key not in obj:
        raise ProtocolError("missing-field", f"'{key}' is required")
    value = obj[key]
    if kind is int and isinstance(value, bool):
        raise ProtocolError("bad-field", f"'{key}' must be an int")
    if not isinstance(value, kind):
        raise ProtocolError(
            "bad-field", f"'{key}' must be {kind.__name__}, got {type(value).__name__}"
        )
    return value


def _num(obj: dict, key: str) -> float:
    if key not in obj:
        raise ProtocolError("missing-field", f"'{key}' is required")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProtocolError("bad-field", f"'{key}' must be a number")
    return float(value)


def _opt(obj: dict, key: str, kind: type):
    if key not in obj or obj[key] is None:
        return None
    return _get(obj, key, kind)


def _opt_num(obj: dict, key: str) -> float | None:
    if key not in obj or obj[key] is None:
        return None
    return _num(obj, key)


def _availability(obj: dict) -> dict[str, bool]:
    raw = _get(obj, "availability", dict)
    out = {}
    for key, value in raw.items():
        if not isinstance(value, bool):
            raise ProtocolError("bad-field", f"availability['{key}'] must be a bool")
        out[str(key)] = value
    return out


# ---------------------------------------------------------------------------
# Engine-side controller handles


class ControllerHandle(TypingProtocol):
    """What the engine needs from a controller, however it is transported."""

    def start(self, hello: Hello) -> None: ...

    def decide(self, arrival: Arrival) -> Decision: ...

    def notify(self, message: Fault | Rejection | Error) -> None: ...

    def finish(self, end: End) -> None: ...


class ControllerPolicy(TypingProtocol):
    """Message-in, message-out policy; what built-in controllers implement."""

    def on_message(self, message: Message) -> Message | None: ...


class InProcessController:
    """Runs a policy through the literal wire codec, minus the socket.

    Every message is encoded to a line and decoded back on both sides of the
    exchange, so an in-process policy sees byte-identical inputs to one
    running behind TCP.
    """

    def __init__(self, policy: ControllerPolicy):
        self._policy = policy

    def _roundtrip(self, msg: Message) -> Message:
        return decode(encode(msg))

    def start(self, hello: Hello) -> None:
        reply = self._policy.on_message(self._roundtrip(hello))
        if reply is None:
            raise ControllerSessionError("controller did not acknowledge hello")
        reply = self._roundtrip(reply)
        if not isinstance(reply, Ready):
            raise ControllerSessionError(f"expected ready, got {reply!r}")
        if reply.protocol_version != PROTOCOL_VERSION:
            raise ControllerSessionError(
                f"protocol version mismatch: {reply.protocol_version}"
            )

    def decide(self, arrival: Arrival) -> Decision:
        reply = self._policy.on_message(self._roundtrip(arrival))
        if reply is None:
            raise ControllerSessionError("controller returned no decision")
        reply = self._roundtrip(reply)
        if not isinstance(reply, Decision):
            raise ControllerSessionError(f"expected decision, got {reply!r}")
        return reply

    def notify(self, message: Fault | Rejection | Error) -> None:
        self._policy.on_message(self._roundtrip(message))

    def finish(self, end: End) -> None:
        self._policy.on_message(self._roundtrip(end))


class TcpControllerServer:
    """Engine side of a TCP session: listen, handshake, exchange lines.

    One session at a time.  A wall-clock timeout guards every decision read;
    expiry or disconnect raises ControllerSessionError and aborts the run.
    """

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = DEFAULT_PORT,
        decision_timeout_s: float = DEFAULT_DECISION_TIMEOUT_S,
        accept_timeout_s: float | None = None,
    ):
        self._address = (host, port)
        self._timeout = decision_timeout_s
        self._accept_timeout = accept_timeout_s
        self._listener: socket.socket | None = None
        self._conn: socket.socket | None = None
        self._reader = None
        self._write_lock = threading.Lock()

    def listen(self) -> tuple[str, int]:
        """Bind and listen; returns the bound address (useful with port 0)."""
        listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        listener.bind(self._address)
        listener.listen(1)
        self._listener = listener
        return listener.getsockname()

    def start(self, hello: Hello) -> None:
        if self._listener is None:
            self.listen()
        self._listener.settimeout(self._accept_timeout)
        try:
            conn, _ = self._listener.accept()
        except socket.timeout as exc:
            raise ControllerSessionError("no controller connected") from exc
        conn.settimeout(self._timeout)
        self._conn = conn
        self._reader = conn.makefile("rb")
        self._send(hello)
        reply = self._recv()
        if not isinstance(reply, Ready):
            self._send(Error(code="handshake", detail="expected a ready message"))
            raise ControllerSessionError(f"expected ready, got {reply!r}")
        if reply.protocol_version != PROTOCOL_VERSION:
            self._send(
                Error(
                    code="version",
                    detail=f"engine speaks {PROTOCOL_VERSION}, controller {reply.protocol_version}",
                )
            )
            raise ControllerSessionError(
                f"protocol version mismatch: {reply.protocol_version}"
            )

    def decide(self, arrival: Arrival) -> Decision:
        self._send(arrival)
        reply = self._recv()
        if not isinstance(reply, Decision):
            raise ProtocolError("bad-field", f"expected a decision, got {type(reply).__name__}")
        return reply

    def notify(self, message: Fault | Rejection | Error) -> None:
        self._send(message)

    def finish(self, end: End) -> None:
        try:
            self._send(end)
        finally:
            self.close()

    def close(self) -> None:
        for sock in (self._conn, self._listener):
            if sock is not None:
                try:
                    sock.close()
                except OSError:
                    pass
        self._conn = None
        self._listener = None
        self._reader = None

    def _send(self, msg: Message) -> None:
        if self._conn is None:
            raise ControllerSessionError("controller session is not connected")
        try:
            with self._write_lock:
                self._conn.sendall(encode(msg))
        except OSError as exc:
            raise ControllerSessionError(f"controller connection lost: {exc}") from exc

    def _recv(self) -> Message:
        try:
            line = self._reader.readline()
        except socket.timeout as exc:
            raise ControllerSessionError(
                f"controller did not answer within {self._timeout} s"
            ) from exc
        except OSError as exc:
            raise ControllerSessionError(f"controller connection lost: {exc}") from exc
        if not line:
            raise ControllerSessionError("controller disconnected")
        return decode(line)
