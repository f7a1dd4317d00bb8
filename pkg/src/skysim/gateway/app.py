"""HTTP/WebSocket service exposing edit mode and runtime mode.

Edit endpoints mutate the in-memory network (rejected with 409 while a run
is active); runtime endpoints steer the active run session.  The WS stream
pushes telemetry frames and trip events as JSON messages at the pacing
implied by the speed multiplier.
"""

from __future__ import annotations

import asyncio
import queue
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response, WebSocket, WebSocketDisconnect

from .. import model
from ..composer import BUILTIN_POLICIES
from ..engine import Scenario, ScenarioError, World, parse_scenario
from ..protocol import InProcessController, TcpControllerServer
from ..telemetry import export_events_csv, export_frames_csv
from .runs import RunSession


def build_controller(spec: str, accept_timeout_s: float | None = None):
    """Parse a controller spec: 'builtin:<name>' or 'tcp:<host>:<port>'."""
    scheme, _, rest = spec.partition(":")
    if scheme == "builtin":
        if rest not in BUILTIN_POLICIES:
            known = ", ".join(sorted(BUILTIN_POLICIES))
            raise ValueError(f"unknown builtin controller '{rest}' (have: {known})")
        return InProcessController(BUILTIN_POLICIES[rest]())
    if scheme == "tcp":
        host, _, port = rest.rpartition(":")
        if not host or not port.isdigit():
            raise ValueError(f"tcp controller spec must be tcp:<host>:<port>, got '{spec}'")
        return TcpControllerServer(host=host, port=int(port), accept_timeout_s=accept_timeout_s)
    raise ValueError(f"unknown controller spec '{spec}'")


class GatewayState:
    def __init__(self, network: model.SkywayNetwork):
        self.network = network
        self.session: RunSession | None = None
        self.lock = threading.RLock()

    @property
    def run_active(self) -> bool:
        return self.session is not None and self.session.active


def create_app(
    network: model.SkywayNetwork | None = None, ui_dir: str | Path | None = None
) -> FastAPI:
    state = GatewayState(network if network is not None else model.SkywayNetwork())
    app = FastAPI(title="skysim gateway")
    app.state.gateway = state

    def guard_edit() -> None:
        if state.run_active:
            raise HTTPException(status_code=409, detail="a run is active; edit mode is locked")

    def apply_edit(fn, *args) -> None:
        guard_edit()
        try:
            state.network = fn(state.network, *args)
        except model.UnknownIdError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except (model.NetworkError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    def need_session() -> RunSession:
        if state.session is None:
            raise HTTPException(status_code=409, detail="no run has been started")
        return state.session

    # -- edit mode -------------------------------------------------------

    @app.get("/network")
    def get_network():
        return Response(content=model.save_network(state.network), media_type="application/json")

    @app.put("/network")
    async def put_network(request: Request):
        guard_edit()
        body = await request.body()
        try:
            state.network = model.load_network(body)
        except model.NetworkError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {"ok": True}

    @app.post("/network/nodes")
    async def post_node(request: Request):
        payload = await _json_body(request)
        try:
            node = model.Node(
                id=_field(payload, "id", str),
                position=tuple(payload.get("position", (0.0, 0.0, 0.0))),
                pad_count=payload.get("pad_count", 1),
                charge_power_w=payload.get("charge_power_w", 200.0),
            )
        except (ValueError, TypeError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        apply_edit(model.add_node, node)
        return {"ok": True}

    @app.delete("/network/nodes/{node_id}")
    def delete_node(node_id: str):
        apply_edit(model.remove_node, node_id)
        return {"ok": True}

    @app.patch("/network/nodes/{node_id}")
    async def patch_node(node_id: str, request: Request):
        payload = await _json_body(request)
        if "position" not in payload:
            raise HTTPException(status_code=400, detail="body must carry 'position'")
        apply_edit(model.move_node, node_id, tuple(payload["position"]))
        return {"ok": True}

    @app.post("/network/segments")
    async def post_segment(request: Request):
        payload = await _json_body(request)
        try:
            segment = model.Segment(
                id=_field(payload, "id", str),
                from_node=_field(payload, "from", str),
                to_node=_field(payload, "to", str),
                waypoints=tuple(tuple(w) for w in payload.get("waypoints", ())),
                available=payload.get("available", True),
            )
        except (ValueError, TypeError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        apply_edit(model.add_segment, segment)
        return {"ok": True}

    @app.delete("/network/segments/{segment_id}")
    def delete_segment(segment_id: str):
        apply_edit(model.remove_segment, segment_id)
        return {"ok": True}

    @app.patch("/network/segments/{segment_id}")
    async def patch_segment(segment_id: str, request: Request):
        payload = await _json_body(request)
        if "available" not in payload or not isinstance(payload["available"], bool):
            raise HTTPException(status_code=400, detail="body must carry boolean 'available'")
        apply_edit(model.set_segment_availability, segment_id, payload["available"])
        return {"ok": True}

    @app.patch("/settings")
    async def patch_settings(request: Request):
        payload = await _json_body(request)
        guard_edit()
        merged = model.settings_to_document(state.network.settings)
        for key, value in payload.items():
            if key in ("drone", "environment") and isinstance(value, dict):
                merged[key] = {**merged[key], **value}
            else:
                merged[key] = value
        try:
            settings = model.settings_from_document(merged)
            state.network = model.update_settings(state.network, settings)
        except (model.NetworkError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {"ok": True}

    # -- runtime mode ------------------------------------------------------

    @app.post("/sim/start")
    async def sim_start(request: Request):
        payload = await _json_body(request)
        with state.lock:
            if state.run_active:
                raise HTTPException(status_code=409, detail="a run is already active")
            raw_scenario = payload.get("scenario")
            if raw_scenario is None:
                raise HTTPException(status_code=400, detail="body must carry 'scenario'")
            try:
                if isinstance(raw_scenario, str):
                    raw_scenario = Path(raw_scenario).read_bytes()
                scenario = parse_scenario(raw_scenario)
                controller = build_controller(payload.get("controller", "builtin:greedy"))
                world = World(state.network, scenario, controller)
            except (ScenarioError, ValueError, OSError) as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            state.session = RunSession(
                world, speed_multiplier=float(payload.get("speed_multiplier", 1.0))
            )
        return {"ok": True, "state": state.session.state}

    @app.post("/sim/pause")
    def sim_pause():
        need_session().pause()
        return {"ok": True}

    @app.post("/sim/resume")
    def sim_resume():
        need_session().resume()
        return {"ok": True}

    @app.post("/sim/speed")
    async def sim_speed(request: Request):
        payload = await _json_body(request)
        multiplier = payload.get("multiplier")
        if not isinstance(multiplier, (int, float)) or multiplier <= 0:
            raise HTTPException(status_code=400, detail="'multiplier' must be a positive number")
        need_session().set_speed(float(multiplier))
        return {"ok": True}

    @app.post("/sim/fault")
    async def sim_fault(request: Request):
        payload = await _json_body(request)
        segment_id = payload.get("segment")
        available = payload.get("available")
        if not isinstance(segment_id, str) or not isinstance(available, bool):
            raise HTTPException(status_code=400, detail="body must carry 'segment' and boolean 'available'")
        session = need_session()
        if not session.world.net.has_segment(segment_id):
            raise HTTPException(status_code=404, detail=f"unknown segment '{segment_id}'")
        session.inject_fault(segment_id, available)
        return {"ok": True}

    @app.get("/sim/status")
    def sim_status():
        if state.session is None:
            return {"type": "status", "state": "idle", "time_s": 0.0}
        return state.session.status_message()

    @app.get("/sim/export/frames.csv")
    def export_frames():
        session = need_session()
        frames, _ = session.world.log.snapshot()
        return Response(content=export_frames_csv(frames), media_type="text/csv")

    @app.get("/sim/export/events.csv")
    def export_events():
        session = need_session()
        _, events = session.world.log.snapshot()
        return Response(content=export_events_csv(events), media_type="text/csv")

    @app.websocket("/sim/stream")
    async def sim_stream(ws: WebSocket):
        await ws.accept()
        session = state.session
        if session is None:
            await ws.send_json({"type": "status", "state": "idle", "time_s": 0.0})
            await ws.close()
            return
        q = session.subscribe()
        try:
            while True:
                try:
                    message = q.get_nowait()
                except queue.Empty:
                    await asyncio.sleep(0.005)
                    continue
                await ws.send_json(message)
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            session.unsubscribe(q)

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


async def _json_body(request: Request) -> dict:
    try:
        payload = await request.json()
    except Exception as exc:
        raise HTTPException(status_code=400, detail="body must be JSON") from exc
    if not isinstance(payload, dict):
        raise HTTPException(status_code=400, detail="body must be a JSON object")
    return payload


def _field(payload: dict, key: str, kind: type):
    if key not in payload or not isinstance(payload[key], kind):
        raise ValueError(f"'{key}' must be a {kind.__name__}")
    return payload[key]
