/** Bootstrap: wire the canvas, toolbar, and panels to the gateway. */

import { GatewayClient, GatewayError } from "./api.js";
import {
  exportBlob,
  guardMoveNode,
  guardNodeId,
  guardSegment,
  importDocument,
  nextId,
} from "./editor.js";
import {
  defaultCamera,
  distanceToPolyline,
  fitCamera,
  nodeRadius,
  pan,
  screenToWorld,
  worldToScreen,
  zoomAt,
  type Camera,
} from "./projection.js";
import { draw } from "./render.js";
import { RuntimeModel, StreamBuffer, formatSimClock } from "./runtime.js";
import { Store, canEdit, canSteer, toggleFollow, type EditTool } from "./state.js";
import type { NetworkDoc, ScenarioDoc, StreamMessage, Vec3 } from "./types.js";

const api = new GatewayClient(location.origin);
const store = new Store();
const runtime = new RuntimeModel();
const buffer = new StreamBuffer();

let network: NetworkDoc | null = null;
let camera: Camera = defaultCamera();
let socket: WebSocket | null = null;
let dragging: { nodeId: string; moved: boolean } | null = null;
let panning: { x: number; y: number } | null = null;

const canvas = document.getElementById("map") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const statusLine = document.getElementById("status-line")!;
const clock = document.getElementById("clock")!;
const labelPanel = document.getElementById("label-panel")!;

function toast(text: string): void {
  statusLine.textContent = text;
}

async function refreshNetwork(fit = false): Promise<void> {
  network = await api.getNetwork();
  if (fit) {
    camera = fitCamera(network, canvas.width, canvas.height);
  }
}

function resize(): void {
  canvas.width = canvas.clientWidth * devicePixelRatio;
  canvas.height = canvas.clientHeight * devicePixelRatio;
  ctx.setTransform(devicePixelRatio, 0, 0, devicePixelRatio, 0, 0);
}

function render(): void {
  if (!network) {
    return;
  }
  buffer.drainInto(runtime);
  const state = store.get();
  if (state.followDrone) {
    const d = runtime.drones.get(state.followDrone);
    if (d) {
      camera = { ...camera, centerX: d.x, centerY: d.y };
    }
  }
  draw(
    ctx,
    canvas.clientWidth,
    canvas.clientHeight,
    camera,
    network,
    runtime.drones.values(),
    state.selection,
    state.connectFrom,
  );
  clock.textContent = `${formatSimClock(runtime.simTime)} · ${runtime.runState}`;
  if (state.selection.kind === "drone") {
    labelPanel.textContent = runtime.labelFor(state.selection.id) ?? "";
  }
  requestAnimationFrame(render);
}

// -- hit testing -------------------------------------------------------------

function pickNode(wx: number, wy: number): string | null {
  if (!network) {
    return null;
  }
  for (const node of network.nodes) {
    const [sx, sy] = worldToScreen(camera, canvas.clientWidth, canvas.clientHeight, node.position);
    const [px, py] = worldToScreen(camera, canvas.clientWidth, canvas.clientHeight, [wx, wy, 0]);
    if (Math.hypot(sx - px, sy - py) <= nodeRadius(node.position[2]) + 4) {
      return node.id;
    }
  }
  return null;
}

function pickSegment(wx: number, wy: number): string | null {
  if (!network) {
    return null;
  }
  const nodeById = new Map(network.nodes.map((n) => [n.id, n]));
  let best: { id: string; d: number } | null = null;
  for (const seg of network.segments) {
    const run = [
      nodeById.get(seg.from)!.position,
      ...seg.waypoints,
      nodeById.get(seg.to)!.position,
    ];
    const d = distanceToPolyline(wx, wy, run);
    if (d * camera.zoom <= 8 && (!best || d < best.d)) {
      best = { id: seg.id, d };
    }
  }
  return best?.id ?? null;
}

function pickDrone(wx: number, wy: number): string | null {
  for (const d of runtime.drones.values()) {
    if (Math.hypot(d.x - wx, d.y - wy) * camera.zoom <= 12) {
      return d.id;
    }
  }
  return null;
}

// -- edit interactions ---------------------------------------------------------

async function editClick(wx: number, wy: number): Promise<void> {
  const state = store.get();
  if (!network || !canEdit(state)) {
    return;
  }
  try {
    if (state.tool === "add-node") {
      const id = nextId(network, "n");
      const altitude = Number((document.getElementById("alt-input") as HTMLInputElement).value) || 30;
      const position: Vec3 = [Math.round(wx), Math.round(wy), altitude];
      const guard = guardNodeId(network, id);
      if (!guard.ok) {
        toast(guard.reason!);
        return;
      }
      await api.addNode({ id, position });
      await refreshNetwork();
      toast(`added node ${id}`);
    } else if (state.tool === "connect") {
      const hit = pickNode(wx, wy);
      if (!hit) {
        return;
      }
      if (!state.connectFrom) {
        store.update({ connectFrom: hit });
        toast(`connecting from ${hit}: click the far node`);
        return;
      }
      const guard = guardSegment(network, state.connectFrom, hit);
      if (!guard.ok) {
        toast(guard.reason!);
        store.update({ connectFrom: null });
        return;
      }
      const id = nextId(network, "s");
      await api.addSegment({ id, from: state.connectFrom, to: hit });
      store.update({ connectFrom: null });
      await refreshNetwork();
      toast(`added segment ${id}`);
    } else if (state.tool === "waypoint") {
      const segId = pickSegment(wx, wy);
      if (!segId) {
        return;
      }
      const seg = network.segments.find((s) => s.id === segId)!;
      const altitude = Number((document.getElementById("alt-input") as HTMLInputElement).value) || 30;
      const waypoints: Vec3[] = [...seg.waypoints, [Math.round(wx), Math.round(wy), altitude]];
      const guard = guardSegment(
        { ...network, segments: network.segments.filter((s) => s.id !== segId) },
        seg.from,
        seg.to,
        waypoints,
      );
      if (!guard.ok) {
        toast(guard.reason!);
        return;
      }
      await api.deleteSegment(segId);
      await api.addSegment({ id: segId, from: seg.from, to: seg.to, waypoints });
      await refreshNetwork();
      toast(`waypoint added to ${segId}`);
    } else if (state.tool === "delete") {
      const nodeId = pickNode(wx, wy);
      if (nodeId) {
        await api.deleteNode(nodeId);
        await refreshNetwork();
        toast(`removed node ${nodeId} (and its segments)`);
        return;
      }
      const segId = pickSegment(wx, wy);
      if (segId) {
        await api.deleteSegment(segId);
        await refreshNetwork();
        toast(`removed segment ${segId}`);
      }
    } else {
      const nodeId = pickNode(wx, wy);
      const segId = nodeId ? null : pickSegment(wx, wy);
      store.update({
        selection: nodeId
          ? { kind: "node", id: nodeId }
          : segId
            ? { kind: "segment", id: segId }
            : { kind: "none" },
      });
    }
  } catch (err) {
    toast(err instanceof GatewayError ? err.message : String(err));
  }
}

async function runtimeClick(wx: number, wy: number): Promise<void> {
  const state = store.get();
  if (!canSteer(state)) {
    return;
  }
  const droneId = pickDrone(wx, wy);
  if (droneId) {
    store.update({ selection: { kind: "drone", id: droneId } });
    labelPanel.textContent = runtime.labelFor(droneId) ?? "";
    return;
  }
  const segId = pickSegment(wx, wy);
  if (segId && network) {
    const seg = network.segments.find((s) => s.id === segId)!;
    try {
      await api.injectFault(segId, !seg.available);
      seg.available = !seg.available; // availability toggles are runtime-local
      toast(`segment ${segId} ${seg.available ? "restored" : "disabled"}`);
    } catch (err) {
      toast(err instanceof GatewayError ? err.message : String(err));
    }
  }
}

// -- runtime session -----------------------------------------------------------

function attachStream(): void {
  socket?.close();
  socket = new WebSocket(api.streamUrl());
  socket.onmessage = (msg) => buffer.push(JSON.parse(msg.data as string) as StreamMessage);
  socket.onclose = () => toast("stream closed");
}

async function startRun(): Promise<void> {
  const scenarioText = (document.getElementById("scenario-input") as HTMLTextAreaElement).value;
  let scenario: ScenarioDoc;
  try {
    scenario = JSON.parse(scenarioText) as ScenarioDoc;
  } catch {
    toast("scenario is not valid JSON");
    return;
  }
  const speed = Number((document.getElementById("speed-slider") as HTMLInputElement).value);
  try {
    await api.startRun(scenario, "builtin:greedy", speed);
    runtime.drones.clear();
    runtime.events.length = 0;
    runtime.simTime = 0;
    store.update({ runState: "paused" });
    store.setMode("runtime");
    attachStream();
    toast("run loaded; press resume");
  } catch (err) {
    toast(err instanceof GatewayError ? err.message : String(err));
  }
}

// -- wiring ---------------------------------------------------------------------

function bind(id: string, handler: () => void): void {
  document.getElementById(id)!.addEventListener("click", () => void handler());
}

async function init(): Promise<void> {
  resize();
  window.addEventListener("resize", resize);
  await refreshNetwork(true);

  canvas.addEventListener("mousedown", (e) => {
    const [wx, wy] = screenToWorld(
      camera, canvas.clientWidth, canvas.clientHeight, e.offsetX, e.offsetY,
    );
    const state = store.get();
    if (state.mode === "edit" && state.tool === "select" && canEdit(state)) {
      const nodeId = pickNode(wx, wy);
      if (nodeId) {
        dragging = { nodeId, moved: false };
        return;
      }
    }
    panning = { x: e.offsetX, y: e.offsetY };
  });

  canvas.addEventListener("mousemove", (e) => {
    if (dragging && network) {
      dragging.moved = true;
      const [wx, wy] = screenToWorld(
        camera, canvas.clientWidth, canvas.clientHeight, e.offsetX, e.offsetY,
      );
      const node = network.nodes.find((n) => n.id === dragging!.nodeId)!;
      node.position = [Math.round(wx), Math.round(wy), node.position[2]];
    } else if (panning) {
      camera = pan(camera, e.offsetX - panning.x, e.offsetY - panning.y);
      panning = { x: e.offsetX, y: e.offsetY };
    }
  });

  canvas.addEventListener("mouseup", async (e) => {
    if (dragging && network) {
      const { nodeId, moved } = dragging;
      dragging = null;
      if (moved) {
        const node = network.nodes.find((n) => n.id === nodeId)!;
        const guard = guardMoveNode(network, nodeId, node.position);
        if (!guard.ok) {
          toast(guard.reason!);
          await refreshNetwork();
          return;
        }
        try {
          await api.moveNode(nodeId, node.position);
          toast(`moved ${nodeId} to [${node.position[0]}, ${node.position[1]}]`);
        } catch (err) {
          toast(err instanceof GatewayError ? err.message : String(err));
          await refreshNetwork();
        }
      } else {
        store.update({ selection: { kind: "node", id: nodeId } });
      }
      return;
    }
    panning = null;
    const [wx, wy] = screenToWorld(
      camera, canvas.clientWidth, canvas.clientHeight, e.offsetX, e.offsetY,
    );
    if (store.get().mode === "edit") {
      await editClick(wx, wy);
    } else {
      await runtimeClick(wx, wy);
    }
  });

  canvas.addEventListener("wheel", (e) => {
    e.preventDefault();
    camera = zoomAt(
      camera, canvas.clientWidth, canvas.clientHeight,
      e.offsetX, e.offsetY, e.deltaY < 0 ? 1.15 : 1 / 1.15,
    );
  });

  for (const tool of ["select", "add-node", "connect", "waypoint", "delete"] as EditTool[]) {
    bind(`tool-${tool}`, () => {
      store.update({ tool, connectFrom: null });
      toast(`tool: ${tool}`);
    });
  }

  bind("mode-edit", () => store.setMode("edit"));
  bind("mode-runtime", () => store.setMode("runtime"));
  bind("btn-fit", () => {
    if (network) {
      camera = fitCamera(network, canvas.clientWidth, canvas.clientHeight);
    }
  });
  bind("btn-save", async () => {
    if (!network) {
      return;
    }
    const blob = new Blob([exportBlob(await api.getNetwork())], { type: "application/json" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "network.json";
    a.click();
    toast("network downloaded");
  });
  document.getElementById("file-load")!.addEventListener("change", async (e) => {
    const file = (e.target as HTMLInputElement).files?.[0];
    if (!file) {
      return;
    }
    try {
      const doc = importDocument(await file.text());
      await api.putNetwork(doc);
      await refreshNetwork(true);
      toast("network loaded");
    } catch (err) {
      toast(err instanceof GatewayError ? err.message : String(err));
    }
  });

  bind("btn-start", startRun);
  bind("btn-pause", async () => api.pause().catch((err) => toast(String(err))));
  bind("btn-resume", async () => api.resume().catch((err) => toast(String(err))));
  bind("btn-follow", () => {
    const state = store.get();
    if (state.selection.kind === "drone") {
      store.update({ followDrone: toggleFollow(state, state.selection.id) });
    }
  });
  document.getElementById("speed-slider")!.addEventListener("change", async (e) => {
    const value = Number((e.target as HTMLInputElement).value);
    if (store.get().runState !== "idle") {
      await api.setSpeed(value).catch((err) => toast(String(err)));
    }
    document.getElementById("speed-value")!.textContent = `×${value}`;
  });

  // Reattach to whatever the gateway is doing (e.g. after a page refresh).
  const status = await api.status();
  store.update({ runState: status.state });
  if (status.state === "paused" || status.state === "running") {
    store.setMode("runtime");
    attachStream();
  }
  setInterval(async () => {
    try {
      const s = await api.status();
      store.update({ runState: s.state });
    } catch {
      /* gateway briefly unreachable */
    }
  }, 1000);

  requestAnimationFrame(render);
}

void init();
