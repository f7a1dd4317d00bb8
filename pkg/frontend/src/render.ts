/** Canvas renderer: top-down schematic, altitude as node size and label. */

import type { Camera } from "./projection.js";
import { nodeRadius, worldToScreen } from "./projection.js";
import type { DroneView } from "./runtime.js";
import type { NetworkDoc } from "./types.js";
import type { Selection } from "./state.js";

const COLORS = {
  background: "#10141a",
  grid: "#1c232e",
  segment: "#5f7ea0",
  segmentDown: "#8a3a3a",
  node: "#d8e1eb",
  nodeRing: "#5f7ea0",
  selection: "#f0b429",
  drone: "#67d48a",
  droneFailed: "#e06c6c",
  label: "#aebdcf",
};

export function draw(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  cam: Camera,
  net: NetworkDoc,
  drones: Iterable<DroneView>,
  selection: Selection,
  connectFrom: string | null,
): void {
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, width, height);
  drawGrid(ctx, width, height, cam);

  const nodeById = new Map(net.nodes.map((n) => [n.id, n]));

  for (const seg of net.segments) {
    const from = nodeById.get(seg.from);
    const to = nodeById.get(seg.to);
    if (!from || !to) {
      continue;
    }
    const run = [from.position, ...seg.waypoints, to.position];
    const selected = selection.kind === "segment" && selection.id === seg.id;
    ctx.strokeStyle = selected
      ? COLORS.selection
      : seg.available
        ? COLORS.segment
        : COLORS.segmentDown;
    ctx.lineWidth = selected ? 3 : 2;
    ctx.setLineDash(seg.available ? [] : [6, 6]);
    ctx.beginPath();
    run.forEach((p, i) => {
      const [sx, sy] = worldToScreen(cam, width, height, p);
      if (i === 0) {
        ctx.moveTo(sx, sy);
      } else {
        ctx.lineTo(sx, sy);
      }
    });
    ctx.stroke();
    ctx.setLineDash([]);
    for (const w of seg.waypoints) {
      const [sx, sy] = worldToScreen(cam, width, height, w);
      ctx.fillStyle = ctx.strokeStyle;
      ctx.beginPath();
      ctx.arc(sx, sy, 3, 0, 2 * Math.PI);
      ctx.fill();
    }
  }

  for (const node of net.nodes) {
    const [sx, sy] = worldToScreen(cam, width, height, node.position);
    const r = nodeRadius(node.position[2]);
    const selected =
      (selection.kind === "node" && selection.id === node.id) || connectFrom === node.id;
    ctx.fillStyle = COLORS.node;
    ctx.strokeStyle = selected ? COLORS.selection : COLORS.nodeRing;
    ctx.lineWidth = selected ? 3 : 1.5;
    ctx.beginPath();
    ctx.arc(sx, sy, r, 0, 2 * Math.PI);
    ctx.fill();
    ctx.stroke();
    ctx.fillStyle = COLORS.label;
    ctx.font = "11px system-ui, sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(`${node.id} · ${Math.round(node.position[2])}m`, sx, sy - r - 5);
    // Pad ticks under the node.
    for (let i = 0; i < node.pad_count; i++) {
      ctx.fillRect(sx - node.pad_count * 3 + i * 6 + 1, sy + r + 3, 4, 3);
    }
  }

  for (const drone of drones) {
    if (drone.phase === "done") {
      continue;
    }
    const [sx, sy] = worldToScreen(cam, width, height, [drone.x, drone.y, drone.z]);
    const failed = drone.phase === "failed";
    const selected = selection.kind === "drone" && selection.id === drone.id;
    ctx.fillStyle = failed ? COLORS.droneFailed : COLORS.drone;
    ctx.strokeStyle = selected ? COLORS.selection : "#0c0f13";
    ctx.lineWidth = selected ? 3 : 1;
    ctx.beginPath();
    ctx.moveTo(sx, sy - 7);
    ctx.lineTo(sx + 6, sy + 5);
    ctx.lineTo(sx - 6, sy + 5);
    ctx.closePath();
    ctx.fill();
    ctx.stroke();
    ctx.fillStyle = COLORS.label;
    ctx.textAlign = "center";
    ctx.fillText(`${drone.id} ${drone.socPct.toFixed(0)}%`, sx, sy + 18);
  }
}

function drawGrid(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  cam: Camera,
): void {
  const targetPixels = 90;
  const meters = niceStep(targetPixels / cam.zoom);
  const step = meters * cam.zoom;
  if (step < 14) {
    return;
  }
  ctx.strokeStyle = COLORS.grid;
  ctx.lineWidth = 1;
  const offsetX = ((width / 2 - cam.centerX * cam.zoom) % step + step) % step;
  const offsetY = ((height / 2 + cam.centerY * cam.zoom) % step + step) % step;
  ctx.beginPath();
  for (let x = offsetX; x < width; x += step) {
    ctx.moveTo(x, 0);
    ctx.lineTo(x, height);
  }
  for (let y = offsetY; y < height; y += step) {
    ctx.moveTo(0, y);
    ctx.lineTo(width, y);
  }
  ctx.stroke();
}

export function niceStep(raw: number): number {
  const power = Math.pow(10, Math.floor(Math.log10(Math.max(raw, 1e-9))));
  for (const mult of [1, 2, 5, 10]) {
    if (raw <= mult * power) {
      return mult * power;
    }
  }
  return 10 * power;
}
