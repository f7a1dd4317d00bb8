/** 2.5-D schematic projection: top-down pan/zoom, altitude shown as size.
 *
 * World coordinates are meters (x east, y north); the screen y axis points
 * down, so north is up on screen.
 */

import type { NetworkDoc, Vec3 } from "./types.js";

export interface Camera {
  centerX: number;
  centerY: number;
  zoom: number; // screen pixels per meter
}

export function defaultCamera(): Camera {
  return { centerX: 0, centerY: 0, zoom: 1.0 };
}

export function worldToScreen(
  cam: Camera,
  width: number,
  height: number,
  p: Vec3 | [number, number],
): [number, number] {
  return [
    width / 2 + (p[0] - cam.centerX) * cam.zoom,
    height / 2 - (p[1] - cam.centerY) * cam.zoom,
  ];
}

export function screenToWorld(
  cam: Camera,
  width: number,
  height: number,
  sx: number,
  sy: number,
): [number, number] {
  return [
    cam.centerX + (sx - width / 2) / cam.zoom,
    cam.centerY - (sy - height / 2) / cam.zoom,
  ];
}

export function pan(cam: Camera, dxPixels: number, dyPixels: number): Camera {
  return {
    ...cam,
    centerX: cam.centerX - dxPixels / cam.zoom,
    centerY: cam.centerY + dyPixels / cam.zoom,
  };
}

/** Zoom by a factor keeping the pointed-at world position fixed on screen. */
export function zoomAt(
  cam: Camera,
  width: number,
  height: number,
  sx: number,
  sy: number,
  factor: number,
): Camera {
  const zoom = Math.min(50, Math.max(0.02, cam.zoom * factor));
  const [wx, wy] = screenToWorld(cam, width, height, sx, sy);
  // Solve for the center that maps (wx, wy) back to (sx, sy) at the new zoom.
  return {
    zoom,
    centerX: wx - (sx - width / 2) / zoom,
    centerY: wy + (sy - height / 2) / zoom,
  };
}

/** Altitude encoding: higher rooftops render as visibly larger nodes. */
export function nodeRadius(altitudeM: number): number {
  return 6 + 6 * Math.log10(1 + Math.max(0, altitudeM) / 10);
}

/** Frame the whole network with a margin; no-op camera for empty networks. */
export function fitCamera(net: NetworkDoc, width: number, height: number): Camera {
  if (net.nodes.length === 0) {
    return defaultCamera();
  }
  const xs = net.nodes.map((n) => n.position[0]);
  const ys = net.nodes.map((n) => n.position[1]);
  for (const seg of net.segments) {
    for (const w of seg.waypoints) {
      xs.push(w[0]);
      ys.push(w[1]);
    }
  }
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const spanX = Math.max(maxX - minX, 10);
  const spanY = Math.max(maxY - minY, 10);
  const zoom = Math.min(50, Math.max(0.02, 0.85 * Math.min(width / spanX, height / spanY)));
  return { centerX: (minX + maxX) / 2, centerY: (minY + maxY) / 2, zoom };
}

export function distancePointToSegment2D(
  px: number,
  py: number,
  ax: number,
  ay: number,
  bx: number,
  by: number,
): number {
  const dx = bx - ax;
  const dy = by - ay;
  const lengthSq = dx * dx + dy * dy;
  if (lengthSq === 0) {
    return Math.hypot(px - ax, py - ay);
  }
  let t = ((px - ax) * dx + (py - ay) * dy) / lengthSq;
  t = Math.max(0, Math.min(1, t));
  return Math.hypot(px - (ax + t * dx), py - (ay + t * dy));
}

/** Hit-test a segment's polyline in world space; returns distance in meters. */
export function distanceToPolyline(
  px: number,
  py: number,
  points: Array<Vec3 | [number, number]>,
): number {
  let best = Infinity;
  for (let i = 0; i + 1 < points.length; i++) {
    const d = distancePointToSegment2D(
      px,
      py,
      points[i][0],
      points[i][1],
      points[i + 1][0],
      points[i + 1][1],
    );
    best = Math.min(best, d);
  }
  return best;
}
