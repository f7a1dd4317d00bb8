/** Runtime-mode logic: fold the WS stream into render-ready drone state.
 *
 * The UI is stateless with respect to simulation truth — everything shown
 * (positions, battery, phase, timer, routes) comes from gateway messages,
 * so reattaching mid-run reconstructs a consistent picture.
 */

import type { EventMessage, FrameMessage, StreamMessage } from "./types.js";

export interface DroneView {
  id: string;
  swarmId: string;
  x: number;
  y: number;
  z: number;
  phase: string;
  socPct: number;
  socWh: number;
  payloadKg: number;
  nodeId: string;
  segmentId: string;
  lastSeen: number;
}

export class RuntimeModel {
  drones = new Map<string, DroneView>();
  events: EventMessage[] = [];
  simTime = 0;
  runState: "idle" | "paused" | "running" | "finished" | "aborted" = "idle";
  speedMultiplier = 1;
  summary: Record<string, unknown> | null = null;
  error: string | null = null;

  ingest(message: StreamMessage): void {
    switch (message.type) {
      case "frame":
        this.ingestFrame(message);
        break;
      case "event":
        this.events.push(message);
        this.simTime = Math.max(this.simTime, message.time_s);
        break;
      case "status":
        this.runState = message.state;
        this.simTime = Math.max(this.simTime, message.time_s);
        if (message.speed_multiplier !== undefined) {
          this.speedMultiplier = message.speed_multiplier;
        }
        this.error = message.error ?? null;
        break;
      case "end":
        this.runState = "finished";
        this.summary = message.summary;
        break;
    }
  }

  private ingestFrame(frame: FrameMessage): void {
    this.simTime = Math.max(this.simTime, frame.time_s);
    this.drones.set(frame.drone_id, {
      id: frame.drone_id,
      swarmId: frame.swarm_id,
      x: frame.x_m,
      y: frame.y_m,
      z: frame.z_m,
      phase: frame.phase,
      socPct: frame.soc_pct,
      socWh: frame.soc_wh,
      payloadKg: frame.payload_kg,
      nodeId: frame.node_id,
      segmentId: frame.segment_id,
      lastSeen: frame.time_s,
    });
  }

  /** Segment-id route each drone has flown so far, in departure order. */
  routeOf(droneId: string): string[] {
    return this.events
      .filter((e) => e.drone_id === droneId && e.kind === "segment_start")
      .map((e) => e.location_id);
  }

  /** Label panel content for a clicked drone (battery %, payload, phase). */
  labelFor(droneId: string): string | null {
    const d = this.drones.get(droneId);
    if (!d) {
      return null;
    }
    const where = d.segmentId ? `on ${d.segmentId}` : d.nodeId ? `at ${d.nodeId}` : "";
    return `${d.id} · ${d.phase} ${where} · ${d.socPct.toFixed(1)}% · ${d.payloadKg} kg`;
  }
}

export function formatSimClock(simTimeS: number): string {
  const total = Math.floor(simTimeS);
  const minutes = Math.floor(total / 60);
  const seconds = total % 60;
  return `${String(minutes).padStart(2, "0")}:${String(seconds).padStart(2, "0")}.${Math.floor(
    (simTimeS - total) * 10,
  )}`;
}

/** Small buffer between WS arrival and rendering so paint never blocks reads. */
export class StreamBuffer {
  private queue: StreamMessage[] = [];

  push(message: StreamMessage): void {
    this.queue.push(message);
    if (this.queue.length > 100000) {
      this.queue.splice(0, this.queue.length - 100000);
    }
  }

  drainInto(model: RuntimeModel): number {
    const n = this.queue.length;
    for (const message of this.queue) {
      model.ingest(message);
    }
    this.queue.length = 0;
    return n;
  }
}
