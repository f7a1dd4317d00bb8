/** Thin REST client for the gateway; every mutation returns the server's say. */

import type { NetworkDoc, ScenarioDoc, StatusMessage, Vec3 } from "./types.js";

export class GatewayError extends Error {
  constructor(public status: number, detail: string) {
    super(`${status}: ${detail}`);
  }
}

export class GatewayClient {
  constructor(
    private base: string,
    private fetchFn: typeof fetch = fetch.bind(globalThis),
  ) {}

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(`${this.base}${path}`, init);
    const text = await resp.text();
    if (!resp.ok) {
      let detail = text;
      try {
        detail = (JSON.parse(text) as { detail?: string }).detail ?? text;
      } catch {
        /* plain-text error body */
      }
      throw new GatewayError(resp.status, detail);
    }
    return text ? JSON.parse(text) : null;
  }

  getNetwork(): Promise<NetworkDoc> {
    return this.request("GET", "/network") as Promise<NetworkDoc>;
  }

  putNetwork(doc: NetworkDoc): Promise<void> {
    return this.request("PUT", "/network", doc) as Promise<void>;
  }

  addNode(node: { id: string; position: Vec3; pad_count?: number; charge_power_w?: number }) {
    return this.request("POST", "/network/nodes", node);
  }

  moveNode(id: string, position: Vec3) {
    return this.request("PATCH", `/network/nodes/${encodeURIComponent(id)}`, { position });
  }

  deleteNode(id: string) {
    return this.request("DELETE", `/network/nodes/${encodeURIComponent(id)}`);
  }

  addSegment(segment: { id: string; from: string; to: string; waypoints?: Vec3[] }) {
    return this.request("POST", "/network/segments", segment);
  }

  deleteSegment(id: string) {
    return this.request("DELETE", `/network/segments/${encodeURIComponent(id)}`);
  }

  setSegmentAvailability(id: string, available: boolean) {
    return this.request("PATCH", `/network/segments/${encodeURIComponent(id)}`, { available });
  }

  patchSettings(patch: Record<string, unknown>) {
    return this.request("PATCH", "/settings", patch);
  }

  startRun(scenario: ScenarioDoc, controller = "builtin:greedy", speedMultiplier = 1.0) {
    return this.request("POST", "/sim/start", {
      scenario,
      controller,
      speed_multiplier: speedMultiplier,
    });
  }

  pause() {
    return this.request("POST", "/sim/pause");
  }

  resume() {
    return this.request("POST", "/sim/resume");
  }

  setSpeed(multiplier: number) {
    return this.request("POST", "/sim/speed", { multiplier });
  }

  injectFault(segment: string, available: boolean) {
    return this.request("POST", "/sim/fault", { segment, available });
  }

  status(): Promise<StatusMessage> {
    return this.request("GET", "/sim/status") as Promise<StatusMessage>;
  }

  streamUrl(): string {
    return this.base.replace(/^http/, "ws") + "/sim/stream";
  }
}
