/** Wire types mirroring the gateway's JSON schemas. */

export type Vec3 = [number, number, number];

export interface NodeDoc {
  id: string;
  position: Vec3;
  pad_count: number;
  charge_power_w: number;
}

export interface SegmentDoc {
  id: string;
  from: string;
  to: string;
  waypoints: Vec3[];
  available: boolean;
}

export interface DroneSettingsDoc {
  mass_frame_kg: number;
  mass_battery_kg: number;
  payload_capacity_kg: number;
  rotor_count: number;
  rotor_disc_area_m2: number;
  drag_coefficient: number;
  frontal_area_m2: number;
  induced_power_factor: number;
  powertrain_efficiency: number;
  avionics_power_w: number;
  cruise_speed_mps: number;
  vertical_speed_mps: number;
  battery_capacity_wh: number;
  charge_efficiency: number;
}

export interface SettingsDoc {
  dt_s: number;
  reserve_fraction: number;
  hover_takeoff_s: number;
  hover_landing_s: number;
  drone: DroneSettingsDoc;
  environment: { gravity_mps2: number; air_density_kgpm3: number };
}

export interface NetworkDoc {
  format: string;
  nodes: NodeDoc[];
  segments: SegmentDoc[];
  settings: SettingsDoc;
}

export interface FrameMessage {
  type: "frame";
  time_s: number;
  drone_id: string;
  swarm_id: string;
  x_m: number;
  y_m: number;
  z_m: number;
  phase: string;
  speed_mps: number;
  power_w: number;
  soc_wh: number;
  soc_pct: number;
  cum_energy_wh: number;
  node_id: string;
  segment_id: string;
  payload_kg: number;
}

export interface EventMessage {
  type: "event";
  time_s: number;
  drone_id: string;
  kind: string;
  location_id: string;
}

export interface StatusMessage {
  type: "status";
  state: "idle" | "paused" | "running" | "finished" | "aborted";
  time_s: number;
  speed_multiplier?: number;
  error?: string | null;
}

export interface EndMessage {
  type: "end";
  summary: Record<string, unknown>;
}

export type StreamMessage = FrameMessage | EventMessage | StatusMessage | EndMessage;

export interface ScenarioRequest {
  id: string;
  origin: string;
  destination: string;
  payload_kg: number;
  swarm_size: number;
  release_time_s: number;
}

export interface ScenarioDoc {
  requests: ScenarioRequest[];
  faults: { time_s: number; segment: string; available: boolean }[];
  max_time_s: number;
  seed: number;
  stall_timeout_s?: number;
}

export function emptyNetwork(settings: SettingsDoc): NetworkDoc {
  return { format: "skysim/1", nodes: [], segments: [], settings };
}
