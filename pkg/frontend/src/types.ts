// Wire types for the planning service JSON API.

export type RegionWire =
  | { kind: "full" }
  | { kind: "box"; min: number[]; max: number[] }
  | { kind: "ceiling"; z: number; rect: [number, number, number, number] };

export interface SceneDoc {
  v: number;
  name: string;
  bounds: { min: number[]; max: number[] };
  obstacles: ObstacleDoc[];
  machines: MachineDoc[];
  trajectories: TrajectoryDoc[];
  [extra: string]: unknown;
}

export interface ObstacleDoc {
  id: string;
  material: string;
  shape:
    | { type: "box"; center: number[]; size: number[] }
    | { type: "plane"; corners: number[][] };
  [extra: string]: unknown;
}

export interface MachineDoc {
  id: string;
  position: number[];
  traffic_weight: number;
}

export interface TrajectoryDoc {
  id: string;
  traffic_weight: number;
  waypoints: number[][];
}

export interface PlanRequest {
  scene_id: string;
  region: RegionWire;
  antenna?: Record<string, number>;
  trace?: Record<string, number>;
  planner?: Record<string, number>;
  weight_policy?: Record<string, number>;
  resolution_m?: number;
  utility_scale?: "dbm" | "linear";
}

export type JobState = "queued" | "running" | "done" | "failed";

export interface SearchInstanceDoc {
  init_position: number[];
  final_position: number[];
  final_utility: number;
  iterations: number;
  utility_trace: number[];
}

export interface PlanResultDoc {
  v: number;
  scene_id: string;
  best_position: number[];
  best_utility: number;
  instances: SearchInstanceDoc[];
}

export interface PlanStatus {
  v: number;
  job_id: string;
  state: JobState;
  progress: number;
  error?: string;
  result?: PlanResultDoc;
}

export interface SlicePayload {
  v: number;
  z_center_m: number;
  layer_index: number;
  x_centers: number[];
  y_centers: number[];
  /** values[i][j] belongs to (x_centers[i], y_centers[j]) */
  values: number[][];
}

export interface CdfPayload {
  v: number;
  /** (rsrp_dbm, cumulative fraction) pairs, ascending, last fraction = 1 */
  points: [number, number][];
}

export interface OverlayPayload {
  v: number;
  frame_size: [number, number];
  /** (u, v, rsrp_dbm, depth_m) per occupied pixel */
  pixels: [number, number, number, number][];
}

export interface PoseDoc {
  location: [number, number, number];
  quaternion: [number, number, number, number];
}

export interface IntrinsicsDoc {
  fx: number;
  fy: number;
  cx: number;
  cy: number;
  width: number;
  height: number;
}
