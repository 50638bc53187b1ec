/** Shapes of the service's JSON responses. Times are integer nanoseconds. */

export interface GraphStats {
  tasks: number;
  events: number;
  edges: Record<string, number>;
  baseline_makespan_ns: number;
}

export interface UploadResponse {
  session_id: string;
  stats: GraphStats;
}

export interface ParamSchema {
  type: "number" | "string" | "boolean" | "object";
  default: unknown;
  description?: string;
}

export interface ScenarioInfo {
  name: string;
  description: string;
  params: Record<string, ParamSchema>;
}

export interface PerLayerEntry {
  cpu_ns: number;
  gpu_ns: number;
}

export interface Breakdown {
  cpu_only_ns: number;
  gpu_only_ns: number;
  parallel_ns: number;
  idle_ns: number;
  total_ns: number;
  per_layer: Record<string, PerLayerEntry>;
}

export interface SimulateResponse {
  scenario: string;
  baseline_makespan_ns: number;
  predicted_makespan_ns: number;
  speedup: number;
  breakdown: Breakdown;
  baseline_breakdown: Breakdown;
  lane_busy_ns: Record<string, number>;
}

export interface ChromeTraceEvent {
  name: string;
  ph: string;
  ts: number;
  dur?: number;
  pid?: number | string;
  tid?: number | string;
  args?: Record<string, unknown>;
}

export interface TimelineDocument {
  traceEvents: ChromeTraceEvent[];
}

export interface ServiceError {
  error: string;
  detail: string;
}

export type ScenarioParams = Record<string, unknown>;
