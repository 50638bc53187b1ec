/**
 * Pure view-model builders: service responses in, displayable structures out.
 *
 * Every number here is copied verbatim from a response body; formatting for
 * humans happens only in the label fields, never in the values the contract
 * tests compare.
 */

import type {
  Breakdown,
  ChromeTraceEvent,
  ScenarioInfo,
  SimulateResponse,
  TimelineDocument,
} from "./types.js";

export interface TimelineBar {
  name: string;
  startNs: number;
  durationNs: number;
  layer: string | null;
  kind: string | null;
}

export interface TimelineRow {
  lane: string;
  bars: TimelineBar[];
}

/** One Gantt row per lane, bars ordered by start time. */
export function renderTimeline(doc: TimelineDocument): TimelineRow[] {
  const rows = new Map<string, TimelineBar[]>();
  for (const event of doc.traceEvents) {
    if (event.ph !== "X") continue;
    const lane = String(event.tid ?? event.pid ?? "unknown");
    const args = event.args ?? {};
    const bar: TimelineBar = {
      name: event.name,
      startNs: event.ts * 1000,
      durationNs: (event.dur ?? 0) * 1000,
      layer: typeof args["layer"] === "string" ? (args["layer"] as string) : null,
      kind: typeof args["kind"] === "string" ? (args["kind"] as string) : null,
    };
    const bars = rows.get(lane);
    if (bars === undefined) rows.set(lane, [bar]);
    else bars.push(bar);
  }
  return [...rows.entries()]
    .map(([lane, bars]) => ({
      lane,
      bars: bars.sort((a, b) => a.startNs - b.startNs),
    }))
    .sort((a, b) => a.lane.localeCompare(b.lane));
}

export interface StackSegment {
  component: "cpu_only" | "gpu_only" | "parallel" | "idle";
  valueNs: number;
}

export interface StackedBar {
  label: string;
  totalNs: number;
  segments: StackSegment[];
}

const COMPONENTS = ["cpu_only", "gpu_only", "parallel", "idle"] as const;

export function renderBreakdownBar(label: string, b: Breakdown): StackedBar {
  return {
    label,
    totalNs: b.total_ns,
    segments: COMPONENTS.map((component) => ({
      component,
      valueNs: b[`${component}_ns`],
    })),
  };
}

/** Baseline-vs-predicted stacked bars for one simulate response. */
export function renderComparison(resp: SimulateResponse): StackedBar[] {
  return [
    renderBreakdownBar("baseline", resp.baseline_breakdown),
    renderBreakdownBar("predicted", resp.breakdown),
  ];
}

export interface MakespanBadge {
  baselineNs: number;
  predictedNs: number;
  speedup: number;
  speedupLabel: string;
}

export function renderMakespanBadge(resp: SimulateResponse): MakespanBadge {
  return {
    baselineNs: resp.baseline_makespan_ns,
    predictedNs: resp.predicted_makespan_ns,
    speedup: resp.speedup,
    speedupLabel: `${(resp.speedup * 100).toFixed(1)}%`,
  };
}

export interface FormField {
  name: string;
  label: string;
  input: "slider" | "text" | "checkbox" | "json";
  defaultValue: unknown;
  description: string;
}

export interface ScenarioForm {
  scenario: string;
  description: string;
  fields: FormField[];
}

/** Auto-generate a parameter form from the scenario registry entry. */
export function renderScenarioForm(info: ScenarioInfo): ScenarioForm {
  const fields: FormField[] = Object.entries(info.params).map(
    ([name, schema]) => ({
      name,
      label: name.replace(/_/g, " "),
      input:
        schema.type === "number"
          ? "slider"
          : schema.type === "boolean"
            ? "checkbox"
            : schema.type === "object"
              ? "json"
              : "text",
      defaultValue: schema.default,
      description: schema.description ?? "",
    }),
  );
  return { scenario: info.name, description: info.description, fields };
}

export interface SweepPoint {
  value: unknown;
  makespanNs: number;
}

/** Line-chart series from repeated simulate responses over one parameter. */
export function renderSweep(
  param: string,
  runs: Array<{ value: unknown; response: SimulateResponse }>,
): { param: string; points: SweepPoint[] } {
  return {
    param,
    points: runs.map(({ value, response }) => ({
      value,
      makespanNs: response.predicted_makespan_ns,
    })),
  };
}

export function formatNs(ns: number): string {
  return `${(ns / 1000).toFixed(3)} µs`;
}
