/**
 * Browser entry point: wires the explorer state to a minimal DOM shell.
 *
 * Layout: trace upload, scenario selector with an auto-generated parameter
 * form, makespan/speedup badge, baseline-vs-predicted stacked bars, and a
 * per-lane Gantt timeline. All values shown come straight from service
 * responses via the render view-models.
 */

import { ApiClient } from "./api.js";
import { ExplorerState, type ExplorerSnapshot } from "./state.js";
import {
  formatNs,
  renderComparison,
  renderMakespanBadge,
  renderScenarioForm,
  renderTimeline,
  type StackedBar,
} from "./render.js";
import type { ScenarioInfo } from "./types.js";

const SEGMENT_COLORS: Record<string, string> = {
  cpu_only: "#4c72b0",
  gpu_only: "#dd8452",
  parallel: "#55a868",
  idle: "#c44e52",
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text) node.textContent = text;
  return node;
}

function drawBars(container: HTMLElement, bars: StackedBar[]): void {
  container.replaceChildren();
  const max = Math.max(...bars.map((b) => b.totalNs), 1);
  for (const bar of bars) {
    const row = el("div", { class: "bar-row" });
    row.append(el("span", { class: "bar-label" }, bar.label));
    const track = el("div", { class: "bar-track" });
    for (const seg of bar.segments) {
      if (seg.valueNs === 0) continue;
      const piece = el("div", { class: "bar-seg" });
      piece.style.width = `${(100 * seg.valueNs) / max}%`;
      piece.style.background = SEGMENT_COLORS[seg.component] ?? "#999";
      piece.title = `${seg.component}: ${formatNs(seg.valueNs)}`;
      track.append(piece);
    }
    row.append(track, el("span", {}, formatNs(bar.totalNs)));
    container.append(row);
  }
}

function drawTimeline(
  container: HTMLElement,
  doc: Parameters<typeof renderTimeline>[0],
): void {
  container.replaceChildren();
  const rows = renderTimeline(doc);
  const end = Math.max(
    ...rows.flatMap((r) => r.bars.map((b) => b.startNs + b.durationNs)),
    1,
  );
  for (const row of rows) {
    const line = el("div", { class: "lane-row" });
    line.append(el("span", { class: "lane-label" }, row.lane));
    const track = el("div", { class: "lane-track" });
    for (const bar of row.bars) {
      const piece = el("div", { class: "task-bar" });
      piece.style.left = `${(100 * bar.startNs) / end}%`;
      piece.style.width = `${Math.max((100 * bar.durationNs) / end, 0.1)}%`;
      piece.title = `${bar.name} — ${formatNs(bar.durationNs)}` +
        (bar.layer ? ` — ${bar.layer}` : "");
      piece.dataset["layer"] = bar.layer ?? "";
      track.append(piece);
    }
    line.append(track);
    container.append(line);
  }
}

export async function boot(root: HTMLElement, baseUrl: string): Promise<void> {
  const api = new ApiClient(baseUrl);
  const state = new ExplorerState(api);
  const scenarios = await api.scenarios();

  const fileInput = el("input", { type: "file", accept: ".json" });
  const scenarioSelect = el("select");
  for (const info of scenarios) {
    scenarioSelect.append(el("option", { value: info.name }, info.name));
  }
  const paramsPanel = el("div", { class: "params" });
  const badge = el("div", { class: "badge" });
  const spinner = el("span", { class: "spinner hidden" }, "…");
  const errorBox = el("div", { class: "error hidden" });
  const barsBox = el("div", { class: "breakdown" });
  const timelineBox = el("div", { class: "timeline" });
  root.append(fileInput, scenarioSelect, spinner, paramsPanel, badge,
    errorBox, barsBox, timelineBox);

  const infoByName = new Map<string, ScenarioInfo>(
    scenarios.map((s) => [s.name, s]),
  );

  function buildForm(info: ScenarioInfo): void {
    paramsPanel.replaceChildren();
    const form = renderScenarioForm(info);
    for (const field of form.fields) {
      const label = el("label", {}, field.label);
      if (field.input === "checkbox") {
        const box = el("input", { type: "checkbox" });
        box.addEventListener("change", () => {
          void state.setParam(field.name, box.checked);
        });
        label.append(box);
      } else if (field.input === "slider") {
        const slider = el("input", {
          type: "range",
          min: "1",
          max: "256",
          value: String(field.defaultValue ?? 1),
        });
        slider.addEventListener("input", () => {
          state.setParamDebounced(field.name, Number(slider.value));
        });
        label.append(slider);
      } else {
        const box = el("input", {
          type: "text",
          value: String(field.defaultValue ?? ""),
        });
        box.addEventListener("change", () => {
          void state.setParam(field.name, box.value);
        });
        label.append(box);
      }
      label.title = field.description;
      paramsPanel.append(label);
    }
  }

  state.subscribe((snap: ExplorerSnapshot) => {
    spinner.classList.toggle("hidden", !snap.inFlight);
    errorBox.classList.toggle("hidden", snap.error === null);
    if (snap.error !== null) {
      errorBox.textContent = `${snap.error.error}: ${snap.error.detail}`;
    }
    if (snap.lastResponse !== null) {
      const view = renderMakespanBadge(snap.lastResponse);
      badge.textContent =
        `baseline ${formatNs(view.baselineNs)} → ` +
        `predicted ${formatNs(view.predictedNs)} (${view.speedupLabel})`;
      drawBars(barsBox, renderComparison(snap.lastResponse));
    }
  });

  fileInput.addEventListener("change", () => {
    const file = fileInput.files?.[0];
    if (!file) return;
    void file.text().then(async (text) => {
      const sessionId = await state.openSession(text);
      drawTimeline(timelineBox, await api.timeline(sessionId));
      const info = infoByName.get(scenarioSelect.value);
      if (info) {
        buildForm(info);
        await state.selectScenario(info.name);
      }
    });
  });

  scenarioSelect.addEventListener("change", () => {
    const info = infoByName.get(scenarioSelect.value);
    if (info) {
      buildForm(info);
      void state.selectScenario(info.name);
    }
  });
}
