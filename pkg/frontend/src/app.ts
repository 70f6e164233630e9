/** DOM wiring for the explorer. All data fetching goes through api.ts
 * and all rendering through chart.ts; this module only moves values
 * between the two and the page. */

import * as api from "./api";
import { buildSeries, donorTooltip, renderChart } from "./chart";
import {
  RerunQueue,
  ViewState,
  initialState,
  selectRun,
  toggleLabel,
  validateEdgesPercent,
  withEdges,
} from "./state";
import type { RunDocumentT } from "./types";

const BASE = (window as { API_BASE?: string }).API_BASE ?? "";

let state: ViewState = initialState();
let doc: RunDocumentT | null = null;

const el = (id: string) => document.getElementById(id)!;

function banner(message: string | null): void {
  const node = el("banner");
  node.textContent = message ?? "";
  node.classList.toggle("hidden", message === null);
}

async function refreshRunPicker(selected?: string): Promise<void> {
  const runs = await api.listRuns(BASE);
  const picker = el("run-picker") as HTMLSelectElement;
  picker.innerHTML = "";
  for (const run of runs) {
    const opt = document.createElement("option");
    opt.value = run.id;
    opt.textContent = `${run.id.slice(0, 12)} (${run.n_units} units)`;
    picker.appendChild(opt);
  }
  if (selected) picker.value = selected;
}

async function loadRun(id: string): Promise<void> {
  try {
    doc = await api.getRun(BASE, id);
  } catch (err) {
    banner(`failed to load run ${id}: ${String(err)}`);
    return;
  }
  banner(null);
  state = selectRun(state, doc);

  const unitPicker = el("unit-picker") as HTMLSelectElement;
  unitPicker.innerHTML = "";
  for (const unit of doc.panel.unit_ids) {
    const opt = document.createElement("option");
    opt.value = opt.textContent = unit;
    unitPicker.appendChild(opt);
  }
  if (state.unit) unitPicker.value = state.unit;

  const toggles = el("label-toggles");
  toggles.innerHTML = "";
  for (const label of doc.config.buckets.labels) {
    const box = document.createElement("label");
    const input = document.createElement("input");
    input.type = "checkbox";
    input.checked = state.visibleLabels.includes(label);
    input.addEventListener("change", () => {
      state = toggleLabel(state, label);
      void redrawChart();
    });
    box.append(input, ` ${label} (${doc.partition.groups[label]?.length ?? 0})`);
    toggles.appendChild(box);
  }

  (el("edges-input") as HTMLInputElement).value = doc.config.buckets.edges
    .map((e) => String(e * 100))
    .join("/");
  await redrawChart();
}

async function redrawChart(): Promise<void> {
  if (!doc || !state.unit || !state.runId) return;
  const payload = await api.getCounterfactuals(BASE, state.runId, state.unit);
  if (payload === null || state.runId !== doc.content_hash) return;
  const series = buildSeries(payload, state.visibleLabels);
  el("chart").innerHTML = renderChart(series);
  el("donor-info").textContent = state.visibleLabels
    .map((label) => donorTooltip(payload, label))
    .join("\n");
  const date = doc.panel.day0_dates?.[state.unit];
  el("day0-date").textContent = date ? `Day 0 = ${date}` : "";
}

const queue = new RerunQueue(
  (config) => api.postRun(BASE, config),
  (runId) => {
    void refreshRunPicker(runId).then(() => loadRun(runId));
  },
);

function submitWhatIf(): void {
  if (!doc) return;
  const raw = (el("edges-input") as HTMLInputElement).value;
  const edges = raw.split("/").map((s) => Number(s.trim()));
  const problem = validateEdgesPercent(edges);
  if (problem) {
    banner(`invalid edges: ${problem}`);
    return;
  }
  banner(null);
  queue.enqueue(withEdges(doc.config, edges)).catch((err) => {
    banner(`re-run failed: ${String(err)}`);
  });
}

export async function start(): Promise<void> {
  el("run-picker").addEventListener("change", (ev) => {
    void loadRun((ev.target as HTMLSelectElement).value);
  });
  el("unit-picker").addEventListener("change", (ev) => {
    state = { ...state, unit: (ev.target as HTMLSelectElement).value };
    void redrawChart();
  });
  el("whatif-submit").addEventListener("click", submitWhatIf);

  await refreshRunPicker();
  const picker = el("run-picker") as HTMLSelectElement;
  if (picker.value) await loadRun(picker.value);
  else banner("no runs in the artifact directory yet");
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  void start();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", () => void start());
}
