/** View state and the client-side rules around it.
 *
 * The UI is a pure function of (service responses, ViewState): all
 * numbers on screen come straight from API payloads, and the only
 * state-changing call is POST /runs.
 */

import type { RunConfigT, RunDocumentT } from "./types";

export interface ViewState {
  runId: string | null;
  unit: string | null;
  visibleLabels: string[];
  horizonDays: number;
  /** Bucket edges as entered in the config panel, percent units. */
  pendingEdges: number[] | null;
}

export function initialState(): ViewState {
  return {
    runId: null,
    unit: null,
    visibleLabels: [],
    horizonDays: 30,
    pendingEdges: null,
  };
}

/** Re-anchor the view on a run document, preserving the selected unit
 * and label toggles where they still exist. */
export function selectRun(state: ViewState, doc: RunDocumentT): ViewState {
  const units = doc.panel.unit_ids;
  const labels = doc.config.buckets.labels;
  const unit =
    state.unit !== null && units.includes(state.unit)
      ? state.unit
      : (units[0] ?? null);
  const visible = state.visibleLabels.filter((l) => labels.includes(l));
  return {
    ...state,
    runId: doc.content_hash,
    unit,
    visibleLabels: visible.length ? visible : [...labels],
    horizonDays: doc.config.horizon_days,
    pendingEdges: null,
  };
}

export function selectUnit(state: ViewState, unit: string, doc: RunDocumentT): ViewState {
  if (!doc.panel.unit_ids.includes(unit)) {
    throw new Error(`unit ${unit} is not in run ${doc.content_hash}`);
  }
  return { ...state, unit };
}

export function toggleLabel(state: ViewState, label: string): ViewState {
  const visible = state.visibleLabels.includes(label)
    ? state.visibleLabels.filter((l) => l !== label)
    : [...state.visibleLabels, label];
  return { ...state, visibleLabels: visible };
}

/** Edges arrive from the form in percent (e.g. 15/35). Valid when
 * strictly increasing and inside (0, 100). */
export function validateEdgesPercent(edges: number[]): string | null {
  if (!edges.length) return "at least one edge required";
  if (edges.some((e) => !Number.isFinite(e) || e <= 0 || e >= 100)) {
    return "edges must lie strictly between 0 and 100";
  }
  for (let i = 1; i < edges.length; i++) {
    const prev = edges[i - 1]!;
    if (edges[i]! <= prev) return "edges must be strictly increasing";
  }
  return null;
}

/** A config document for POST /runs with the bucket edges replaced.
 * Everything else is copied verbatim so an unchanged submission hashes
 * to the same run id. */
export function withEdges(config: RunConfigT, edgesPercent: number[]): RunConfigT {
  const problem = validateEdgesPercent(edgesPercent);
  if (problem) throw new Error(problem);
  const buckets = {
    edges: edgesPercent.map((e) => e / 100),
    labels: [...config.buckets.labels],
  };
  const { preset: _dropped, ...rest } = config.buckets;
  void _dropped; // explicit edges replace the preset
  void rest;
  return { ...config, buckets };
}

/** Serializes what-if submissions: at most one in flight, later ones
 * queued behind it, and stale completions discarded so only the most
 * recent submission's run id is ever applied. */
export class RerunQueue {
  private inFlight: Promise<void> = Promise.resolve();
  private latest = 0;

  constructor(
    private readonly submit: (config: RunConfigT) => Promise<string>,
    private readonly apply: (runId: string) => void,
  ) {}

  enqueue(config: RunConfigT): Promise<void> {
    const ticket = ++this.latest;
    this.inFlight = this.inFlight.then(async () => {
      const runId = await this.submit(config);
      if (ticket === this.latest) this.apply(runId);
    });
    return this.inFlight;
  }
}
