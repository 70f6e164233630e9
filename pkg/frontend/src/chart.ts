/** SVG line chart for observed vs counterfactual trajectories.
 *
 * Observed is drawn solid, predictions dashed, with a vertical Day-0
 * marker at t = 0. Series carry the exact numbers from the API payload;
 * scaling happens only at render time, so the data underneath the chart
 * is bit-equal to what the service returned.
 */

import type { UnitCounterfactualsT } from "./types";

export interface Series {
  name: string;
  kind: "observed" | "predicted";
  days: number[];
  values: number[];
}

export interface ChartOptions {
  width?: number;
  height?: number;
  margin?: number;
}

const SERIES_COLORS = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#8c564b"];

/** Post-period series for one unit, in label order, observed first.
 * Values are the payload arrays themselves, untransformed. */
export function buildSeries(
  payload: UnitCounterfactualsT,
  visibleLabels: string[],
): Series[] {
  const postDays = payload.day_labels.slice(payload.t0_index);
  const observedDays: number[] = [];
  const observedValues: number[] = [];
  payload.observed_post.mask.forEach((seen, i) => {
    if (seen) {
      observedDays.push(postDays[i]!);
      observedValues.push(payload.observed_post.values[i]!);
    }
  });
  const series: Series[] = [
    { name: "observed", kind: "observed", days: observedDays, values: observedValues },
  ];
  for (const label of visibleLabels) {
    const trajectory = payload.predicted[label];
    if (!trajectory) continue;
    series.push({
      name: label,
      kind: "predicted",
      days: [...postDays],
      values: trajectory,
    });
  }
  return series;
}

/** Tooltip text for a predicted series: its top donors and weights. */
export function donorTooltip(
  payload: UnitCounterfactualsT,
  label: string,
): string {
  const donors = (payload.top_donors[label] ?? []).slice(0, 4);
  if (!donors.length) return `${label}: no donor model`;
  const parts = donors.map(([name, weight]) => `${name} (${weight.toFixed(3)})`);
  return `${label} donors: ${parts.join(", ")}`;
}

function extent(xs: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const x of xs) {
    if (x < lo) lo = x;
    if (x > hi) hi = x;
  }
  return lo <= hi ? [lo, hi] : [0, 1];
}

export function renderChart(
  series: Series[],
  opts: ChartOptions = {},
): string {
  const width = opts.width ?? 720;
  const height = opts.height ?? 420;
  const margin = opts.margin ?? 40;
  const allDays = series.flatMap((s) => s.days);
  const allValues = series.flatMap((s) => s.values);
  const [dayLo, dayHi] = extent(allDays.length ? allDays : [0, 1]);
  const [valLo, valHi] = extent(allValues.length ? allValues : [0, 1]);
  const daySpan = dayHi - dayLo || 1;
  const valSpan = valHi - valLo || 1;
  const sx = (d: number) => margin + ((d - dayLo) / daySpan) * (width - 2 * margin);
  const sy = (v: number) => height - margin - ((v - valLo) / valSpan) * (height - 2 * margin);

  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}">`,
  ];
  if (dayLo <= 0 && 0 <= dayHi) {
    const x = sx(0);
    parts.push(
      `<line class="day0-marker" x1="${x}" y1="${margin}" ` +
        `x2="${x}" y2="${height - margin}" stroke="#888" stroke-dasharray="2 4"/>`,
    );
  }
  series.forEach((s, i) => {
    const points = s.days
      .map((d, j) => `${sx(d)},${sy(s.values[j]!)}`)
      .join(" ");
    const color = s.kind === "observed" ? "#000" : SERIES_COLORS[i % SERIES_COLORS.length];
    const dash = s.kind === "predicted" ? ' stroke-dasharray="6 4"' : "";
    parts.push(
      `<polyline class="series series-${s.kind}" data-name="${s.name}" ` +
        `data-days='${JSON.stringify(s.days)}' ` +
        `data-values='${JSON.stringify(s.values)}' ` +
        `fill="none" stroke="${color}" stroke-width="2"${dash} points="${points}"/>`,
    );
  });
  parts.push("</svg>");
  return parts.join("\n");
}
