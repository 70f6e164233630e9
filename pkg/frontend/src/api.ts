/** Thin fetch wrappers over the run-service endpoints. Every response is
 * validated against its zod schema before it reaches the UI. */

import {
  PostRunResponse,
  RunConfigT,
  RunDocument,
  RunDocumentT,
  RunList,
  RunSummaryT,
  UnitCounterfactuals,
  UnitCounterfactualsT,
  UnitProjections,
  UnitProjectionsT,
} from "./types";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function getJson(base: string, path: string): Promise<unknown> {
  const r = await fetch(`${base}${path}`);
  const data: unknown = await r.json().catch(() => ({}));
  if (!r.ok) throw new ApiError(r.status, errorDetail(data, path));
  return data;
}

function errorDetail(data: unknown, fallback: string): string {
  if (data && typeof data === "object") {
    const body = data as { detail?: unknown; error?: unknown };
    if (typeof body.detail === "string") return body.detail;
    if (typeof body.error === "string") return body.error;
  }
  return fallback;
}

export async function listRuns(base: string): Promise<RunSummaryT[]> {
  return RunList.parse(await getJson(base, "/runs"));
}

export async function getRun(base: string, id: string): Promise<RunDocumentT> {
  return RunDocument.parse(await getJson(base, `/runs/${id}`));
}

export async function getCounterfactuals(
  base: string,
  id: string,
  unit: string,
): Promise<UnitCounterfactualsT> {
  const path = `/runs/${id}/counterfactuals?unit=${encodeURIComponent(unit)}`;
  return UnitCounterfactuals.parse(await getJson(base, path));
}

export async function getProjections(
  base: string,
  id: string,
  unit?: string,
  horizon?: number,
): Promise<UnitProjectionsT> {
  const params = new URLSearchParams();
  if (unit !== undefined) params.set("unit", unit);
  if (horizon !== undefined) params.set("horizon", String(horizon));
  const query = params.size ? `?${params}` : "";
  return UnitProjections.parse(
    await getJson(base, `/runs/${id}/projections${query}`),
  );
}

export async function postRun(
  base: string,
  config: RunConfigT,
): Promise<string> {
  const r = await fetch(`${base}/runs`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(config),
  });
  const data: unknown = await r.json().catch(() => ({}));
  if (!r.ok) throw new ApiError(r.status, errorDetail(data, "/runs"));
  return PostRunResponse.parse(data).id;
}
