/** Zod schemas for the run-service JSON payloads.
 *
 * Only the fields the explorer consumes are validated; unknown fields
 * pass through untouched so artifact schema additions stay compatible.
 */

import { z } from "zod";

export const BucketsConfig = z.object({
  edges: z.array(z.number()),
  labels: z.array(z.string()),
  preset: z.string().optional(),
});

export const RunConfig = z
  .object({
    deaths_csv: z.string(),
    mobility_csv: z.string(),
    buckets: BucketsConfig,
    horizon_days: z.number().int(),
  })
  .passthrough();

export const RunSummary = z.object({
  id: z.string(),
  config: RunConfig,
  n_units: z.number().int(),
});

export const RunList = z.array(RunSummary);

export const ObservedPost = z.object({
  values: z.array(z.number()),
  mask: z.array(z.boolean()),
});

export const RunDocument = z
  .object({
    schema_version: z.number(),
    content_hash: z.string(),
    config: RunConfig,
    panel: z
      .object({
        unit_ids: z.array(z.string()),
        day_labels: z.array(z.number()),
        t0_index: z.number().int(),
        n_units: z.number().int(),
        day0_dates: z.record(z.string()).optional(),
      })
      .passthrough(),
    partition: z.object({
      assignment: z.record(z.string()),
      groups: z.record(z.array(z.string())),
    }),
    counterfactuals: z
      .object({
        predicted: z.record(z.record(z.array(z.number()))),
        observed_post: z.record(ObservedPost),
      })
      .passthrough(),
  })
  .passthrough();

/** [donor id, weight] pairs, strongest first. */
export const DonorEntry = z.tuple([z.string(), z.number()]);

export const UnitCounterfactuals = z.object({
  unit: z.string(),
  assignment: z.string(),
  predicted: z.record(z.array(z.number())),
  observed_post: ObservedPost,
  top_donors: z.record(z.array(DonorEntry)),
  day_labels: z.array(z.number()),
  t0_index: z.number().int(),
});

export const ProjectionEntry = z
  .object({
    source: z.string(),
    projected: z.array(z.number()),
    peak_fitted: z.tuple([z.number(), z.number()]),
    peak_raw: z.tuple([z.number(), z.number()]),
  })
  .partial({ projected: true, peak_fitted: true, peak_raw: true })
  .passthrough();

export const UnitProjections = z.record(z.record(ProjectionEntry));

export const PostRunResponse = z.object({ id: z.string() });

export type BucketsConfigT = z.infer<typeof BucketsConfig>;
export type RunConfigT = z.infer<typeof RunConfig>;
export type RunSummaryT = z.infer<typeof RunSummary>;
export type RunDocumentT = z.infer<typeof RunDocument>;
export type UnitCounterfactualsT = z.infer<typeof UnitCounterfactuals>;
export type UnitProjectionsT = z.infer<typeof UnitProjections>;
