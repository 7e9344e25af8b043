import { z } from "zod";

// ---- service wire types ----

export const MetadataSchema = z.object({
  feature_names: z.array(z.string()),
  n_features: z.number().int(),
  model_type: z.string(),
  background: z.object({ mode: z.string(), rows: z.number().int() }),
});
export type Metadata = z.infer<typeof MetadataSchema>;

export const ExplainResponseSchema = z.object({
  prediction: z.number(),
  base_value: z.number(),
  phi: z.array(z.number()),
  feature_names: z.array(z.string()),
  samples_used: z.number().int(),
  elapsed_ms: z.number(),
});
export type ExplainResponse = z.infer<typeof ExplainResponseSchema>;

export const ErrorEnvelopeSchema = z.object({
  error: z.object({
    code: z.string(),
    message: z.string(),
    field: z.string().optional(),
  }),
});

// ---- demo configuration (shipped alongside the model) ----

export const FeatureSpecSchema = z.discriminatedUnion("kind", [
  z.object({
    name: z.string(),
    label: z.string(),
    kind: z.literal("continuous"),
    min: z.number(),
    max: z.number(),
  }),
  z.object({
    name: z.string(),
    label: z.string(),
    kind: z.literal("categorical"),
    codes: z.record(z.string(), z.string()),
  }),
]);
export type FeatureSpec = z.infer<typeof FeatureSpecSchema>;

export const DemoConfigSchema = z.object({
  api_base: z.string(),
  decision: z.object({
    threshold: z.number(),
    label: z.string(),
    positive: z.string(),
    negative: z.string(),
  }),
  features: z.array(FeatureSpecSchema),
  presets: z.array(z.array(z.number())),
});
export type DemoConfig = z.infer<typeof DemoConfigSchema>;

// ---- view model ----

export interface FeatureControl {
  spec: FeatureSpec;
  index: number;
  value: number;
}

export interface Bar {
  index: number;
  name: string;
  phi: number;
}

export interface ExplanationView {
  prediction: number;
  baseValue: number;
  bars: Bar[];
  decision: string;
  samplesUsed: number;
  stale: boolean;
}
