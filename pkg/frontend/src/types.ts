/** Wire types of the prediction service plus the UI's scenario state. */

export type FieldKind = "nominal" | "numeric" | "geo";

export interface FieldDescriptor {
  name: string;
  kind: FieldKind;
  categories?: string[];
}

export interface ModelDescriptor {
  model_id: string;
  kind: string;
  horizon: number;
  fields: FieldDescriptor[];
}

export interface PredictRequest {
  model_id: string;
  attributes: Record<string, string | number>;
  with_bands: boolean;
  n_resamples: number;
  seed: number;
}

export interface PredictResponse {
  months: number[];
  survival: number[];
  lower: number[] | null;
  upper: number[] | null;
  horizon_probs: Record<string, number>;
}

export interface FieldErrorDetail {
  field: string;
  message: string;
}

/** One what-if configuration: attributes, its last response, pin state. */
export interface Scenario {
  label: string;
  modelId: string;
  attributes: Record<string, string | number>;
  response: PredictResponse | null;
  pinned: boolean;
}

export const HORIZONS = [6, 12, 60] as const;
