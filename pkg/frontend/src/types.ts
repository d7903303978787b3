/** Wire types of the /v1 REST API. */

export interface AttributeDef {
  id: number;
  name: string;
  boundary_low: string;
  boundary_high: string;
  question: string;
}

export interface AttributeSchema {
  version: string;
  attributes: AttributeDef[];
}

export interface Fingerprint {
  material_id: string;
  values: number[];
  stderr?: number[] | null;
  schema_version: string;
}

export interface MaterialRecord {
  material_id: string;
  category: string;
  fingerprint: Fingerprint;
  media?: Record<string, unknown> | null;
  typicality?: number | null;
}

export interface RetrieveResult {
  material_id: string;
  score: number;
  typicality: number | null;
}

export interface RetrieveResponse {
  results: RetrieveResult[];
}

export interface PredictResponse {
  fingerprint: Fingerprint;
  extractor_id: string;
  model_version: string;
}

export interface EmbeddingResponse {
  materials: string[];
  coordinates: [number, number][];
}

export interface ApiError {
  code: string;
  message: string;
}

export const N_ATTRIBUTES = 16;
