/** Thin typed client for the /v1 REST API.
 *
 * The fetch function is injectable for tests.  `LatestWins` serializes
 * rapid-fire requests (slider drags): only the most recently issued
 * request's result is delivered.
 */

import {
  ApiError,
  AttributeSchema,
  EmbeddingResponse,
  Fingerprint,
  MaterialRecord,
  PredictResponse,
  RetrieveResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let detail: ApiError = { code: "unknown", message: response.statusText };
      try {
        detail = (await response.json()) as ApiError;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiRequestError(response.status, detail.code, detail.message);
    }
    return (await response.json()) as T;
  }

  getAttributes(): Promise<AttributeSchema> {
    return this.request<AttributeSchema>("/v1/attributes");
  }

  getMaterials(): Promise<MaterialRecord[]> {
    return this.request<MaterialRecord[]>("/v1/materials");
  }

  getMaterial(id: string): Promise<MaterialRecord> {
    return this.request<MaterialRecord>(`/v1/materials/${encodeURIComponent(id)}`);
  }

  predictFromImages(nonSpecularB64: string, nearSpecularB64: string): Promise<PredictResponse> {
    return this.request<PredictResponse>("/v1/predict", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        images: { non_specular: nonSpecularB64, near_specular: nearSpecularB64 },
      }),
    });
  }

  /** Ranked neighbors; the response order is the display order. */
  retrieve(
    query: { material_id: string } | { fingerprint: Fingerprint },
    k: number,
    alpha: number,
  ): Promise<RetrieveResponse> {
    return this.request<RetrieveResponse>("/v1/retrieve", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ ...query, k, alpha }),
    });
  }

  getEmbedding(): Promise<EmbeddingResponse> {
    return this.request<EmbeddingResponse>("/v1/embedding");
  }
}

/** Delivers only the newest in-flight request; stale results are dropped. */
export class LatestWins<T> {
  private seq = 0;

  async run(task: () => Promise<T>): Promise<T | undefined> {
    const ticket = ++this.seq;
    const result = await task();
    return ticket === this.seq ? result : undefined;
  }
}
