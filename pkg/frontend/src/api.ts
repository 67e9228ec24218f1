/** Thin JSON client over the documented service API; fetch is injectable
 * so tests can replay recorded responses. */

import type { FieldErrorDetail, ModelDescriptor, PredictRequest, PredictResponse } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly fieldErrors: FieldErrorDetail[],
    message: string,
  ) {
    super(message);
  }
}

function parseDetail(status: number, body: unknown): ApiError {
  if (body && typeof body === "object" && "detail" in body) {
    const detail = (body as { detail: unknown }).detail;
    if (Array.isArray(detail)) {
      const fields = detail.filter(
        (d): d is FieldErrorDetail =>
          !!d && typeof d === "object" && "field" in d && "message" in d,
      );
      return new ApiError(status, fields, `request failed (${status})`);
    }
    if (typeof detail === "string") {
      return new ApiError(status, [], detail);
    }
  }
  return new ApiError(status, [], `request failed (${status})`);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async models(): Promise<ModelDescriptor[]> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/v1/models`);
    if (!response.ok) {
      throw parseDetail(response.status, await safeJson(response));
    }
    return (await response.json()) as ModelDescriptor[];
  }

  async predict(request: PredictRequest): Promise<PredictResponse> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/v1/predict`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    });
    if (!response.ok) {
      throw parseDetail(response.status, await safeJson(response));
    }
    return (await response.json()) as PredictResponse;
  }
}

async function safeJson(response: Response): Promise<unknown> {
  try {
    return await response.json();
  } catch {
    return null;
  }
}
