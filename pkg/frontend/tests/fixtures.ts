/** Recorded service payloads the stub server replays in tests. */

import type { ModelDescriptor, PredictResponse } from "../src/types.js";

/** Colon-style intake schema: tumor size, address, staging categoricals. */
export const COLON_DESCRIPTOR: ModelDescriptor = {
  model_id: "colon-demo",
  kind: "mlp",
  horizon: 60,
  fields: [
    { name: "CS TUMOR SIZE", kind: "numeric" },
    { name: "ADDRESS", kind: "geo" },
    {
      name: "GRADE",
      kind: "nominal",
      categories: [
        "cell type not determined",
        "moderately differentiated",
        "poorly differentiated",
        "well differentiated",
      ],
    },
    {
      name: "HISTOLOGY",
      kind: "nominal",
      categories: ["adenomas and adenocarcinomas", "squamous cell neoplasms"],
    },
    {
      name: "LATERALITY",
      kind: "nominal",
      categories: ["Left: origin of primary", "Not a paired site", "Right: origin of primary"],
    },
    {
      name: "MARITAL STATUS AT DX",
      kind: "nominal",
      categories: ["Divorced", "Married (including common law)", "Single (never married)", "Widowed"],
    },
    {
      name: "MONTH OF DIAGNOSIS",
      kind: "nominal",
      categories: ["Apr", "Aug", "Dec", "Feb", "Jan", "Jul", "Jun", "Mar", "May", "Nov", "Oct", "Sep"],
    },
    { name: "NUMBER OF PRIMARIES", kind: "numeric" },
    { name: "RACE ETHNICITY", kind: "nominal", categories: ["Black", "Other", "White"] },
    {
      name: "HISTORIC STAGE",
      kind: "nominal",
      categories: ["Distant", "In situ", "Localized", "Regional", "Unstaged"],
    },
    { name: "SEX", kind: "nominal", categories: ["Female", "Male"] },
    {
      name: "SPANISH HISPANIC ORIGIN",
      kind: "nominal",
      categories: ["Mexican", "Non-Spanish/Non-hispanic", "Puerto Rican"],
    },
    { name: "YEAR OF BIRTH", kind: "numeric" },
    { name: "YEAR OF DIAGNOSIS", kind: "numeric" },
  ],
};

/** Monotone step curve through fixed anchor values at months 6/12/60. */
function curveThrough(anchors: [number, number][]): number[] {
  const values: number[] = [];
  let previous: [number, number] = [0, anchors[0][1] >= 1 ? 1 : 0.98];
  const points = [previous, ...anchors];
  for (let i = 1; i < points.length; i++) {
    const [m0, v0] = points[i - 1];
    const [m1, v1] = points[i];
    for (let m = m0; m < m1; m++) {
      values.push(v0 + ((v1 - v0) * (m - m0)) / (m1 - m0));
    }
  }
  values.push(points[points.length - 1][1]);
  return values.map((v) => Number(v.toFixed(6)));
}

function recordedResponse(probs: [number, number, number]): PredictResponse {
  const survival = curveThrough([
    [6, probs[0]],
    [12, probs[1]],
    [60, probs[2]],
  ]);
  const months = survival.map((_, i) => i);
  const lower = survival.map((v) => Number(Math.max(0, v - 0.08).toFixed(6)));
  const upper = survival.map((v) => Number(Math.min(1, v + 0.06).toFixed(6)));
  return {
    months,
    survival,
    lower,
    upper,
    horizon_probs: { "6": probs[0], "12": probs[1], "60": probs[2] },
  };
}

/** Two address-only variants; the second sits on the .5 verdict boundary. */
export const BOSTON_RESPONSE = recordedResponse([0.89, 0.83, 0.5]);
export const DENVER_RESPONSE = recordedResponse([0.945, 0.902, 0.665]);

export const BOSTON_ATTRIBUTES: Record<string, string | number> = {
  "CS TUMOR SIZE": 300,
  ADDRESS: "boston massachusetts",
  GRADE: "moderately differentiated",
  HISTOLOGY: "adenomas and adenocarcinomas",
  LATERALITY: "Not a paired site",
  "MARITAL STATUS AT DX": "Single (never married)",
  "MONTH OF DIAGNOSIS": "Jan",
  "NUMBER OF PRIMARIES": 1,
  "RACE ETHNICITY": "White",
  "HISTORIC STAGE": "Regional",
  SEX: "Male",
  "SPANISH HISPANIC ORIGIN": "Non-Spanish/Non-hispanic",
  "YEAR OF BIRTH": 1940,
  "YEAR OF DIAGNOSIS": 2010,
};

export interface RecordedCall {
  url: string;
  body: unknown;
}

/** fetch double: GET /models returns the descriptor; predict responses are
 * keyed by the ADDRESS attribute; every call is recorded for assertions. */
export function stubFetch(options?: {
  failModels?: number; // fail the first N model-list fetches
  responses?: Map<string, PredictResponse | { status: number; detail: unknown }>;
}) {
  const calls: RecordedCall[] = [];
  let modelFailuresLeft = options?.failModels ?? 0;
  const byAddress =
    options?.responses ??
    new Map<string, PredictResponse | { status: number; detail: unknown }>([
      ["boston massachusetts", BOSTON_RESPONSE],
      ["denver colorado", DENVER_RESPONSE],
    ]);

  const impl = async (url: string, init?: RequestInit): Promise<Response> => {
    const body = init?.body ? JSON.parse(init.body as string) : null;
    calls.push({ url, body });
    if (url.endsWith("/api/v1/models")) {
      if (modelFailuresLeft > 0) {
        modelFailuresLeft--;
        return new Response("unavailable", { status: 503 });
      }
      return Response.json([COLON_DESCRIPTOR]);
    }
    if (url.endsWith("/api/v1/predict")) {
      const address = String(body?.attributes?.ADDRESS ?? "");
      const recorded = byAddress.get(address);
      if (!recorded) {
        return Response.json(
          { detail: [{ field: "ADDRESS", message: "no recorded response" }] },
          { status: 400 },
        );
      }
      if ("status" in recorded && "detail" in recorded) {
        return Response.json({ detail: recorded.detail }, { status: recorded.status as number });
      }
      return Response.json(recorded);
    }
    return new Response("not found", { status: 404 });
  };
  return { impl, calls };
}
