import { z } from 'zod';

// Schemas mirror the service's JSON responses; parse at the boundary so a
// contract drift fails loudly instead of rendering garbage.

export const GraphNodeSchema = z.object({
  id: z.string(),
  label: z.string(),
  attributes: z.record(z.string(), z.string()),
});

export const GraphEdgeSchema = z.object({
  source: z.string(),
  target: z.string(),
  relation_type: z.string(),
  properties: z.record(z.string(), z.string()).optional(),
});

export const PredictedLinkSchema = z.object({
  link_id: z.string(),
  u: z.string(),
  v: z.string(),
  score: z.number(),
  threshold: z.number(),
  decision: z.boolean(),
  model_seed: z.number(),
});

export const SubgraphSchema = z.object({
  center: z.string(),
  radius: z.number(),
  nodes: z.array(GraphNodeSchema),
  edges: z.array(GraphEdgeSchema),
  predicted_links: z.array(PredictedLinkSchema),
});

export const VerificationPayloadSchema = z.object({
  link: z.object({ u: z.string(), v: z.string() }),
  passages: z.array(
    z.object({
      doc_id: z.string(),
      snippet: z.string(),
      score: z.number(),
      mentions: z.object({ u_found: z.boolean(), v_found: z.boolean() }),
    }),
  ),
  verdict_hint: z.string(),
});

export const AnchorsPayloadSchema = z.object({
  predicates: z.array(
    z.object({
      feature: z.string(),
      comparator: z.string(),
      constant: z.union([z.number(), z.boolean(), z.string()]),
    }),
  ),
  precision: z.number(),
  coverage: z.number(),
  samples_used: z.number(),
  budget_exhausted: z.boolean(),
  fidelity_of_surrogate: z.number(),
});

const PathSchema = z.object({
  nodes: z.array(z.string()),
  relations: z.array(z.string()),
});

export const PathPayloadSchema = z.object({
  pair: z.object({ u: z.string(), v: z.string() }),
  paths: z.array(PathSchema.extend({ score: z.number() })),
  top_path: PathSchema.nullable(),
  ranker_version: z.string(),
});

export const AgreementReportSchema = z.record(
  z.string(),
  z.object({
    agreements: z.number(),
    total: z.number(),
    rate: z.number().nullable(),
  }),
);

export type Subgraph = z.infer<typeof SubgraphSchema>;
export type PredictedLink = z.infer<typeof PredictedLinkSchema>;
export type VerificationPayload = z.infer<typeof VerificationPayloadSchema>;
export type AnchorsPayload = z.infer<typeof AnchorsPayloadSchema>;
export type PathPayload = z.infer<typeof PathPayloadSchema>;
export type AgreementReport = z.infer<typeof AgreementReportSchema>;

export type Technique = 'verification' | 'anchors' | 'path_ranking';
export const TECHNIQUES: Technique[] = ['verification', 'anchors', 'path_ranking'];

export type ExplanationPayload =
  | { technique: 'verification'; payload: VerificationPayload }
  | { technique: 'anchors'; payload: AnchorsPayload }
  | { technique: 'path_ranking'; payload: PathPayload };

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function raiseFor(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (typeof body.detail === 'string') detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

/** Thin typed client over the review service. `fetchFn` is injectable so
 *  tests can run without a live server. */
export class ServiceClient {
  constructor(
    private baseUrl: string = '',
    private fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  async subgraph(nodeId: string, radius = 2): Promise<Subgraph> {
    const params = new URLSearchParams({ node_id: nodeId, radius: String(radius) });
    const response = await this.fetchFn(`${this.baseUrl}/subgraph?${params}`);
    if (!response.ok) await raiseFor(response);
    return SubgraphSchema.parse(await response.json());
  }

  async predict(watchlist: string[], threshold = 0.5, topN = 100): Promise<PredictedLink[]> {
    const response = await this.fetchFn(`${this.baseUrl}/predict`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ watchlist, threshold, top_n: topN }),
    });
    if (!response.ok) await raiseFor(response);
    const body = await response.json();
    return z.array(PredictedLinkSchema).parse(body.predictions);
  }

  async explanation(linkId: string, technique: Technique): Promise<ExplanationPayload> {
    const params = new URLSearchParams({ link_id: linkId, technique });
    const response = await this.fetchFn(`${this.baseUrl}/explanations?${params}`);
    if (!response.ok) await raiseFor(response);
    const body = await response.json();
    switch (technique) {
      case 'verification':
        return { technique, payload: VerificationPayloadSchema.parse(body.payload) };
      case 'anchors':
        return { technique, payload: AnchorsPayloadSchema.parse(body.payload) };
      case 'path_ranking':
        return { technique, payload: PathPayloadSchema.parse(body.payload) };
    }
  }

  /** Resolves true on 201 (recorded), false on 409 (already recorded);
   *  other failures throw. */
  async submitFeedback(
    linkId: string,
    technique: Technique,
    annotator: string,
    verdict: 'agree' | 'disagree',
  ): Promise<boolean> {
    const response = await this.fetchFn(`${this.baseUrl}/feedback`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ link_id: linkId, technique, annotator, verdict }),
    });
    if (response.status === 201) return true;
    if (response.status === 409) return false;
    await raiseFor(response);
    return false; // unreachable
  }

  async agreementReport(): Promise<AgreementReport> {
    const response = await this.fetchFn(`${this.baseUrl}/reports/agreement`);
    if (!response.ok) await raiseFor(response);
    return AgreementReportSchema.parse(await response.json());
  }
}
