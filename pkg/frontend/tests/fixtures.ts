import type {
  AgreementReport,
  AnchorsPayload,
  PathPayload,
  PredictedLink,
  Subgraph,
  VerificationPayload,
} from '../src/api.js';

export const predictedLink: PredictedLink = {
  link_id: 'alice--frank',
  u: 'alice',
  v: 'frank',
  score: 0.87,
  threshold: 0.5,
  decision: true,
  model_seed: 0,
};

export const secondLink: PredictedLink = {
  link_id: 'bob--frank',
  u: 'bob',
  v: 'frank',
  score: 0.61,
  threshold: 0.5,
  decision: true,
  model_seed: 0,
};

export const subgraphFixture: Subgraph = {
  center: 'alice',
  radius: 2,
  nodes: [
    { id: 'alice', label: 'Person', attributes: { name: 'Alice Smith', city: 'oslo' } },
    { id: 'bob', label: 'Person', attributes: { name: 'Bob Tanaka', city: 'oslo' } },
    { id: 'carol', label: 'Person', attributes: { name: 'Carol Okafor', city: 'bergen' } },
    { id: 'frank', label: 'Person', attributes: { name: 'Frank Moreau', city: 'oslo' } },
    { id: 'orgx', label: 'Organization', attributes: { name: 'OrgX' } },
  ],
  edges: [
    { source: 'alice', target: 'bob', relation_type: 'colleague' },
    { source: 'bob', target: 'carol', relation_type: 'friend' },
    { source: 'carol', target: 'frank', relation_type: 'neighbor' },
    { source: 'alice', target: 'orgx', relation_type: 'member' },
  ],
  predicted_links: [predictedLink, secondLink],
};

export const verificationFixture: VerificationPayload = {
  link: { u: 'Alice Smith', v: 'Frank Moreau' },
  passages: [
    {
      doc_id: 'd001',
      snippet: 'the meeting where Alice Smith signed the partner report with Frank Moreau in oslo',
      score: 3.41,
      mentions: { u_found: true, v_found: true },
    },
    {
      doc_id: 'd007',
      snippet: 'Alice Smith visited the company office last spring',
      score: 0.92,
      mentions: { u_found: true, v_found: false },
    },
  ],
  verdict_hint: 'both_mentioned',
};

export const anchorsFixture: AnchorsPayload = {
  predicates: [
    { feature: 'common_neighbors', comparator: '>=', constant: 2 },
    { feature: 'same_attribute:city', comparator: '==', constant: true },
  ],
  precision: 0.523,
  coverage: 0.31,
  samples_used: 2000,
  budget_exhausted: false,
  fidelity_of_surrogate: 0.95,
};

export const pathFixture: PathPayload = {
  pair: { u: 'alice', v: 'frank' },
  paths: [
    { nodes: ['alice', 'bob', 'carol', 'frank'], relations: ['colleague', 'friend', 'neighbor'], score: 0.84 },
    { nodes: ['alice', 'carol', 'frank'], relations: ['friend', 'neighbor'], score: 0.41 },
  ],
  top_path: { nodes: ['alice', 'bob', 'carol', 'frank'], relations: ['colleague', 'friend', 'neighbor'] },
  ranker_version: 'ensemble-v1',
};

export const emptyReport: AgreementReport = {
  verification: { agreements: 0, total: 0, rate: null },
  anchors: { agreements: 0, total: 0, rate: null },
  path_ranking: { agreements: 0, total: 0, rate: null },
};

type Envelope = { technique: string; link: object; payload: unknown; generated_at: string };

export function envelope(technique: string, payload: unknown): Envelope {
  return {
    technique,
    link: { u: 'alice', v: 'frank', link_id: 'alice--frank' },
    payload,
    generated_at: '2026-01-01T00:00:00+00:00',
  };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

/** In-memory stand-in for the service: same routes, same status codes,
 *  including duplicate-verdict 409s and live agreement recounting. */
export function makeFakeService() {
  const seen = new Set<string>();
  const log: Array<{ technique: string; verdict: string }> = [];

  const fetchFn: typeof fetch = async (input, init) => {
    const url = typeof input === 'string' ? input : input instanceof URL ? input.href : input.url;
    if (url.includes('/subgraph')) return jsonResponse(subgraphFixture);
    if (url.includes('/explanations')) {
      const params = new URL(url, 'http://x').searchParams;
      const technique = params.get('technique')!;
      if (technique === 'verification') return jsonResponse(envelope(technique, verificationFixture));
      if (technique === 'anchors') return jsonResponse(envelope(technique, anchorsFixture));
      if (params.get('link_id') === secondLink.link_id) {
        return jsonResponse({ detail: 'no path evidence' }, 422);
      }
      return jsonResponse(envelope(technique, pathFixture));
    }
    if (url.includes('/feedback')) {
      const body = JSON.parse(String(init?.body));
      const key = `${body.link_id}:${body.technique}:${body.annotator}`;
      if (seen.has(key)) return jsonResponse({ detail: 'verdict already recorded' }, 409);
      seen.add(key);
      log.push({ technique: body.technique, verdict: body.verdict });
      return jsonResponse({ status: 'recorded' }, 201);
    }
    if (url.includes('/reports/agreement')) {
      const report: Record<string, { agreements: number; total: number; rate: number | null }> = {};
      for (const technique of ['verification', 'anchors', 'path_ranking']) {
        const rows = log.filter((r) => r.technique === technique);
        const agreements = rows.filter((r) => r.verdict === 'agree').length;
        report[technique] = {
          agreements,
          total: rows.length,
          rate: rows.length ? agreements / rows.length : null,
        };
      }
      return jsonResponse(report);
    }
    return jsonResponse({ detail: 'not found' }, 404);
  };

  return { fetchFn, log };
}
