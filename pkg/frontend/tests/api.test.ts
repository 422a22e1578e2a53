import { describe, expect, it } from 'vitest';
import { ApiError, ServiceClient } from '../src/api.js';
import {
  anchorsFixture,
  envelope,
  jsonResponse,
  makeFakeService,
  subgraphFixture,
} from './fixtures.js';

describe('ServiceClient', () => {
  it('parses a subgraph response', async () => {
    const client = new ServiceClient('', makeFakeService().fetchFn);
    const subgraph = await client.subgraph('alice', 2);
    expect(subgraph.nodes).toHaveLength(5);
    expect(subgraph.predicted_links.map((p) => p.link_id)).toContain('alice--frank');
  });

  it('surfaces a 404 as ApiError with the service detail', async () => {
    const client = new ServiceClient('', async () =>
      jsonResponse({ detail: "unknown node 'zed'" }, 404),
    );
    await expect(client.subgraph('zed')).rejects.toMatchObject({
      status: 404,
      detail: "unknown node 'zed'",
    });
  });

  it('validates the explanation payload against the schema', async () => {
    const client = new ServiceClient('', async () =>
      jsonResponse(envelope('anchors', anchorsFixture)),
    );
    const explanation = await client.explanation('alice--frank', 'anchors');
    if (explanation.technique !== 'anchors') throw new Error('wrong technique');
    expect(explanation.payload.precision).toBeCloseTo(0.523);
  });

  it('rejects a malformed payload instead of rendering it', async () => {
    const client = new ServiceClient('', async () =>
      jsonResponse(envelope('anchors', { nope: true })),
    );
    await expect(client.explanation('alice--frank', 'anchors')).rejects.toThrow();
  });

  it('maps feedback 201 to true and 409 to false', async () => {
    const { fetchFn } = makeFakeService();
    const client = new ServiceClient('', fetchFn);
    const first = await client.submitFeedback('alice--frank', 'anchors', 'steward1', 'agree');
    const dup = await client.submitFeedback('alice--frank', 'anchors', 'steward1', 'agree');
    expect(first).toBe(true);
    expect(dup).toBe(false);
  });

  it('throws ApiError for feedback 400', async () => {
    const client = new ServiceClient('', async () =>
      jsonResponse({ detail: "unknown technique 'magic'" }, 400),
    );
    await expect(
      client.submitFeedback('alice--frank', 'verification', 'steward1', 'agree'),
    ).rejects.toBeInstanceOf(ApiError);
  });

  it('round-trips the subgraph fixture unchanged through the schema', async () => {
    const client = new ServiceClient('', async () => jsonResponse(subgraphFixture));
    expect(await client.subgraph('alice')).toEqual(subgraphFixture);
  });
});
