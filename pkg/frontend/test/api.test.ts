// Review round trip against the fixture server: approve flips the item
// to decided, a second verdict surfaces 409, and the parked candidate
// resolves from expert_pending to accepted.

import { describe, expect, it } from 'vitest';

import { ApiClient, validateVerdictForm } from '../src/api.js';
import { ApiError } from '../src/types.js';
import { FixtureServer } from './fixture_server.js';

function makeClient(): { api: ApiClient; server: FixtureServer } {
  const server = new FixtureServer();
  const api = new ApiClient({ baseUrl: 'http://fixture', fetchImpl: server.fetch });
  return { api, server };
}

describe('review round trip', () => {
  it('approving an open item transitions it to decided', async () => {
    const { api, server } = makeClient();
    const before = await api.getReviewItem(server.openItemId);
    expect(before.state).toBe('open');
    expect(before.candidate_status).toBe('expert_pending');

    const decided = await api.postVerdict(server.openItemId, 'approve', 'alex');
    expect(decided.state).toBe('decided');
    expect(decided.verdict).toBe('approve');
    expect(decided.reviewer).toBe('alex');

    const after = await api.getReviewItem(server.openItemId);
    expect(after.state).toBe('decided');
  });

  it('a second verdict surfaces 409 and the first wins', async () => {
    const { api, server } = makeClient();
    await api.postVerdict(server.openItemId, 'approve', 'alex');
    let conflict: ApiError | undefined;
    try {
      await api.postVerdict(server.openItemId, 'reject', 'kim', 'late');
    } catch (error) {
      conflict = error as ApiError;
    }
    expect(conflict).toBeInstanceOf(ApiError);
    expect(conflict?.status).toBe(409);
    expect(conflict?.detail).toContain('already decided');

    const item = await api.getReviewItem(server.openItemId);
    expect(item.verdict).toBe('approve');
  });

  it('an expert_pending candidate resolves to accepted on approval', async () => {
    const { api, server } = makeClient();
    await api.postVerdict(server.openItemId, 'approve', 'alex');
    const item = await api.getReviewItem(server.openItemId);
    expect(item.candidate_status).toBe('accepted');
  });

  it('rejection resolves the candidate to rejected with the reason kept', async () => {
    const { api, server } = makeClient();
    await api.postVerdict(server.openItemId, 'reject', 'alex', 'wrong signals');
    const item = await api.getReviewItem(server.openItemId);
    expect(item.candidate_status).toBe('rejected');
    expect(item.reason).toBe('wrong signals');
  });

  it('the queue filter reflects server state after a verdict', async () => {
    const { api, server } = makeClient();
    const openBefore = await api.getReviewQueue('open');
    expect(openBefore.items.map((i) => i.item_id)).toContain(server.openItemId);

    await api.postVerdict(server.openItemId, 'approve', 'alex');
    const openAfter = await api.getReviewQueue('open');
    expect(openAfter.items.map((i) => i.item_id)).not.toContain(server.openItemId);
    const decided = await api.getReviewQueue('decided');
    expect(decided.items.map((i) => i.item_id)).toContain(server.openItemId);
  });

  it('unknown run surfaces a 404 error', async () => {
    const { api } = makeClient();
    await expect(api.getRun('run-nope')).rejects.toMatchObject({ status: 404 });
  });
});

describe('client-side verdict validation', () => {
  it('requires a reviewer name', () => {
    expect(validateVerdictForm('approve', '  ', '')).toMatch(/reviewer/);
  });

  it('requires a reason to reject', () => {
    expect(validateVerdictForm('reject', 'alex', '')).toMatch(/reason/);
    expect(validateVerdictForm('reject', 'alex', 'because')).toBeNull();
  });

  it('approve without a reason is fine', () => {
    expect(validateVerdictForm('approve', 'alex', '')).toBeNull();
  });
});
