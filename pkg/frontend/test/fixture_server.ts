// In-memory implementation of the service HTTP contract, seeded with
// response fixtures dumped from the real backend. Implements the same
// review state machine: open -> decided exactly once, first verdict wins
// (second gets 409), and the parked candidate resolves when decided.

import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import type { FetchLike } from '../src/api.js';
import type { ReviewItemDoc, RunDoc } from '../src/types.js';

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), 'fixtures');

export function loadFixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), 'utf-8')) as T;
}

interface ItemState {
  doc: ReviewItemDoc;
  candidateStatus: string;
}

export class FixtureServer {
  readonly run: RunDoc;
  readonly runArtifacts: Record<string, unknown>;
  readonly lintResponse: Record<string, unknown>;
  private readonly items = new Map<string, ItemState>();
  requestLog: string[] = [];

  constructor() {
    this.run = loadFixture<RunDoc>('run.json');
    this.runArtifacts = loadFixture('run_artifacts_svas.json');
    this.lintResponse = loadFixture('lint_response.json');
    const open = loadFixture<ReviewItemDoc>('review_item_open.json');
    this.items.set(open.item_id, {
      doc: { ...open },
      candidateStatus: open.candidate_status ?? 'expert_pending',
    });
  }

  get openItemId(): string {
    return [...this.items.keys()][0];
  }

  fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? 'GET';
    const { pathname, searchParams } = new URL(url, 'http://fixture');
    this.requestLog.push(`${method} ${pathname}`);

    const respond = (status: number, body: unknown): Response =>
      new Response(JSON.stringify(body), {
        status,
        headers: { 'content-type': 'application/json' },
      });

    let match = pathname.match(/^\/runs\/([^/]+)$/);
    if (match && method === 'GET') {
      if (match[1] !== this.run.run_id) {
        return respond(404, { detail: `run '${match[1]}' not found` });
      }
      return respond(200, this.run);
    }

    match = pathname.match(/^\/runs\/([^/]+)\/artifacts\/([^/]+)$/);
    if (match && method === 'GET') {
      if (match[1] !== this.run.run_id) {
        return respond(404, { detail: 'run not found' });
      }
      return respond(200, this.runArtifacts);
    }

    if (pathname === '/review/queue' && method === 'GET') {
      const state = searchParams.get('state');
      const items = [...this.items.values()]
        .map((s) => this.withStatus(s))
        .filter((doc) => (state ? doc.state === state : true));
      return respond(200, { items });
    }

    match = pathname.match(/^\/review\/([^/]+)$/);
    if (match && method === 'GET') {
      const state = this.items.get(match[1]);
      if (!state) return respond(404, { detail: 'review item not found' });
      return respond(200, this.withStatus(state));
    }

    match = pathname.match(/^\/review\/([^/]+)\/verdict$/);
    if (match && method === 'POST') {
      const state = this.items.get(match[1]);
      if (!state) return respond(404, { detail: 'review item not found' });
      if (state.doc.state === 'decided') {
        return respond(409, {
          detail: `review item already decided (${state.doc.verdict}); first verdict wins`,
        });
      }
      const body = JSON.parse(String(init?.body ?? '{}')) as {
        verdict: 'approve' | 'reject';
        reviewer: string;
        reason?: string | null;
      };
      if (!body.reviewer || !['approve', 'reject'].includes(body.verdict)) {
        return respond(422, { detail: 'verdict must be approve or reject with a reviewer' });
      }
      state.doc = {
        ...state.doc,
        state: 'decided',
        verdict: body.verdict,
        reviewer: body.reviewer,
        reason: body.reason ?? null,
        decided_at: new Date().toISOString(),
      };
      state.candidateStatus = body.verdict === 'approve' ? 'accepted' : 'rejected';
      return respond(200, this.withStatus(state));
    }

    if (pathname === '/sva/lint' && method === 'POST') {
      return respond(200, this.lintResponse);
    }

    return respond(404, { detail: `no route for ${method} ${pathname}` });
  };

  private withStatus(state: ItemState): ReviewItemDoc {
    return { ...state.doc, candidate_status: state.candidateStatus };
  }
}
