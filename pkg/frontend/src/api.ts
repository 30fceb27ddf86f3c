// Thin typed client over the service HTTP API. The fetch implementation is
// injectable so tests can run against an in-memory fixture server.

import {
  ApiError,
  ArtifactListing,
  LintResponse,
  ReviewItemDoc,
  ReviewQueueDoc,
  RunDoc,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface ApiConfig {
  baseUrl: string;
  token?: string;
  fetchImpl?: FetchLike;
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly token?: string;
  private readonly fetchImpl: FetchLike;

  constructor(config: ApiConfig) {
    this.baseUrl = config.baseUrl.replace(/\/$/, '');
    this.token = config.token;
    this.fetchImpl = config.fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private headers(): Record<string, string> {
    const headers: Record<string, string> = { 'content-type': 'application/json' };
    if (this.token) headers['x-assertflow-token'] = this.token;
    return headers;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: this.headers(),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    if (!response.ok) {
      let detail = text;
      try {
        const parsed = JSON.parse(text) as { detail?: string };
        if (parsed.detail) detail = parsed.detail;
      } catch {
        // non-JSON error body: keep the raw text
      }
      throw new ApiError(response.status, detail);
    }
    return JSON.parse(text) as T;
  }

  getRun(runId: string): Promise<RunDoc> {
    return this.request('GET', `/runs/${encodeURIComponent(runId)}`);
  }

  getRunArtifacts(runId: string, stage: string): Promise<ArtifactListing> {
    return this.request(
      'GET',
      `/runs/${encodeURIComponent(runId)}/artifacts/${encodeURIComponent(stage)}`,
    );
  }

  getReviewQueue(state?: 'open' | 'decided'): Promise<ReviewQueueDoc> {
    const query = state ? `?state=${state}` : '';
    return this.request('GET', `/review/queue${query}`);
  }

  getReviewItem(itemId: string): Promise<ReviewItemDoc> {
    return this.request('GET', `/review/${encodeURIComponent(itemId)}`);
  }

  postVerdict(
    itemId: string,
    verdict: 'approve' | 'reject',
    reviewer: string,
    reason?: string,
  ): Promise<ReviewItemDoc> {
    return this.request('POST', `/review/${encodeURIComponent(itemId)}/verdict`, {
      verdict,
      reviewer,
      reason: reason ?? null,
    });
  }

  lint(text: string): Promise<LintResponse> {
    return this.request('POST', '/sva/lint', { text });
  }
}

// client-side gate mirroring the server rule: a rejection must say why
export function validateVerdictForm(
  verdict: 'approve' | 'reject',
  reviewer: string,
  reason: string,
): string | null {
  if (!reviewer.trim()) return 'reviewer name is required';
  if (verdict === 'reject' && !reason.trim()) return 'a rejection needs a reason';
  return null;
}
