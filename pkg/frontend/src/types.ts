// Wire types mirroring the service's JSON documents. The UI treats these
// as read-only: every number rendered comes straight from a response.

export interface RunDoc {
  run_id: string;
  spec_ref: string;
  stage_artifacts: Record<string, string[]>;
  stage_status: Record<string, StageStatus>;
  counts: Record<string, number>;
  sva_syntax: Record<string, boolean>;
  syntax_pass_rate: number | null;
  warnings: string[];
  failure: { stage: string; error: string; raw_responses: string[] } | null;
}

export type StageStatus = 'pending' | 'running' | 'done' | 'failed';

export const STAGES = ['plan', 'features', 'checkpoints', 'svas'] as const;

export interface SvaArtifactDoc {
  kind: 'sva_assertion';
  id: string;
  source_text: string;
  syntax_ok: boolean;
  semantic_warnings: string[];
  lineage: string[];
}

export interface ArtifactListing {
  stage: string;
  artifacts: Array<Record<string, unknown>>;
}

export interface ReviewItemDoc {
  item_id: string;
  candidate_ref: string;
  task: string;
  payload: Record<string, unknown>;
  golden: Record<string, unknown>;
  state: 'open' | 'decided';
  verdict: 'approve' | 'reject' | null;
  reviewer: string | null;
  reason: string | null;
  decided_at: string | null;
  candidate_status?: string;
}

export interface ReviewQueueDoc {
  items: ReviewItemDoc[];
}

export interface LintToken {
  kind: string;
  text: string;
  line: number;
  col: number;
}

export interface LintResponse {
  ok: boolean;
  diagnostics: Array<{ line: number; column: number; message: string; token: string }>;
  tokens: LintToken[];
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}
