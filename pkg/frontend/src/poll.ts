// Run polling: fixed 2s cadence, capped exponential backoff on errors,
// stops by itself once the run reaches a terminal state.

import { ApiClient } from './api.js';
import { RunDoc, STAGES } from './types.js';

export const POLL_INTERVAL_MS = 2000;
export const MAX_BACKOFF_MS = 30000;

export function isTerminal(run: RunDoc): boolean {
  const statuses = STAGES.map((s) => run.stage_status[s] ?? 'pending');
  if (statuses.some((s) => s === 'failed')) return true;
  return statuses.every((s) => s === 'done');
}

export interface PollerHooks {
  onUpdate: (run: RunDoc) => void;
  onError?: (error: unknown) => void;
  setTimer?: (fn: () => void, ms: number) => unknown;
  clearTimer?: (handle: unknown) => void;
}

export class RunPoller {
  private stopped = false;
  private failures = 0;
  private timer: unknown;
  private readonly setTimer: (fn: () => void, ms: number) => unknown;
  private readonly clearTimer: (handle: unknown) => void;

  constructor(
    private readonly api: ApiClient,
    private readonly runId: string,
    private readonly hooks: PollerHooks,
  ) {
    this.setTimer = hooks.setTimer ?? ((fn, ms) => setTimeout(fn, ms));
    this.clearTimer = hooks.clearTimer ?? ((handle) => clearTimeout(handle as number));
  }

  start(): void {
    void this.tick();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== undefined) this.clearTimer(this.timer);
  }

  get running(): boolean {
    return !this.stopped;
  }

  nextDelay(): number {
    if (this.failures === 0) return POLL_INTERVAL_MS;
    // first retry at the base cadence, then doubling up to the cap
    return Math.min(POLL_INTERVAL_MS * 2 ** (this.failures - 1), MAX_BACKOFF_MS);
  }

  private async tick(): Promise<void> {
    if (this.stopped) return;
    try {
      const run = await this.api.getRun(this.runId);
      this.failures = 0;
      this.hooks.onUpdate(run);
      if (isTerminal(run)) {
        this.stop();
        return;
      }
    } catch (error) {
      this.failures += 1;
      this.hooks.onError?.(error);
    }
    if (!this.stopped) {
      this.timer = this.setTimer(() => void this.tick(), this.nextDelay());
    }
  }
}
