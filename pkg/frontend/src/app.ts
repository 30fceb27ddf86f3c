// DOM wiring. All state lives on the server; this file only fetches,
// renders, and posts verdicts. Configuration comes from query parameters:
//   ?api=<base url>&token=<shared token>&run=<run id to watch>

import { ApiClient, validateVerdictForm } from './api.js';
import { RunPoller } from './poll.js';
import { ApiError, ReviewItemDoc, SvaArtifactDoc } from './types.js';
import {
  escapeHtml,
  highlightSva,
  reviewDetailView,
  reviewListView,
  runView,
} from './views.js';

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function notice(text: string, kind: 'info' | 'error' = 'info'): void {
  const bar = el('notice');
  bar.textContent = text;
  bar.className = `notice ${kind}`;
}

export function bootstrap(): void {
  const params = new URLSearchParams(window.location.search);
  const api = new ApiClient({
    baseUrl: params.get('api') ?? '',
    token: params.get('token') ?? undefined,
  });

  let selectedItem: string | undefined;
  let stateFilter: 'open' | 'decided' | undefined = 'open';

  async function refreshQueue(): Promise<void> {
    try {
      const queue = await api.getReviewQueue(stateFilter);
      el('review-list').innerHTML = reviewListView(queue.items, selectedItem);
      for (const node of el('review-list').querySelectorAll('.review-item')) {
        node.addEventListener('click', () => {
          selectedItem = (node as HTMLElement).dataset.itemId;
          void showDetail();
        });
      }
    } catch (error) {
      notice(`queue fetch failed: ${String(error)} — retry`, 'error');
    }
  }

  async function showDetail(): Promise<void> {
    if (!selectedItem) return;
    try {
      const item = await api.getReviewItem(selectedItem);
      el('review-detail').innerHTML = reviewDetailView(
        item,
        await maybeHighlight(item),
      );
      wireVerdictForm(item);
    } catch (error) {
      notice(`item fetch failed: ${String(error)} — retry`, 'error');
    }
  }

  async function maybeHighlight(item: ReviewItemDoc): Promise<string | undefined> {
    const sva = item.golden['sva'] as { source_text?: string } | undefined;
    if (!sva?.source_text) return undefined;
    try {
      const lint = await api.lint(sva.source_text);
      return highlightSva(sva.source_text, lint.tokens);
    } catch {
      return undefined; // plain rendering is fine when lint is unreachable
    }
  }

  function wireVerdictForm(item: ReviewItemDoc): void {
    const form = el('review-detail').querySelector('.verdict-form');
    if (!form || item.state === 'decided') return;
    form.addEventListener('submit', (event) => event.preventDefault());
    for (const name of ['approve', 'reject'] as const) {
      const button = form.querySelector(`button[name=${name}]`);
      button?.addEventListener('click', (event) => {
        event.preventDefault();
        const reviewer = (form.querySelector('input[name=reviewer]') as HTMLInputElement).value;
        const reason = (form.querySelector('input[name=reason]') as HTMLInputElement).value;
        const problem = validateVerdictForm(name, reviewer, reason);
        if (problem) {
          notice(problem, 'error');
          return;
        }
        void submitVerdict(item.item_id, name, reviewer, reason);
      });
    }
  }

  async function submitVerdict(
    itemId: string,
    verdict: 'approve' | 'reject',
    reviewer: string,
    reason: string,
  ): Promise<void> {
    try {
      await api.postVerdict(itemId, verdict, reviewer, reason || undefined);
      notice(`verdict recorded: ${verdict}`);
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        notice('already decided by another reviewer', 'error');
      } else {
        notice(`verdict failed: ${String(error)} — retry`, 'error');
        return; // no refetch: leave the form as it is for a retry
      }
    }
    await Promise.all([refreshQueue(), showDetail()]);
  }

  el('filter-open').addEventListener('click', () => {
    stateFilter = 'open';
    void refreshQueue();
  });
  el('filter-all').addEventListener('click', () => {
    stateFilter = undefined;
    void refreshQueue();
  });

  const runId = params.get('run');
  if (runId) {
    const poller = new RunPoller(api, runId, {
      onUpdate: (run) => {
        void (async () => {
          let svas: SvaArtifactDoc[] = [];
          try {
            const listing = await api.getRunArtifacts(runId, 'svas');
            svas = listing.artifacts as unknown as SvaArtifactDoc[];
          } catch {
            // artifacts appear once the stage finishes
          }
          el('run-view').innerHTML = runView(run, svas);
        })();
      },
      onError: (error) => {
        if (error instanceof ApiError && error.status === 404) {
          el('run-view').innerHTML =
            `<p class="empty">run ${escapeHtml(runId)} not found</p>`;
        } else {
          notice(`run poll failed: ${String(error)}`, 'error');
        }
      },
    });
    poller.start();
  }

  void refreshQueue();
}

bootstrap();
