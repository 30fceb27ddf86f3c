// Pure render functions: documents in, HTML strings out. No state, no DOM
// access, and no arithmetic on fetched numbers — what the server sent is
// what gets shown, which is exactly what the component tests check.

import {
  LintToken,
  ReviewItemDoc,
  RunDoc,
  STAGES,
  SvaArtifactDoc,
} from './types.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

// --- run inspection ---------------------------------------------------------

export function runView(run: RunDoc, svaArtifacts: SvaArtifactDoc[]): string {
  const stages = STAGES.map((stage) => stageBadge(
    stage,
    run.stage_status[stage] ?? 'pending',
    run.counts[stage],
  )).join('');
  const spr = run.syntax_pass_rate === null ? 'n/a' : `${run.syntax_pass_rate}%`;
  const failure = run.failure
    ? `<div class="failure">stage <b>${escapeHtml(run.failure.stage)}</b> failed: ` +
      `${escapeHtml(run.failure.error)} ` +
      `<a href="#raw-${escapeHtml(run.failure.stage)}">raw responses</a></div>`
    : '';
  const rows = svaArtifacts.map(svaRow).join('');
  return `
<section class="run" data-run-id="${escapeHtml(run.run_id)}">
  <h2>run ${escapeHtml(run.run_id)}</h2>
  <div class="stages">${stages}</div>
  <div class="spr">syntax pass rate: <span data-field="spr">${spr}</span></div>
  ${failure}
  <table class="svas">
    <thead><tr><th>assertion</th><th>syntax</th><th>notes</th></tr></thead>
    <tbody>${rows}</tbody>
  </table>
</section>`;
}

function stageBadge(stage: string, status: string, count: number | undefined): string {
  const shown = count === undefined ? '' : ` (<span data-count="${stage}">${count}</span>)`;
  return `<span class="stage stage-${status}" data-stage="${stage}">` +
    `${stage}: ${status}${shown}</span>`;
}

function svaRow(sva: SvaArtifactDoc): string {
  const badge = sva.syntax_ok
    ? '<span class="badge ok">ok</span>'
    : '<span class="badge bad">syntax</span>';
  const notes = sva.semantic_warnings.map((w) => escapeHtml(w)).join('; ');
  return `<tr data-sva-id="${escapeHtml(sva.id)}">` +
    `<td><code>${escapeHtml(sva.source_text)}</code></td>` +
    `<td>${badge}</td><td>${notes}</td></tr>`;
}

// --- review queue ------------------------------------------------------------

export function reviewListView(items: ReviewItemDoc[], selectedId?: string): string {
  if (items.length === 0) {
    return '<p class="empty">no review items</p>';
  }
  const rows = items.map((item) => {
    const selected = item.item_id === selectedId ? ' selected' : '';
    const state = item.state === 'decided'
      ? `decided: ${item.verdict ?? ''}`
      : 'open';
    return `<li class="review-item${selected}" data-item-id="${escapeHtml(item.item_id)}">` +
      `<span class="task">${escapeHtml(item.task)}</span> ` +
      `<span class="state state-${item.state}">${escapeHtml(state)}</span></li>`;
  }).join('');
  return `<ul class="review-list">${rows}</ul>`;
}

export function reviewDetailView(item: ReviewItemDoc, highlighted?: string): string {
  const decided = item.state === 'decided';
  const verdictLine = decided
    ? `<div class="decision">decided: <b>${escapeHtml(item.verdict ?? '')}</b>` +
      ` by ${escapeHtml(item.reviewer ?? '')}` +
      (item.reason ? ` — ${escapeHtml(item.reason)}` : '') + '</div>'
    : '';
  const candidateStatus = item.candidate_status
    ? `<div class="candidate-status">candidate: ` +
      `<span data-field="candidate-status">${escapeHtml(item.candidate_status)}</span></div>`
    : '';
  const goldenPane = payloadPane('golden source', item.golden, highlighted);
  const candidatePane = payloadPane('candidate', item.payload, highlighted);
  return `
<section class="review-detail" data-item-id="${escapeHtml(item.item_id)}">
  <nav class="breadcrumbs">${escapeHtml(item.task)} / candidate ` +
    `${escapeHtml(item.candidate_ref)}</nav>
  ${verdictLine}${candidateStatus}
  <div class="panes">${goldenPane}${candidatePane}</div>
  ${verdictForm(item)}
</section>`;
}

function payloadPane(
  title: string,
  payload: Record<string, unknown>,
  highlighted?: string,
): string {
  const body = highlighted ?? `<pre>${escapeHtml(JSON.stringify(payload, null, 1))}</pre>`;
  return `<div class="pane"><h3>${escapeHtml(title)}</h3>${body}</div>`;
}

export function verdictForm(item: ReviewItemDoc): string {
  const disabled = item.state === 'decided' ? ' disabled' : '';
  return `
<form class="verdict-form" data-item-id="${escapeHtml(item.item_id)}">
  <input name="reviewer" placeholder="reviewer"${disabled}>
  <input name="reason" placeholder="reason (required to reject)"${disabled}>
  <button name="approve" value="approve"${disabled}>approve</button>
  <button name="reject" value="reject"${disabled}>reject</button>
</form>`;
}

// --- assertion highlighting ---------------------------------------------------

const TOKEN_CLASSES: Record<string, string> = {
  IDENT: 'tok-ident',
  NUMBER: 'tok-num',
  SFUNC: 'tok-func',
  OVL_IMPL: 'tok-op',
  NONOVL_IMPL: 'tok-op',
  DELAY: 'tok-op',
  AND2: 'tok-op',
  OR2: 'tok-op',
  EQ2: 'tok-op',
  NEQ: 'tok-op',
  BANG: 'tok-op',
};

const KEYWORDS = new Set(['assert', 'property', 'posedge', 'not', 'and', 'or']);

// Highlighting is driven entirely by the lint endpoint's token list;
// the UI has no lexer of its own.
export function highlightSva(text: string, tokens: LintToken[]): string {
  const lines = text.split('\n');
  const out: string[] = [];
  let line = 1;
  let col = 1;

  const flushPlain = (toLine: number, toCol: number) => {
    while (line < toLine) {
      out.push(escapeHtml(lines[line - 1].slice(col - 1)), '\n');
      line += 1;
      col = 1;
    }
    if (toCol > col) {
      out.push(escapeHtml(lines[line - 1].slice(col - 1, toCol - 1)));
      col = toCol;
    }
  };

  for (const token of tokens) {
    flushPlain(token.line, token.col);
    const cls = KEYWORDS.has(token.text)
      ? 'tok-kw'
      : TOKEN_CLASSES[token.kind] ?? 'tok-plain';
    out.push(`<span class="${cls}">${escapeHtml(token.text)}</span>`);
    col += token.text.length;
  }
  flushPlain(lines.length, lines[lines.length - 1].length + 1);
  return `<code class="sva">${out.join('')}</code>`;
}
