/**
 * Pure render functions: ViewState in, HTML string out.
 *
 * Keeping these free of DOM and network access makes the judging screen
 * testable as plain string assertions.  The candidates are printed exactly
 * as received, in presentation order; nothing in this module knows which
 * system produced which candidate.
 */

import type { ViewState } from './state.js';

export const INSTRUCTIONS =
  'Pick the candidate that is fluent, keeps the meaning of the input, and ' +
  'rephrases it rather than repeating it. Pick "neither" if both candidates ' +
  'are disfluent.';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
    .replace(/'/g, '&#39;');
}

export function renderBanner(): string {
  return `<header class="banner"><p>${escapeHtml(INSTRUCTIONS)}</p>` +
    '<p class="hint">keys: 1 = first, 2 = second, 0 = neither</p></header>';
}

export function renderProgress(state: ViewState): string {
  return `<div class="progress">judged ${state.judged} / ${state.total}</div>`;
}

function renderNotice(state: ViewState): string {
  if (!state.notice) return '';
  return `<div class="notice">${escapeHtml(state.notice)}</div>`;
}

function renderItem(state: ViewState): string {
  const item = state.item;
  if (item === null) return '';
  return [
    `<section class="item" data-item-id="${item.item_id}">`,
    `<p class="input">${escapeHtml(item.input)}</p>`,
    `<button class="candidate" data-choice="first">1. ${escapeHtml(item.first)}</button>`,
    `<button class="candidate" data-choice="second">2. ${escapeHtml(item.second)}</button>`,
    '<button class="candidate" data-choice="neither">0. neither</button>',
    '</section>',
  ].join('\n');
}

function renderDone(state: ViewState): string {
  return '<section class="done"><p>all items judged. thank you!</p>' +
    `<p>judged ${state.judged} / ${state.total}</p>` +
    '<p><a data-action="report" href="#report">view the session report</a></p>' +
    '</section>';
}

function renderOffline(state: ViewState): string {
  const queued = state.queued > 0
    ? `<p>${state.queued} judgment(s) queued for delivery.</p>` : '';
  return `<section class="offline">${renderNotice(state)}${queued}` +
    '<button data-action="retry">retry</button></section>';
}

export function renderApp(state: ViewState): string {
  const body =
    state.phase === 'loading' ? '<p class="loading">loading…</p>' :
    state.phase === 'judging' ? renderNotice(state) + renderItem(state) :
    state.phase === 'offline' ? renderOffline(state) :
    state.phase === 'done' ? renderDone(state) :
    `<section class="error">${renderNotice(state)}</section>`;
  return renderBanner() + renderProgress(state) + body;
}
