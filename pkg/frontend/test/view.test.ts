import { describe, expect, it } from 'vitest';

import type { ViewState } from '../src/state.js';
import { INSTRUCTIONS, escapeHtml, renderApp, renderBanner } from '../src/view.js';

function judgingState(overrides: Partial<ViewState> = {}): ViewState {
  return {
    phase: 'judging',
    item: {
      session: 's1', done: false, item_id: 4,
      input: 'the cat sat', first: 'a cat was sitting', second: 'sat the cat did',
      judged: 4, total: 20,
    },
    judged: 4, total: 20, queued: 0, notice: '',
    ...overrides,
  };
}

describe('view rendering', () => {
  it('shows the judging criteria and keyboard hints in the banner', () => {
    const banner = renderBanner();
    expect(INSTRUCTIONS).toMatch(/fluent/);
    expect(INSTRUCTIONS).toMatch(/meaning/);
    expect(INSTRUCTIONS).toMatch(/rephrases/);
    expect(banner).toContain('1 = first');
    expect(banner).toContain('2 = second');
    expect(banner).toContain('0 = neither');
  });

  it('renders the input and both candidates in presentation order', () => {
    const html = renderApp(judgingState());
    expect(html).toContain('the cat sat');
    const first = html.indexOf('a cat was sitting');
    const second = html.indexOf('sat the cat did');
    expect(first).toBeGreaterThan(-1);
    expect(second).toBeGreaterThan(first);
    expect(html).toContain('judged 4 / 20');
  });

  it('escapes markup in server-provided text', () => {
    expect(escapeHtml('<b>&"\'')).toBe('&lt;b&gt;&amp;&quot;&#39;');
    const state = judgingState();
    state.item = { ...state.item!, input: '<script>alert(1)</script>' };
    const html = renderApp(state);
    expect(html).not.toContain('<script>');
    expect(html).toContain('&lt;script&gt;');
  });

  it('renders the completion screen with a report link', () => {
    const html = renderApp({ phase: 'done', item: null, judged: 20, total: 20,
                             queued: 0, notice: '' });
    expect(html).toContain('all items judged');
    expect(html).toContain('judged 20 / 20');
    expect(html).toContain('data-action="report"');
  });

  it('renders the offline screen with a retry affordance and queue size', () => {
    const html = renderApp({ phase: 'offline', item: null, judged: 3, total: 20,
                             queued: 2, notice: 'offline: judgment queued for retry' });
    expect(html).toContain('data-action="retry"');
    expect(html).toContain('2 judgment(s) queued');
    expect(html).toContain('offline: judgment queued for retry');
  });

  it('surfaces notices without breaking the judging card', () => {
    const html = renderApp(judgingState({ notice: 'item was already judged; skipping ahead' }));
    expect(html).toContain('already judged');
    expect(html).toContain('data-choice="first"');
    expect(html).toContain('data-choice="second"');
    expect(html).toContain('data-choice="neither"');
  });
});
