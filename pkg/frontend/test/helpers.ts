/**
 * In-memory stand-in for the annotation server, mirroring the endpoint
 * semantics the client relies on: per-annotator next-item iteration,
 * duplicate rejection with 409, and a done marker once items run out.
 * Toggling `offline` makes the transport itself fail, the way a dropped
 * connection does.
 */

import type { FetchLike } from '../src/api.js';
import type { Choice } from '../src/types.js';

export interface MockItem {
  item_id: number;
  input: string;
  first: string;
  second: string;
}

export function sampleItems(n: number): MockItem[] {
  return Array.from({ length: n }, (_, i) => ({
    item_id: i,
    input: `input ${i}`,
    first: `candidate one of ${i}`,
    second: `candidate two of ${i}`,
  }));
}

function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

export class MockAnnotationServer {
  offline = false;
  /** When set, /next reports this judged count instead of the true one. */
  forcedJudged: number | null = null;
  /** When set, the next judgment POST fails once with this status. */
  failNextJudgment: { status: number; detail: string } | null = null;
  readonly judgments: Array<{ item_id: number; annotator: string; choice: Choice }> = [];
  private readonly seen = new Map<string, Set<number>>();

  constructor(readonly session: string, readonly items: MockItem[]) {}

  private judgedBy(annotator: string): Set<number> {
    let set = this.seen.get(annotator);
    if (!set) {
      set = new Set();
      this.seen.set(annotator, set);
    }
    return set;
  }

  fetch: FetchLike = async (url, init) => {
    if (this.offline) {
      throw new TypeError('fetch failed: connection refused');
    }
    const parsed = new URL(url, 'http://mock');
    const parts = parsed.pathname.split('/').filter(Boolean);
    // expected: api / session / {sid} / (next | judgment | report)
    if (parts[0] !== 'api' || parts[1] !== 'session' || parts[2] !== this.session) {
      return json({ detail: `unknown session ${parts[2]}` }, 404);
    }
    const endpoint = parts[3];
    if (endpoint === 'next') {
      return this.handleNext(parsed.searchParams.get('annotator') ?? '');
    }
    if (endpoint === 'judgment' && init?.method === 'POST') {
      return this.handleJudgment(JSON.parse(String(init.body)));
    }
    return json({ detail: 'no such endpoint' }, 404);
  };

  private handleNext(annotator: string): Response {
    const seen = this.judgedBy(annotator);
    const judged = this.forcedJudged ?? seen.size;
    const item = this.items.find((i) => !seen.has(i.item_id));
    if (!item) {
      return json({ session: this.session, done: true,
                    judged, total: this.items.length });
    }
    return json({ session: this.session, done: false, ...item,
                  judged, total: this.items.length });
  }

  private handleJudgment(body: { item_id: number; annotator: string; choice: Choice }): Response {
    if (this.failNextJudgment) {
      const failure = this.failNextJudgment;
      this.failNextJudgment = null;
      return json({ detail: failure.detail }, failure.status);
    }
    const seen = this.judgedBy(body.annotator);
    if (seen.has(body.item_id)) {
      return json({ detail: `annotator ${body.annotator} already judged item ${body.item_id}` }, 409);
    }
    seen.add(body.item_id);
    this.judgments.push(body);
    return json({ accepted: true, session: this.session,
                  item_id: body.item_id, judged: seen.size });
  }
}
