/**
 * Session state machine for one annotator working through one session.
 *
 * The judged/total counters shown to the annotator only ever move forward:
 * every server payload carries the authoritative count and is folded in with
 * max().  Submissions advance optimistically; an HTTP rejection rolls the
 * view back to the same item with the reason surfaced, a duplicate (409)
 * skips forward without double-counting, and a transport failure queues the
 * judgment for replay so no work is lost while offline.
 */

import { AnnotationApi, ApiError, NetworkError } from './api.js';
import { OfflineQueue } from './queue.js';
import type { Choice, NextItemPayload } from './types.js';

export type Phase = 'loading' | 'judging' | 'offline' | 'done' | 'error';

export interface ViewState {
  phase: Phase;
  item: NextItemPayload | null;
  judged: number;
  total: number;
  queued: number;
  notice: string;
}

/** Keyboard mapping: 1 = first, 2 = second, 0 = neither. */
export function keyToChoice(key: string): Choice | null {
  switch (key) {
    case '1': return 'first';
    case '2': return 'second';
    case '0': return 'neither';
    default: return null;
  }
}

export class JudgingController {
  private readonly queue = new OfflineQueue();
  private readonly listeners: Array<(state: ViewState) => void> = [];
  private view: ViewState = {
    phase: 'loading', item: null, judged: 0, total: 0, queued: 0, notice: '',
  };

  constructor(
    private readonly api: AnnotationApi,
    readonly session: string,
    readonly annotator: string,
  ) {}

  get state(): ViewState {
    return { ...this.view };
  }

  subscribe(listener: (state: ViewState) => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    const snapshot = this.state;
    for (const listener of this.listeners) listener(snapshot);
  }

  private patch(changes: Partial<ViewState>): void {
    if (changes.judged !== undefined) {
      changes.judged = Math.max(this.view.judged, changes.judged);
    }
    this.view = { ...this.view, ...changes };
    this.emit();
  }

  async start(): Promise<void> {
    this.patch({ phase: 'loading', notice: '' });
    await this.advance();
  }

  /** Fetch the next unjudged item, or land on the completion screen. */
  private async advance(): Promise<void> {
    let payload;
    try {
      payload = await this.api.fetchNext(this.session, this.annotator);
    } catch (error) {
      if (error instanceof NetworkError) {
        this.patch({ phase: 'offline', notice: 'server unreachable' });
        return;
      }
      this.patch({ phase: 'error', notice: describe(error) });
      return;
    }
    if (payload.done) {
      this.patch({ phase: 'done', item: null,
                   judged: payload.judged, total: payload.total });
    } else {
      this.patch({ phase: 'judging', item: payload,
                   judged: payload.judged, total: payload.total });
    }
  }

  /** Submit a choice for the current item and move on. */
  async choose(choice: Choice): Promise<void> {
    const item = this.view.item;
    if (this.view.phase !== 'judging' || item === null) return;
    const judgment = { item_id: item.item_id, annotator: this.annotator, choice };
    this.patch({ phase: 'loading', notice: '' });
    try {
      const ack = await this.api.submitJudgment(this.session, judgment);
      this.patch({ judged: ack.judged });
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // Already recorded for this annotator: skip ahead, count unchanged.
        this.patch({ notice: 'item was already judged; skipping ahead' });
      } else if (error instanceof ApiError) {
        this.patch({ phase: 'judging', item, notice: `rejected: ${error.message}` });
        return;
      } else if (error instanceof NetworkError) {
        this.queue.enqueue(judgment);
        this.patch({ phase: 'offline', queued: this.queue.size,
                     notice: 'offline: judgment queued for retry' });
        return;
      } else {
        throw error;
      }
    }
    await this.advance();
  }

  /** Replay queued judgments, then resume from the server's view. */
  async retry(): Promise<void> {
    this.patch({ phase: 'loading', notice: '' });
    const flushed = await this.queue.flush(this.api, this.session);
    if (flushed.remaining > 0) {
      this.patch({ phase: 'offline', queued: flushed.remaining,
                   notice: 'still offline: judgments remain queued' });
      return;
    }
    this.patch({ queued: 0 });
    await this.advance();
  }

  /** Keyboard entry point; returns the choice taken, if any. */
  handleKey(key: string): Choice | null {
    if (this.view.phase !== 'judging') return null;
    const choice = keyToChoice(key);
    if (choice !== null) void this.choose(choice);
    return choice;
  }
}

function describe(error: unknown): string {
  return error instanceof Error ? error.message : String(error);
}
