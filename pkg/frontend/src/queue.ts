/**
 * Offline judgment queue.
 *
 * A submission that fails at the transport level is parked here and replayed
 * once connectivity returns.  Replays treat a 409 as delivered (the server
 * already has the judgment); other HTTP rejections drop the entry as
 * unrecoverable; transport failures keep it queued.
 */

import { AnnotationApi, ApiError, NetworkError } from './api.js';
import type { PendingJudgment } from './types.js';

export interface FlushResult {
  delivered: number;
  dropped: number;
  remaining: number;
}

export class OfflineQueue {
  private pending: PendingJudgment[] = [];

  get size(): number {
    return this.pending.length;
  }

  entries(): readonly PendingJudgment[] {
    return this.pending;
  }

  enqueue(judgment: PendingJudgment): void {
    this.pending.push(judgment);
  }

  /** Replay queued judgments in order; stop at the first transport failure. */
  async flush(api: AnnotationApi, session: string): Promise<FlushResult> {
    let delivered = 0;
    let dropped = 0;
    while (this.pending.length > 0) {
      const head = this.pending[0]!;
      try {
        await api.submitJudgment(session, head);
        delivered += 1;
      } catch (error) {
        if (error instanceof ApiError && error.status === 409) {
          delivered += 1;  // already recorded server-side
        } else if (error instanceof ApiError) {
          dropped += 1;
        } else if (error instanceof NetworkError) {
          break;  // still offline; keep the rest queued
        } else {
          throw error;
        }
      }
      this.pending.shift();
    }
    return { delivered, dropped, remaining: this.pending.length };
  }
}
