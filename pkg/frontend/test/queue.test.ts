import { describe, expect, it } from 'vitest';

import { AnnotationApi } from '../src/api.js';
import { OfflineQueue } from '../src/queue.js';
import { JudgingController } from '../src/state.js';
import { MockAnnotationServer, sampleItems } from './helpers.js';

describe('OfflineQueue', () => {
  it('replays queued judgments in order once online', async () => {
    const server = new MockAnnotationServer('s1', sampleItems(3));
    const api = new AnnotationApi('http://mock', server.fetch);
    const queue = new OfflineQueue();
    queue.enqueue({ item_id: 0, annotator: 'ann', choice: 'first' });
    queue.enqueue({ item_id: 1, annotator: 'ann', choice: 'neither' });
    const result = await queue.flush(api, 's1');
    expect(result).toEqual({ delivered: 2, dropped: 0, remaining: 0 });
    expect(server.judgments.map((j) => j.item_id)).toEqual([0, 1]);
  });

  it('keeps everything queued while still offline', async () => {
    const server = new MockAnnotationServer('s1', sampleItems(2));
    server.offline = true;
    const api = new AnnotationApi('http://mock', server.fetch);
    const queue = new OfflineQueue();
    queue.enqueue({ item_id: 0, annotator: 'ann', choice: 'first' });
    const result = await queue.flush(api, 's1');
    expect(result.remaining).toBe(1);
    expect(queue.size).toBe(1);
  });

  it('treats a 409 during replay as delivered', async () => {
    const server = new MockAnnotationServer('s1', sampleItems(2));
    const api = new AnnotationApi('http://mock', server.fetch);
    await api.submitJudgment('s1', { item_id: 0, annotator: 'ann', choice: 'first' });
    const queue = new OfflineQueue();
    queue.enqueue({ item_id: 0, annotator: 'ann', choice: 'second' });
    const result = await queue.flush(api, 's1');
    expect(result).toEqual({ delivered: 1, dropped: 0, remaining: 0 });
  });

  it('drops judgments the server permanently rejects', async () => {
    const server = new MockAnnotationServer('s1', sampleItems(2));
    server.failNextJudgment = { status: 400, detail: 'malformed' };
    const api = new AnnotationApi('http://mock', server.fetch);
    const queue = new OfflineQueue();
    queue.enqueue({ item_id: 0, annotator: 'ann', choice: 'first' });
    queue.enqueue({ item_id: 1, annotator: 'ann', choice: 'second' });
    const result = await queue.flush(api, 's1');
    expect(result).toEqual({ delivered: 1, dropped: 1, remaining: 0 });
    expect(server.judgments.map((j) => j.item_id)).toEqual([1]);
  });
});

describe('offline judging flow', () => {
  it('queues the choice on network failure and resumes after retry', async () => {
    const server = new MockAnnotationServer('s1', sampleItems(2));
    const api = new AnnotationApi('http://mock', server.fetch);
    const controller = new JudgingController(api, 's1', 'ann');
    await controller.start();

    server.offline = true;
    await controller.choose('first');
    expect(controller.state.phase).toBe('offline');
    expect(controller.state.queued).toBe(1);
    expect(server.judgments).toHaveLength(0);  // nothing reached the server

    await controller.retry();                  // still down: nothing lost
    expect(controller.state.phase).toBe('offline');
    expect(controller.state.queued).toBe(1);

    server.offline = false;
    await controller.retry();
    expect(server.judgments.map((j) => j.choice)).toEqual(['first']);
    expect(controller.state.phase).toBe('judging');
    expect(controller.state.item?.item_id).toBe(1);
    expect(controller.state.judged).toBe(1);
    expect(controller.state.queued).toBe(0);
  });
});
