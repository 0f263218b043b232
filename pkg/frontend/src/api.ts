/**
 * Thin typed client for the annotation session endpoints.
 *
 * Transport failures (server unreachable, fetch rejected) raise NetworkError
 * so callers can queue work for retry; HTTP-level rejections raise ApiError
 * with the status code.  Duplicate submissions surface as status 409.
 */

import type { Choice, JudgmentAck, NextPayload, ReportPayload } from './types.js';

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = 'ApiError';
  }
}

export class NetworkError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'NetworkError';
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = await response.json();
    return typeof body.detail === 'string' ? body.detail : response.statusText;
  } catch {
    return response.statusText;
  }
}

export class AnnotationApi {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, '');
    // Default to the ambient fetch, bound so browsers keep their receiver.
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async request(url: string, init?: RequestInit): Promise<Response> {
    let response: Response;
    try {
      response = await this.fetchFn(url, init);
    } catch (error) {
      throw new NetworkError(error instanceof Error ? error.message : 'fetch failed');
    }
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return response;
  }

  /** Next unjudged item for this annotator, or the done marker. */
  async fetchNext(session: string, annotator: string): Promise<NextPayload> {
    const url = `${this.baseUrl}/api/session/${encodeURIComponent(session)}/next` +
      `?annotator=${encodeURIComponent(annotator)}`;
    const response = await this.request(url);
    return response.json();
  }

  /** Record one choice; 409 means the item was already judged by this annotator. */
  async submitJudgment(
    session: string,
    judgment: { item_id: number; annotator: string; choice: Choice },
  ): Promise<JudgmentAck> {
    const url = `${this.baseUrl}/api/session/${encodeURIComponent(session)}/judgment`;
    const response = await this.request(url, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(judgment),
    });
    return response.json();
  }

  async fetchReport(session: string): Promise<ReportPayload> {
    const url = `${this.baseUrl}/api/session/${encodeURIComponent(session)}/report`;
    const response = await this.request(url);
    return response.json();
  }
}
