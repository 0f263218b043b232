/**
 * Wire types for the annotation session API.
 *
 * Field names mirror the server JSON exactly (snake_case where the server
 * uses it) so payloads need no mapping layer.  Candidates arrive only in
 * presentation order ("first"/"second"); which underlying system produced
 * which candidate is never part of any payload the UI consumes.
 */

export type Choice = 'first' | 'second' | 'neither';

export interface NextItemPayload {
  session: string;
  done: false;
  item_id: number;
  input: string;
  first: string;
  second: string;
  judged: number;
  total: number;
}

export interface SessionDonePayload {
  session: string;
  done: true;
  judged: number;
  total: number;
}

export type NextPayload = NextItemPayload | SessionDonePayload;

export interface JudgmentAck {
  accepted: boolean;
  session: string;
  item_id: number;
  judged: number;
}

export interface KappaPair {
  annotators: string[];
  kappa: number | null;
  p_o: number;
  p_e: number;
  n: number;
}

export interface ReportPayload {
  session: string;
  status: string;
  n_items: number;
  votes: Record<string, number>;
  percentages: Record<string, number>;
  agreed_items: number;
  discarded_no_majority: number;
  kappa: {
    pairs: KappaPair[];
    average: number | null;
    no_majority: number;
  };
}

export interface PendingJudgment {
  item_id: number;
  annotator: string;
  choice: Choice;
}

/** The only keys an annotator-facing payload may carry (blinding contract). */
export const ALLOWED_ITEM_KEYS: ReadonlySet<string> = new Set([
  'session', 'done', 'item_id', 'input', 'first', 'second', 'judged', 'total',
]);
