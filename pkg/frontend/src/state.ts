// Session state machine. The store mirrors the service's /pending and
// /status responses verbatim; rendered progress never extrapolates beyond
// the last snapshot, and no constraint logic lives on the client.

import {
  AnswerContradiction,
  ApiClient,
  PendingQuery,
  StatusResponse,
  Verdict,
} from './api.js';

export type Phase =
  | 'connecting'
  | 'waiting'
  | 'question'
  | 'posting'
  | 'disconnected'
  | 'finished'
  | 'failed'
  | 'cancelled';

export interface AnswerRecord {
  queryId: number;
  s: number;
  t: number;
  verdict: Verdict;
  context: string;
}

export interface UiSessionState {
  phase: Phase;
  pending: PendingQuery | null;
  status: StatusResponse | null;
  history: AnswerRecord[];
  contradiction: AnswerContradiction | null;
  kTrajectory: number[];
  nmiTrajectory: Array<number | null>;
}

export interface StoreOptions {
  pendingWait?: number;
  sleep?: (ms: number) => Promise<void>;
  maxRetries?: number;
}

const defaultSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

const TERMINAL: ReadonlySet<string> = new Set(['finished', 'failed', 'cancelled']);

export class SessionStore {
  private state: UiSessionState = {
    phase: 'connecting',
    pending: null,
    status: null,
    history: [],
    contradiction: null,
    kTrajectory: [],
    nmiTrajectory: [],
  };

  private listeners: Array<(s: UiSessionState) => void> = [];
  private pendingWait: number;
  private sleep: (ms: number) => Promise<void>;
  private maxRetries: number;

  constructor(private api: ApiClient, opts: StoreOptions = {}) {
    this.pendingWait = opts.pendingWait ?? 20;
    this.sleep = opts.sleep ?? defaultSleep;
    this.maxRetries = opts.maxRetries ?? 8;
  }

  getState(): UiSessionState {
    return this.state;
  }

  subscribe(fn: (s: UiSessionState) => void): () => void {
    this.listeners.push(fn);
    fn(this.state);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  private update(patch: Partial<UiSessionState>): void {
    this.state = { ...this.state, ...patch };
    for (const fn of this.listeners) fn(this.state);
  }

  async refreshStatus(): Promise<void> {
    try {
      const status = await this.api.getStatus();
      const k = this.state.kTrajectory;
      const nmi = this.state.nmiTrajectory;
      const lastK = k.length ? k[k.length - 1] : undefined;
      const patch: Partial<UiSessionState> = { status };
      if (status.metrics && status.metrics.k !== lastK) {
        patch.kTrajectory = [...k, status.metrics.k];
        patch.nmiTrajectory = [...nmi, status.metrics.nmi];
      }
      this.update(patch);
    } catch {
      // status is advisory; the pending loop owns connectivity handling
    }
  }

  /** One long-poll cycle; returns false once the session is terminal. */
  async pollPendingOnce(): Promise<boolean> {
    try {
      const resp = await this.api.getPending(this.pendingWait);
      if (resp.pending) {
        const current = this.state.pending;
        if (!current || current.query_id !== resp.pending.query_id) {
          this.update({ pending: resp.pending, phase: 'question', contradiction: null });
        } else if (this.state.phase === 'disconnected') {
          this.update({ phase: 'question' });
        }
        return true;
      }
      if (TERMINAL.has(resp.state)) {
        this.update({ pending: null, phase: resp.state as Phase });
        await this.refreshStatus();
        return false;
      }
      this.update({ pending: null, phase: 'waiting' });
      return true;
    } catch {
      this.update({ phase: 'disconnected' });
      await this.sleep(500);
      return true;
    }
  }

  /**
   * Submit the verdict for the displayed query. Accepted answers clear the
   * question and record history; stale ids silently refresh; contradictions
   * surface the explanation and re-ask; network failures retry with backoff.
   */
  async submit(verdict: Verdict): Promise<void> {
    const pending = this.state.pending;
    if (!pending || this.state.phase !== 'question') return; // double-click guard
    this.update({ phase: 'posting' });
    let backoff = 400;
    for (let attempt = 0; attempt < this.maxRetries; attempt++) {
      try {
        const result = await this.api.postAnswer(pending.query_id, verdict);
        if (result.kind === 'accepted') {
          this.update({
            pending: null,
            phase: 'waiting',
            contradiction: null,
            history: [
              ...this.state.history,
              {
                queryId: pending.query_id,
                s: pending.s,
                t: pending.t,
                verdict,
                context: pending.context,
              },
            ],
          });
          await this.refreshStatus();
        } else if (result.kind === 'stale') {
          this.update({ pending: null, phase: 'waiting', contradiction: null });
        } else {
          this.update({ phase: 'question', contradiction: result });
        }
        return;
      } catch {
        this.update({ phase: 'disconnected' });
        await this.sleep(backoff);
        backoff = Math.min(backoff * 2, 5000);
      }
    }
    // retries exhausted; stay disconnected so the poll loop can recover
  }

  /** Drive the session until it reaches a terminal state. */
  async run(): Promise<void> {
    await this.refreshStatus();
    for (;;) {
      if (this.state.phase === 'question' || this.state.phase === 'posting') {
        await this.sleep(150); // parked on the human; submit() resumes the flow
        continue;
      }
      if (!(await this.pollPendingOnce())) return;
    }
  }
}
