// Typed client for the annotation service JSON API. The UI never mutates
// session state except through postAnswer.

export type Verdict = 'must' | 'cannot';

export interface Progress {
  queries_used: number;
  budget: number;
  k: number | null;
}

export interface PairDisplay {
  mode: 'images' | 'scatter';
  assets?: [string, string];
  coords?: [[number, number], [number, number]];
}

export interface PendingQuery {
  query_id: number;
  s: number;
  t: number;
  context: string;
  progress: Progress;
  display: PairDisplay;
}

export interface PendingResponse {
  pending: PendingQuery | null;
  state: string;
}

export interface MetricsRow {
  queries_used: number;
  k: number;
  nmi: number | null;
  ari: number | null;
  purity: number | null;
  upsilon: number | null;
  r: number | null;
}

export interface StatusResponse {
  state: string;
  error: string | null;
  progress: Progress;
  metrics: MetricsRow | null;
  cluster_size_histogram: Record<string, number>;
}

export interface AnswerAccepted {
  kind: 'accepted';
  duplicate: boolean;
  progress: Progress;
}

export interface AnswerStale {
  kind: 'stale';
}

export interface AnswerContradiction {
  kind: 'contradiction';
  detail: string;
  pair: [number, number];
  existing: Verdict;
  attempted: Verdict;
}

export type AnswerResult = AnswerAccepted | AnswerStale | AnswerContradiction;

export interface ProjectionResponse {
  sample_ids: number[];
  points: [number, number][];
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private base: string,
    private sessionId: string,
    private fetchFn: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return `${this.base}/session/${this.sessionId}${path}`;
  }

  async getPending(waitSeconds: number): Promise<PendingResponse> {
    const resp = await this.fetchFn(this.url(`/pending?wait=${waitSeconds}`));
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    return (await resp.json()) as PendingResponse;
  }

  async getStatus(): Promise<StatusResponse> {
    const resp = await this.fetchFn(this.url('/status'));
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    return (await resp.json()) as StatusResponse;
  }

  async getProjection(): Promise<ProjectionResponse> {
    const resp = await this.fetchFn(this.url('/projection'));
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    return (await resp.json()) as ProjectionResponse;
  }

  async postAnswer(queryId: number, verdict: Verdict): Promise<AnswerResult> {
    const resp = await this.fetchFn(this.url('/answer'), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ query_id: queryId, verdict }),
    });
    if (resp.status === 409) return { kind: 'stale' };
    if (resp.status === 422) {
      const doc = await resp.json();
      return {
        kind: 'contradiction',
        detail: doc.detail,
        pair: doc.pair,
        existing: doc.existing,
        attempted: doc.attempted,
      };
    }
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    const doc = await resp.json();
    return { kind: 'accepted', duplicate: !!doc.duplicate, progress: doc.progress };
  }
}

export function createSession(
  base: string,
  doc: Record<string, unknown>,
  fetchFn: typeof fetch = fetch,
): Promise<string> {
  return fetchFn(`${base}/session`, {
    method: 'POST',
    headers: { 'content-type': 'application/json' },
    body: JSON.stringify(doc),
  }).then(async (resp) => {
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    return (await resp.json()).session_id as string;
  });
}
