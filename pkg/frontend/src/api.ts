/** Typed client for the arena REST API. */

export interface SessionInfo {
  session_id: string;
  rater_id: string;
  n_samples: number;
  n_methods: number;
  ranked: number;
  done: boolean;
}

export interface Candidate {
  label: string;
  image_url: string;
}

export interface NextComparison {
  done: boolean;
  sample_id: string | null;
  index: number | null;
  total: number | null;
  original_url: string | null;
  candidates: Candidate[];
  ranked: number;
}

export interface SubmitResponse {
  accepted: boolean;
  ranked: number;
  total: number;
  done: boolean;
}

export interface Standing {
  method: string;
  elo: number;
  top_rank_pct: number;
}

export interface Leaderboard {
  standings: Standing[];
  kendalls_w: number | null;
  n_rankings: number;
  rating_sum: number;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.error === "string") detail = body.error;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  createSession(raterId: string): Promise<SessionInfo> {
    return this.request<SessionInfo>("/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ rater_id: raterId }),
    });
  }

  next(sessionId: string): Promise<NextComparison> {
    return this.request<NextComparison>(`/sessions/${encodeURIComponent(sessionId)}/next`);
  }

  submitRanking(
    sessionId: string,
    sampleId: string,
    ranking: string[],
    idempotencyKey: string,
  ): Promise<SubmitResponse> {
    return this.request<SubmitResponse>(`/sessions/${encodeURIComponent(sessionId)}/rankings`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        sample_id: sampleId,
        ranking,
        idempotency_key: idempotencyKey,
      }),
    });
  }

  leaderboard(): Promise<Leaderboard> {
    return this.request<Leaderboard>("/leaderboard");
  }
}
