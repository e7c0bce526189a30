/** In-memory stand-in for the arena service, faithful to its REST shapes:
 * blinded labels, duplicate detection, idempotency keys. */

import { NextComparison, SessionInfo, SubmitResponse } from "../src/api.js";

interface StoredRanking {
  ranking: string[];
  idempotencyKey: string;
}

export class FakeServer {
  readonly rankings = new Map<string, StoredRanking>(); // "rater/sample" -> record
  failNextRequests = 0;
  requestCount = 0;
  private sessions = new Map<string, { raterId: string; cursor: number }>();

  constructor(
    readonly sampleIds: string[],
    readonly labels: string[] = ["A", "B", "C", "D", "E", "F"],
  ) {}

  fetchFn = async (input: string, init?: RequestInit): Promise<Response> => {
    this.requestCount += 1;
    if (this.failNextRequests > 0) {
      this.failNextRequests -= 1;
      throw new TypeError("network down");
    }
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    if (input === "/sessions" && init?.method === "POST") {
      const id = `sess-${this.sessions.size}`;
      this.sessions.set(id, { raterId: body.rater_id, cursor: 0 });
      return json(this.sessionInfo(id));
    }
    const nextMatch = input.match(/^\/sessions\/([^/]+)\/next$/);
    if (nextMatch) {
      return json(this.next(nextMatch[1]));
    }
    const rankMatch = input.match(/^\/sessions\/([^/]+)\/rankings$/);
    if (rankMatch && init?.method === "POST") {
      return this.submit(rankMatch[1], body);
    }
    return json({ error: `no route for ${input}` }, 404);
  };

  private sessionInfo(id: string): SessionInfo {
    const session = this.sessions.get(id)!;
    const ranked = this.rankedFor(session.raterId);
    return {
      session_id: id,
      rater_id: session.raterId,
      n_samples: this.sampleIds.length,
      n_methods: this.labels.length,
      ranked,
      done: ranked === this.sampleIds.length,
    };
  }

  private rankedFor(raterId: string): number {
    return this.sampleIds.filter((s) => this.rankings.has(`${raterId}/${s}`)).length;
  }

  private next(sessionId: string): NextComparison {
    const session = this.sessions.get(sessionId)!;
    const pending = this.sampleIds.find((s) => !this.rankings.has(`${session.raterId}/${s}`));
    if (pending === undefined) {
      return {
        done: true,
        sample_id: null,
        index: null,
        total: null,
        original_url: null,
        candidates: [],
        ranked: this.rankedFor(session.raterId),
      };
    }
    return {
      done: false,
      sample_id: pending,
      index: this.sampleIds.indexOf(pending),
      total: this.sampleIds.length,
      original_url: `/sessions/${sessionId}/samples/${pending}/original.png`,
      candidates: this.labels.map((label) => ({
        label,
        image_url: `/sessions/${sessionId}/samples/${pending}/${label}.png`,
      })),
      ranked: this.rankedFor(session.raterId),
    };
  }

  private submit(
    sessionId: string,
    body: { sample_id: string; ranking: string[]; idempotency_key: string },
  ): Response {
    const session = this.sessions.get(sessionId)!;
    const key = `${session.raterId}/${body.sample_id}`;
    const sortedSubmitted = [...body.ranking].sort().join("");
    if (sortedSubmitted !== [...this.labels].sort().join("")) {
      return json({ error: "ranking must be a permutation of labels" }, 422);
    }
    const existing = this.rankings.get(key);
    if (existing) {
      if (body.idempotency_key && existing.idempotencyKey === body.idempotency_key) {
        return json(this.progress(session.raterId));
      }
      return json({ error: "already ranked" }, 409);
    }
    this.rankings.set(key, { ranking: body.ranking, idempotencyKey: body.idempotency_key });
    return json(this.progress(session.raterId));
  }

  private progress(raterId: string): SubmitResponse {
    const ranked = this.rankedFor(raterId);
    return {
      accepted: true,
      ranked,
      total: this.sampleIds.length,
      done: ranked === this.sampleIds.length,
    };
  }
}

function json(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
