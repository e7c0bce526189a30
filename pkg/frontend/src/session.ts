/** Session flow: fetch the next comparison, collect an order, submit.
 *
 * Kept free of DOM so the retry semantics are unit-testable: a failed
 * fetch or submit leaves the current view and its ranking untouched, and
 * the same idempotency key is re-sent on retry.
 */

import { ApiClient, NextComparison, SessionInfo, SubmitResponse } from "./api.js";
import { RankingState, idempotencyKey } from "./ranking.js";

export interface ComparisonView {
  comparison: NextComparison;
  ranking: RankingState;
}

export class SessionController {
  private current: ComparisonView | null = null;
  private finished = false;
  private rankedCount = 0;

  constructor(
    private readonly api: ApiClient,
    readonly info: SessionInfo,
  ) {
    this.rankedCount = info.ranked;
    this.finished = info.done;
  }

  get view(): ComparisonView | null {
    return this.current;
  }

  get done(): boolean {
    return this.finished;
  }

  get progress(): { ranked: number; total: number } {
    return { ranked: this.rankedCount, total: this.info.n_samples };
  }

  /** Fetch the next unranked sample; keeps existing state on failure. */
  async loadNext(): Promise<ComparisonView | null> {
    const comparison = await this.api.next(this.info.session_id);
    this.rankedCount = comparison.ranked;
    if (comparison.done) {
      this.finished = true;
      this.current = null;
      return null;
    }
    this.current = {
      comparison,
      ranking: new RankingState(comparison.candidates.map((c) => c.label)),
    };
    return this.current;
  }

  /** Submit the completed order for the current view, then advance.
   *
   * Throws on incomplete rankings and on network errors; in both cases
   * the current view and its order stay intact so the user can retry.
   */
  async submitCurrent(): Promise<SubmitResponse> {
    if (this.current === null) {
      throw new Error("nothing to submit");
    }
    const { comparison, ranking } = this.current;
    const permutation = ranking.toPermutation();
    const sampleId = comparison.sample_id as string;
    const response = await this.api.submitRanking(
      this.info.session_id,
      sampleId,
      permutation,
      idempotencyKey(this.info.session_id, sampleId),
    );
    this.rankedCount = response.ranked;
    this.finished = response.done;
    this.current = null;
    return response;
  }
}

export async function startSession(api: ApiClient, raterId: string): Promise<SessionController> {
  const info = await api.createSession(raterId);
  return new SessionController(api, info);
}
