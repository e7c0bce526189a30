/** Pure ordering state for one comparison view.
 *
 * Candidates are known only by their blind labels (A..F). The submit
 * permutation exists only when every label has been placed, which is what
 * lets the UI hard-disable partial submissions.
 */

export class RankingState {
  private order: string[] = [];

  constructor(readonly labels: readonly string[]) {
    if (new Set(labels).size !== labels.length) {
      throw new Error("duplicate blind labels");
    }
  }

  get placed(): string[] {
    return [...this.order];
  }

  get unplaced(): string[] {
    return this.labels.filter((label) => !this.order.includes(label));
  }

  get complete(): boolean {
    return this.order.length === this.labels.length;
  }

  /** Append a label to the ranking (no-op if already placed or unknown). */
  place(label: string): boolean {
    if (!this.labels.includes(label) || this.order.includes(label)) return false;
    this.order.push(label);
    return true;
  }

  /** Move or insert a label at a position (drag target slot). */
  placeAt(label: string, index: number): boolean {
    if (!this.labels.includes(label)) return false;
    const existing = this.order.indexOf(label);
    if (existing !== -1) this.order.splice(existing, 1);
    const bounded = Math.max(0, Math.min(index, this.order.length));
    this.order.splice(bounded, 0, label);
    return true;
  }

  remove(label: string): void {
    const index = this.order.indexOf(label);
    if (index !== -1) this.order.splice(index, 1);
  }

  reset(): void {
    this.order = [];
  }

  /** Full best-first permutation; throws while incomplete. */
  toPermutation(): string[] {
    if (!this.complete) {
      throw new Error(`ranking incomplete: ${this.order.length}/${this.labels.length} placed`);
    }
    return [...this.order];
  }
}

/** One idempotency key per (session, sample) view: retries and double
 * clicks re-send the same key, so the server stores a single record. */
export function idempotencyKey(sessionId: string, sampleId: string): string {
  return `${sessionId}:${sampleId}`;
}
