import { describe, expect, it } from "vitest";

import { RankingState, idempotencyKey } from "../src/ranking.js";

const LABELS = ["A", "B", "C", "D", "E", "F"];

describe("RankingState", () => {
  it("starts empty and incomplete", () => {
    const state = new RankingState(LABELS);
    expect(state.placed).toEqual([]);
    expect(state.unplaced).toEqual(LABELS);
    expect(state.complete).toBe(false);
  });

  it("places labels in order and completes", () => {
    const state = new RankingState(LABELS);
    for (const label of ["C", "A", "F", "B", "E", "D"]) state.place(label);
    expect(state.complete).toBe(true);
    expect(state.toPermutation()).toEqual(["C", "A", "F", "B", "E", "D"]);
  });

  it("refuses double placement and unknown labels", () => {
    const state = new RankingState(LABELS);
    expect(state.place("A")).toBe(true);
    expect(state.place("A")).toBe(false);
    expect(state.place("Z")).toBe(false);
    expect(state.placed).toEqual(["A"]);
  });

  it("throws on partial permutations so the UI can hard-block them", () => {
    const state = new RankingState(LABELS);
    state.place("A");
    expect(() => state.toPermutation()).toThrow(/incomplete/);
  });

  it("moves labels with placeAt (drag onto a slot)", () => {
    const state = new RankingState(["A", "B", "C"]);
    state.place("A");
    state.place("B");
    state.place("C");
    state.placeAt("C", 0);
    expect(state.toPermutation()).toEqual(["C", "A", "B"]);
  });

  it("remove and reset return labels to the pool", () => {
    const state = new RankingState(["A", "B"]);
    state.place("A");
    state.place("B");
    state.remove("A");
    expect(state.placed).toEqual(["B"]);
    state.reset();
    expect(state.unplaced).toEqual(["A", "B"]);
  });

  it("rejects duplicate labels at construction", () => {
    expect(() => new RankingState(["A", "A"])).toThrow(/duplicate/);
  });
});

describe("idempotencyKey", () => {
  it("is stable per (session, sample)", () => {
    expect(idempotencyKey("s1", "x")).toBe(idempotencyKey("s1", "x"));
    expect(idempotencyKey("s1", "x")).not.toBe(idempotencyKey("s1", "y"));
  });
});
