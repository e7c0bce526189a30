import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { startSession } from "../src/session.js";
import { FakeServer } from "./fake-server.js";

function setup(samples = ["s0", "s1", "s2", "s3", "s4"]) {
  const server = new FakeServer(samples);
  const api = new ApiClient("", server.fetchFn);
  return { server, api };
}

async function rankCurrent(controller: Awaited<ReturnType<typeof startSession>>) {
  const view = controller.view!;
  for (const candidate of view.comparison.candidates) {
    view.ranking.place(candidate.label);
  }
  return controller.submitCurrent();
}

describe("session flow", () => {
  it("walks a fresh 5-sample session through 5 sequential views", async () => {
    const { api } = setup();
    const controller = await startSession(api, "rater-1");
    const seen: string[] = [];
    for (let i = 0; i < 5; i++) {
      const view = await controller.loadNext();
      expect(view).not.toBeNull();
      seen.push(view!.comparison.sample_id!);
      await rankCurrent(controller);
    }
    expect(new Set(seen).size).toBe(5);
    expect(await controller.loadNext()).toBeNull();
    expect(controller.done).toBe(true);
    expect(controller.progress).toEqual({ ranked: 5, total: 5 });
  });

  it("completed session reports a summary state", async () => {
    const { api } = setup(["only"]);
    const controller = await startSession(api, "rater-1");
    await controller.loadNext();
    await rankCurrent(controller);
    expect(controller.done).toBe(true);
    expect(controller.view).toBeNull();
  });

  it("candidates expose only blind labels, never method names", async () => {
    const { api } = setup(["s0"]);
    const controller = await startSession(api, "rater-1");
    const view = await controller.loadNext();
    for (const candidate of view!.comparison.candidates) {
      expect(candidate.label).toMatch(/^[A-F]$/);
      expect(candidate.image_url).toContain(`/${candidate.label}.png`);
    }
  });
});

describe("submit behavior", () => {
  it("a full order produces exactly one server record and advances", async () => {
    const { server, api } = setup(["s0", "s1"]);
    const controller = await startSession(api, "rater-1");
    await controller.loadNext();
    const response = await rankCurrent(controller);
    expect(response.accepted).toBe(true);
    expect(server.rankings.size).toBe(1);
    expect(controller.view).toBeNull(); // advanced past the ranked view
  });

  it("blocks partial submissions before any request is made", async () => {
    const { server, api } = setup(["s0"]);
    const controller = await startSession(api, "rater-1");
    const view = await controller.loadNext();
    view!.ranking.place("A");
    const before = server.requestCount;
    await expect(controller.submitCurrent()).rejects.toThrow(/incomplete/);
    expect(server.requestCount).toBe(before);
    expect(server.rankings.size).toBe(0);
  });

  it("double-fire with the idempotency key yields a single record", async () => {
    const { server, api } = setup(["s0"]);
    const controller = await startSession(api, "rater-1");
    const view = (await controller.loadNext())!;
    for (const candidate of view.comparison.candidates) view.ranking.place(candidate.label);
    const permutation = view.ranking.toPermutation();
    // simulate the browser firing the same request twice
    const key = `${controller.info.session_id}:s0`;
    await api.submitRanking(controller.info.session_id, "s0", permutation, key);
    const second = await api.submitRanking(controller.info.session_id, "s0", permutation, key);
    expect(second.accepted).toBe(true);
    expect(server.rankings.size).toBe(1);
  });

  it("rejects conflicting resubmission without the key", async () => {
    const { api } = setup(["s0"]);
    const controller = await startSession(api, "rater-1");
    const view = (await controller.loadNext())!;
    for (const candidate of view.comparison.candidates) view.ranking.place(candidate.label);
    const permutation = view.ranking.toPermutation();
    await api.submitRanking(controller.info.session_id, "s0", permutation, "k1");
    await expect(
      api.submitRanking(controller.info.session_id, "s0", permutation, "k2"),
    ).rejects.toThrowError(ApiError);
  });
});

describe("network failures", () => {
  it("a failed submit keeps the view and order intact for retry", async () => {
    const { server, api } = setup(["s0"]);
    const controller = await startSession(api, "rater-1");
    const view = (await controller.loadNext())!;
    for (const candidate of view.comparison.candidates) view.ranking.place(candidate.label);
    const order = view.ranking.toPermutation();

    server.failNextRequests = 1;
    await expect(controller.submitCurrent()).rejects.toThrow(/network/);
    // no state loss: same view, same order
    expect(controller.view).toBe(view);
    expect(view.ranking.toPermutation()).toEqual(order);

    const response = await controller.submitCurrent();
    expect(response.accepted).toBe(true);
    expect(server.rankings.get("rater-1/s0")?.ranking).toEqual(order);
  });

  it("a failed next() can simply be retried", async () => {
    const { server, api } = setup(["s0"]);
    const controller = await startSession(api, "rater-1");
    server.failNextRequests = 1;
    await expect(controller.loadNext()).rejects.toThrow(/network/);
    const view = await controller.loadNext();
    expect(view).not.toBeNull();
  });
});
