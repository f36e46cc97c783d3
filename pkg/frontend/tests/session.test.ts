/** Session lifecycle against an in-memory service: resume, no dupes. */

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { SessionController } from "../src/session.js";
import { TrialAborted } from "../src/types.js";
import type { TrialResult } from "../src/types.js";
import { FakeServer, MemoryStore } from "./harness.js";

function instantExecutor(choice = "banana") {
  return async (): Promise<TrialResult> => ({
    choice,
    rtMs: 321,
    measuredStimulusMs: 200,
    measuredMaskMs: 200,
    stimulusFrames: 12,
  });
}

function makeController(server: FakeServer, store: MemoryStore,
                        executor = instantExecutor(),
                        preloadOk = true) {
  return new SessionController(
    new ApiClient(server.fetch),
    store,
    async () => preloadOk,
    executor,
  );
}

describe("session lifecycle", () => {
  it("runs a session to completion, posting once per trial", async () => {
    const server = new FakeServer(8);
    const controller = makeController(server, new MemoryStore());
    await controller.start("segment");
    const completed = await controller.runAll();
    expect(completed).toBe(8);
    const session = [...server.sessions.values()][0];
    expect([...session.posts.keys()].sort((a, b) => a - b))
      .toEqual([0, 1, 2, 3, 4, 5, 6, 7]);
    expect([...session.posts.values()].every((count) => count === 1)).toBe(true);
  });

  it("resumes at the service cursor after a reload, no duplicates", async () => {
    const server = new FakeServer(10);
    const store = new MemoryStore();

    const first = makeController(server, store);
    await first.start();
    for (let i = 0; i < 4; i += 1) {
      expect(await first.step()).not.toBeNull();
    }

    // reload: a fresh controller sharing only the persisted store
    const second = makeController(server, store);
    const resumed = await second.start();
    expect(resumed.cursor).toBe(4);
    const completed = await second.runAll();
    expect(completed).toBe(6);

    const session = [...server.sessions.values()][0];
    expect(server.sessions.size).toBe(1);  // no second session created
    expect([...session.posts.values()].every((count) => count === 1)).toBe(true);
    expect(session.cursor).toBe(10);
  });

  it("clears the stored id when the session completes", async () => {
    const server = new FakeServer(2);
    const store = new MemoryStore();
    const controller = makeController(server, store);
    await controller.start();
    await controller.runAll();
    expect(store.get("contour-bench.session")).toBeNull();
  });

  it("starts fresh when the stored session id is stale", async () => {
    const server = new FakeServer(3);
    const store = new MemoryStore();
    store.set("contour-bench.session", "no-such-session");
    const controller = makeController(server, store);
    const session = await controller.start();
    expect(session.cursor).toBe(0);
    expect(server.sessions.size).toBe(1);
  });

  it("aborts the trial when preloading fails, session resumable", async () => {
    const server = new FakeServer(3);
    const store = new MemoryStore();
    const broken = makeController(server, store, instantExecutor(), false);
    await broken.start();
    await expect(broken.step()).rejects.toThrow(TrialAborted);

    // nothing was posted; a healthy controller picks up the same trial
    const healthy = makeController(server, store);
    await healthy.start();
    const outcome = await healthy.step();
    expect(outcome?.descriptor.trial_index).toBe(0);
  });

  it("reports correctness from the service ack", async () => {
    const server = new FakeServer(2);
    const controller = makeController(server, new MemoryStore(),
                                      instantExecutor("banana"));
    await controller.start();
    const outcome = await controller.step();
    expect(outcome?.correct).toBe(true);  // FakeServer scores banana correct
  });
});
