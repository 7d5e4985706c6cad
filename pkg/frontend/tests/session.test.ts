import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { OfflineQueue } from "../src/queue.js";
import { OFFLINE_BANNER, Session, SessionView } from "../src/session.js";
import { makePairs, MemoryStorage, StubService } from "./stub_service.js";

function makeSession(service: StubService) {
  const views: SessionView[] = [];
  const queue = new OfflineQueue(new MemoryStorage());
  const session = new Session(
    new ApiClient(service.fetch),
    queue,
    (view) => views.push(view),
  );
  return { session, views, queue };
}

function latest(views: SessionView[]): SessionView {
  const view = views[views.length - 1];
  if (view === undefined) {
    throw new Error("no view emitted");
  }
  return view;
}

describe("fetch-render-submit-advance cycle", () => {
  it("starts on the first unjudged pair with service-reported progress", async () => {
    const service = new StubService(makePairs(3));
    const { session, views } = makeSession(service);
    await session.start("e1");
    const view = latest(views);
    expect(view.phase).toBe("task");
    expect(view.task?.pair_id).toBe("dev/dev-q001/model-a");
    expect(view.progress).toEqual({ done: 0, total: 3 });
  });

  it("records the verdict and advances to the next pair", async () => {
    const service = new StubService(makePairs(3));
    const { session, views } = makeSession(service);
    await session.start("e1");
    await session.submit(1);
    expect(service.accepted).toEqual([
      { evaluator_id: "e1", pair_id: "dev/dev-q001/model-a", verdict: 1 },
    ]);
    const view = latest(views);
    expect(view.phase).toBe("task");
    expect(view.task?.pair_id).toBe("dev/dev-q002/model-a");
    expect(view.progress).toEqual({ done: 1, total: 3 });
  });

  it("walks the full assignment and mirrors service progress at every step", async () => {
    const service = new StubService(makePairs(2));
    const { session, views } = makeSession(service);
    await session.start("e1");
    await session.submit(1);
    await session.submit(0);
    const seen = views
      .filter((v) => (v.phase === "task" && !v.pending) || v.phase === "completed")
      .map((v) => [v.phase, v.progress?.done, v.progress?.total]);
    expect(seen).toEqual([
      ["task", 0, 2],
      ["task", 1, 2],
      ["completed", 2, 2],
    ]);
    expect(service.judged.size).toBe(2);
  });

  it("maps an immediate 204 to the completed screen with final counts", async () => {
    const service = new StubService([]);
    const { session, views } = makeSession(service);
    await session.start("e1");
    const view = latest(views);
    expect(view.phase).toBe("completed");
    expect(view.progress).toEqual({ done: 0, total: 0 });
  });
});

describe("conflict handling", () => {
  it("retains the task and shows the server reason on 409", async () => {
    const service = new StubService(makePairs(2));
    service.conflictPairs.add("dev/dev-q001/model-a");
    const { session, views } = makeSession(service);
    await session.start("e1");
    await session.submit(1);
    const view = latest(views);
    expect(view.phase).toBe("task");
    expect(view.task?.pair_id).toBe("dev/dev-q001/model-a");
    expect(view.pending).toBe(false);
    expect(view.banner).toContain("not assigned");
    expect(service.accepted).toHaveLength(0);
  });
});

describe("single in-flight submission", () => {
  it("ignores a second submit while the first is on the wire", async () => {
    const service = new StubService(makePairs(2));
    let release = () => {};
    service.postGate = new Promise((resolve) => {
      release = resolve;
    });
    const { session, views } = makeSession(service);
    await session.start("e1");
    const first = session.submit(1);
    expect(latest(views).pending).toBe(true);
    const second = session.submit(0);
    release();
    await Promise.all([first, second]);
    expect(service.accepted).toHaveLength(1);
    expect(service.accepted[0]?.verdict).toBe(1);
  });
});

describe("offline handling", () => {
  it("queues the verdict locally when the POST never reaches the service", async () => {
    const service = new StubService(makePairs(2));
    const { session, views, queue } = makeSession(service);
    await session.start("e1");
    service.offline = true;
    await session.submit(1);
    const view = latest(views);
    expect(view.phase).toBe("task");
    expect(view.banner).toBe(OFFLINE_BANNER);
    expect(view.queued).toBe(1);
    expect(queue.load()[0]?.pair_id).toBe("dev/dev-q001/model-a");
    expect(service.accepted).toHaveLength(0);
  });

  it("delivers the queued verdict exactly once after reconnecting", async () => {
    const service = new StubService(makePairs(2));
    const { session, views } = makeSession(service);
    await session.start("e1");
    service.offline = true;
    await session.submit(1);
    await session.retry();
    expect(latest(views).queued).toBe(1);

    service.offline = false;
    await session.retry();
    const recorded = service.accepted.filter(
      (p) => p.pair_id === "dev/dev-q001/model-a",
    );
    expect(recorded).toEqual([
      { evaluator_id: "e1", pair_id: "dev/dev-q001/model-a", verdict: 1 },
    ]);
    const view = latest(views);
    expect(view.queued).toBe(0);
    expect(view.phase).toBe("task");
    expect(view.task?.pair_id).toBe("dev/dev-q002/model-a");
  });

  it("reports an unreachable service at session start with a retry path", async () => {
    const service = new StubService(makePairs(1));
    service.offline = true;
    const { session, views } = makeSession(service);
    await session.start("e1");
    expect(latest(views).phase).toBe("error");

    service.offline = false;
    await session.retry();
    expect(latest(views).phase).toBe("task");
  });
});

describe("identity", () => {
  it("sends the evaluator back to the identify screen on a 404", async () => {
    const service = new StubService(makePairs(1));
    const { session, views } = makeSession(service);
    await session.start("nobody");
    const view = latest(views);
    expect(view.phase).toBe("identify");
    expect(view.banner).toBe("unknown evaluator nobody");
  });
});
