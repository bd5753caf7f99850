import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { WhatIfController } from "../src/whatif.js";
import { StubGateway } from "./stub_gateway.js";

/** Manual scheduler so debounce timing is under test control. */
class ManualScheduler {
  private queue = new Map<number, () => void>();
  private next = 1;

  schedule = (run: () => void, _delay: number): unknown => {
    const handle = this.next++;
    this.queue.set(handle, run);
    return handle;
  };

  cancel = (handle: unknown): void => {
    this.queue.delete(handle as number);
  };

  async fire(): Promise<void> {
    const jobs = [...this.queue.values()];
    this.queue.clear();
    for (const job of jobs) job();
    // allow the triggered fetches to settle
    await new Promise((resolve) => setTimeout(resolve, 0));
    await Promise.resolve();
  }

  get pending(): number {
    return this.queue.size;
  }
}

function makeController() {
  const gateway = new StubGateway();
  const scheduler = new ManualScheduler();
  const api = new ApiClient("", gateway.fetch);
  const controller = new WhatIfController(
    api,
    100,
    scheduler.schedule,
    scheduler.cancel,
  );
  return { gateway, scheduler, controller };
}

describe("what-if controller", () => {
  it("loads a preset and immediately fetches results", async () => {
    const { gateway, controller } = makeController();
    await controller.loadPreset("external");
    expect(controller.matrix.cell(0, 4)).toBe(5.51);
    expect(gateway.whatifBodies).toHaveLength(1);
    expect(controller.latest?.metrics.mean_iou).toBe(0.65);
  });

  it("debounces a burst of edits into one request", async () => {
    const { gateway, scheduler, controller } = makeController();
    controller.edit(0, 4, 5.0);
    controller.edit(0, 4, 5.2);
    controller.edit(0, 4, 5.4);
    expect(gateway.whatifBodies).toHaveLength(0);
    expect(scheduler.pending).toBe(1);
    await scheduler.fire();
    expect(gateway.whatifBodies).toHaveLength(1);
  });

  it("sends exponents only, diagonal null, in log10 space", async () => {
    const { gateway, scheduler, controller } = makeController();
    controller.edit(0, 4, 6);
    await scheduler.fire();
    const body = gateway.whatifBodies[0] as {
      matrix: { space: string; entries: (number | null)[][] };
    };
    expect(body.matrix.space).toBe("log10");
    expect(body.matrix.entries[0]![0]).toBeNull();
    expect(body.matrix.entries[0]![4]).toBe(6);
    for (const row of body.matrix.entries) {
      for (const value of row) {
        if (value !== null) {
          expect(value).toBeGreaterThanOrEqual(0);
          expect(value).toBeLessThanOrEqual(6);
        }
      }
    }
  });

  it("surfaces invalid edits without sending them", async () => {
    const { gateway, scheduler, controller } = makeController();
    const updates: string[] = [];
    controller.onUpdate = () => {
      updates.push(controller.lastError ?? "");
    };
    controller.edit(1, 1, 2);
    expect(controller.lastError).toMatch(/diagonal/);
    expect(scheduler.pending).toBe(0);
    expect(gateway.whatifBodies).toHaveLength(0);
    expect(updates).toHaveLength(1);
    // a valid edit clears the error and goes through
    controller.edit(1, 2, 2);
    await scheduler.fire();
    expect(gateway.whatifBodies).toHaveLength(1);
  });

  it("keeps threshold changes on the same debounce path", async () => {
    const { gateway, scheduler, controller } = makeController();
    controller.setThreshold(0.3);
    controller.edit(0, 1, 1);
    await scheduler.fire();
    expect(gateway.whatifBodies).toHaveLength(1);
    const body = gateway.whatifBodies[0] as { threshold: number };
    expect(body.threshold).toBe(0.3);
  });
});
