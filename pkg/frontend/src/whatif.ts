/** What-if loop: grid edits debounce into POST /api/whatif; the latest
 * response wins, stale ones are dropped. */

import type { ApiClient } from "./api.js";
import type { WhatIfResponse } from "./types.js";
import { MatrixModel } from "./matrix.js";

export type Scheduler = (run: () => void, delayMs: number) => unknown;
export type Canceller = (handle: unknown) => void;

export class WhatIfController {
  matrix = new MatrixModel();
  threshold = 0.5;
  latest: WhatIfResponse | null = null;
  lastError: string | null = null;
  onUpdate: (() => void) | null = null;

  private timer: unknown = null;
  private requestCounter = 0;

  constructor(
    private api: ApiClient,
    private debounceMs = 250,
    private schedule: Scheduler = (run, ms) => setTimeout(run, ms),
    private cancel: Canceller = (h) => clearTimeout(h as number),
  ) {}

  async loadPreset(name: string): Promise<void> {
    const body = await this.api.presetMatrix(name);
    this.matrix = MatrixModel.fromResponse(body);
    await this.refresh();
  }

  /** Apply a cell edit; invalid edits surface without touching the grid. */
  edit(row: number, col: number, value: number): void {
    const error = this.matrix.setCell(row, col, value);
    if (error) {
      this.lastError = `cell (${row}, ${col}): ${error.reason}`;
      this.onUpdate?.();
      return;
    }
    this.lastError = null;
    this.kick();
  }

  setThreshold(threshold: number): void {
    this.threshold = threshold;
    this.kick();
  }

  private kick(): void {
    if (this.timer !== null) this.cancel(this.timer);
    this.timer = this.schedule(() => {
      this.timer = null;
      void this.refresh();
    }, this.debounceMs);
  }

  async refresh(): Promise<void> {
    const ticket = ++this.requestCounter;
    try {
      const response = await this.api.whatIf(
        this.matrix.toEntries(),
        this.threshold,
      );
      if (ticket === this.requestCounter) {
        this.latest = response;
        this.lastError = null;
      }
    } catch (err) {
      if (ticket === this.requestCounter) {
        this.lastError = err instanceof Error ? err.message : String(err);
      }
    }
    this.onUpdate?.();
  }
}
