/** Survey flow state machine, free of DOM concerns.
 *
 * One scene at a time: five sliders (one per non-target class), submission
 * gated until every slider was touched or explicitly confirmed at its
 * default. Failed submissions are queued and retried so a flaky connection
 * loses no answers.
 */

import type { ApiClient } from "./api.js";
import { ApiError } from "./api.js";
import type { AnswerPayload, Scenario, Session } from "./types.js";
import { isValidExponent } from "./severity.js";

export const N_CLASSES = 6;
export const DEFAULT_EXPONENT = 0;

export type SurveyState = "idle" | "rating" | "finished";

export class SurveyFlow {
  session: Session | null = null;
  scenario: Scenario | null = null;
  state: SurveyState = "idle";
  submitted = 0;
  /** Answers that failed to POST and await a retry. */
  readonly pending: AnswerPayload[] = [];

  private values = new Map<number, number>();
  private touched = new Set<number>();

  constructor(private api: ApiClient) {}

  /** Classes to rate: every 1-based index except the highlighted one. */
  get ratedClasses(): number[] {
    if (!this.scenario) return [];
    const target = this.scenario.target_class;
    const out: number[] = [];
    for (let j = 1; j <= N_CLASSES; j++) if (j !== target) out.push(j);
    return out;
  }

  valueOf(classIndex: number): number {
    return this.values.get(classIndex) ?? DEFAULT_EXPONENT;
  }

  isTouched(classIndex: number): boolean {
    return this.touched.has(classIndex);
  }

  /** All five sliders touched (or confirmed) -> submission enabled. */
  get canSubmit(): boolean {
    return (
      this.scenario !== null &&
      this.ratedClasses.every((j) => this.touched.has(j))
    );
  }

  async start(): Promise<void> {
    this.session = await this.api.openSession();
    await this.advance();
  }

  private resetSliders(): void {
    this.values.clear();
    this.touched.clear();
  }

  async advance(): Promise<void> {
    if (!this.session) throw new Error("survey not started");
    this.resetSliders();
    try {
      this.scenario = await this.api.nextScenario(this.session.session_id);
      this.state = "rating";
    } catch (err) {
      if (err instanceof ApiError && err.status === 410) {
        this.scenario = null;
        this.state = "finished";
        return;
      }
      throw err;
    }
  }

  setSeverity(classIndex: number, exponent: number): void {
    if (!this.scenario) throw new Error("no active scenario");
    if (classIndex === this.scenario.target_class) {
      throw new Error("the highlighted class is fixed at zero cost");
    }
    if (!isValidExponent(exponent)) {
      throw new Error(`severity must be an integer 0..6, got ${exponent}`);
    }
    this.values.set(classIndex, exponent);
    this.touched.add(classIndex);
  }

  /** Explicitly keep the default detent; counts as touching the slider. */
  confirmDefault(classIndex: number): void {
    this.setSeverity(classIndex, this.valueOf(classIndex));
  }

  buildPayload(): AnswerPayload {
    if (!this.session || !this.scenario) throw new Error("nothing to submit");
    if (!this.canSubmit) throw new Error("not every slider was touched");
    const severities: Record<string, number> = {};
    for (const j of this.ratedClasses) severities[String(j)] = this.valueOf(j);
    return {
      session_id: this.session.session_id,
      image_id: this.scenario.image_id,
      target_class: this.scenario.target_class,
      severities,
    };
  }

  /** Submit the current scene. Delivered answers advance to the next
   * scene; a dead connection queues the answer and stays on the scene
   * (the server still expects it). 4xx validation errors propagate. */
  async submit(): Promise<"stored" | "queued"> {
    const payload = this.buildPayload();
    try {
      await this.api.submitAnswer(payload);
      this.submitted += 1;
    } catch (err) {
      if (err instanceof ApiError) throw err;
      this.pending.push(payload);
      return "queued";
    }
    await this.advance();
    return "stored";
  }

  /** Retry queued answers; keeps whatever still fails. Returns the image
   * ids that reached the store. */
  async flushPending(): Promise<string[]> {
    const delivered: string[] = [];
    for (let i = this.pending.length - 1; i >= 0; i--) {
      const payload = this.pending[i]!;
      try {
        await this.api.submitAnswer(payload);
        this.pending.splice(i, 1);
        this.submitted += 1;
        delivered.push(payload.image_id);
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          // an earlier attempt did get through
          this.pending.splice(i, 1);
          delivered.push(payload.image_id);
        }
      }
    }
    return delivered;
  }

  /** Flush the queue and move on when the current scene got delivered. */
  async retryPending(): Promise<boolean> {
    const delivered = await this.flushPending();
    const current = this.scenario?.image_id;
    if (current !== undefined && delivered.includes(current)) {
      await this.advance();
      return true;
    }
    return false;
  }
}
