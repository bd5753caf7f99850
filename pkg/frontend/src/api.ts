/** Thin fetch wrapper around the gateway. The fetch implementation is
 * injectable so flows can run against a stub gateway in tests. */

import type {
  AnswerPayload,
  FeedbackPayload,
  MatrixResponse,
  Scenario,
  Session,
  WhatIfResponse,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function parseError(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(
    private base = "",
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(this.base + path);
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchImpl(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  openSession(): Promise<Session> {
    return this.post<Session>("/api/session", {});
  }

  nextScenario(sessionId: string): Promise<Scenario> {
    return this.get<Scenario>(
      `/api/scenarios/next?session_id=${encodeURIComponent(sessionId)}`,
    );
  }

  submitAnswer(payload: AnswerPayload): Promise<{ answer_id: string }> {
    return this.post("/api/answers", payload);
  }

  submitFeedback(payload: FeedbackPayload): Promise<{ stored: boolean }> {
    return this.post("/api/feedback", payload);
  }

  presetMatrix(name: string): Promise<MatrixResponse> {
    return this.get<MatrixResponse>(
      `/api/matrices?preset=${encodeURIComponent(name)}`,
    );
  }

  groupMatrix(filter: Record<string, string>): Promise<MatrixResponse> {
    const params = new URLSearchParams(filter);
    return this.get<MatrixResponse>(`/api/matrices?${params}`);
  }

  whatIf(
    entries: (number | null)[][],
    threshold: number,
  ): Promise<WhatIfResponse> {
    return this.post<WhatIfResponse>("/api/whatif", {
      matrix: { space: "log10", n_classes: entries.length, entries },
      threshold,
    });
  }
}
