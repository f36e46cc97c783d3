/** Client for the experiment service HTTP API. */

import type {
  FetchLike,
  ResponseAck,
  SessionInfo,
  TrialDescriptor,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(private fetchImpl: FetchLike, private baseUrl: string = "") {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = (await response.json()) as Record<string, unknown>;
    if (response.status >= 400) {
      throw new ApiError(response.status,
        String(payload?.detail ?? `HTTP ${response.status}`));
    }
    return payload as T;
  }

  createSession(group?: string): Promise<SessionInfo> {
    return this.call("POST", "/api/session", group ? { group } : {});
  }

  getSession(sessionId: string): Promise<SessionInfo> {
    return this.call("GET", `/api/session/${sessionId}`);
  }

  getTrial(sessionId: string): Promise<TrialDescriptor> {
    return this.call("GET", `/api/session/${sessionId}/trial`);
  }

  postResponse(sessionId: string, trialIndex: number, choice: string,
               rtMs: number): Promise<ResponseAck> {
    return this.call("POST", `/api/session/${sessionId}/response`, {
      trial_index: trialIndex,
      choice,
      rt_ms: rtMs,
    });
  }
}
