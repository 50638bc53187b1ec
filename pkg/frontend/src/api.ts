/** Thin typed client over the simulator service's HTTP endpoints. */

import type {
  ScenarioInfo,
  ScenarioParams,
  ServiceError,
  SimulateResponse,
  TimelineDocument,
  UploadResponse,
  Breakdown,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: { method?: string; body?: string; headers?: Record<string, string> },
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: ServiceError,
  ) {
    super(`${body.error}: ${body.detail}`);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch as unknown as FetchLike,
  ) {}

  private async request<T>(path: string, init?: {
    method?: string;
    body?: string;
  }): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, {
      ...init,
      headers: { "content-type": "application/json" },
    });
    const body = (await resp.json()) as unknown;
    if (!resp.ok) {
      throw new ApiError(resp.status, body as ServiceError);
    }
    return body as T;
  }

  uploadTrace(traceText: string): Promise<UploadResponse> {
    return this.request("/traces", { method: "POST", body: traceText });
  }

  scenarios(): Promise<ScenarioInfo[]> {
    return this.request("/scenarios");
  }

  timeline(sessionId: string, scenario?: string): Promise<TimelineDocument> {
    const query = scenario ? `?scenario=${encodeURIComponent(scenario)}` : "";
    return this.request(`/sessions/${sessionId}/timeline${query}`);
  }

  breakdown(sessionId: string, scenario?: string): Promise<Breakdown> {
    const query = scenario ? `?scenario=${encodeURIComponent(scenario)}` : "";
    return this.request(`/sessions/${sessionId}/breakdown${query}`);
  }

  simulate(
    sessionId: string,
    scenario: string,
    params: ScenarioParams,
  ): Promise<SimulateResponse> {
    return this.request(`/sessions/${sessionId}/simulate`, {
      method: "POST",
      body: JSON.stringify({ scenario, params }),
    });
  }

  simulatePipeline(
    sessionId: string,
    pipeline: { steps: unknown[] },
  ): Promise<SimulateResponse> {
    return this.request(`/sessions/${sessionId}/simulate`, {
      method: "POST",
      body: JSON.stringify(pipeline),
    });
  }
}
