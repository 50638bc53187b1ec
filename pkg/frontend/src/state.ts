/**
 * Explorer state machine.
 *
 * Displayed numbers are always the verbatim fields of the last service
 * response; nothing is recomputed client-side. Parameter edits debounce for
 * 300 ms; at most one simulate is in flight, and responses superseded by a
 * newer request sequence number are discarded.
 */

import type { ApiClient } from "./api.js";
import type {
  ScenarioParams,
  ServiceError,
  SimulateResponse,
} from "./types.js";
import { ApiError } from "./api.js";

export const DEBOUNCE_MS = 300;

export interface ExplorerSnapshot {
  sessionId: string | null;
  scenario: string | null;
  params: ScenarioParams;
  lastResponse: SimulateResponse | null;
  pinned: SimulateResponse | null;
  inFlight: boolean;
  error: ServiceError | null;
}

type Scheduler = (fn: () => void, ms: number) => unknown;
type Canceller = (handle: unknown) => void;

export class ExplorerState {
  private sessionId: string | null = null;
  private scenario: string | null = null;
  private params: ScenarioParams = {};
  private lastResponse: SimulateResponse | null = null;
  private pinned: SimulateResponse | null = null;
  private error: ServiceError | null = null;

  private sequence = 0;
  private applied = 0;
  private inFlightCount = 0;
  private pendingTimer: unknown = null;
  private listeners: Array<(s: ExplorerSnapshot) => void> = [];

  constructor(
    private readonly api: ApiClient,
    private readonly schedule: Scheduler = setTimeout,
    private readonly cancel: Canceller = clearTimeout as Canceller,
  ) {}

  subscribe(listener: (s: ExplorerSnapshot) => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  snapshot(): ExplorerSnapshot {
    return {
      sessionId: this.sessionId,
      scenario: this.scenario,
      params: { ...this.params },
      lastResponse: this.lastResponse,
      pinned: this.pinned,
      inFlight: this.inFlightCount > 0,
      error: this.error,
    };
  }

  private emit(): void {
    const snap = this.snapshot();
    for (const listener of this.listeners) listener(snap);
  }

  async openSession(traceText: string): Promise<string> {
    const resp = await this.api.uploadTrace(traceText);
    this.sessionId = resp.session_id;
    this.lastResponse = null;
    this.pinned = null;
    this.error = null;
    this.emit();
    return resp.session_id;
  }

  selectScenario(name: string, defaults: ScenarioParams = {}): Promise<void> {
    this.scenario = name;
    this.params = { ...defaults };
    return this.runNow();
  }

  /** Immediate parameter change (e.g. form submit): simulate right away. */
  setParam(name: string, value: unknown): Promise<void> {
    this.params = { ...this.params, [name]: value };
    return this.runNow();
  }

  /** Continuous input (slider drag): debounce before simulating. */
  setParamDebounced(name: string, value: unknown): void {
    this.params = { ...this.params, [name]: value };
    if (this.pendingTimer !== null) this.cancel(this.pendingTimer);
    this.pendingTimer = this.schedule(() => {
      this.pendingTimer = null;
      void this.runNow();
    }, DEBOUNCE_MS);
  }

  pinCurrent(): void {
    if (this.lastResponse !== null) {
      this.pinned = this.lastResponse;
      this.emit();
    }
  }

  clearPin(): void {
    this.pinned = null;
    this.emit();
  }

  private async runNow(): Promise<void> {
    if (this.sessionId === null || this.scenario === null) return;
    const seq = ++this.sequence;
    this.inFlightCount += 1;
    this.emit();
    try {
      const resp = await this.api.simulate(
        this.sessionId,
        this.scenario,
        this.params,
      );
      if (seq > this.applied) {
        this.applied = seq;
        this.lastResponse = resp;
        this.error = null;
      }
    } catch (err) {
      if (seq > this.applied && err instanceof ApiError) {
        this.applied = seq;
        this.lastResponse = null;
        this.error = err.body;
      } else if (!(err instanceof ApiError)) {
        throw err;
      }
    } finally {
      this.inFlightCount -= 1;
      this.emit();
    }
  }
}
