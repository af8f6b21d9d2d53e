/**
 * Typed client for the release-gate review service.
 *
 * All verdicts displayed by the dashboard come from these endpoints; the
 * client performs no gating logic of its own.
 */

export interface StageCell {
  prototype: string;
  stage: number;
  status: 'Granted' | 'Ready' | 'Blocked';
  blocking: number;
  compiled: boolean;
  note?: string;
}

export interface PrototypeRow {
  prototype: string;
  name: string;
  use_case: string;
  granted: number[];
  stages: StageCell[];
}

export interface PrototypesResponse {
  prototypes: PrototypeRow[];
  pending_mismatches: string[];
}

export interface ValidationIssue {
  category: string;
  subject: string;
  message: string;
  severity: 'error' | 'warning';
}

export interface ReadinessReport {
  prototype: string;
  stage: number;
  ready: boolean;
  issue_count: number;
  blocking_count: number;
  counts: Record<string, number>;
  issues: ValidationIssue[];
}

export interface HazardRow {
  hazard: string;
  description: string;
  rsil: number;
  risk_wording: string;
  mitigation_status: string;
  hazardous_scenarios: string[];
}

export interface HazardLog {
  total: number;
  rsil_counts: Record<string, number>;
  status_counts: Record<string, number>;
  unresolved: string[];
  rows: HazardRow[];
}

export interface TraceRow {
  hazard: string;
  hazard_description: string;
  goal: string | null;
  fsr: string | null;
  tsr: string | null;
  components: string[];
  release_documents: string[];
  complete: boolean;
}

export interface Traceability {
  rows: TraceRow[];
  issues: ValidationIssue[];
}

export interface JournalEvent {
  seq: number;
  actor: string;
  kind: string;
  payload: Record<string, unknown>;
  timestamp: string;
}

export interface Identity {
  actor: string;
  role: string | null;
  name: string;
}

export interface ReviewRequest {
  prototype: string;
  stage: number;
  recommendation: 'For' | 'Against';
  notes?: string;
}

export interface DecisionRequest {
  prototype: string;
  stage: number;
  verdict?: 'Granted' | 'Rejected';
  conditions?: string;
}

export interface MutationResponse {
  event_seq: number;
  prototype_state: PrototypeRow;
  review?: string;
  decision?: string;
  verdict?: string;
  granted?: number[];
}

/** Error carrying the service's status code and verbatim gate message. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(ApiError.describe(status, detail));
  }

  static describe(status: number, detail: unknown): string {
    if (typeof detail === 'string') return detail;
    if (detail && typeof detail === 'object' && 'message' in detail) {
      return String((detail as { message: unknown }).message);
    }
    return `request failed with status ${status}`;
  }

  /** Readiness report embedded in a 409 response, if any. */
  get report(): ReadinessReport | null {
    if (this.detail && typeof this.detail === 'object' && 'report' in this.detail) {
      return (this.detail as { report: ReadinessReport }).report;
    }
    return null;
  }
}

export class ReleaseGateClient {
  constructor(
    readonly baseUrl: string,
    private token: string,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { 'Content-Type': 'application/json' };
    if (this.token) headers['Authorization'] = `Bearer ${this.token}`;
    const response = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => null);
    if (!response.ok) {
      throw new ApiError(response.status, payload?.detail ?? payload);
    }
    return payload as T;
  }

  whoami(): Promise<Identity> {
    return this.request<Identity>('GET', '/api/whoami');
  }

  getPrototypes(): Promise<PrototypesResponse> {
    return this.request<PrototypesResponse>('GET', '/api/prototypes');
  }

  getReadiness(prototype: string, stage: number): Promise<ReadinessReport> {
    return this.request<ReadinessReport>('GET', `/api/readiness/${prototype}/${stage}`);
  }

  getHazardLog(): Promise<HazardLog> {
    return this.request<HazardLog>('GET', '/api/hazard-log');
  }

  getTraceability(): Promise<Traceability> {
    return this.request<Traceability>('GET', '/api/traceability');
  }

  getJournal(): Promise<{ events: JournalEvent[] }> {
    return this.request<{ events: JournalEvent[] }>('GET', '/api/journal');
  }

  postReview(body: ReviewRequest): Promise<MutationResponse> {
    return this.request<MutationResponse>('POST', '/api/reviews', body);
  }

  postDecision(body: DecisionRequest): Promise<MutationResponse> {
    return this.request<MutationResponse>('POST', '/api/decisions', body);
  }
}
