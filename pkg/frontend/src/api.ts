/**
 * Typed client for the annotation service HTTP API.
 *
 * Every method maps one endpoint and surfaces exactly three outcomes:
 * a parsed payload, an ApiError carrying the server's status and
 * detail message, or a NetworkError when no response arrived at all.
 * The distinction matters upstream: server rejections are final,
 * network failures are retryable.
 */

export interface Progress {
  done: number;
  total: number;
}

export interface TaskView {
  pair_id: string;
  question: string;
  reference_answer: string;
  candidate_answer: string;
  progress: Progress;
}

export type NextTask = { kind: "task"; task: TaskView } | { kind: "completed" };

export interface JudgmentPayload {
  evaluator_id: string;
  pair_id: string;
  verdict: 0 | 1;
}

export interface AgreementRow {
  evaluators: string[];
  mcc: number;
  accuracy: number;
  n: number;
  mcc_display: string;
  accuracy_display: string;
}

export interface ModelAgreement {
  candidate_model: string;
  rows: AgreementRow[];
}

export interface CoverageGap {
  evaluator_id: string;
  remaining: number;
}

export type PartitionAgreement =
  | { partition: string; complete: true; models: ModelAgreement[] }
  | { partition: string; complete: false; missing: CoverageGap[] };

export interface AgreementReport {
  coverage: number;
  partitions: PartitionAgreement[];
}

export interface ProgressReport {
  evaluators: Record<string, Progress>;
  partitions: Record<string, Progress>;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`service responded ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

export class NetworkError extends Error {
  constructor(cause: unknown) {
    super("annotation service unreachable");
    this.name = "NetworkError";
    this.cause = cause;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") {
      return body.detail;
    }
  } catch {
    // fall through to the generic message
  }
  return response.statusText || `HTTP ${response.status}`;
}

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike,
    private readonly base: string = "",
  ) {}

  private async request(url: string, init?: RequestInit): Promise<Response> {
    let response: Response;
    try {
      response = await this.fetchFn(this.base + url, init);
    } catch (cause) {
      throw new NetworkError(cause);
    }
    if (!response.ok && response.status !== 204) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return response;
  }

  async nextTask(evaluatorId: string): Promise<NextTask> {
    const response = await this.request(
      `/api/tasks/next?evaluator=${encodeURIComponent(evaluatorId)}`,
    );
    if (response.status === 204) {
      return { kind: "completed" };
    }
    return { kind: "task", task: (await response.json()) as TaskView };
  }

  async submitJudgment(payload: JudgmentPayload): Promise<void> {
    await this.request("/api/judgments", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  async agreement(): Promise<AgreementReport> {
    const response = await this.request("/api/agreement");
    return (await response.json()) as AgreementReport;
  }

  async progress(): Promise<ProgressReport> {
    const response = await this.request("/api/progress");
    return (await response.json()) as ProgressReport;
  }
}
