/**
 * Annotation session state machine.
 *
 * Owns the identify -> task -> completed lifecycle for one evaluator
 * and pushes an immutable view to the UI after every transition. All
 * service traffic goes through the injected client, and any verdict
 * the service never acknowledged sits in the offline queue; the
 * machine never invents numbers, so everything the view shows came
 * out of a service response.
 */

import {
  ApiClient,
  ApiError,
  NetworkError,
  Progress,
  TaskView,
} from "./api.js";
import { OfflineQueue } from "./queue.js";

export type SessionPhase =
  | "identify"
  | "loading"
  | "task"
  | "completed"
  | "error";

export interface SessionView {
  phase: SessionPhase;
  evaluatorId: string | null;
  task: TaskView | null;
  banner: string | null;
  pending: boolean;
  queued: number;
  progress: Progress | null;
}

export const OFFLINE_BANNER =
  "Connection lost; your verdict is saved on this device and will be " +
  "delivered when the service is reachable again.";

type Listener = (view: SessionView) => void;

export class Session {
  private phase: SessionPhase = "identify";
  private evaluatorId: string | null = null;
  private task: TaskView | null = null;
  private banner: string | null = null;
  private pending = false;
  private progress: Progress | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly queue: OfflineQueue,
    private readonly onChange: Listener,
  ) {}

  view(): SessionView {
    return {
      phase: this.phase,
      evaluatorId: this.evaluatorId,
      task: this.task,
      banner: this.banner,
      pending: this.pending,
      queued: this.queue.size(),
      progress: this.progress,
    };
  }

  private emit(): void {
    this.onChange(this.view());
  }

  async start(evaluatorId: string): Promise<void> {
    const trimmed = evaluatorId.trim();
    if (!trimmed) {
      this.banner = "Enter an evaluator id to begin.";
      this.emit();
      return;
    }
    this.evaluatorId = trimmed;
    await this.advance();
  }

  /** Flush the offline queue, then fetch whatever the service says is next. */
  private async advance(): Promise<void> {
    this.phase = "loading";
    this.pending = false;
    this.emit();

    const drained = await this.queue.drain((payload) =>
      this.api.submitJudgment(payload),
    );
    if (drained.remaining > 0) {
      this.phase = this.task !== null ? "task" : "error";
      this.banner = OFFLINE_BANNER;
      this.emit();
      return;
    }
    if (drained.rejected.length > 0) {
      this.banner = `Rejected by the service: ${drained.rejected.join("; ")}`;
    }

    try {
      const next = await this.api.nextTask(this.evaluatorId as string);
      if (next.kind === "completed") {
        await this.finish();
      } else {
        this.task = next.task;
        this.progress = next.task.progress;
        this.phase = "task";
        this.emit();
      }
    } catch (error) {
      if (error instanceof NetworkError) {
        this.phase = "error";
        this.banner = OFFLINE_BANNER;
      } else if (error instanceof ApiError) {
        this.phase = "identify";
        this.banner = error.detail;
        this.evaluatorId = null;
      } else {
        throw error;
      }
      this.emit();
    }
  }

  /* The completion payload carries no body, so the final counts come
     from the progress endpoint; a failure there leaves them blank
     rather than synthesizing done == total locally. */
  private async finish(): Promise<void> {
    this.task = null;
    this.phase = "completed";
    try {
      const report = await this.api.progress();
      this.progress =
        report.evaluators[this.evaluatorId as string] ?? this.progress;
    } catch {
      // keep the last reported numbers
    }
    this.emit();
  }

  async submit(verdict: 0 | 1): Promise<void> {
    if (this.pending || this.phase !== "task" || this.task === null) {
      return;
    }
    const payload = {
      evaluator_id: this.evaluatorId as string,
      pair_id: this.task.pair_id,
      verdict,
    };
    this.pending = true;
    this.emit();

    try {
      await this.api.submitJudgment(payload);
      this.banner = null;
      await this.advance();
    } catch (error) {
      this.pending = false;
      if (error instanceof ApiError) {
        this.banner = error.detail;
      } else if (error instanceof NetworkError) {
        this.queue.enqueue(payload);
        this.banner = OFFLINE_BANNER;
      } else {
        throw error;
      }
      this.emit();
    }
  }

  /** Retry affordance: drain anything queued, then refetch. */
  async retry(): Promise<void> {
    if (this.evaluatorId === null) {
      return;
    }
    await this.advance();
  }
}
