/**
 * Holding pen for verdicts that could not reach the service.
 *
 * A judgment enters the queue when its POST fails with a network
 * error and leaves only once the service has answered for it, so a
 * flaky connection can never drop or duplicate a verdict. Queue
 * contents persist in storage and survive a page reload.
 */

import { ApiError, JudgmentPayload, NetworkError } from "./api.js";

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export interface DrainResult {
  delivered: number;
  /* Server-rejected entries: the service saw them and said no, so they
     are out of the queue; the messages belong in a banner. */
  rejected: string[];
  remaining: number;
}

const DEFAULT_KEY = "qaeval.pending-judgments";

export class OfflineQueue {
  private draining = false;

  constructor(
    private readonly storage: StorageLike,
    private readonly key: string = DEFAULT_KEY,
  ) {}

  load(): JudgmentPayload[] {
    const raw = this.storage.getItem(this.key);
    if (raw === null) {
      return [];
    }
    try {
      const parsed = JSON.parse(raw);
      return Array.isArray(parsed) ? (parsed as JudgmentPayload[]) : [];
    } catch {
      return [];
    }
  }

  size(): number {
    return this.load().length;
  }

  private store(items: JudgmentPayload[]): void {
    if (items.length === 0) {
      this.storage.removeItem(this.key);
    } else {
      this.storage.setItem(this.key, JSON.stringify(items));
    }
  }

  /** Add a judgment, replacing any earlier verdict for the same pair. */
  enqueue(payload: JudgmentPayload): void {
    const items = this.load().filter(
      (item) =>
        item.evaluator_id !== payload.evaluator_id ||
        item.pair_id !== payload.pair_id,
    );
    items.push(payload);
    this.store(items);
  }

  /**
   * Deliver queued judgments in order through `submit`.
   *
   * Each entry is removed the moment the service answers for it,
   * whether that answer is acceptance or rejection; a network failure
   * stops the drain and keeps the entry for the next attempt. Only one
   * drain runs at a time, which is what makes delivery exactly-once.
   */
  async drain(
    submit: (payload: JudgmentPayload) => Promise<void>,
  ): Promise<DrainResult> {
    if (this.draining) {
      return { delivered: 0, rejected: [], remaining: this.size() };
    }
    this.draining = true;
    try {
      let delivered = 0;
      const rejected: string[] = [];
      while (true) {
        const items = this.load();
        const head = items[0];
        if (head === undefined) {
          break;
        }
        try {
          await submit(head);
          delivered += 1;
        } catch (error) {
          if (error instanceof NetworkError) {
            return { delivered, rejected, remaining: items.length };
          }
          if (error instanceof ApiError) {
            rejected.push(`${head.pair_id}: ${error.detail}`);
          } else {
            throw error;
          }
        }
        this.store(this.load().slice(1));
      }
      return { delivered, rejected, remaining: 0 };
    } finally {
      this.draining = false;
    }
  }
}
