import type { ApiClient } from "./api";
import type { Decision, Issue, Subject, Verdict } from "./types";
import { subjectKey } from "./types";

/** Durable at-least-once verdict delivery.
 *
 * Every verdict is appended to a local queue (persisted in localStorage when
 * available) before any network attempt, then flushed strictly in order. A
 * failed post stops the flush and leaves the remainder queued, so offline
 * reviewing loses nothing; the idempotency key makes retries safe after an
 * ack was lost in transit.
 */
export class VerdictQueue {
  private pending: Verdict[] = [];
  private flushing = false;
  onStateChange: (pendingCount: number, lastError: string | null) => void = () => {};

  constructor(
    private api: ApiClient,
    private storageKey = "audioaudit.verdicts",
    private storage: Pick<Storage, "getItem" | "setItem"> | null = defaultStorage(),
  ) {
    this.restore();
  }

  private restore(): void {
    if (!this.storage) return;
    const raw = this.storage.getItem(this.storageKey);
    if (raw) {
      try {
        this.pending = JSON.parse(raw) as Verdict[];
      } catch {
        this.pending = [];
      }
    }
  }

  private persist(): void {
    this.storage?.setItem(this.storageKey, JSON.stringify(this.pending));
  }

  get pendingCount(): number {
    return this.pending.length;
  }

  enqueue(
    audit: string,
    issue: Issue,
    subject: Subject,
    decision: Decision,
    reviewer: string,
    now: number = Date.now(),
  ): Verdict {
    const verdict: Verdict = {
      audit,
      issue,
      subject,
      decision,
      reviewer,
      idempotency_key: `${audit}:${issue}:${subjectKey(subject)}:${now}`,
    };
    this.pending.push(verdict);
    this.persist();
    return verdict;
  }

  /** Post queued verdicts in order; returns the number acknowledged. */
  async flush(): Promise<number> {
    if (this.flushing) return 0;
    this.flushing = true;
    let acked = 0;
    try {
      while (this.pending.length > 0) {
        const head = this.pending[0];
        try {
          await this.api.postVerdict(head);
        } catch (err) {
          this.onStateChange(this.pending.length, String(err));
          return acked;
        }
        this.pending.shift();
        this.persist();
        acked += 1;
      }
      this.onStateChange(0, null);
      return acked;
    } finally {
      this.flushing = false;
    }
  }
}

function defaultStorage(): Pick<Storage, "getItem" | "setItem"> | null {
  try {
    if (typeof localStorage !== "undefined") return localStorage;
  } catch {
    // Storage access can throw in sandboxed contexts.
  }
  return null;
}
