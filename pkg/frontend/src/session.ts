import { ApiClient } from "./api.js";
import { ScanEvent } from "./scan.js";
import { LogEntry, Mode } from "./types.js";

// Order-preserving event uploader.  Batches are posted one at a time so
// the server sees the same order the user produced; timestamps are
// forced strictly increasing, which the log schema requires.

export class SessionUploader {
  private queue: LogEntry[] = [];
  private flushing: Promise<void> = Promise.resolve();
  private lastTs = 0;
  failures = 0;

  constructor(
    private readonly api: ApiClient,
    readonly sessionId: string,
    readonly layout: string,
    readonly mode: Mode,
  ) {}

  push(events: ScanEvent[], nowMs: number): void {
    for (const event of events) {
      this.lastTs = Math.max(this.lastTs + 1, Math.round(nowMs));
      this.queue.push({
        session_id: this.sessionId,
        ts_ms: this.lastTs,
        layout: this.layout,
        mode: this.mode,
        kind: event.kind,
        payload: event.payload,
      });
    }
    this.flushing = this.flushing.then(() => this.flushOnce());
  }

  private async flushOnce(): Promise<void> {
    if (this.queue.length === 0) {
      return;
    }
    const batch = this.queue.splice(0, this.queue.length);
    for (let attempt = 0; ; attempt += 1) {
      try {
        await this.api.appendEvents(this.sessionId, batch);
        return;
      } catch (err) {
        if (attempt >= 2) {
          this.failures += 1;
          console.error("event upload failed", err);
          return;
        }
        await new Promise((r) => setTimeout(r, 100 * (attempt + 1)));
      }
    }
  }

  /** Resolve once everything pushed so far has been acknowledged. */
  async drain(): Promise<void> {
    let settled: Promise<void>;
    do {
      settled = this.flushing;
      await settled;
    } while (settled !== this.flushing || this.queue.length > 0);
  }
}
