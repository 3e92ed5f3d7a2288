/**
 * Trailing-edge rate limiter. Values pushed faster than the interval are
 * coalesced: the first goes out immediately, later ones replace a pending
 * value that is delivered once the interval since the last send elapses.
 * Consecutive sends are therefore always at least intervalMs apart and the
 * most recent value is never lost.
 */

export class Throttle<T> {
  private lastSentAt = Number.NEGATIVE_INFINITY;
  private pending: { value: T } | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly send: (value: T) => void,
    readonly intervalMs: number,
  ) {
    if (!(intervalMs > 0)) {
      throw new RangeError(`intervalMs must be > 0, got ${intervalMs}`);
    }
  }

  push(value: T): void {
    const now = Date.now();
    if (this.timer === null && now - this.lastSentAt >= this.intervalMs) {
      this.lastSentAt = now;
      this.send(value);
      return;
    }
    this.pending = { value };
    if (this.timer === null) {
      const delay = this.lastSentAt + this.intervalMs - now;
      this.timer = setTimeout(() => this.fire(), delay);
    }
  }

  /** Deliver any pending value immediately, restarting the interval. */
  flush(): void {
    if (this.pending !== null) {
      this.clearTimer();
      this.fire();
    }
  }

  /** Drop any pending value without sending it. */
  cancel(): void {
    this.clearTimer();
    this.pending = null;
  }

  private fire(): void {
    this.timer = null;
    if (this.pending !== null) {
      const { value } = this.pending;
      this.pending = null;
      this.lastSentAt = Date.now();
      this.send(value);
    }
  }

  private clearTimer(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }
}
