import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { Throttle } from "../src/throttle.js";

describe("Throttle", () => {
  beforeEach(() => {
    vi.useFakeTimers();
    vi.setSystemTime(0);
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  function recordingThrottle(intervalMs: number) {
    const sent: { value: number; at: number }[] = [];
    const throttle = new Throttle<number>((value) => {
      sent.push({ value, at: Date.now() });
    }, intervalMs);
    return { sent, throttle };
  }

  it("sends the first value immediately and the last value of a burst", () => {
    const { sent, throttle } = recordingThrottle(100);
    for (let i = 0; i < 100; i++) {
      throttle.push(i);
    }
    expect(sent).toEqual([{ value: 0, at: 0 }]);
    vi.advanceTimersByTime(100);
    expect(sent).toEqual([
      { value: 0, at: 0 },
      { value: 99, at: 100 },
    ]);
  });

  it("keeps consecutive sends at least one interval apart during a drag", () => {
    const { sent, throttle } = recordingThrottle(100);
    // A 2 s drag emitting a value every 7 ms, far above the allowed rate.
    for (let t = 0; t <= 2000; t += 7) {
      throttle.push(t);
      vi.advanceTimersByTime(7);
    }
    vi.runAllTimers();
    for (let i = 1; i < sent.length; i++) {
      expect(sent[i].at - sent[i - 1].at).toBeGreaterThanOrEqual(100);
    }
    // 10 per second over 2 s, plus the immediate leading send.
    expect(sent.length).toBeLessThanOrEqual(21);
    expect(sent[sent.length - 1].value).toBe(1995);
  });

  it("passes slow pushes through unchanged", () => {
    const { sent, throttle } = recordingThrottle(100);
    throttle.push(1);
    vi.advanceTimersByTime(150);
    throttle.push(2);
    vi.advanceTimersByTime(150);
    throttle.push(3);
    expect(sent.map((s) => s.value)).toEqual([1, 2, 3]);
  });

  it("flush delivers the pending value at once", () => {
    const { sent, throttle } = recordingThrottle(100);
    throttle.push(1);
    throttle.push(2);
    throttle.flush();
    expect(sent.map((s) => s.value)).toEqual([1, 2]);
    vi.runAllTimers();
    expect(sent.map((s) => s.value)).toEqual([1, 2]);
  });

  it("flush without a pending value does nothing", () => {
    const { sent, throttle } = recordingThrottle(100);
    throttle.push(1);
    vi.advanceTimersByTime(100);
    throttle.flush();
    expect(sent.map((s) => s.value)).toEqual([1]);
  });

  it("cancel drops the pending value", () => {
    const { sent, throttle } = recordingThrottle(100);
    throttle.push(1);
    throttle.push(2);
    throttle.cancel();
    vi.runAllTimers();
    expect(sent.map((s) => s.value)).toEqual([1]);
  });

  it("rejects a non-positive interval", () => {
    expect(() => new Throttle<number>(() => {}, 0)).toThrow(RangeError);
  });
});
