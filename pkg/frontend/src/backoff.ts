// Reconnect schedule: 0.5 s, 1 s, 2 s, then steady 2 s.

const SCHEDULE_MS = [500, 1000, 2000];

export function reconnectDelayMs(attempt: number): number {
  if (attempt < 0) {
    throw new Error(`attempt must be >= 0, got ${attempt}`);
  }
  return SCHEDULE_MS[Math.min(attempt, SCHEDULE_MS.length - 1)];
}
