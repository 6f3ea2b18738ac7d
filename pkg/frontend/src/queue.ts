// Offline command buffer: while disconnected, hold at most one pending
// command; anything beyond that is dropped with a notice.

export type OfferResult = "queued" | "dropped";

export class OfflineQueue<T> {
  private pending: T | null = null;

  offer(command: T): OfferResult {
    if (this.pending !== null) {
      return "dropped";
    }
    this.pending = command;
    return "queued";
  }

  drain(): T | null {
    const command = this.pending;
    this.pending = null;
    return command;
  }

  get size(): number {
    return this.pending === null ? 0 : 1;
  }
}
