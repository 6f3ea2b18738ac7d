import { reconnectDelayMs } from "./backoff.js";
import { OfflineQueue } from "./queue.js";
import { ConnectionStatus, ConsoleCommand, ConsoleEvent } from "./types.js";

// Minimal socket surface so tests can substitute a fake.
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
}

export interface ClientDeps {
  makeSocket(url: string): SocketLike;
  setTimer(fn: () => void, ms: number): unknown;
  clearTimer(handle: unknown): void;
}

export interface ClientHandlers {
  onEvent(event: ConsoleEvent): void;
  onStatus(status: ConnectionStatus): void;
  onNotice(message: string): void;
}

const defaultDeps: ClientDeps = {
  makeSocket: (url) => new WebSocket(url) as unknown as SocketLike,
  setTimer: (fn, ms) => setTimeout(fn, ms),
  clearTimer: (handle) => clearTimeout(handle as number),
};

export type SendResult = "sent" | "queued" | "dropped";

// WebSocket session with automatic reconnect. While disconnected one
// command may queue; it flushes on reconnect. Events pass straight through
// to the handler in arrival order.
export class ConsoleClient {
  private socket: SocketLike | null = null;
  private attempt = 0;
  private timer: unknown = null;
  private stopped = false;
  private queue = new OfflineQueue<ConsoleCommand>();
  status: ConnectionStatus = "connecting";

  constructor(
    private url: string,
    private handlers: ClientHandlers,
    private deps: ClientDeps = defaultDeps,
  ) {}

  connect(): void {
    if (this.stopped) return;
    this.setStatus("connecting");
    const socket = this.deps.makeSocket(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.attempt = 0;
      this.setStatus("open");
      const pending = this.queue.drain();
      if (pending) {
        socket.send(JSON.stringify(pending));
        this.handlers.onNotice("queued command sent after reconnect");
      }
    };
    socket.onmessage = (message) => {
      try {
        this.handlers.onEvent(JSON.parse(message.data) as ConsoleEvent);
      } catch {
        this.handlers.onNotice("ignored malformed event from server");
      }
    };
    socket.onclose = () => this.scheduleReconnect();
    socket.onerror = () => {
      // Some runtimes fire error without close; closing triggers onclose.
      try {
        socket.close();
      } catch {
        /* already closed */
      }
    };
  }

  send(command: ConsoleCommand): SendResult {
    if (this.status === "open" && this.socket) {
      this.socket.send(JSON.stringify(command));
      return "sent";
    }
    const result = this.queue.offer(command);
    if (result === "dropped") {
      this.handlers.onNotice("disconnected: command dropped (one already queued)");
    } else {
      this.handlers.onNotice("disconnected: command queued until reconnect");
    }
    return result;
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) {
      this.deps.clearTimer(this.timer);
      this.timer = null;
    }
    this.socket?.close();
    this.setStatus("closed");
  }

  private scheduleReconnect(): void {
    if (this.stopped) return;
    this.setStatus("closed");
    const delay = reconnectDelayMs(this.attempt);
    this.attempt += 1;
    this.timer = this.deps.setTimer(() => {
      this.timer = null;
      this.connect();
    }, delay);
  }

  private setStatus(status: ConnectionStatus): void {
    this.status = status;
    this.handlers.onStatus(status);
  }
}
