/**
 * WebSocket client for the steering service with automatic reconnection.
 *
 * Connection drops trigger retries whose delay doubles up to a cap and
 * resets once a connection opens again. Incoming messages are split into
 * lines and decoded individually, so a transport that batches several JSON
 * lines into one message still works. A client that has been close()d is
 * permanently inert: late socket events and queued retries are ignored.
 */

import {
  ClientCommand,
  ProtocolError,
  StateFrame,
  decodeServerMessage,
  encodeCommand,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "reconnecting" | "closed";

/** The subset of the DOM WebSocket surface the client relies on. */
export interface WebSocketLike {
  onopen: (() => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  readonly readyState: number;
  send(data: string): void;
  close(): void;
}

export interface SteeringClientOptions {
  url: string;
  onFrame: (frame: StateFrame) => void;
  /** Server error notices and local decode problems, for the UI banner. */
  onNotice?: (message: string) => void;
  onStatus?: (status: ConnectionStatus, detail?: string) => void;
  /** Test seam; defaults to the browser WebSocket. */
  socketFactory?: (url: string) => WebSocketLike;
  initialBackoffMs?: number;
  maxBackoffMs?: number;
}

const DEFAULT_INITIAL_BACKOFF_MS = 500;
const DEFAULT_MAX_BACKOFF_MS = 10_000;

// DOM WebSocket.OPEN; kept local so WebSocketLike needs no static members.
const SOCKET_OPEN = 1;

function defaultSocketFactory(url: string): WebSocketLike {
  // Runtime-compatible: the client only assigns handlers and calls
  // send/close, and the DOM event objects carry the fields used here.
  return new WebSocket(url) as unknown as WebSocketLike;
}

export class SteeringClient {
  private readonly options: SteeringClientOptions;
  private readonly socketFactory: (url: string) => WebSocketLike;
  private socket: WebSocketLike | null = null;
  private backoffMs: number;
  private retryTimer: ReturnType<typeof setTimeout> | null = null;
  private generation = 0;
  private currentStatus: ConnectionStatus = "closed";
  private stopped = false;

  constructor(options: SteeringClientOptions) {
    this.options = options;
    this.socketFactory = options.socketFactory ?? defaultSocketFactory;
    this.backoffMs = options.initialBackoffMs ?? DEFAULT_INITIAL_BACKOFF_MS;
  }

  get status(): ConnectionStatus {
    return this.currentStatus;
  }

  connect(): void {
    if (this.stopped || this.socket !== null) {
      return;
    }
    const generation = this.generation;
    this.setStatus(this.currentStatus === "closed" ? "connecting" : "reconnecting");
    let socket: WebSocketLike;
    try {
      socket = this.socketFactory(this.options.url);
    } catch (error) {
      this.notify(`connection failed: ${String(error)}`);
      this.scheduleReconnect();
      return;
    }
    this.socket = socket;
    socket.onopen = () => {
      if (this.generation !== generation) {
        return;
      }
      this.backoffMs = this.options.initialBackoffMs ?? DEFAULT_INITIAL_BACKOFF_MS;
      this.setStatus("connected");
    };
    socket.onmessage = (event) => {
      if (this.generation !== generation) {
        return;
      }
      this.handleData(event.data);
    };
    socket.onclose = () => {
      if (this.generation !== generation) {
        return;
      }
      this.socket = null;
      this.scheduleReconnect();
    };
    // A failed connection also fires onclose; onerror alone is not a drop.
    socket.onerror = () => {};
  }

  /** Stop for good: close the transport and cancel any pending retry. */
  close(): void {
    this.stopped = true;
    this.generation += 1;
    if (this.retryTimer !== null) {
      clearTimeout(this.retryTimer);
      this.retryTimer = null;
    }
    if (this.socket !== null) {
      this.socket.close();
      this.socket = null;
    }
    this.setStatus("closed");
  }

  /** Send one command; false when the connection is not open right now. */
  send(command: ClientCommand): boolean {
    if (this.socket === null || this.socket.readyState !== SOCKET_OPEN) {
      return false;
    }
    this.socket.send(encodeCommand(command));
    return true;
  }

  private handleData(data: unknown): void {
    if (typeof data !== "string") {
      this.notify("ignoring non-text message from server");
      return;
    }
    for (const line of data.split("\n")) {
      if (line === "") {
        continue;
      }
      let message;
      try {
        message = decodeServerMessage(line);
      } catch (error) {
        if (error instanceof ProtocolError) {
          this.notify(error.message);
          continue;
        }
        throw error;
      }
      if (message.type === "state") {
        this.options.onFrame(message);
      } else {
        this.notify(message.message);
      }
    }
  }

  private scheduleReconnect(): void {
    if (this.stopped || this.retryTimer !== null) {
      return;
    }
    const delay = this.backoffMs;
    this.backoffMs = Math.min(this.backoffMs * 2, this.options.maxBackoffMs ?? DEFAULT_MAX_BACKOFF_MS);
    this.setStatus("reconnecting", `retrying in ${Math.round(delay / 100) / 10} s`);
    this.retryTimer = setTimeout(() => {
      this.retryTimer = null;
      this.connect();
    }, delay);
  }

  private setStatus(status: ConnectionStatus, detail?: string): void {
    this.currentStatus = status;
    this.options.onStatus?.(status, detail);
  }

  private notify(message: string): void {
    this.options.onNotice?.(message);
  }
}
