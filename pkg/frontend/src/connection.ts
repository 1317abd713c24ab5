/**
 * WebSocket session with reconnect backoff and an update-rate estimate.
 * The socket factory is injectable so the logic is testable without a
 * browser or a live server.
 */

import { parseServerMessage, GameStatusMsg, ParticleUpdateMsg } from "./protocol";

export type ConnectionStatus = "connecting" | "live" | "reconnecting" | "closed";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export interface ConnectionOptions {
  socketFactory?: (url: string) => SocketLike;
  initialBackoffMs?: number;
  maxBackoffMs?: number;
  setTimeoutFn?: (fn: () => void, ms: number) => unknown;
  nowMs?: () => number;
}

export class Connection {
  status: ConnectionStatus = "connecting";
  onUpdate: ((update: ParticleUpdateMsg) => void) | null = null;
  onStatusMsg: ((status: GameStatusMsg) => void) | null = null;
  onStateChange: ((status: ConnectionStatus) => void) | null = null;

  private socket: SocketLike | null = null;
  private backoffMs: number;
  private closed = false;
  private updateTimes: number[] = [];
  private readonly factory: (url: string) => SocketLike;
  private readonly initialBackoffMs: number;
  private readonly maxBackoffMs: number;
  private readonly setTimeoutFn: (fn: () => void, ms: number) => unknown;
  private readonly nowMs: () => number;

  constructor(readonly url: string, options: ConnectionOptions = {}) {
    this.factory = options.socketFactory
      ?? ((u: string) => new WebSocket(u) as unknown as SocketLike);
    this.initialBackoffMs = options.initialBackoffMs ?? 500;
    this.maxBackoffMs = options.maxBackoffMs ?? 5000;
    this.setTimeoutFn = options.setTimeoutFn ?? ((fn, ms) => setTimeout(fn, ms));
    this.nowMs = options.nowMs ?? (() => performance.now());
    this.backoffMs = this.initialBackoffMs;
    this.open();
  }

  private setStatus(status: ConnectionStatus) {
    this.status = status;
    this.onStateChange?.(status);
  }

  private open() {
    if (this.closed) return;
    this.socket = this.factory(this.url);
    this.socket.onopen = () => {
      this.backoffMs = this.initialBackoffMs;
      this.setStatus("live");
    };
    this.socket.onmessage = (ev) => {
      const message = parseServerMessage(String(ev.data));
      if (!message) return;
      if (message.type === "particle") {
        this.noteUpdate();
        this.onUpdate?.(message);
      } else {
        this.onStatusMsg?.(message);
      }
    };
    this.socket.onclose = () => this.scheduleReconnect();
    this.socket.onerror = () => { /* onclose follows */ };
  }

  private scheduleReconnect() {
    if (this.closed) return;
    this.setStatus("reconnecting");
    const delay = this.backoffMs;
    this.backoffMs = Math.min(this.backoffMs * 2, this.maxBackoffMs);
    this.setTimeoutFn(() => this.open(), delay);
  }

  private noteUpdate() {
    const now = this.nowMs();
    this.updateTimes.push(now);
    while (this.updateTimes.length > 0 && now - this.updateTimes[0] > 1000) {
      this.updateTimes.shift();
    }
  }

  /** Updates per second over the trailing second. */
  get updateRateHz(): number {
    return this.updateTimes.length;
  }

  send(data: string): boolean {
    if (this.status !== "live" || !this.socket) return false; // discarded offline
    try {
      this.socket.send(data);
      return true;
    } catch {
      return false;
    }
  }

  close() {
    this.closed = true;
    this.setStatus("closed");
    this.socket?.close();
  }
}
