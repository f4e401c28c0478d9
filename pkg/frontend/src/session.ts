// Connection and state model for the control panel.
//
// The panel is stateless with respect to truth: it renders whatever the last
// authoritative STATE says, clears local pending edits when their echo
// arrives, and never lets the displayed sequence number go backwards.
// Outbound control messages coalesce per type through a rate-limited queue
// (at most MAX_SEND_HZ messages a second leave the socket).

import {
  ClientEntry,
  SessionSnapshot,
  encodeMessage,
  parseMessage,
} from "./protocol";

export type ConnectionStatus = "connecting" | "connected" | "retrying" | "closed";

export const MAX_SEND_HZ = 30;
export const BACKOFF_CAP_MS = 30_000;

export interface WebSocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  send(data: string): void;
  close(): void;
}

export interface SessionOptions {
  name?: string;
  role?: string;
  frameWidth?: number;
  frameHeight?: number;
  maxFps?: number;
  wsFactory?: (url: string) => WebSocketLike;
  setTimeoutFn?: (fn: () => void, ms: number) => unknown;
  now?: () => number;
}

export interface SessionEvents {
  status?: (status: ConnectionStatus, detail: string) => void;
  state?: (state: SessionSnapshot) => void;
  frame?: (pngBase64: string, seq: number) => void;
  clients?: (clients: ClientEntry[]) => void;
  nack?: (reason: string) => void;
}

export class Session {
  status: ConnectionStatus = "closed";
  clientId: number | null = null;
  state: SessionSnapshot | null = null;
  displayedSeq = -1;
  frameSeq = -1;
  clients: ClientEntry[] = [];
  backoffMs = 500;
  pendingEcho = new Set<string>();

  private url: string;
  private opts: Required<Pick<SessionOptions, "name" | "role" | "frameWidth" | "frameHeight" | "maxFps">> & SessionOptions;
  private events: SessionEvents;
  private ws: WebSocketLike | null = null;
  private seq = 0;
  private queue = new Map<string, Record<string, unknown>>();
  private lastFlush = 0;
  private flushTimer: unknown = null;
  private stopped = false;

  constructor(url: string, events: SessionEvents = {}, opts: SessionOptions = {}) {
    this.url = url;
    this.events = events;
    this.opts = {
      name: opts.name ?? "panel",
      role: opts.role ?? "controller",
      frameWidth: opts.frameWidth ?? 256,
      frameHeight: opts.frameHeight ?? 256,
      maxFps: opts.maxFps ?? 8,
      ...opts,
    };
  }

  connect(): void {
    this.stopped = false;
    this.open();
  }

  close(): void {
    this.stopped = true;
    this.setStatus("closed", "closed by user");
    this.ws?.close();
    this.ws = null;
  }

  /** Queue a control message; the newest payload per type wins. */
  sendControl(type: string, payload: Record<string, unknown>): void {
    this.queue.set(type, payload);
    this.pendingEcho.add(type);
    this.scheduleFlush();
  }

  sendNow(type: string, payload: Record<string, unknown> = {}): void {
    if (!this.ws || this.status !== "connected") return;
    this.seq += 1;
    this.ws.send(encodeMessage(type, this.seq, payload));
  }

  // -- internals ------------------------------------------------------------

  private wsFactory(url: string): WebSocketLike {
    if (this.opts.wsFactory) return this.opts.wsFactory(url);
    const Ctor = (globalThis as { WebSocket?: new (url: string) => WebSocketLike }).WebSocket;
    if (!Ctor) throw new Error("no WebSocket implementation available");
    return new Ctor(url);
  }

  private setTimeoutFn(fn: () => void, ms: number): unknown {
    return (this.opts.setTimeoutFn ?? ((f: () => void, m: number) => setTimeout(f, m)))(fn, ms);
  }

  private now(): number {
    return (this.opts.now ?? (() => Date.now()))();
  }

  private setStatus(status: ConnectionStatus, detail: string): void {
    this.status = status;
    this.events.status?.(status, detail);
  }

  private open(): void {
    this.setStatus("connecting", this.url);
    let ws: WebSocketLike;
    try {
      ws = this.wsFactory(this.url);
    } catch (err) {
      this.retry(String(err));
      return;
    }
    this.ws = ws;
    ws.onopen = () => {
      this.backoffMs = 500;
      this.setStatus("connected", this.url);
      this.seq += 1;
      ws.send(encodeMessage("HELLO", this.seq, { name: this.opts.name, role: this.opts.role }));
      this.seq += 1;
      ws.send(encodeMessage("SUBSCRIBE_FRAMES", this.seq, {
        w: this.opts.frameWidth,
        h: this.opts.frameHeight,
        max_fps: this.opts.maxFps,
      }));
    };
    ws.onmessage = (ev) => this.handleMessage(String(ev.data));
    ws.onerror = () => undefined; // onclose always follows
    ws.onclose = () => {
      this.ws = null;
      if (!this.stopped) this.retry("connection lost");
    };
  }

  private retry(detail: string): void {
    if (this.stopped) return;
    this.setStatus("retrying", `${detail}; next attempt in ${Math.round(this.backoffMs / 1000)}s`);
    const wait = this.backoffMs;
    this.backoffMs = Math.min(this.backoffMs * 2, BACKOFF_CAP_MS);
    this.setTimeoutFn(() => {
      if (!this.stopped) this.open();
    }, wait);
  }

  handleMessage(raw: string): void {
    const msg = parseMessage(raw);
    if (!msg) return;
    switch (msg.type) {
      case "WELCOME": {
        this.clientId = msg.id as number;
        this.applyState(msg.state as SessionSnapshot);
        break;
      }
      case "STATE": {
        const snapshot = { ...(msg as unknown as SessionSnapshot), seq: msg.seq };
        this.applyState(snapshot);
        break;
      }
      case "FRAME": {
        if (msg.seq >= this.frameSeq) {
          this.frameSeq = msg.seq;
          this.events.frame?.(msg.png_base64 as string, msg.seq);
        }
        break;
      }
      case "CLIENT_LIST": {
        this.clients = (msg.clients as ClientEntry[]) ?? [];
        this.events.clients?.(this.clients);
        break;
      }
      case "NACK": {
        this.events.nack?.(String(msg.reason ?? "unknown"));
        break;
      }
      default:
        break;
    }
  }

  private applyState(state: SessionSnapshot): void {
    if (state.seq < this.displayedSeq) return; // stale
    this.displayedSeq = state.seq;
    this.state = state;
    this.pendingEcho.clear(); // authoritative echo wins over local guesses
    this.events.state?.(state);
  }

  private scheduleFlush(): void {
    if (this.flushTimer !== null) return;
    const interval = 1000 / MAX_SEND_HZ;
    const elapsed = this.now() - this.lastFlush;
    const wait = Math.max(interval - elapsed, 0);
    this.flushTimer = this.setTimeoutFn(() => {
      this.flushTimer = null;
      this.flush();
    }, wait);
  }

  private flush(): void {
    if (this.queue.size === 0) return;
    if (!this.ws || this.status !== "connected") {
      this.scheduleFlush();
      return;
    }
    this.lastFlush = this.now();
    // one message per flush keeps the outbound rate under MAX_SEND_HZ
    const next = this.queue.entries().next().value as [string, Record<string, unknown>];
    this.queue.delete(next[0]);
    this.sendNow(next[0], next[1]);
    if (this.queue.size > 0) this.scheduleFlush();
  }
}
