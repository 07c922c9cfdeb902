// Session lifecycle against the service: create, stream io, fetch the
// final record metrics.

import { decodeServerMessage, encodeForce, ServerMessage, SessionDescriptor, Vec3 } from "./protocol.js";

export interface SessionConfig {
  server: string; // http(s) origin
  mode: string;
  loops: number;
  timeoutS: number;
}

export async function createSession(cfg: SessionConfig): Promise<SessionDescriptor> {
  const r = await fetch(`${cfg.server}/sessions`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ mode: cfg.mode, loops: cfg.loops, timeout_s: cfg.timeoutS }),
  });
  if (!r.ok) {
    throw new Error(`session rejected: ${(await r.json()).detail ?? r.status}`);
  }
  return (await r.json()) as SessionDescriptor;
}

export async function fetchFinalMetrics(
  server: string,
  id: string,
): Promise<Record<string, number> | null> {
  const r = await fetch(`${server}/sessions/${id}/record?metrics=1`);
  if (!r.ok) return null;
  return (await r.json()).metrics;
}

export class SessionStream {
  private ws: WebSocket | null = null;
  private t0 = 0;

  onMessage: (msg: ServerMessage) => void = () => {};
  onClose: () => void = () => {};

  connect(server: string, id: string): void {
    const wsOrigin = server.replace(/^http/, "ws");
    this.ws = new WebSocket(`${wsOrigin}/sessions/${id}/io`);
    this.t0 = performance.now();
    this.ws.onmessage = (ev) => {
      const msg = decodeServerMessage(String(ev.data));
      if (msg) this.onMessage(msg);
    };
    this.ws.onclose = () => this.onClose();
    this.ws.onerror = () => this.onClose();
  }

  /** Seconds on the client clock since the stream opened. */
  now(): number {
    return (performance.now() - this.t0) / 1000;
  }

  sendForce(f: Vec3): boolean {
    if (!this.ws || this.ws.readyState !== WebSocket.OPEN) return false;
    this.ws.send(encodeForce(this.now(), f));
    return true;
  }

  close(): void {
    this.ws?.close();
    this.ws = null;
  }
}
