// Wire messages exchanged with the session service. JSON text over a
// websocket, versioned with `v`. The client never recomputes control
// quantities; everything displayed comes from server frames.

export const WIRE_VERSION = 1;

export type Vec3 = [number, number, number];

export interface ForceMessage {
  v: number;
  t: number; // client clock, seconds
  fx: number;
  fy: number;
  fz: number;
}

export interface FrameMessage {
  v: number;
  type: "frame";
  t: number;
  x: Vec3;
  goal: Vec3;
  path_progress: number;
  eta_h: number;
  eta_r: number;
  eta_s: number;
  v_s: Vec3;
  disagreement_instant: number;
  loop: number;
  mode: string;
}

export interface DoneMessage {
  v: number;
  type: "done";
  completed: boolean;
  metrics: Record<string, number> | null;
}

export interface ErrorMessage {
  v: number;
  type: "error";
  error: string;
}

export type ServerMessage = FrameMessage | DoneMessage | ErrorMessage;

export interface SessionDescriptor {
  id: string;
  state: "waiting" | "running" | "done" | "aborted";
  mode: string;
  loops_required: number;
  timeout_s: number;
}

function isVec3(x: unknown): x is Vec3 {
  return Array.isArray(x) && x.length === 3 && x.every((c) => typeof c === "number" && isFinite(c));
}

/** Parse and validate one server message; null for anything malformed. */
export function decodeServerMessage(raw: string): ServerMessage | null {
  let msg: any;
  try {
    msg = JSON.parse(raw);
  } catch {
    return null;
  }
  if (!msg || msg.v !== WIRE_VERSION) return null;
  if (msg.type === "frame") {
    if (typeof msg.t !== "number" || !isVec3(msg.x) || !isVec3(msg.goal) || !isVec3(msg.v_s)) {
      return null;
    }
    return msg as FrameMessage;
  }
  if (msg.type === "done") return msg as DoneMessage;
  if (msg.type === "error" && typeof msg.error === "string") return msg as ErrorMessage;
  return null;
}

export function encodeForce(t: number, f: Vec3): string {
  return JSON.stringify({ v: WIRE_VERSION, t, fx: f[0], fy: f[1], fz: f[2] } satisfies ForceMessage);
}
