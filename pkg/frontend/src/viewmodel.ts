// Client-side view state: a bounded trace of recent frames plus gauge
// values, fed by server messages and drained by the renderer at display
// rate. Message handling is O(1) so a fast server cannot grow any queue.

import { FrameMessage, Vec3 } from "./protocol.js";

export const TRACE_CAPACITY = 600; // ~6 s of decimated frames

export type Connection = "connecting" | "live" | "stale" | "closed" | "error";

export interface TracePoint {
  x: number;
  y: number;
  etaS: number;
}

export interface Gauges {
  etaH: number;
  etaR: number;
  etaS: number;
  disagreement: number; // percent
  loop: number;
  elapsed: number; // seconds
}

export class ViewState {
  eePos: Vec3 = [0, 0, 0];
  goal: Vec3 = [0, 0, 0];
  pathProgress = 0;
  gauges: Gauges = { etaH: 0, etaR: 0, etaS: 0, disagreement: 0, loop: 0, elapsed: 0 };
  connection: Connection = "connecting";
  mode = "";
  lastFrameT = -Infinity;
  framesApplied = 0;
  framesDropped = 0;

  // ring buffer of recent positions, colored by executed performance
  private trace: TracePoint[] = new Array(TRACE_CAPACITY);
  private traceHead = 0;
  private traceLen = 0;

  /** Apply one frame; out-of-order frames (by t) are dropped. */
  applyFrame(frame: FrameMessage): boolean {
    if (frame.t <= this.lastFrameT) {
      this.framesDropped += 1;
      return false;
    }
    this.lastFrameT = frame.t;
    this.eePos = frame.x;
    this.goal = frame.goal;
    this.pathProgress = frame.path_progress;
    this.mode = frame.mode;
    const clamp01 = (v: number) => Math.min(1, Math.max(0, v));
    this.gauges = {
      etaH: clamp01(frame.eta_h),
      etaR: clamp01(frame.eta_r),
      etaS: clamp01(frame.eta_s),
      disagreement: Math.min(100, Math.max(0, frame.disagreement_instant)),
      loop: frame.loop,
      elapsed: frame.t,
    };
    this.trace[(this.traceHead + this.traceLen) % TRACE_CAPACITY] = {
      x: frame.x[0],
      y: frame.x[1],
      etaS: clamp01(frame.eta_s),
    };
    if (this.traceLen < TRACE_CAPACITY) {
      this.traceLen += 1;
    } else {
      this.traceHead = (this.traceHead + 1) % TRACE_CAPACITY;
    }
    this.framesApplied += 1;
    return true;
  }

  /** Oldest-to-newest snapshot of the trace (bounded by TRACE_CAPACITY). */
  tracePoints(): TracePoint[] {
    const out: TracePoint[] = [];
    for (let i = 0; i < this.traceLen; i++) {
      out.push(this.trace[(this.traceHead + i) % TRACE_CAPACITY]);
    }
    return out;
  }

  get traceSize(): number {
    return this.traceLen;
  }
}

/** World (meters, path plane) to canvas pixels. The reference circle is
 * sized to span about 60% of the canvas so the motor task is comparable
 * across screens. */
export class WorldTransform {
  readonly scale: number;
  constructor(
    readonly canvasW: number,
    readonly canvasH: number,
    readonly worldRadius: number,
  ) {
    this.scale = (0.6 * Math.min(canvasW, canvasH)) / (2 * worldRadius);
  }

  toScreen(wx: number, wy: number): [number, number] {
    // world y up, screen y down
    return [this.canvasW / 2 + wx * this.scale, this.canvasH / 2 - wy * this.scale];
  }

  toWorld(px: number, py: number): [number, number] {
    return [(px - this.canvasW / 2) / this.scale, (this.canvasH / 2 - py) / this.scale];
  }
}
