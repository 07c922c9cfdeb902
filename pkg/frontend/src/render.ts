// Canvas renderer. Pure drawing: reads ViewState, never touches control
// quantities beyond displaying them.

import { Connection, ViewState, WorldTransform } from "./viewmodel.js";

// executed-performance color: red (braking) through yellow to green
export function etaColor(eta: number): string {
  const hue = Math.round(120 * Math.min(1, Math.max(0, eta)));
  return `hsl(${hue}, 85%, 50%)`;
}

export interface RenderOptions {
  worldRadius: number; // reference circle radius, meters
}

export class Renderer {
  private tf: WorldTransform;

  constructor(
    private canvas: HTMLCanvasElement,
    private opts: RenderOptions,
  ) {
    this.tf = new WorldTransform(canvas.width, canvas.height, opts.worldRadius);
  }

  resize(): void {
    this.tf = new WorldTransform(this.canvas.width, this.canvas.height, this.opts.worldRadius);
  }

  get transform(): WorldTransform {
    return this.tf;
  }

  draw(state: ViewState): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = "#10141a";
    ctx.fillRect(0, 0, width, height);

    // reference circle
    const [cx, cy] = this.tf.toScreen(0, 0);
    ctx.strokeStyle = "#3d4654";
    ctx.lineWidth = 2;
    ctx.setLineDash([6, 6]);
    ctx.beginPath();
    ctx.arc(cx, cy, this.opts.worldRadius * this.tf.scale, 0, 2 * Math.PI);
    ctx.stroke();
    ctx.setLineDash([]);

    // trace, fading with age and colored by executed performance
    const pts = state.tracePoints();
    for (let i = 1; i < pts.length; i++) {
      const a = this.tf.toScreen(pts[i - 1].x, pts[i - 1].y);
      const b = this.tf.toScreen(pts[i].x, pts[i].y);
      ctx.globalAlpha = 0.15 + (0.85 * i) / pts.length;
      ctx.strokeStyle = etaColor(pts[i].etaS);
      ctx.lineWidth = 3;
      ctx.beginPath();
      ctx.moveTo(a[0], a[1]);
      ctx.lineTo(b[0], b[1]);
      ctx.stroke();
    }
    ctx.globalAlpha = 1;

    // goal point
    const [gx, gy] = this.tf.toScreen(state.goal[0], state.goal[1]);
    ctx.fillStyle = "#6ea8ff";
    ctx.beginPath();
    ctx.arc(gx, gy, 5, 0, 2 * Math.PI);
    ctx.fill();

    // end effector
    const [ex, ey] = this.tf.toScreen(state.eePos[0], state.eePos[1]);
    ctx.fillStyle = "#f5f7fa";
    ctx.strokeStyle = etaColor(state.gauges.etaS);
    ctx.lineWidth = 3;
    ctx.beginPath();
    ctx.arc(ex, ey, 9, 0, 2 * Math.PI);
    ctx.fill();
    ctx.stroke();
  }
}

export function gaugeText(state: ViewState): string {
  const g = state.gauges;
  return [
    `mode ${state.mode || "-"}`,
    `loop ${g.loop}`,
    `t ${g.elapsed.toFixed(1)}s`,
    `eta_h ${g.etaH.toFixed(2)}`,
    `eta_r ${g.etaR.toFixed(2)}`,
    `eta_s ${g.etaS.toFixed(2)}`,
    `disagreement ${g.disagreement.toFixed(0)}%`,
  ].join("  ·  ");
}

export function connectionBanner(c: Connection): string {
  switch (c) {
    case "connecting":
      return "connecting…";
    case "live":
      return "";
    case "stale":
      return "connection stale: input paused";
    case "closed":
      return "session closed";
    case "error":
      return "connection error";
  }
}
