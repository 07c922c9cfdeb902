// Pointer-to-force transducer: the pointer drags the end effector through
// a virtual spring, so the admittance semantics of the controller stay
// intact end to end. Forces live in the task plane (z = 0).

import { Vec3 } from "./protocol.js";

export interface SpringConfig {
  stiffness: number; // N/m
  fCap: number; // N
}

export const DEFAULT_SPRING: SpringConfig = { stiffness: 120, fCap: 12 };

export function pointerToForce(
  pointerWorld: [number, number],
  eeWorld: [number, number],
  cfg: SpringConfig = DEFAULT_SPRING,
): Vec3 {
  let fx = cfg.stiffness * (pointerWorld[0] - eeWorld[0]);
  let fy = cfg.stiffness * (pointerWorld[1] - eeWorld[1]);
  const n = Math.hypot(fx, fy);
  if (n > cfg.fCap) {
    fx *= cfg.fCap / n;
    fy *= cfg.fCap / n;
  }
  return [fx, fy, 0];
}
