import { describe, expect, it } from "vitest";
import { pointerToForce } from "../src/input.js";

describe("pointerToForce", () => {
  it("is zero with the pointer on the marker", () => {
    expect(pointerToForce([0.02, 0.01], [0.02, 0.01])).toEqual([0, 0, 0]);
  });

  it("applies the spring law toward the pointer", () => {
    const f = pointerToForce([0.07, 0.0], [0.05, 0.0], { stiffness: 100, fCap: 10 });
    expect(f[0]).toBeCloseTo(2.0); // 100 N/m * 0.02 m
    expect(f[1]).toBe(0);
    expect(f[2]).toBe(0);
  });

  it("caps the force magnitude", () => {
    const f = pointerToForce([1.0, 1.0], [0, 0], { stiffness: 100, fCap: 10 });
    expect(Math.hypot(f[0], f[1])).toBeCloseTo(10);
    // direction preserved
    expect(f[0]).toBeCloseTo(f[1]);
  });

  it("stays in the task plane", () => {
    const f = pointerToForce([0.3, -0.2], [0, 0]);
    expect(f[2]).toBe(0);
  });
});
