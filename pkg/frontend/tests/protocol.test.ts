import { describe, expect, it } from "vitest";
import { decodeServerMessage, encodeForce, FrameMessage, WIRE_VERSION } from "../src/protocol.js";

const frame = (t: number, extra: Partial<FrameMessage> = {}): string =>
  JSON.stringify({
    v: WIRE_VERSION,
    type: "frame",
    t,
    x: [0.05, 0, 0],
    goal: [0.049, -0.01, 0],
    path_progress: 0.1,
    eta_h: 0.9,
    eta_r: 0.95,
    eta_s: 0.92,
    v_s: [0, -0.05, 0],
    disagreement_instant: 3.2,
    loop: 1,
    mode: "shared",
    ...extra,
  });

describe("decodeServerMessage", () => {
  it("accepts a well-formed frame", () => {
    const msg = decodeServerMessage(frame(0.5));
    expect(msg?.type).toBe("frame");
    expect((msg as FrameMessage).t).toBe(0.5);
  });

  it("rejects the wrong wire version", () => {
    const raw = JSON.parse(frame(1));
    raw.v = 2;
    expect(decodeServerMessage(JSON.stringify(raw))).toBeNull();
  });

  it("rejects malformed vectors", () => {
    const raw = JSON.parse(frame(1));
    raw.x = [1, 2];
    expect(decodeServerMessage(JSON.stringify(raw))).toBeNull();
  });

  it("rejects garbage", () => {
    expect(decodeServerMessage("{not json")).toBeNull();
    expect(decodeServerMessage('{"v":1,"type":"mystery"}')).toBeNull();
  });

  it("passes done and error through", () => {
    expect(
      decodeServerMessage(JSON.stringify({ v: 1, type: "done", completed: true, metrics: null }))
        ?.type,
    ).toBe("done");
    expect(
      decodeServerMessage(JSON.stringify({ v: 1, type: "error", error: "nope" }))?.type,
    ).toBe("error");
  });
});

describe("encodeForce", () => {
  it("round-trips the numeric fields", () => {
    const parsed = JSON.parse(encodeForce(1.25, [0.5, -1.5, 0]));
    expect(parsed).toEqual({ v: WIRE_VERSION, t: 1.25, fx: 0.5, fy: -1.5, fz: 0 });
  });
});
