import { describe, expect, it } from "vitest";

import { COMMAND_INTERVAL_MS, SteeringInput } from "../src/input";
import { VOLUME } from "../src/protocol";

describe("steering input", () => {
  it("maps the pointer center to the volume center", () => {
    const input = new SteeringInput();
    expect(input.pointerMove(0, 0)).toEqual([0, 0, 0]);
  });

  it("maps full deflection to the volume faces", () => {
    const input = new SteeringInput();
    const pos = input.pointerMove(1, -1);
    expect(pos[0]).toBeCloseTo(VOLUME.hi[0], 12);
    expect(pos[1]).toBeCloseTo(VOLUME.lo[1], 12);
  });

  it("pre-clamps out-of-volume pointers client-side", () => {
    const input = new SteeringInput();
    const pos = input.pointerMove(1.8, 0);
    expect(pos[0]).toBe(VOLUME.hi[0]);
    expect(input.lastClamped).toBe(true);
  });

  it("scroll steps the depth and clamps at the volume walls", () => {
    const input = new SteeringInput({ depthStep: 0.005 });
    expect(input.scroll(1)).toBeCloseTo(0.005, 12);
    expect(input.scroll(1)).toBeCloseTo(0.01, 12);
    for (let i = 0; i < 50; i++) input.scroll(1);
    expect(input.desiredTrap[2]).toBe(VOLUME.hi[2]);
    for (let i = 0; i < 100; i++) input.scroll(-1);
    expect(input.desiredTrap[2]).toBe(VOLUME.lo[2]);
  });

  it("mirrors the C:D ratio into control coordinates", () => {
    const input = new SteeringInput({ cdRatio: 3 });
    input.pointerMove(0.1, 0);
    // desired trap x = 0.007; the wire carries control coords 3x further out
    const control = input.controlPosition();
    expect(control[0]).toBeCloseTo(0.007 * 3, 12);
  });

  it("rate-limits commands to one per tick with increasing sequences", () => {
    const input = new SteeringInput();
    input.pointerMove(0.5, 0.5);
    const first = input.maybeCommand(1000, 0);
    const blocked = input.maybeCommand(1000 + COMMAND_INTERVAL_MS / 2, 0);
    const second = input.maybeCommand(1000 + COMMAND_INTERVAL_MS + 0.1, 0);
    expect(first).not.toBeNull();
    expect(blocked).toBeNull();
    expect(second).not.toBeNull();
    const seqA = JSON.parse(first!).seq;
    const seqB = JSON.parse(second!).seq;
    expect(seqB).toBeGreaterThan(seqA);
  });

  it("produced trap targets always stay inside the volume", () => {
    const input = new SteeringInput();
    for (const [nx, ny, scroll] of [[3, -4, 9], [-2, 2, -30], [0.5, 0.9, 15]] as const) {
      input.pointerMove(nx, ny);
      input.scroll(scroll);
      const trap = input.desiredTrap;
      for (let i = 0; i < 3; i++) {
        expect(trap[i]).toBeGreaterThanOrEqual(VOLUME.lo[i]);
        expect(trap[i]).toBeLessThanOrEqual(VOLUME.hi[i]);
      }
    }
  });
});
