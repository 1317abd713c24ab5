/**
 * JSON mirror of the simulation server's wire protocol, as carried over the
 * WebSocket bridge, plus the client-side sequence source.  All positions are
 * metres in the levitation-volume frame.
 */

export type Vec3 = [number, number, number];

export const FLAG_ESCAPED = 0x1;
export const FLAG_TARGET_HIT = 0x2;

/** Working volume of the rig: 14 x 10.6 x 9 cm centred on the origin. */
export const VOLUME = {
  lo: [-0.07, -0.053, -0.045] as Vec3,
  hi: [0.07, 0.053, 0.045] as Vec3,
};

export interface ParticleUpdateMsg {
  type: "particle";
  seq: number;
  t_us: number;
  pos: Vec3;
  vel: Vec3;
  flags: number;
}

export interface GameStatusMsg {
  type: "game";
  t_us: number;
  events: string[];
  score?: number;
  speed?: number;
  cooldown_s?: number;
  miss_streak?: number;
  state?: "running" | "over";
  elapsed_s?: number;
}

export type ServerMsg = ParticleUpdateMsg | GameStatusMsg;

function isVec3(value: unknown): value is Vec3 {
  return Array.isArray(value) && value.length === 3 &&
    value.every((v) => typeof v === "number" && Number.isFinite(v));
}

/** Parse one server message; returns null on anything malformed. */
export function parseServerMessage(raw: string): ServerMsg | null {
  let payload: any;
  try {
    payload = JSON.parse(raw);
  } catch {
    return null;
  }
  if (payload?.type === "particle") {
    if (typeof payload.seq !== "number" || typeof payload.t_us !== "number" ||
        !isVec3(payload.pos) || !isVec3(payload.vel)) {
      return null;
    }
    return {
      type: "particle",
      seq: payload.seq,
      t_us: payload.t_us,
      pos: payload.pos,
      vel: payload.vel,
      flags: typeof payload.flags === "number" ? payload.flags : 0,
    };
  }
  if (payload?.type === "game") {
    if (typeof payload.t_us !== "number" || !Array.isArray(payload.events)) {
      return null;
    }
    return payload as GameStatusMsg;
  }
  return null;
}

export function trapCommandJson(seq: number, tUs: number, pos: Vec3): string {
  return JSON.stringify({ type: "trap", seq, t_us: Math.round(tUs), pos });
}

export function racketPoseJson(pos: Vec3, normal: Vec3, vel: Vec3, radius = 0.015): string {
  return JSON.stringify({ type: "racket", pos, normal, vel, radius });
}

export function gunPoseJson(origin: Vec3, dir: Vec3, trigger: boolean): string {
  return JSON.stringify({ type: "gun", origin, dir, trigger });
}

/** Monotone sequence numbers for outgoing commands. */
export class SequenceSource {
  private last = 0;

  next(): number {
    this.last += 1;
    return this.last;
  }
}

export function clampToVolume(pos: Vec3): { pos: Vec3; clamped: boolean } {
  const clamped: Vec3 = [0, 0, 0];
  let touched = false;
  for (let i = 0; i < 3; i++) {
    const value = Math.min(Math.max(pos[i], VOLUME.lo[i]), VOLUME.hi[i]);
    if (value !== pos[i]) touched = true;
    clamped[i] = value;
  }
  return { pos: clamped, clamped: touched };
}
