/**
 * Pointer steering: a camera-facing plane drives x/y, the scroll wheel steps
 * depth.  The desired trap position is pre-clamped to the volume (the server
 * clamp stays authoritative), mirrored through the C:D ratio into control
 * coordinates, and rate-limited to the server tick rate with strictly
 * increasing sequence numbers.
 */

import { clampToVolume, SequenceSource, trapCommandJson, Vec3, VOLUME } from "./protocol";

export interface InputMappingConfig {
  mode: "pointer-plane" | "orbit-drag";
  cdRatio: number; // mirror of the server's control-to-display ratio
  depthStep: number; // m per scroll step
  controlOrigin: Vec3;
  displayOrigin: Vec3;
}

export const DEFAULT_MAPPING: InputMappingConfig = {
  mode: "pointer-plane",
  cdRatio: 3.0,
  depthStep: 0.005,
  controlOrigin: [0, 0, 0],
  displayOrigin: [0, 0, 0],
};

export const COMMAND_INTERVAL_MS = 1000 / 90;

export class SteeringInput {
  readonly config: InputMappingConfig;
  private depth: number;
  private desired: Vec3;
  private sequence = new SequenceSource();
  private lastSentMs = -Infinity;
  lastClamped = false;

  constructor(config: Partial<InputMappingConfig> = {}) {
    this.config = { ...DEFAULT_MAPPING, ...config };
    this.depth = 0.0;
    this.desired = [0, 0, 0];
  }

  /** Normalized pointer coordinates (x right, y up, both in [-1, 1]). */
  pointerMove(nx: number, ny: number): Vec3 {
    const half = [
      (VOLUME.hi[0] - VOLUME.lo[0]) / 2,
      (VOLUME.hi[1] - VOLUME.lo[1]) / 2,
    ];
    const raw: Vec3 = [nx * half[0], ny * half[1], this.depth];
    const { pos, clamped } = clampToVolume(raw);
    this.desired = pos;
    this.lastClamped = clamped;
    return pos;
  }

  /** Scroll-wheel depth control; positive steps push away from the camera. */
  scroll(steps: number): number {
    this.depth += steps * this.config.depthStep;
    this.depth = Math.min(Math.max(this.depth, VOLUME.lo[2]), VOLUME.hi[2]);
    const { pos } = clampToVolume([this.desired[0], this.desired[1], this.depth]);
    this.desired = pos;
    return this.depth;
  }

  get desiredTrap(): Vec3 {
    return [...this.desired];
  }

  /**
   * Inverse C:D mirror: the wire carries raw control coordinates, which the
   * server maps back onto this desired trap position.
   */
  controlPosition(): Vec3 {
    const { cdRatio, controlOrigin, displayOrigin } = this.config;
    return [
      controlOrigin[0] + (this.desired[0] - displayOrigin[0]) * cdRatio,
      controlOrigin[1] + (this.desired[1] - displayOrigin[1]) * cdRatio,
      controlOrigin[2] + (this.desired[2] - displayOrigin[2]) * cdRatio,
    ];
  }

  /**
   * At most one command per server tick interval; returns the JSON message
   * or null when the rate limiter swallows this opportunity.
   */
  maybeCommand(nowMs: number, serverTimeUs: number): string | null {
    if (nowMs - this.lastSentMs < COMMAND_INTERVAL_MS) return null;
    this.lastSentMs = nowMs;
    return trapCommandJson(this.sequence.next(), serverTimeUs, this.controlPosition());
  }
}
