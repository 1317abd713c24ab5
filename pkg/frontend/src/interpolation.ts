/**
 * Render-side smoothing: the particle is drawn at a received position or a
 * linear interpolation between the two latest updates, never extrapolated.
 * The server ticks every ~11.1 ms; rendering runs at the display rate.
 */

import { ParticleUpdateMsg, Vec3 } from "./protocol";

export const TICK_US = 1_000_000 / 90;

export class InterpolationBuffer {
  private older: ParticleUpdateMsg | null = null;
  private newest: ParticleUpdateMsg | null = null;

  push(update: ParticleUpdateMsg): void {
    // stale or duplicate frames (bridge is latest-wins) are ignored
    if (this.newest && update.t_us <= this.newest.t_us) return;
    this.older = this.newest;
    this.newest = update;
  }

  get latest(): ParticleUpdateMsg | null {
    return this.newest;
  }

  /**
   * Position for render time t (µs in server time).  Between the two latest
   * updates the result is a lerp; beyond the newest it holds the newest
   * sample (no velocity extrapolation), and a request more than two ticks
   * past the newest just keeps returning it until fresh data arrives.
   */
  sampleAt(tUs: number): Vec3 | null {
    if (!this.newest) return null;
    if (!this.older || tUs >= this.newest.t_us) {
      return [...this.newest.pos];
    }
    if (tUs <= this.older.t_us) {
      return [...this.older.pos];
    }
    const span = this.newest.t_us - this.older.t_us;
    const f = (tUs - this.older.t_us) / span;
    const a = this.older.pos;
    const b = this.newest.pos;
    return [a[0] + (b[0] - a[0]) * f, a[1] + (b[1] - a[1]) * f, a[2] + (b[2] - a[2]) * f];
  }

  /** True when the newest sample is older than two ticks: show staleness. */
  isStale(tUs: number): boolean {
    return this.newest !== null && tUs - this.newest.t_us > 2 * TICK_US;
  }
}
