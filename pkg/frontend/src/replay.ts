/**
 * Session-log playback: fetch recorded CSVs from the server's replay
 * endpoint, parse them into frames, and re-derive the particle/HUD streams
 * without any resimulation.
 */

import { GameStatusMsg, ParticleUpdateMsg, Vec3 } from "./protocol";

export interface ReplayFrame {
  tUs: number;
  input: Vec3;
  trap: Vec3;
  particle: Vec3;
  events: string[];
}

export const SESSION_HEADER =
  "frame_us,in_x,in_y,in_z,trap_x,trap_y,trap_z,p_x,p_y,p_z,event";

export function parseSessionCsv(text: string): ReplayFrame[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0 || lines[0] !== SESSION_HEADER) {
    throw new Error("unrecognized session log header");
  }
  const frames: ReplayFrame[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== 11) {
      throw new Error(`bad session row ${i + 1}`);
    }
    const numbers = cells.slice(0, 10).map(Number);
    if (numbers.some((n) => !Number.isFinite(n))) {
      throw new Error(`unparseable session row ${i + 1}`);
    }
    frames.push({
      tUs: numbers[0],
      input: [numbers[1], numbers[2], numbers[3]],
      trap: [numbers[4], numbers[5], numbers[6]],
      particle: [numbers[7], numbers[8], numbers[9]],
      events: cells[10] ? cells[10].split(";") : [],
    });
  }
  return frames;
}

export function frameToUpdate(frame: ReplayFrame, seq: number): ParticleUpdateMsg {
  return {
    type: "particle",
    seq,
    t_us: frame.tUs,
    pos: [...frame.particle],
    vel: [0, 0, 0],
    flags: 0,
  };
}

/**
 * The status stream a live HUD would have seen, reconstructed from the log:
 * cumulative score, miss streak and round state are re-derived from the
 * event column (bead speed for the shooter follows its exact bookkeeping).
 */
export function statusStream(frames: ReplayFrame[]): GameStatusMsg[] {
  let score = 0;
  let hits = 0;
  let reverts = 0;
  let missStreak = 0;
  let over = false;
  const startUs = frames.length ? frames[0].tUs : 0;
  return frames.map((frame) => {
    for (const event of frame.events) {
      if (event === "racket_hit" || event === "shot_hit") score += 1;
      if (event === "shot_hit") {
        hits += 1;
        missStreak = 0;
      }
      if (event === "shot_miss") missStreak += 1;
      if (event === "speed_revert") {
        reverts += 1;
        missStreak = 0;
      }
      if (event === "danger_zone") over = true;
    }
    return {
      type: "game" as const,
      t_us: frame.tUs,
      events: frame.events,
      score,
      miss_streak: missStreak,
      state: over ? ("over" as const) : ("running" as const),
      speed: 0.05 + 0.001 * (hits - reverts),
      elapsed_s: (frame.tUs - startUs) / 1e6,
    };
  });
}

/**
 * Playback clock: maps wall time to the index of the frame due, honoring
 * the speed multiplier.  Pure so tests can drive it without timers.
 */
export class PlaybackClock {
  private startWallMs: number;
  private startUs: number;

  constructor(frames: ReplayFrame[], readonly speed: number, nowMs: number) {
    if (!(speed > 0)) throw new Error("replay speed must be positive");
    this.startWallMs = nowMs;
    this.startUs = frames.length ? frames[0].tUs : 0;
  }

  /** Number of frames due at wall time nowMs (monotone in nowMs). */
  dueCount(frames: ReplayFrame[], nowMs: number): number {
    const elapsedUs = (nowMs - this.startWallMs) * 1e3 * this.speed;
    let count = 0;
    while (count < frames.length && frames[count].tUs - this.startUs <= elapsedUs) {
      count += 1;
    }
    return count;
  }
}

export async function fetchReplayList(baseUrl: string): Promise<string[]> {
  const response = await fetch(`${baseUrl}/replays`);
  if (!response.ok) throw new Error(`replay listing failed: ${response.status}`);
  return await response.json();
}

export async function fetchReplay(baseUrl: string, name: string): Promise<ReplayFrame[]> {
  const response = await fetch(`${baseUrl}/replays/${encodeURIComponent(name)}`);
  if (!response.ok) throw new Error(`replay fetch failed: ${response.status}`);
  return parseSessionCsv(await response.text());
}
