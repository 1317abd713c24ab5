/**
 * Game HUD state: a pure reducer over the server's per-tick status stream,
 * so live play and log replay produce identical HUD sequences from identical
 * event sequences.  Rendering and audio sit in thin layers on top.
 */

import { GameStatusMsg } from "./protocol";

export interface HudState {
  score: number;
  beadSpeed: number; // m/s
  cooldownS: number;
  missStreak: number;
  roundOver: boolean;
  survivalS: number;
  aiming: boolean;
  lastEvents: string[];
}

export function initialHud(): HudState {
  return {
    score: 0,
    beadSpeed: 0,
    cooldownS: 0,
    missStreak: 0,
    roundOver: false,
    survivalS: 0,
    aiming: false,
    lastEvents: [],
  };
}

export function applyStatus(state: HudState, status: GameStatusMsg): HudState {
  const next: HudState = {
    ...state,
    lastEvents: status.events,
    aiming: status.events.includes("aim"),
  };
  if (status.score !== undefined) next.score = status.score;
  if (status.speed !== undefined) next.beadSpeed = status.speed;
  if (status.cooldown_s !== undefined) next.cooldownS = status.cooldown_s;
  if (status.miss_streak !== undefined) next.missStreak = status.miss_streak;
  if (status.elapsed_s !== undefined && !next.roundOver) next.survivalS = status.elapsed_s;
  if (status.state === "over" && !state.roundOver) {
    next.roundOver = true;
    next.survivalS = status.elapsed_s ?? state.survivalS;
  }
  return next;
}

/** Events that should chime; mapped to distinct beep pitches elsewhere. */
export const AUDIBLE_EVENTS = new Set([
  "bounce", "racket_hit", "shot_hit", "shot_miss", "danger_zone",
]);

export function audibleEvents(state: HudState): string[] {
  return state.lastEvents.filter((e) => AUDIBLE_EVENTS.has(e) || e.startsWith("hit:"));
}

/**
 * Fold a whole status sequence; returns every intermediate state, so a
 * replayed log can be compared 1:1 against a live capture.
 */
export function runHud(statuses: GameStatusMsg[]): HudState[] {
  const out: HudState[] = [];
  let state = initialHud();
  for (const status of statuses) {
    state = applyStatus(state, status);
    out.push(state);
  }
  return out;
}
