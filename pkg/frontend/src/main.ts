/**
 * Entry point: wires the scene, connection, steering input, games and HUD
 * by URL query, e.g. ?mode=steer&endpoint=ws://localhost:7202 or
 * ?mode=replay&file=session.csv
 */

import { Connection } from "./connection";
import { applyStatus, audibleEvents, HudState, initialHud } from "./hud";
import { SteeringInput } from "./input";
import { InterpolationBuffer, TICK_US } from "./interpolation";
import { gunPoseJson, racketPoseJson, GameStatusMsg, Vec3, VOLUME } from "./protocol";
import { fetchReplay, frameToUpdate, PlaybackClock, ReplayFrame, statusStream } from "./replay";
import { LevitationScene } from "./scene";

type Mode = "steer" | "beadbounce" | "levishooter" | "replay";

const params = new URLSearchParams(window.location.search);
const mode = (params.get("mode") ?? "steer") as Mode;
const endpoint = params.get("endpoint")
  ?? `ws://${window.location.hostname || "localhost"}:7202`;
const replayFile = params.get("file");
const httpBase = window.location.origin.startsWith("http")
  ? window.location.origin : "http://localhost:7203";

const canvas = document.getElementById("view") as HTMLCanvasElement;
const statusEl = document.getElementById("status")!;
const rateEl = document.getElementById("rate")!;
const hudEl = document.getElementById("hud")!;

const scene = new LevitationScene(canvas, {
  targets: mode === "steer" ? [] : undefined,
  dangerPlane: mode === "beadbounce",
});

function fitCanvas() {
  scene.resize(window.innerWidth, window.innerHeight);
}
window.addEventListener("resize", fitCanvas);
fitCanvas();

// ---------------------------------------------------------------- audio

const audio = new (window.AudioContext ?? (window as any).webkitAudioContext)();
const beepPitch: Record<string, number> = {
  "bounce": 440, "racket_hit": 660, "shot_hit": 880, "shot_miss": 220,
  "danger_zone": 150, "hit:A": 760, "hit:B": 820,
};

function beep(event: string) {
  const pitch = beepPitch[event] ?? (event.startsWith("hit:") ? 780 : 0);
  if (!pitch) return;
  const osc = audio.createOscillator();
  const gain = audio.createGain();
  osc.frequency.value = pitch;
  gain.gain.setValueAtTime(0.12, audio.currentTime);
  gain.gain.exponentialRampToValueAtTime(1e-4, audio.currentTime + 0.12);
  osc.connect(gain).connect(audio.destination);
  osc.start();
  osc.stop(audio.currentTime + 0.13);
}

// ---------------------------------------------------------------- HUD

let hud: HudState = initialHud();

function renderHud() {
  if (mode === "steer") {
    hudEl.textContent = "";
    return;
  }
  const lines = [
    `score ${hud.score}`,
    `bead ${(hud.beadSpeed * 1000).toFixed(0)} mm/s`,
  ];
  if (mode === "levishooter" || hud.cooldownS > 0) {
    lines.push(`cooldown ${hud.cooldownS.toFixed(2)} s`);
    lines.push(`miss streak ${hud.missStreak}`);
  }
  if (hud.aiming) lines.push("ON TARGET");
  if (hud.roundOver) lines.push(`ROUND OVER - survived ${hud.survivalS.toFixed(1)} s`);
  hudEl.textContent = lines.join("  |  ");
  const bar = document.getElementById("cooldown-bar")!;
  bar.style.width = `${Math.min(100, (hud.cooldownS / 2) * 100)}%`;
}

function takeStatus(status: GameStatusMsg) {
  hud = applyStatus(hud, status);
  for (const event of audibleEvents(hud)) beep(event);
  renderHud();
}

// ---------------------------------------------------------------- replay

const buffer = new InterpolationBuffer();
let latestTrap: Vec3 = [0, 0, 0];
let renderOffsetUs: number | null = null;

if (mode === "replay") {
  statusEl.textContent = replayFile ? `replay: ${replayFile}` : "replay: pick a file";
  if (replayFile) {
    fetchReplay(httpBase, replayFile).then((frames: ReplayFrame[]) => {
      const statuses = statusStream(frames);
      const clock = new PlaybackClock(frames, Number(params.get("speed") ?? 1), performance.now());
      let emitted = 0;
      const pump = () => {
        const due = clock.dueCount(frames, performance.now());
        while (emitted < due) {
          const frame = frames[emitted];
          buffer.push(frameToUpdate(frame, emitted));
          latestTrap = frame.trap;
          takeStatus(statuses[emitted]);
          emitted += 1;
        }
        if (emitted < frames.length) requestAnimationFrame(pump);
        else statusEl.textContent = `replay: done (${frames.length} frames)`;
      };
      pump();
    }).catch((err) => { statusEl.textContent = `replay failed: ${err}`; });
  }
} else {
  // ---------------------------------------------------------------- live
  const connection = new Connection(endpoint);
  connection.onStateChange = (s) => { statusEl.textContent = s; };
  connection.onUpdate = (update) => {
    buffer.push(update);
    if (renderOffsetUs === null) {
      renderOffsetUs = update.t_us - performance.now() * 1e3;
    }
  };
  connection.onStatusMsg = takeStatus;
  setInterval(() => {
    rateEl.textContent = connection.status === "live"
      ? `${connection.updateRateHz} Hz` : "";
  }, 500);

  const steering = new SteeringInput();
  let pointerNdc: [number, number] = [0, 0];
  let triggerHeld = false;

  canvas.addEventListener("pointermove", (ev) => {
    pointerNdc = [
      (ev.clientX / window.innerWidth) * 2 - 1,
      -(ev.clientY / window.innerHeight) * 2 + 1,
    ];
  });
  canvas.addEventListener("wheel", (ev) => {
    steering.scroll(Math.sign(ev.deltaY));
    ev.preventDefault();
  }, { passive: false });
  canvas.addEventListener("pointerdown", () => { triggerHeld = true; audio.resume(); });
  canvas.addEventListener("pointerup", () => { triggerHeld = false; });

  const sendLoop = () => {
    const nowMs = performance.now();
    const serverTimeUs = renderOffsetUs === null ? 0 : nowMs * 1e3 + renderOffsetUs;
    if (mode === "steer") {
      // pointer plane at the scroll depth, in volume coordinates
      const planePoint = scene.pointerOnPlane(pointerNdc[0], pointerNdc[1],
                                              steering.desiredTrap[2]);
      steering.pointerMove(
        planePoint[0] / ((VOLUME.hi[0] - VOLUME.lo[0]) / 2),
        planePoint[1] / ((VOLUME.hi[1] - VOLUME.lo[1]) / 2));
      latestTrap = steering.desiredTrap;
      const command = steering.maybeCommand(nowMs, serverTimeUs);
      if (command) connection.send(command);
    } else if (mode === "beadbounce") {
      const depth = 0.0;
      const point = scene.pointerOnPlane(pointerNdc[0], pointerNdc[1], depth);
      const normal: Vec3 = [1, 0, 0];
      scene.setRacket(point, normal);
      connection.send(racketPoseJson(point, normal, [0, 0, 0]));
    } else if (mode === "levishooter") {
      const origin: Vec3 = [0.1, 0.02, 0.12];
      const aim = scene.pointerOnPlane(pointerNdc[0], pointerNdc[1], 0.0);
      const d: Vec3 = [aim[0] - origin[0], aim[1] - origin[1], aim[2] - origin[2]];
      const length = Math.hypot(...d);
      const dir: Vec3 = [d[0] / length, d[1] / length, d[2] / length];
      scene.setGunRay(origin, dir, hud.aiming);
      connection.send(gunPoseJson(origin, dir, triggerHeld));
    }
    setTimeout(sendLoop, 1000 / 90);
  };
  sendLoop();
}

// ---------------------------------------------------------------- render

function renderLoop() {
  const nowUs = renderOffsetUs === null
    ? (buffer.latest?.t_us ?? 0)
    : performance.now() * 1e3 + renderOffsetUs - TICK_US; // render one tick behind
  const pos = buffer.sampleAt(nowUs);
  if (pos) scene.setParticle(pos, buffer.isStale(nowUs));
  scene.setTrap(latestTrap);
  scene.render();
  requestAnimationFrame(renderLoop);
}
renderLoop();
