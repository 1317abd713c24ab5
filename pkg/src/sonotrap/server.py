"""Real-time interaction loop: fixed 90 Hz ticks over an adaptive solver.

Each tick applies the newest pending trap command (latest wins), advances the
simulation by exactly one tick of simulated time, emits a particle update and
appends a frame record.  Simulated time is decoupled from the wall clock:
pacing is best effort (sleep-until-deadline with catch-up ticks), the
simulation itself is deterministic for a given command script.

C:D gain is applied server-side: inbound command positions are raw input
coordinates, mapped onto trap coordinates and clamped to the volume.
"""

from __future__ import annotations

import argparse
import http.server
import json
import socket
import threading
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import dynamics, games
from .dynamics import IntegratorConfig, ParticleState, TrapModel
from .geometry import Box, LEVITATION_VOLUME
from .protocol import (
    FLAG_ESCAPED,
    FLAG_TARGET_HIT,
    LatestWinsMailbox,
    ParticleUpdate,
    PoseMailbox,
    TrapCommand,
    encode_particle_update,
)
from .session import FrameRecord, SessionRecorder, frame_to_update, read_session

DEFAULT_UDP_PORT = 7201
DEFAULT_WS_PORT = 7202

# Deterministic spawn headings for the game beads.
_BEAD_BOUNCE_START = np.array([-0.035, 0.0, 0.0])
_BEAD_BOUNCE_HEADING = np.array([3.0, 1.2, 0.8]) / np.linalg.norm([3.0, 1.2, 0.8])
_LEVI_SHOOTER_HEADING = np.array([1.0, 0.6, -0.5]) / np.linalg.norm([1.0, 0.6, -0.5])


@dataclass(frozen=True)
class GainConfig:
    """Control-to-display mapping: input displacement / ratio = trap displacement."""

    ratio: float = 3.0
    control_origin: np.ndarray = field(default_factory=lambda: np.zeros(3))
    display_origin: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if not self.ratio > 0.0:
            raise ValueError("C:D ratio must be positive")
        object.__setattr__(self, "control_origin", np.asarray(self.control_origin, dtype=float))
        object.__setattr__(self, "display_origin", np.asarray(self.display_origin, dtype=float))


def apply_cd_gain(raw_input, gain: GainConfig,
                  volume: Box = LEVITATION_VOLUME) -> tuple[np.ndarray, bool]:
    """Map a raw input position to a trap position, clamped to the volume.

    Returns (trap_position, clamped).
    """
    raw = np.asarray(raw_input, dtype=float)
    trap = gain.display_origin + (raw - gain.control_origin) / gain.ratio
    clamped = trap.copy()
    np.clip(clamped, volume.lo, volume.hi, out=clamped)
    return clamped, bool(np.any(clamped != trap))


def inverse_cd_gain(trap_position, gain: GainConfig) -> np.ndarray:
    return gain.control_origin + (np.asarray(trap_position, dtype=float)
                                  - gain.display_origin) * gain.ratio


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    udp_port: int = DEFAULT_UDP_PORT
    ws_port: int = DEFAULT_WS_PORT
    http_port: int = 0  # 0 disables the static/replay HTTP endpoint
    tick_rate: int = 90
    mode: str = "steer"  # steer | beadbounce | levishooter
    gain: GainConfig = field(default_factory=GainConfig)
    volume: Box = LEVITATION_VOLUME
    game: games.GameConfig = field(default_factory=games.GameConfig)
    update_peers: list = field(default_factory=list)  # extra (host, port) targets
    static_dir: str | None = None
    replay_dir: str | None = None


def load_server_config(path) -> tuple[ServerConfig, TrapModel, IntegratorConfig]:
    """Server/model/integrator settings from one JSON document."""
    with open(path) as fh:
        cfg = json.load(fh)
    volume = LEVITATION_VOLUME
    if "volume" in cfg:
        volume = Box(np.asarray(cfg["volume"]["lo"], dtype=float),
                     np.asarray(cfg["volume"]["hi"], dtype=float))
    gain_cfg = cfg.get("gain", {})
    gain = GainConfig(
        ratio=gain_cfg.get("ratio", 3.0),
        control_origin=np.asarray(gain_cfg.get("control_origin", [0.0, 0.0, 0.0]), dtype=float),
        display_origin=np.asarray(gain_cfg.get("display_origin", [0.0, 0.0, 0.0]), dtype=float))
    game = games.GameConfig(**cfg.get("game", {}))
    server = ServerConfig(
        host=cfg.get("host", "127.0.0.1"),
        udp_port=cfg.get("udp_port", DEFAULT_UDP_PORT),
        ws_port=cfg.get("ws_port", DEFAULT_WS_PORT),
        http_port=cfg.get("http_port", 0),
        tick_rate=cfg.get("tick_rate", 90),
        mode=cfg.get("mode", "steer"),
        gain=gain, volume=volume, game=game,
        update_peers=[tuple(p) for p in cfg.get("update_peers", [])],
        static_dir=cfg.get("static_dir"),
        replay_dir=cfg.get("replay_dir"))
    model_cfg = cfg.get("model", {})
    model = TrapModel(
        mass=model_cfg.get("mass_kg", dynamics.PARTICLE_MASS),
        drag_rate=model_cfg.get("drag_rate", dynamics.DRAG_RATE),
        stiffness=np.asarray(model_cfg.get("stiffness_n_per_m", dynamics.STIFFNESS), dtype=float),
        drag_is_absolute=model_cfg.get("drag_is_absolute", False),
        include_gravity=model_cfg.get("include_gravity", False),
        volume=volume)
    integ_cfg = cfg.get("integrator", {})
    integrator = IntegratorConfig(
        rtol=integ_cfg.get("rtol", 1e-7),
        atol_position=integ_cfg.get("atol_position", 1e-9),
        atol_velocity=integ_cfg.get("atol_velocity", 1e-9),
        max_step=integ_cfg.get("max_step", 1e-3),
        min_step=integ_cfg.get("min_step", 1e-12))
    return server, model, integrator


@dataclass
class LoopStats:
    ticks: int = 0
    updates: int = 0
    frames: int = 0
    clamps: int = 0
    jitter_s: list = field(default_factory=list)  # wake time minus deadline

    def jitter_percentile(self, q: float) -> float:
        if not self.jitter_s:
            return 0.0
        return float(np.percentile(np.abs(self.jitter_s), q))


class SimServer:
    """Owner of the simulation state; everything flows through tick()."""

    def __init__(self, config: ServerConfig | None = None,
                 model: TrapModel | None = None,
                 integrator: IntegratorConfig | None = None,
                 initial_state: ParticleState | None = None):
        self.config = config or ServerConfig()
        self.model = model or TrapModel(volume=self.config.volume)
        self.integrator = integrator or IntegratorConfig()
        self.volume = self.config.volume
        self.tick_dt = 1.0 / self.config.tick_rate

        start_trap = self.volume.center.copy()
        self.state = initial_state or ParticleState(start_trap.copy(), np.zeros(3))
        self.trap_applied = start_trap.copy()
        self.trap_target = start_trap.copy()
        self.last_input = inverse_cd_gain(start_trap, self.config.gain)

        self.mailbox = LatestWinsMailbox()
        self.racket_mailbox = PoseMailbox()
        self.gun_mailbox = PoseMailbox()
        self.update_sinks = []  # callables(ParticleUpdate)
        self.frame_sinks = []  # callables(FrameRecord)
        self.frame_taggers = []  # callables(frame_us, particle_pos) -> list[str]
        self.event_sinks = []  # callables(dict): per-tick game/event status for UIs
        self.stats = LoopStats()
        self.tick_index = 0

        self.game_session: games.GameSession | None = None
        self.bead: games.BallisticBead | None = None
        if self.config.mode == "beadbounce":
            self.game_session = games.GameSession(kind="beadbounce")
            self.bead = games.BallisticBead(
                self.volume.center + _BEAD_BOUNCE_START, _BEAD_BOUNCE_HEADING,
                self.config.game.bead_bounce_initial_speed)
        elif self.config.mode == "levishooter":
            self.game_session = games.GameSession(kind="levishooter")
            self.bead = games.BallisticBead(
                self.volume.center.copy(), _LEVI_SHOOTER_HEADING,
                self.config.game.levi_shooter_initial_speed)
        elif self.config.mode != "steer":
            raise ValueError(f"unknown mode {self.config.mode!r}")

    # ------------------------------------------------------------ per tick

    def tick(self) -> ParticleUpdate:
        events = []
        command = self.mailbox.take()
        if command is not None:
            self.last_input = command.position
            trap, clamped = apply_cd_gain(command.position, self.config.gain, self.volume)
            if clamped:
                events.append("clamped")
                self.stats.clamps += 1
            self.trap_target = trap

        if self.config.mode == "steer":
            self._tick_dynamics()
            particle_pos = self.state.position
            particle_vel = self.state.velocity
            if self.state.escaped:
                events.append("escaped")
            input_pos = self.last_input
            trap_pos = self.trap_applied
        else:
            input_pos, events_game = self._tick_game()
            events.extend(events_game)
            particle_pos = self.bead.position
            particle_vel = self.bead.velocity
            trap_pos = self.bead.position  # the rig keeps the trap on the bead

        frame_us = (self.tick_index + 1) * 1_000_000 // self.config.tick_rate
        for tagger in self.frame_taggers:
            events.extend(tagger(frame_us, particle_pos))

        flags = 0
        if "escaped" in events:
            flags |= FLAG_ESCAPED
        if any(e == "shot_hit" or e.startswith("hit:") for e in events):
            flags |= FLAG_TARGET_HIT
        update = ParticleUpdate(self.tick_index, frame_us, particle_pos.copy(),
                                particle_vel.copy(), flags)
        frame = FrameRecord(frame_us, np.asarray(input_pos, dtype=float).copy(),
                            np.asarray(trap_pos, dtype=float).copy(),
                            particle_pos.copy(), ";".join(events))
        self.tick_index += 1
        self.stats.ticks += 1
        for sink in self.update_sinks:
            sink(update)
        self.stats.updates += 1
        for sink in self.frame_sinks:
            sink(frame)
        self.stats.frames += 1
        if self.event_sinks and (self.game_session is not None or events):
            status = {"type": "game", "t_us": frame_us, "events": events}
            if self.game_session is not None:
                session = self.game_session
                status.update({
                    "score": session.score,
                    "speed": float(self.bead.speed),
                    "cooldown_s": session.cooldown_remaining,
                    "miss_streak": session.miss_streak,
                    "state": session.state,
                    "elapsed_s": session.elapsed,
                })
            for sink in self.event_sinks:
                sink(status)
        return update

    def _tick_dynamics(self):
        try:
            self.state = dynamics.step_with_moving_trap(
                self.state, self.trap_applied, self.trap_target,
                self.model, self.integrator, self.tick_dt)
        except dynamics.IntegrationError:
            # mark escaped and keep the loop alive; the bead is lost, not the session
            self.state = ParticleState(self.state.position, np.zeros(3),
                                       self.state.time + self.tick_dt, escaped=True)
        self.trap_applied = self.trap_target

    def _tick_game(self) -> tuple[np.ndarray, list[str]]:
        if self.game_session.state == "over":
            self.game_session = replace(self.game_session,
                                        elapsed=self.game_session.elapsed + self.tick_dt)
            pose = self.racket_mailbox.take() if self.config.mode == "beadbounce" \
                else self.gun_mailbox.take()
            input_pos = self._pose_position(pose)
            return input_pos, []
        if self.config.mode == "beadbounce":
            racket = self.racket_mailbox.take()
            self.bead, events = games.bead_bounce_step(
                self.bead, racket, self.tick_dt, self.volume, self.config.game)
            score = self.game_session.score + events.count("racket_hit")
            state = "over" if "danger_zone" in events else "running"
            self.game_session = replace(self.game_session, score=score, state=state,
                                        elapsed=self.game_session.elapsed + self.tick_dt)
            return self._pose_position(racket), events
        gun = self.gun_mailbox.take()
        self.bead, self.game_session, events = games.levi_shooter_step(
            self.bead, gun, self.tick_dt, self.game_session, self.volume, self.config.game)
        if gun is not None and games.aim_feedback(self.bead, gun, self.config.game):
            events.append("aim")
        return self._pose_position(gun), events

    def _pose_position(self, pose) -> np.ndarray:
        if isinstance(pose, games.RacketPose):
            return pose.head_center
        if isinstance(pose, games.GunPose):
            return pose.origin
        return np.zeros(3)

    # ------------------------------------------------------------ drivers

    def run_ticks(self, n_ticks: int, commands: dict | None = None,
                  poses: dict | None = None) -> list[ParticleUpdate]:
        """Deterministic scripted run: no sockets, no wall clock.

        commands/poses map tick index -> list of inputs posted before that tick.
        """
        updates = []
        for i in range(self.tick_index, self.tick_index + n_ticks):
            for command in (commands or {}).get(i, []):
                self.mailbox.post(command)
            for pose in (poses or {}).get(i, []):
                if isinstance(pose, games.RacketPose):
                    self.racket_mailbox.post(pose)
                else:
                    self.gun_mailbox.post(pose)
            updates.append(self.tick())
        return updates

    def run(self, duration: float | None = None,
            stop: threading.Event | None = None) -> LoopStats:
        """Paced loop at tick_rate; sleep until each deadline, never skip ticks."""
        import sys
        spin_margin = 1.5e-3  # sleep coarse, busy-spin the last stretch
        old_switch = sys.getswitchinterval()
        sys.setswitchinterval(1e-3)  # bound GIL handoff latency while paced
        try:
            start = time.perf_counter()
            deadline = start + self.tick_dt
            end_tick = None if duration is None else self.tick_index + round(duration * self.config.tick_rate)
            while True:
                if stop is not None and stop.is_set():
                    break
                if end_tick is not None and self.tick_index >= end_tick:
                    break
                now = time.perf_counter()
                wait = deadline - now
                if wait > spin_margin:
                    time.sleep(wait - spin_margin)
                now = time.perf_counter()
                while now < deadline:
                    now = time.perf_counter()
                self.stats.jitter_s.append(now - deadline)
                self.tick()
                deadline += self.tick_dt
        finally:
            sys.setswitchinterval(old_switch)
        return self.stats

    def session_summary(self) -> dict:
        summary = {
            "mode": self.config.mode,
            "ticks": self.stats.ticks,
            "elapsed_s": self.tick_index * self.tick_dt,
            "commands_applied": self.mailbox.stats.applied,
            "commands_dropped": self.mailbox.stats.dropped_stale,
            "malformed": self.mailbox.stats.dropped_malformed,
        }
        if self.game_session is not None:
            summary.update({
                "score": self.game_session.score,
                "game_state": self.game_session.state,
                "game_elapsed_s": self.game_session.elapsed,
                "hits": self.game_session.hits,
                "reverts": self.game_session.reverts,
            })
        return summary


class UdpEndpoint:
    """Binary datagram ingress/egress; updates go to peers and the last sender."""

    def __init__(self, server: SimServer, host: str | None = None, port: int | None = None):
        self.server = server
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self.sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self.sock.bind((host or server.config.host, port if port is not None else server.config.udp_port))
        self.sock.settimeout(0.2)
        self.address = self.sock.getsockname()
        self.last_sender = None
        self.peers = list(server.config.update_peers)
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._recv_loop, daemon=True)
        self._thread.start()
        server.update_sinks.append(self.send_update)

    def _recv_loop(self):
        while not self._stop.is_set():
            try:
                data, sender = self.sock.recvfrom(512)
            except socket.timeout:
                continue
            except OSError:
                break
            if self.server.mailbox.ingest_datagram(data) is not None:
                self.last_sender = sender

    def send_update(self, update: ParticleUpdate):
        data = encode_particle_update(update)
        targets = list(self.peers)
        if self.last_sender is not None:
            targets.append(self.last_sender)
        for target in targets:
            try:
                self.sock.sendto(data, target)
            except OSError:
                pass  # a dead peer must not stop the loop

    def close(self):
        self._stop.set()
        self._thread.join(timeout=1.0)
        self.sock.close()


class _StaticHandler(http.server.SimpleHTTPRequestHandler):
    """Serves the UI bundle plus the recorded-session listing/downloads."""

    replay_dir: Path | None = None

    def log_message(self, *args):
        pass

    def do_GET(self):
        if self.path == "/replays" and self.replay_dir is not None:
            listing = sorted(p.name for p in self.replay_dir.glob("*.csv"))
            body = json.dumps(listing).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)
            return
        if self.path.startswith("/replays/") and self.replay_dir is not None:
            name = Path(self.path[len("/replays/"):]).name
            target = self.replay_dir / name
            if target.is_file():
                body = target.read_bytes()
                self.send_response(200)
                self.send_header("Content-Type", "text/csv")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)
                return
            self.send_error(404)
            return
        super().do_GET()


def start_http_endpoint(config: ServerConfig):
    """Static/replay HTTP server on config.http_port; returns (server, thread)."""
    handler = type("Handler", (_StaticHandler,), {
        "replay_dir": Path(config.replay_dir) if config.replay_dir else None})
    directory = config.static_dir or "."
    httpd = http.server.ThreadingHTTPServer(
        (config.host, config.http_port),
        lambda *a, **kw: handler(*a, directory=directory, **kw))
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    return httpd, thread


def replay_to_sinks(path, sinks, speed: float = 1.0, pace: bool = True,
                    stop: threading.Event | None = None) -> int:
    """Re-emit a recorded session as particle updates; returns frames sent."""
    from .session import replay_session
    count = 0
    for frame in replay_session(path, speed=speed, pace=pace):
        if stop is not None and stop.is_set():
            break
        update = frame_to_update(frame, count)
        for sink in sinks:
            sink(update)
        count += 1
    return count


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sonotrap-server",
        description="Run the levitation interaction loop (UDP + WebSocket).")
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--record", metavar="PATH", help="write the session CSV here")
    parser.add_argument("--replay", metavar="PATH", help="re-emit a recorded session instead of simulating")
    parser.add_argument("--speed", type=float, default=1.0, help="replay speed multiplier")
    parser.add_argument("--headless", action="store_true",
                        help="no network endpoints; run the loop only")
    parser.add_argument("--duration", type=float, default=None,
                        help="stop after this many seconds (default: run until interrupted)")
    parser.add_argument("--mode", choices=["steer", "beadbounce", "levishooter"],
                        help="override the config's session mode")
    args = parser.parse_args(argv)

    if args.config:
        config, model, integrator = load_server_config(args.config)
    else:
        config, model, integrator = ServerConfig(), None, None
    if args.mode:
        config.mode = args.mode

    if args.replay:
        sinks = []
        endpoints = []
        if not args.headless:
            shell = SimServer(config, model, integrator)
            endpoints.append(UdpEndpoint(shell))
            from .bridge import WebSocketBridge
            endpoints.append(WebSocketBridge(shell))
            sinks = shell.update_sinks
        sent = replay_to_sinks(args.replay, sinks, speed=args.speed)
        print(f"replayed {sent} frames from {args.replay}")
        for endpoint in endpoints:
            endpoint.close()
        return 0

    server = SimServer(config, model, integrator)
    recorder = None
    if args.record:
        recorder = SessionRecorder(args.record)
        server.frame_sinks.append(recorder.write)
    endpoints = []
    if not args.headless:
        endpoints.append(UdpEndpoint(server))
        from .bridge import WebSocketBridge
        endpoints.append(WebSocketBridge(server))
        if config.http_port:
            httpd, _ = start_http_endpoint(config)
            endpoints.append(httpd)
    try:
        server.run(duration=args.duration)
    except KeyboardInterrupt:
        pass
    finally:
        for endpoint in endpoints:
            try:
                endpoint.close()
            except AttributeError:
                endpoint.shutdown()
        if recorder is not None:
            recorder.close()
            summary_path = Path(args.record).with_suffix(".summary.json")
            summary_path.write_text(json.dumps(server.session_summary(), indent=2))
    stats = server.stats
    print(f"{stats.ticks} ticks, p99 jitter {stats.jitter_percentile(99) * 1e3:.2f} ms, "
          f"{server.mailbox.stats.applied} commands applied")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
