"""The two minigames, as pure deterministic state machines.

The bead moves kinematically: straight 3D lines with specular wall bounces
(speed preserved exactly).  BeadBounce ends when the bead crosses into the
right half of the volume; the racket is modeled as a solid disc and adds a
share of its own velocity on contact.  LeviShooter fires rays from a gun
pose against the bead sphere with an aim-assist margin, escalating the bead
speed per hit and reverting it after ten straight misses.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Box, LEVITATION_VOLUME


@dataclass(frozen=True)
class GameConfig:
    bead_bounce_initial_speed: float = 0.09  # m/s
    levi_shooter_initial_speed: float = 0.05  # m/s
    speed_increment: float = 0.001  # m/s per hit
    cooldown_s: float = 2.0
    momentum_transfer: float = 0.3  # racket velocity share picked up on hit
    racket_radius: float = 0.015  # m (3 cm head)
    bead_radius: float = 0.001  # m
    aim_margin: float = 0.004  # m added to the ray-sphere target
    miss_revert_count: int = 10
    revert_to_initial: bool = False  # True: ten misses reset speed fully
    danger_plane_x: float = 0.0  # right half of the volume is the danger zone


@dataclass(frozen=True)
class BallisticBead:
    position: np.ndarray  # m
    direction: np.ndarray  # unit
    speed: float  # m/s

    def __post_init__(self):
        position = np.asarray(self.position, dtype=float)
        direction = np.asarray(self.direction, dtype=float)
        if abs(np.linalg.norm(direction) - 1.0) > 1e-9:
            raise ValueError("bead direction must be a unit vector")
        if self.speed < 0.0:
            raise ValueError("bead speed must be non-negative")
        object.__setattr__(self, "position", position)
        object.__setattr__(self, "direction", direction)

    @property
    def velocity(self) -> np.ndarray:
        return self.speed * self.direction


@dataclass(frozen=True)
class RacketPose:
    head_center: np.ndarray  # m
    head_normal: np.ndarray  # unit; zero vector = degenerate, no collisions
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))  # m/s
    head_radius: float = 0.015  # m

    def __post_init__(self):
        if not self.head_radius > 0.0:
            raise ValueError("racket head radius must be positive")
        object.__setattr__(self, "head_center", np.asarray(self.head_center, dtype=float))
        object.__setattr__(self, "head_normal", np.asarray(self.head_normal, dtype=float))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float))


@dataclass(frozen=True)
class GunPose:
    origin: np.ndarray  # m
    direction: np.ndarray  # unit
    trigger: bool = False

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=float)
        direction = np.asarray(self.direction, dtype=float)
        if abs(np.linalg.norm(direction) - 1.0) > 1e-9:
            raise ValueError("gun ray direction must be a unit vector")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "direction", direction)


@dataclass(frozen=True)
class GameSession:
    kind: str  # "beadbounce" | "levishooter"
    score: int = 0
    miss_streak: int = 0
    cooldown_remaining: float = 0.0  # s
    elapsed: float = 0.0  # s
    state: str = "running"  # "running" | "over"
    hits: int = 0
    reverts: int = 0
    prev_trigger: bool = False

    def __post_init__(self):
        if self.score < 0 or self.miss_streak < 0:
            raise ValueError("score and miss streak are counts")
        if not 0.0 <= self.cooldown_remaining <= 2.0:
            raise ValueError("cooldown must lie in [0, 2] s")


def advance_with_walls(bead: BallisticBead, dt: float,
                       bounds: Box = LEVITATION_VOLUME) -> tuple[BallisticBead, list[str]]:
    """Straight-line advance with specular, speed-preserving wall bounces."""
    position = bead.position + bead.velocity * dt
    direction = bead.direction.copy()
    events = []
    for axis in range(3):
        lo, hi = bounds.lo[axis], bounds.hi[axis]
        while position[axis] < lo or position[axis] > hi:
            if position[axis] < lo:
                position[axis] = 2.0 * lo - position[axis]
            else:
                position[axis] = 2.0 * hi - position[axis]
            direction[axis] = -direction[axis]
            events.append("bounce")
    return BallisticBead(position, direction, bead.speed), events


def _racket_crossing(p0, p1, racket: RacketPose):
    """Path parameter s in [0, 1] where the segment crosses the head disc."""
    normal = racket.head_normal
    norm = np.linalg.norm(normal)
    if norm < 1e-12:
        return None  # degenerate pose: no collision this tick
    normal = normal / norm
    travel = np.dot(p1 - p0, normal)
    if abs(travel) < 1e-15:
        return None  # moving in the disc plane
    s = np.dot(racket.head_center - p0, normal) / travel
    if not 0.0 <= s <= 1.0:
        return None
    crossing = p0 + s * (p1 - p0)
    in_plane = crossing - racket.head_center
    in_plane = in_plane - np.dot(in_plane, normal) * normal
    if np.linalg.norm(in_plane) > racket.head_radius:
        return None
    return s, crossing, normal


def bead_bounce_step(bead: BallisticBead, racket: RacketPose | None, dt: float,
                     bounds: Box = LEVITATION_VOLUME,
                     config: GameConfig = GameConfig()) -> tuple[BallisticBead, list[str]]:
    """One BeadBounce tick: advance, racket contact, walls, danger zone."""
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    events = []
    p0 = bead.position
    p1 = p0 + bead.velocity * dt

    hit = _racket_crossing(p0, p1, racket) if racket is not None else None
    if hit is not None:
        s, crossing, normal = hit
        reflected = bead.direction - 2.0 * np.dot(bead.direction, normal) * normal
        outgoing = bead.speed * reflected + config.momentum_transfer * racket.velocity
        speed = float(np.linalg.norm(outgoing))
        direction = outgoing / speed if speed > 0.0 else reflected
        events.append("racket_hit")
        remaining = (1.0 - s) * dt
        bead = BallisticBead(crossing, direction, speed)
        bead, wall_events = advance_with_walls(bead, remaining, bounds)
    else:
        bead, wall_events = advance_with_walls(bead, dt, bounds)
    events.extend(wall_events)

    if bead.position[0] >= config.danger_plane_x:
        events.append("danger_zone")
    return bead, events


def ray_hits_bead(bead: BallisticBead, gun: GunPose,
                  config: GameConfig = GameConfig()) -> bool:
    """Closed-boundary ray-sphere test with the aim-assist margin."""
    target_radius = config.bead_radius + config.aim_margin
    to_center = bead.position - gun.origin
    along = np.dot(to_center, gun.direction)
    if along < 0.0:
        return False  # bead is behind the muzzle
    closest = to_center - along * gun.direction
    return float(np.linalg.norm(closest)) <= target_radius


def aim_feedback(bead: BallisticBead, gun: GunPose,
                 config: GameConfig = GameConfig()) -> bool:
    """True while the laser would hit: the beam visibly reflects off the bead."""
    return ray_hits_bead(bead, gun, config)


def levi_shooter_speed(session: GameSession, config: GameConfig = GameConfig()) -> float:
    """Current bead speed: initial + increment * (hits - reverts), exactly."""
    return config.levi_shooter_initial_speed + config.speed_increment * (
        session.hits - session.reverts)


def levi_shooter_step(bead: BallisticBead, gun: GunPose | None, dt: float,
                      session: GameSession, bounds: Box = LEVITATION_VOLUME,
                      config: GameConfig = GameConfig()
                      ) -> tuple[BallisticBead, GameSession, list[str]]:
    """One LeviShooter tick: advance, fire on trigger edge, score/cooldown."""
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    bead, events = advance_with_walls(bead, dt, bounds)
    cooldown = max(0.0, session.cooldown_remaining - dt)
    score = session.score
    miss_streak = session.miss_streak
    hits = session.hits
    reverts = session.reverts

    trigger = gun is not None and gun.trigger
    fired = trigger and not session.prev_trigger
    if fired:
        if cooldown > 0.0:
            events.append("cooldown")
        elif ray_hits_bead(bead, gun, config):
            score += 1
            hits += 1
            miss_streak = 0
            cooldown = config.cooldown_s
            events.append("shot_hit")
        else:
            miss_streak += 1
            events.append("shot_miss")
            if miss_streak >= config.miss_revert_count:
                if config.revert_to_initial:
                    reverts = hits
                elif reverts < hits:
                    reverts += 1  # drop one increment, never below initial
                miss_streak = 0
                events.append("speed_revert")

    new_session = replace(session, score=score, miss_streak=miss_streak,
                          cooldown_remaining=cooldown, elapsed=session.elapsed + dt,
                          hits=hits, reverts=reverts, prev_trigger=trigger)
    speed = levi_shooter_speed(new_session, config)
    if speed != bead.speed:
        bead = BallisticBead(bead.position, bead.direction, speed)
    return bead, new_session, events
