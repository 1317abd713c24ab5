"""BeadBounce and LeviShooter state machines."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sonotrap.games import (
    BallisticBead,
    GameConfig,
    GameSession,
    GunPose,
    RacketPose,
    advance_with_walls,
    aim_feedback,
    bead_bounce_step,
    levi_shooter_speed,
    levi_shooter_step,
    ray_hits_bead,
)
from sonotrap.geometry import Box, LEVITATION_VOLUME

X_HAT = np.array([1.0, 0.0, 0.0])
CONFIG = GameConfig()


def make_gun(bead: BallisticBead, offset=0.08, trigger=True, miss_by=0.0) -> GunPose:
    """Gun aimed straight at the bead from +x, optionally offset sideways."""
    origin = bead.position + np.array([offset, miss_by, 0.0])
    direction = bead.position + np.array([0.0, miss_by if False else 0.0, 0.0]) - origin
    direction = (bead.position - origin) if miss_by == 0.0 else np.array([-1.0, 0.0, 0.0])
    direction = direction / np.linalg.norm(direction)
    return GunPose(origin, direction, trigger)


# ---------------------------------------------------------------- domain types

def test_bead_requires_unit_direction():
    with pytest.raises(ValueError):
        BallisticBead(np.zeros(3), np.array([1.0, 1.0, 0.0]), 0.09)


def test_gun_requires_unit_direction():
    with pytest.raises(ValueError):
        GunPose(np.zeros(3), np.array([0.0, 0.5, 0.0]))


def test_session_cooldown_range():
    with pytest.raises(ValueError):
        GameSession(kind="levishooter", cooldown_remaining=2.5)


# ---------------------------------------------------------------- wall bounces

def test_head_on_wall_reflection_preserves_speed_exactly():
    start = np.array([LEVITATION_VOLUME.hi[0] - 1e-4, 0.0, 0.0])
    bead = BallisticBead(start, X_HAT, 0.09)
    bead, events = advance_with_walls(bead, 0.01, LEVITATION_VOLUME)
    assert events == ["bounce"]
    assert np.array_equal(bead.direction, -X_HAT)
    assert bead.speed == 0.09


@given(seed=st.integers(0, 10_000), steps=st.integers(1, 60))
def test_bead_stays_inside_and_speed_invariant(seed, steps):
    rng = np.random.default_rng(seed)
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    bead = BallisticBead(LEVITATION_VOLUME.center, direction, 0.3)
    for _ in range(steps):
        bead, _ = advance_with_walls(bead, 1.0 / 90.0, LEVITATION_VOLUME)
        assert LEVITATION_VOLUME.contains(bead.position)
        assert bead.speed == 0.3
        assert np.all(np.abs(bead.direction) == np.abs(direction))  # sign flips only


def test_corner_bounce_emits_multiple_events():
    corner = LEVITATION_VOLUME.hi - 1e-5
    direction = np.ones(3) / np.sqrt(3.0)
    bead = BallisticBead(corner, direction, 0.2)
    bead, events = advance_with_walls(bead, 0.01, LEVITATION_VOLUME)
    assert events.count("bounce") == 3
    assert LEVITATION_VOLUME.contains(bead.position)


# ---------------------------------------------------------------- bead bounce

def test_stationary_racket_hit_preserves_speed():
    bead = BallisticBead(np.array([-0.02, 0.0, 0.0]), X_HAT, 0.09)
    racket = RacketPose(head_center=np.array([-0.019, 0.0, 0.0]),
                        head_normal=-X_HAT, velocity=np.zeros(3))
    bead, events = bead_bounce_step(bead, racket, 1.0 / 90.0)
    assert "racket_hit" in events
    assert np.array_equal(bead.direction, -X_HAT)
    assert bead.speed == pytest.approx(0.09, rel=1e-12)


def test_racket_momentum_transfer_head_on():
    # kappa=0.3, racket at 0.5 m/s against the bead: 0.09 + 0.15 = 0.24 m/s
    bead = BallisticBead(np.array([-0.02, 0.0, 0.0]), X_HAT, 0.09)
    racket = RacketPose(head_center=np.array([-0.019, 0.0, 0.0]),
                        head_normal=-X_HAT, velocity=np.array([-0.5, 0.0, 0.0]))
    bead, events = bead_bounce_step(bead, racket, 1.0 / 90.0)
    assert "racket_hit" in events
    assert bead.speed == 0.09 + 0.3 * 0.5
    assert np.array_equal(bead.direction, -X_HAT)


def test_swept_racket_test_catches_tunneling():
    # one tick carries the bead 5 mm; the disc plane sits mid-path
    bead = BallisticBead(np.array([-0.02, 0.0, 0.0]), X_HAT, 0.45)
    racket = RacketPose(head_center=np.array([-0.0175, 0.0, 0.0]), head_normal=-X_HAT)
    bead, events = bead_bounce_step(bead, racket, 1.0 / 90.0)
    assert "racket_hit" in events
    assert bead.direction[0] == -1.0


def test_bead_misses_racket_outside_disc_radius():
    bead = BallisticBead(np.array([-0.02, 0.02, 0.0]), X_HAT, 0.09)
    racket = RacketPose(head_center=np.array([-0.019, 0.0, 0.0]), head_normal=-X_HAT)
    _, events = bead_bounce_step(bead, racket, 1.0 / 90.0)
    assert "racket_hit" not in events


def test_degenerate_racket_pose_ignored():
    bead = BallisticBead(np.array([-0.02, 0.0, 0.0]), X_HAT, 0.09)
    racket = RacketPose(head_center=np.array([-0.019, 0.0, 0.0]),
                        head_normal=np.zeros(3))
    _, events = bead_bounce_step(bead, racket, 1.0 / 90.0)
    assert "racket_hit" not in events


def test_danger_zone_crossing_reported():
    bead = BallisticBead(np.array([-1e-4, 0.0, 0.0]), X_HAT, 0.09)
    _, events = bead_bounce_step(bead, None, 1.0 / 90.0)
    assert "danger_zone" in events


def test_left_half_motion_safe():
    bead = BallisticBead(np.array([-0.05, 0.0, 0.0]), -X_HAT, 0.09)
    _, events = bead_bounce_step(bead, None, 1.0 / 90.0)
    assert "danger_zone" not in events


# ---------------------------------------------------------------- levi shooter

def test_fresh_session_perfect_shot():
    bead = BallisticBead(LEVITATION_VOLUME.center, X_HAT, CONFIG.levi_shooter_initial_speed)
    session = GameSession(kind="levishooter")
    gun = make_gun(bead)
    bead, session, events = levi_shooter_step(bead, gun, 1.0 / 90.0, session)
    assert "shot_hit" in events
    assert session.score == 1
    assert bead.speed == 0.05 + 0.001
    assert session.cooldown_remaining == 2.0
    assert session.miss_streak == 0


def test_ray_through_center_hits_regardless_of_speed():
    for speed in (0.0, 0.05, 0.4):
        bead = BallisticBead(LEVITATION_VOLUME.center, X_HAT, speed)
        assert ray_hits_bead(bead, make_gun(bead))


def test_miss_increments_streak():
    bead = BallisticBead(LEVITATION_VOLUME.center, X_HAT, 0.05)
    session = GameSession(kind="levishooter")
    gun = GunPose(bead.position + np.array([0.08, 0.1, 0.0]), -X_HAT, trigger=True)
    _, session, events = levi_shooter_step(bead, gun, 1.0 / 90.0, session)
    assert "shot_miss" in events
    assert session.miss_streak == 1
    assert session.score == 0


def shoot(bead, session, hit: bool, dt=1.0 / 64.0):
    """One trigger pulse (press + release) aimed to hit or miss."""
    if hit:
        gun = make_gun(bead)
    else:
        gun = GunPose(bead.position + np.array([0.08, 0.1, 0.0]),
                      np.array([-1.0, 0.0, 0.0]), trigger=True)
    bead, session, events = levi_shooter_step(bead, gun, dt, session)
    released = GunPose(gun.origin, gun.direction, trigger=False)
    bead, session, more = levi_shooter_step(bead, released, dt, session)
    return bead, session, events + more


def test_ten_misses_revert_one_increment():
    bead = BallisticBead(LEVITATION_VOLUME.center, X_HAT, 0.05)
    session = GameSession(kind="levishooter")
    for _ in range(3):
        # wait out the cooldown between hits
        for _ in range(130):
            bead, session, _ = levi_shooter_step(bead, None, 1.0 / 64.0, session)
        bead, session, events = shoot(bead, session, hit=True)
    assert session.hits == 3
    assert bead.speed == 0.05 + 0.001 * 3  # 0.053
    for _ in range(130):  # sit out the final hit's cooldown
        bead, session, _ = levi_shooter_step(bead, None, 1.0 / 64.0, session)
    for i in range(10):
        bead, session, events = shoot(bead, session, hit=False)
    assert "speed_revert" in events
    assert session.reverts == 1
    assert session.miss_streak == 0
    assert bead.speed == 0.05 + 0.001 * 2  # back to 0.052


def test_revert_never_undershoots_initial_speed():
    bead = BallisticBead(LEVITATION_VOLUME.center, X_HAT, 0.05)
    session = GameSession(kind="levishooter")
    for _ in range(10):
        bead, session, _ = shoot(bead, session, hit=False)
    assert session.reverts == 0
    assert bead.speed == 0.05


def test_full_reset_mode():
    config = GameConfig(revert_to_initial=True)
    bead = BallisticBead(LEVITATION_VOLUME.center, X_HAT, 0.05)
    session = GameSession(kind="levishooter")
    for _ in range(2):
        for _ in range(130):
            bead, session, _ = levi_shooter_step(bead, None, 1.0 / 64.0, session, config=config)
        bead, session, _ = shoot(bead, session, hit=True)
    assert bead.speed == 0.05 + 0.001 * 2
    for _ in range(130):  # sit out the final hit's cooldown
        bead, session, _ = levi_shooter_step(bead, None, 1.0 / 64.0, session, config=config)
    for _ in range(10):
        gun_miss = GunPose(bead.position + np.array([0.08, 0.1, 0.0]),
                           np.array([-1.0, 0.0, 0.0]), trigger=True)
        bead, session, _ = levi_shooter_step(bead, gun_miss, 1.0 / 64.0, session, config=config)
        released = GunPose(gun_miss.origin, gun_miss.direction, trigger=False)
        bead, session, _ = levi_shooter_step(bead, released, 1.0 / 64.0, session, config=config)
    assert session.reverts == session.hits
    assert bead.speed == 0.05


def test_cooldown_blocks_exactly_two_seconds():
    dt = 1.0 / 64.0  # binary-exact tick so 128 steps sum to exactly 2.0 s
    bead = BallisticBead(LEVITATION_VOLUME.center, X_HAT, 0.05)
    session = GameSession(kind="levishooter")
    bead, session, events = shoot(bead, session, hit=True, dt=dt)
    assert "shot_hit" in events
    # 126 more idle steps: 128 * dt = 2.0 s total since the hit
    for _ in range(125):
        bead, session, _ = levi_shooter_step(bead, None, dt, session)
    # at 1.984 s the trigger is still blocked
    gun = make_gun(bead)
    bead, session, events = levi_shooter_step(bead, gun, dt, session)
    assert "cooldown" in events
    assert session.score == 1
    # release, then fire again exactly at the 2.0 s mark
    released = GunPose(gun.origin, gun.direction, trigger=False)
    bead, session, _ = levi_shooter_step(bead, released, dt, session)
    assert session.cooldown_remaining == 0.0
    bead, session, events = shoot(bead, session, hit=True, dt=dt)
    assert "shot_hit" in events
    assert session.score == 2


def test_speed_formula_exact_over_scripted_session():
    rng = np.random.default_rng(3)
    bead = BallisticBead(LEVITATION_VOLUME.center, X_HAT, 0.05)
    session = GameSession(kind="levishooter")
    for _ in range(40):
        hit = bool(rng.integers(0, 2))
        for _ in range(130):  # roll past any cooldown
            bead, session, _ = levi_shooter_step(bead, None, 1.0 / 64.0, session)
        bead, session, _ = shoot(bead, session, hit=hit)
        assert bead.speed == 0.05 + 0.001 * (session.hits - session.reverts)
        assert session.cooldown_remaining >= 0.0


def test_determinism_identical_scripts():
    def play():
        bead = BallisticBead(LEVITATION_VOLUME.center, X_HAT, 0.05)
        session = GameSession(kind="levishooter")
        log = []
        for i in range(200):
            gun = make_gun(bead, trigger=(i % 40 == 0))
            bead, session, events = levi_shooter_step(bead, gun, 1.0 / 90.0, session)
            log.append((tuple(bead.position), bead.speed, session.score, tuple(events)))
        return log
    assert play() == play()


# ---------------------------------------------------------------- aim feedback

def test_aim_feedback_through_center():
    bead = BallisticBead(LEVITATION_VOLUME.center, X_HAT, 0.05)
    assert aim_feedback(bead, make_gun(bead, trigger=False))


def test_aim_feedback_far_miss():
    bead = BallisticBead(LEVITATION_VOLUME.center, X_HAT, 0.05)
    gun = GunPose(bead.position + np.array([0.08, 0.1, 0.0]),
                  np.array([-1.0, 0.0, 0.0]), trigger=False)
    assert not aim_feedback(bead, gun)


def test_aim_feedback_tangent_ray_closed_boundary():
    bead = BallisticBead(np.zeros(3), X_HAT, 0.05)
    target_radius = CONFIG.bead_radius + CONFIG.aim_margin
    gun = GunPose(np.array([0.08, target_radius, 0.0]),
                  np.array([-1.0, 0.0, 0.0]), trigger=False)
    assert aim_feedback(bead, gun, CONFIG)


def test_aim_feedback_rejects_bead_behind_muzzle():
    bead = BallisticBead(np.zeros(3), X_HAT, 0.05)
    gun = GunPose(np.array([-0.05, 0.0, 0.0]), np.array([-1.0, 0.0, 0.0]))
    assert not ray_hits_bead(bead, gun)
