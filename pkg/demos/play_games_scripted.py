"""Both minigames played by scripted bots through the server tick loop.

BeadBounce: a perfect wall-guard racket parks itself on the bead's path
whenever the bead heads for the danger zone.  LeviShooter: an aimbot leads
the bead and fires whenever the cooldown allows.  Prints the event stream
summaries and final scores.

Run:  python demos/play_games_scripted.py
"""

import numpy as np

from sonotrap import games
from sonotrap.server import ServerConfig, SimServer

# ---------------------------------------------------------------- BeadBounce

server = SimServer(ServerConfig(mode="beadbounce"))
guard_plane = -0.004  # hold the line just left of the danger boundary
for tick in range(90 * 60):  # up to a minute
    bead = server.bead
    heading_right = bead.direction[0] > 0.0
    if heading_right and bead.position[0] > guard_plane - 0.02:
        # park the disc where the bead's current ray crosses the guard plane
        span = (guard_plane - bead.position[0]) / bead.direction[0]
        if span > 0.0:
            intercept = bead.position + bead.direction * span
            racket = games.RacketPose(head_center=intercept,
                                      head_normal=-bead.direction.copy(),
                                      velocity=np.array([-0.3, 0.0, 0.0]))
            server.racket_mailbox.post(racket)
    server.tick()
    if server.game_session.state == "over":
        break
session = server.game_session
print("BeadBounce (scripted guard):")
print(f"  survived {session.elapsed:.1f} s, {session.score} racket returns, "
      f"state: {session.state}")
print(f"  summary: {server.session_summary()}")

# ---------------------------------------------------------------- LeviShooter

server = SimServer(ServerConfig(mode="levishooter"))
dt = server.tick_dt
was_pressing = False
for tick in range(90 * 60):
    bead = server.bead
    session = server.game_session
    ready = session.cooldown_remaining <= 0.0 and not was_pressing
    if ready:
        predicted = bead.position + bead.velocity * dt  # lead by one tick
        origin = predicted + np.array([0.06, 0.02, 0.0])
        direction = (predicted - origin) / np.linalg.norm(predicted - origin)
        server.gun_mailbox.post(games.GunPose(origin, direction, trigger=True))
        was_pressing = True
    else:
        server.gun_mailbox.post(games.GunPose(np.array([0.06, 0.02, 0.0]),
                                              np.array([-1.0, 0.0, 0.0]), trigger=False))
        was_pressing = False
    server.tick()
    if server.game_session.score >= 20:
        break

session = server.game_session
speed = games.levi_shooter_speed(session)
print("\nLeviShooter (scripted aimbot):")
print(f"  score {session.score} in {session.elapsed:.1f} s")
print(f"  bead speed {speed * 1e3:.0f} mm/s "
      f"(= 50 + {session.hits} hits - {session.reverts} reverts)")
print(f"  summary: {server.session_summary()}")
