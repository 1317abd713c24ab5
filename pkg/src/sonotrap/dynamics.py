"""Motion of the levitated bead: a lightly damped oscillator in the trap.

The bead obeys m*a = F_a - F_drag with the acoustic force taken either from
the linearized trap (F_a = -b.(x - trap)) or from the full field model, and
velocity-proportional drag.  Drag is stored as a per-mass rate c (1/s), i.e.
F_drag = m*c*v: the rig's reported decay behaves like a time constant 2/c of
roughly 0.2 s, and the implied absolute coefficient m*c ~ 1e-6 kg/s sits in
the Stokes-drag ballpark for a 2 mm sphere in air.  Gravity is negligible
against the trap force and off by default.

Integration is embedded Dormand-Prince 5(4) with adaptive sub-stepping.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field as dataclass_field
from typing import Callable, Sequence

import numpy as np

from .geometry import Box, LEVITATION_VOLUME

# Bead parameters for the default rig: 2 mm EPS sphere.
PARTICLE_MASS = 1.05e-7  # kg
DRAG_RATE = 9.42  # 1/s
STIFFNESS = np.array([0.016, 0.26, 0.011])  # N/m
GRAVITY = np.array([0.0, -9.81, 0.0])  # m/s^2

ESCAPE_MARGIN = 0.01  # m beyond the volume before the bead counts as escaped


class IntegrationError(RuntimeError):
    """Adaptive stepping underflowed; carries the failing time and axis."""

    def __init__(self, message: str, time: float, axis: int):
        super().__init__(message)
        self.time = time
        self.axis = axis


@dataclass(frozen=True)
class ParticleState:
    """Bead position/velocity at a simulation time."""

    position: np.ndarray  # m
    velocity: np.ndarray  # m/s
    time: float = 0.0  # s
    escaped: bool = False

    def __post_init__(self):
        position = np.asarray(self.position, dtype=float)
        velocity = np.asarray(self.velocity, dtype=float)
        if position.shape != (3,) or velocity.shape != (3,):
            raise ValueError("state position and velocity must be 3-vectors")
        if not (np.all(np.isfinite(position)) and np.all(np.isfinite(velocity))):
            raise ValueError("state components must be finite")
        object.__setattr__(self, "position", position)
        object.__setattr__(self, "velocity", velocity)


@dataclass(frozen=True)
class TrapModel:
    """Force model coefficients and source selection."""

    mass: float = PARTICLE_MASS  # kg
    drag_rate: float = DRAG_RATE  # 1/s (per-mass); see drag_is_absolute
    stiffness: np.ndarray = dataclass_field(default_factory=lambda: STIFFNESS.copy())  # N/m
    source: str = "linear"  # "linear" | "full-field"
    field_force: Callable | None = None  # point (3,) -> force (3,), full-field only
    field_trap_center: np.ndarray | None = None  # equilibrium of field_force
    drag_is_absolute: bool = False  # interpret drag_rate as kg/s instead of 1/s
    include_gravity: bool = False
    volume: Box = LEVITATION_VOLUME

    def __post_init__(self):
        if not self.mass > 0.0:
            raise ValueError("mass must be positive")
        if self.drag_rate < 0.0:
            raise ValueError("drag must be non-negative")
        stiffness = np.asarray(self.stiffness, dtype=float)
        object.__setattr__(self, "stiffness", stiffness)
        if self.source not in ("linear", "full-field"):
            raise ValueError("source must be 'linear' or 'full-field'")
        if self.source == "linear":
            if np.any(stiffness <= 0.0):
                raise ValueError("linear trap stiffness must be positive on all axes")
        elif self.field_force is None or self.field_trap_center is None:
            raise ValueError("full-field source needs field_force and field_trap_center")
        if self.field_trap_center is not None:
            object.__setattr__(self, "field_trap_center",
                               np.asarray(self.field_trap_center, dtype=float))

    @property
    def drag_coefficient(self) -> float:
        """Absolute damping (kg/s) used in F_drag = coeff * v."""
        return self.drag_rate if self.drag_is_absolute else self.mass * self.drag_rate

    @classmethod
    def full_field(cls, array, medium, trap_center, **kwargs) -> "TrapModel":
        """Model driven by the acoustic field, trap translated with commands."""
        from .field import acoustic_force
        center = np.asarray(trap_center, dtype=float)
        force = lambda point: acoustic_force(array, medium, point)
        return cls(source="full-field", field_force=force,
                   field_trap_center=center, **kwargs)


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-7
    atol_position: float = 1e-9  # m
    atol_velocity: float = 1e-9  # m/s
    max_step: float = 1e-3  # s
    min_step: float = 1e-12  # s

    def __post_init__(self):
        if not (self.rtol > 0.0 and self.atol_position > 0.0 and self.atol_velocity > 0.0):
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.min_step <= self.max_step:
            raise ValueError("need 0 < min_step <= max_step")


def net_force(state: ParticleState, trap_position, model: TrapModel) -> np.ndarray:
    """Total force (N) on the bead: trap pull plus drag; no other externals."""
    trap = np.asarray(trap_position, dtype=float)
    force = _acoustic_term(state.position, trap, model)
    force = force - model.drag_coefficient * state.velocity
    if model.include_gravity:
        force = force + model.mass * GRAVITY
    return force


def _acoustic_term(position, trap, model: TrapModel) -> np.ndarray:
    if model.source == "linear":
        return -model.stiffness * (position - trap)
    if not model.volume.contains(position, margin=ESCAPE_MARGIN):
        return np.zeros(3)  # escaped: no trap force, drag only
    # evaluate the stationary field with its trap translated onto the command
    return model.field_force(position - trap + model.field_trap_center)


# Dormand-Prince 5(4) tableau (the classic RK45 pairing).
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
          187 / 2100, 1 / 40)
_DP_E = tuple(b5 - b4 for b5, b4 in zip(_DP_B5, _DP_B4))


def _integrate(rhs, y0: np.ndarray, t0: float, dt: float,
               config: IntegratorConfig) -> np.ndarray:
    """Advance y' = rhs(t, y) from t0 to t0+dt with adaptive DP45 steps.

    The state is six floats; the hot loop runs on plain tuples because the
    90 Hz tick budget cannot afford small-ndarray overhead at hundreds of
    substeps per tick.
    """
    t_end = t0 + dt
    atol = (config.atol_position,) * 3 + (config.atol_velocity,) * 3
    rtol = config.rtol
    y = tuple(float(v) for v in y0)
    t = t0
    h = min(config.max_step, dt)
    k = [None] * 7
    k[0] = rhs(t, y)  # FSAL: stage 7 of an accepted step seeds the next
    while True:
        remaining = t_end - t
        if remaining <= 0.0:
            break
        last = h >= remaining
        if last:
            h = remaining

        for i in range(1, 7):
            row = _DP_A[i]
            yi = tuple(
                y[j] + h * sum(row[m] * k[m][j] for m in range(i))
                for j in range(6))
            k[i] = rhs(t + _DP_C[i] * h, yi)
        y5 = tuple(
            y[j] + h * (_DP_B5[0] * k[0][j] + _DP_B5[2] * k[2][j]
                        + _DP_B5[3] * k[3][j] + _DP_B5[4] * k[4][j]
                        + _DP_B5[5] * k[5][j])
            for j in range(6))
        # the error estimate is h times the (b5 - b4)-weighted stage sum
        norm_sq = 0.0
        worst = 0
        worst_err = -1.0
        for j in range(6):
            err_j = h * (_DP_E[0] * k[0][j] + _DP_E[2] * k[2][j]
                         + _DP_E[3] * k[3][j] + _DP_E[4] * k[4][j]
                         + _DP_E[5] * k[5][j] + _DP_E[6] * k[6][j])
            scaled = abs(err_j) / (atol[j] + rtol * max(abs(y[j]), abs(y5[j])))
            norm_sq += scaled * scaled
            if scaled > worst_err:
                worst_err = scaled
                worst = j
        norm = (norm_sq / 6.0) ** 0.5

        if norm <= 1.0:
            y = y5
            t = t_end if last else t + h
            k[0] = k[6]  # FSAL
            factor = 5.0 if norm == 0.0 else min(5.0, max(0.2, 0.9 * norm ** -0.2))
        else:
            factor = max(0.2, 0.9 * norm ** -0.2)
        h = min(h * factor, config.max_step)
        if h < config.min_step:
            axis = worst % 3
            raise IntegrationError(
                f"step size underflow at t={t:.6g} s (axis {'xyz'[axis]})", t, axis)
    return np.array(y)


def _make_rhs(trap_at, model: TrapModel):
    """Scalar derivative closure (6-tuple in, 6-tuple out) for the hot loop."""
    gamma = model.drag_coefficient
    inv_mass = 1.0 / model.mass
    grav_x, grav_y, grav_z = GRAVITY if model.include_gravity else (0.0, 0.0, 0.0)

    if model.source == "linear":
        b_x, b_y, b_z = (float(v) for v in model.stiffness)

        def rhs(t, y):
            x, yy, z, vx, vy, vz = y
            u_x, u_y, u_z = trap_at(t)
            return (vx, vy, vz,
                    (-b_x * (x - u_x) - gamma * vx) * inv_mass + grav_x,
                    (-b_y * (yy - u_y) - gamma * vy) * inv_mass + grav_y,
                    (-b_z * (z - u_z) - gamma * vz) * inv_mass + grav_z)
    else:
        def rhs(t, y):
            position = np.array(y[:3])
            acoustic = _acoustic_term(position, np.asarray(trap_at(t)), model)
            return (y[3], y[4], y[5],
                    (acoustic[0] - gamma * y[3]) * inv_mass + grav_x,
                    (acoustic[1] - gamma * y[4]) * inv_mass + grav_y,
                    (acoustic[2] - gamma * y[5]) * inv_mass + grav_z)
    return rhs


def step(state: ParticleState, trap_position, model: TrapModel,
         config: IntegratorConfig, dt: float) -> ParticleState:
    """Advance the bead by dt under a stationary trap."""
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    trap = tuple(float(v) for v in np.asarray(trap_position, dtype=float))
    rhs = _make_rhs(lambda t: trap, model)
    y = np.concatenate([state.position, state.velocity])
    y = _integrate(rhs, y, state.time, dt, config)
    return ParticleState(
        position=y[:3], velocity=y[3:], time=state.time + dt,
        escaped=not model.volume.contains(y[:3], margin=ESCAPE_MARGIN))


def step_with_moving_trap(state: ParticleState, trap_from, trap_to,
                          model: TrapModel, config: IntegratorConfig,
                          dt: float) -> ParticleState:
    """Advance dt while the trap glides linearly between two commands."""
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    f_x, f_y, f_z = (float(v) for v in np.asarray(trap_from, dtype=float))
    e_x, e_y, e_z = (float(v) for v in np.asarray(trap_to, dtype=float))
    s_x, s_y, s_z = e_x - f_x, e_y - f_y, e_z - f_z
    t0 = state.time

    def trap_at(t):
        frac = (t - t0) / dt
        return (f_x + s_x * frac, f_y + s_y * frac, f_z + s_z * frac)

    rhs = _make_rhs(trap_at, model)
    y = np.concatenate([state.position, state.velocity])
    y = _integrate(rhs, y, t0, dt, config)
    return ParticleState(
        position=y[:3], velocity=y[3:], time=t0 + dt,
        escaped=not model.volume.contains(y[:3], margin=ESCAPE_MARGIN))


@dataclass(frozen=True)
class TrapSchedule:
    """Time-indexed trap positions, linearly interpolated between samples."""

    times: np.ndarray  # s, strictly increasing
    positions: np.ndarray  # (K, 3) m

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        positions = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if len(times) != len(positions):
            raise ValueError("schedule needs one position per time")
        if len(times) > 1 and np.any(np.diff(times) <= 0.0):
            raise ValueError("schedule times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "positions", positions)

    @classmethod
    def constant(cls, position) -> "TrapSchedule":
        return cls(times=np.array([0.0]), positions=np.atleast_2d(position))

    def position_at(self, t: float) -> np.ndarray:
        if len(self.times) == 1:
            return self.positions[0]
        return np.array([np.interp(t, self.times, self.positions[:, i]) for i in range(3)])

    def covers(self, t0: float, t1: float) -> bool:
        if len(self.times) == 1:
            return True
        return self.times[0] <= t0 and self.times[-1] >= t1


def simulate_trajectory(initial: ParticleState, trap_schedule: TrapSchedule,
                        model: TrapModel, config: IntegratorConfig,
                        duration: float, sample_rate: float) -> list[ParticleState]:
    """Uniformly sampled trajectory; deterministic for identical inputs."""
    if not duration > 0.0 or not sample_rate > 0.0:
        raise ValueError("duration and sample rate must be positive")
    if not trap_schedule.covers(initial.time, initial.time + duration):
        raise ValueError("trap schedule does not cover the simulated interval")

    rhs = _make_rhs(trap_schedule.position_at, model)
    n_samples = int(round(duration * sample_rate))
    states = [initial]
    y = np.concatenate([initial.position, initial.velocity])
    previous_t = initial.time
    for i in range(1, n_samples + 1):
        t_i = initial.time + i / sample_rate
        y = _integrate(rhs, y, previous_t, t_i - previous_t, config)
        previous_t = t_i
        states.append(ParticleState(
            position=y[:3], velocity=y[3:], time=t_i,
            escaped=not model.volume.contains(y[:3], margin=ESCAPE_MARGIN)))
    return states


def trap_energy(state: ParticleState, trap_position, model: TrapModel) -> float:
    """Mechanical energy (J) of the linear model about a stationary trap."""
    offset = state.position - np.asarray(trap_position, dtype=float)
    kinetic = 0.5 * model.mass * float(np.dot(state.velocity, state.velocity))
    potential = 0.5 * float(np.dot(model.stiffness, offset * offset))
    return kinetic + potential


def export_trajectory_csv(states: Sequence[ParticleState],
                          trap_schedule: TrapSchedule, path) -> None:
    """Trajectory log: t_s, position, velocity and the commanded trap."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_s", "x_m", "y_m", "z_m", "vx", "vy", "vz",
                         "trap_x", "trap_y", "trap_z"])
        for state in states:
            trap = trap_schedule.position_at(state.time)
            writer.writerow([repr(float(state.time))]
                            + [repr(float(v)) for v in state.position]
                            + [repr(float(v)) for v in state.velocity]
                            + [repr(float(v)) for v in trap])
