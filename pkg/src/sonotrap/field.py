"""Acoustic trap fields for a two-panel ultrasonic phased array.

Pressure model: each emitter is a far-field circular piston,

    p(r) = (A / d) * D(theta) * exp(i (phi + k d)),
    D(theta) = 2 J1(k a sin theta) / (k a sin theta),

with A the reference pressure at 1 m on axis (Pa*m), d the emitter-to-point
distance, a the piston radius and k the wavenumber.  A trap is made by
focusing both panels on one point; the potential minimum (pressure node)
nearest the focus is the trap center.

The time-averaged potential acting on a small rigid sphere is

    U = K1 |p|^2 - K2 (|dp/dx|^2 + |dp/dy|^2 + |dp/dz|^2)

with the monopole/dipole coefficients K1, K2 built from the particle and
medium densities and sound speeds.  The trapping force is -grad U; all
spatial derivatives here are central finite differences with step
``wavelength / 100``.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize
from scipy.special import j1

from .geometry import Box, LEVITATION_VOLUME

# Defaults for the rig modeled throughout: 40 kHz emitters of 4.5 mm piston
# radius on a 10 mm pitch, two opposed 14x9 panels.  The panels sit 15 cm
# apart, leaving a standoff margin around the 10.6 cm-tall working volume.
DEFAULT_FREQUENCY = 40e3  # Hz
EMITTER_RADIUS = 4.5e-3  # m
GRID_SHAPE = (14, 9)
GRID_PITCH = 0.01  # m
PANEL_SEPARATION = 0.15  # m

AIR_SOUND_SPEED = 343.0  # m/s
AIR_DENSITY = 1.18  # kg/m^3
EPS_SOUND_SPEED = 2400.0  # m/s, expanded polystyrene
EPS_DENSITY = 25.0  # kg/m^3
BEAD_RADIUS = 1e-3  # m (2 mm bead)

# Keep evaluation points off the emitter faces; the 1/d term blows up.
MIN_EMITTER_DISTANCE = 1e-3  # m

_PRESSURE_CHUNK = 4096  # points per vectorized pressure batch


class OutOfVolumeError(ValueError):
    """Requested point lies outside the levitation volume."""


class EmitterProximityError(ValueError):
    """Evaluation point is too close to an emitter face."""


class DegenerateTrapError(RuntimeError):
    """An axis of the trap is not restoring or not linearizable."""


class ParticleSizeWarning(UserWarning):
    """Particle radius is not small against the wavelength."""


@dataclass(frozen=True)
class Transducer:
    """One emitter: pose, drive phase and reference pressure amplitude."""

    position: np.ndarray  # m
    normal: np.ndarray  # unit
    phase: float  # rad, in [0, 2*pi)
    amplitude: float  # Pa*m at 1 m on axis

    def __post_init__(self):
        position = np.asarray(self.position, dtype=float)
        normal = np.asarray(self.normal, dtype=float)
        if position.shape != (3,) or normal.shape != (3,):
            raise ValueError("transducer position and normal must be 3-vectors")
        if abs(np.linalg.norm(normal) - 1.0) > 1e-9:
            raise ValueError("transducer normal must be a unit vector")
        if not 0.0 <= self.phase < 2.0 * np.pi:
            raise ValueError("transducer phase must lie in [0, 2*pi)")
        if not self.amplitude > 0.0:
            raise ValueError("transducer amplitude must be positive")
        object.__setattr__(self, "position", position)
        object.__setattr__(self, "normal", normal)


class TransducerArray:
    """Two opposed emitter grids with per-emitter phases.

    Immutable; phase or amplitude changes produce a new array via
    :meth:`with_phases` / :meth:`with_amplitude`.
    """

    def __init__(self, transducers, frequency: float = DEFAULT_FREQUENCY,
                 pitch: float = GRID_PITCH, emitter_radius: float = EMITTER_RADIUS):
        transducers = tuple(transducers)
        expected = 2 * GRID_SHAPE[0] * GRID_SHAPE[1]
        if len(transducers) != expected:
            raise ValueError(f"array must hold exactly {expected} transducers, got {len(transducers)}")
        if not frequency > 0.0:
            raise ValueError("frequency must be positive")
        self.transducers = transducers
        self.frequency = float(frequency)
        self.pitch = float(pitch)
        self.emitter_radius = float(emitter_radius)

        self.positions = np.array([t.position for t in transducers])
        self.normals = np.array([t.normal for t in transducers])
        self.phases = np.array([t.phase for t in transducers])
        self.amplitudes = np.array([t.amplitude for t in transducers])

        # The two panels must face each other: split by normal direction and
        # require the mean normals to be antiparallel.
        half = len(transducers) // 2
        n0 = self.normals[:half].mean(axis=0)
        n1 = self.normals[half:].mean(axis=0)
        n0 /= np.linalg.norm(n0)
        n1 /= np.linalg.norm(n1)
        angle = np.arccos(np.clip(np.dot(n0, -n1), -1.0, 1.0))
        if angle > 1e-6:
            raise ValueError("the two emitter panels must oppose each other")
        self.panel_axis = n0  # unit vector from panel 0 toward panel 1

    @property
    def wavelength(self) -> float:
        return AIR_SOUND_SPEED / self.frequency

    @property
    def wavenumber(self) -> float:
        return 2.0 * np.pi * self.frequency / AIR_SOUND_SPEED

    @property
    def omega(self) -> float:
        return 2.0 * np.pi * self.frequency

    def with_phases(self, phases) -> "TransducerArray":
        phases = np.mod(np.asarray(phases, dtype=float), 2.0 * np.pi)
        if phases.shape != (len(self.transducers),):
            raise ValueError("need one phase per transducer")
        emitters = [replace(t, phase=float(p)) for t, p in zip(self.transducers, phases)]
        return TransducerArray(emitters, self.frequency, self.pitch, self.emitter_radius)

    def with_amplitude(self, amplitude: float) -> "TransducerArray":
        if not amplitude > 0.0:
            raise ValueError("amplitude must be positive")
        emitters = [replace(t, amplitude=float(amplitude)) for t in self.transducers]
        return TransducerArray(emitters, self.frequency, self.pitch, self.emitter_radius)


@dataclass(frozen=True)
class MediumAndParticle:
    """Propagation medium plus the levitated bead's material constants."""

    medium_sound_speed: float = AIR_SOUND_SPEED  # m/s
    medium_density: float = AIR_DENSITY  # kg/m^3
    particle_sound_speed: float = EPS_SOUND_SPEED  # m/s
    particle_density: float = EPS_DENSITY  # kg/m^3
    particle_radius: float = BEAD_RADIUS  # m

    def __post_init__(self):
        for name in ("medium_sound_speed", "medium_density", "particle_sound_speed",
                     "particle_density", "particle_radius"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")

    @property
    def particle_volume(self) -> float:
        return 4.0 / 3.0 * np.pi * self.particle_radius ** 3

    @property
    def particle_mass(self) -> float:
        return self.particle_density * self.particle_volume


@dataclass(frozen=True)
class TrapCharacterization:
    """Per-axis trap geometry: where the restoring force dies out."""

    center: np.ndarray  # m
    diameters: np.ndarray  # m, (dx, dy, dz)
    max_forces: np.ndarray  # N, per axis
    max_force_offsets: np.ndarray  # m, displacement of the force extremum
    stiffness: np.ndarray  # N/m, per axis
    volume_bounded: np.ndarray  # bool per axis: no zero-crossing found in volume

    def __post_init__(self):
        if np.any(self.diameters <= 0.0):
            raise ValueError("trap diameters must be positive")
        if np.any(self.stiffness <= 0.0):
            raise ValueError("trap stiffness must be positive (restoring)")
        if np.any(np.abs(self.max_force_offsets) > 0.5 * self.diameters + 1e-12):
            raise ValueError("force extremum must lie inside the trap radius")


def gorkov_coefficients(medium: MediumAndParticle, omega: float) -> tuple[float, float]:
    """Monopole/dipole coefficients (K1, K2) of the small-sphere potential."""
    wavelength = 2.0 * np.pi * medium.medium_sound_speed / omega
    if medium.particle_radius >= wavelength / 10.0:
        warnings.warn(
            f"particle radius {medium.particle_radius:.2e} m is not small against "
            f"the wavelength {wavelength:.2e} m; the small-sphere potential is approximate",
            ParticleSizeWarning,
            stacklevel=2,
        )
    volume = medium.particle_volume
    k1 = 0.25 * volume * (
        1.0 / (medium.medium_sound_speed ** 2 * medium.medium_density)
        - 1.0 / (medium.particle_sound_speed ** 2 * medium.particle_density)
    )
    k2 = 0.75 * volume * (
        (medium.particle_density - medium.medium_density)
        / (omega ** 2 * medium.medium_density * (2.0 * medium.particle_density + medium.medium_density))
    )
    return k1, k2


def build_two_panel_array(frequency: float = DEFAULT_FREQUENCY,
                          pitch: float = GRID_PITCH,
                          separation: float = PANEL_SEPARATION,
                          grid_shape: tuple[int, int] = GRID_SHAPE,
                          amplitude: float = 1.0,
                          emitter_radius: float = EMITTER_RADIUS) -> TransducerArray:
    """Two opposed grids along y: panel 0 below (+y normal), panel 1 above."""
    nx, nz = grid_shape
    xs = (np.arange(nx) - (nx - 1) / 2.0) * pitch
    zs = (np.arange(nz) - (nz - 1) / 2.0) * pitch
    emitters = []
    for y_panel, normal in ((-separation / 2.0, np.array([0.0, 1.0, 0.0])),
                            (separation / 2.0, np.array([0.0, -1.0, 0.0]))):
        for x in xs:
            for z in zs:
                emitters.append(Transducer(
                    position=np.array([x, y_panel, z]),
                    normal=normal,
                    phase=0.0,
                    amplitude=amplitude,
                ))
    return TransducerArray(emitters, frequency, pitch, emitter_radius)


def compute_focus_phases(array: TransducerArray, focus,
                         volume: Box = LEVITATION_VOLUME) -> np.ndarray:
    """Phases that make every emitter's wave arrive in phase at ``focus``."""
    focus = np.asarray(focus, dtype=float)
    if not volume.contains(focus):
        raise OutOfVolumeError(f"focus {focus.tolist()} lies outside the levitation volume")
    distances = np.linalg.norm(array.positions - focus, axis=1)
    return np.mod(-array.wavenumber * distances, 2.0 * np.pi)


def focus_array(array: TransducerArray, focus,
                volume: Box = LEVITATION_VOLUME) -> TransducerArray:
    """Copy of ``array`` phased to focus on ``focus``."""
    return array.with_phases(compute_focus_phases(array, focus, volume))


def _piston_terms(points, positions, normals, phases, amplitudes, k, emitter_radius):
    """Per-emitter piston pressure contributions, shape (n_points, n_emitters)."""
    diff = points[:, None, :] - positions[None, :, :]  # (n, M, 3)
    dist = np.linalg.norm(diff, axis=2)  # (n, M)
    if np.any(dist < MIN_EMITTER_DISTANCE):
        raise EmitterProximityError(
            f"evaluation point within {MIN_EMITTER_DISTANCE * 1e3:.1f} mm of an emitter")
    cos_theta = np.clip(np.einsum("nmi,mi->nm", diff, normals) / dist, -1.0, 1.0)
    sin_theta = np.sqrt(1.0 - cos_theta ** 2)
    arg = k * emitter_radius * sin_theta
    # 2 J1(x)/x -> 1 as x -> 0
    safe = np.where(arg < 1e-12, 1.0, arg)
    directivity = np.where(arg < 1e-12, 1.0, 2.0 * j1(safe) / safe)
    return amplitudes[None, :] / dist * directivity * np.exp(1j * (phases[None, :] + k * dist))


def piston_pressure(transducer: Transducer, frequency: float, points,
                    emitter_radius: float = EMITTER_RADIUS):
    """Complex pressure of a single far-field piston emitter."""
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    k = 2.0 * np.pi * frequency / AIR_SOUND_SPEED
    terms = _piston_terms(pts, transducer.position[None, :], transducer.normal[None, :],
                          np.array([transducer.phase]), np.array([transducer.amplitude]),
                          k, emitter_radius)
    out = terms[:, 0]
    return out[0] if single else out


def complex_pressure(array: TransducerArray, points):
    """Complex pressure (Pa) at one point (3,) or many points (N, 3)."""
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != 3:
        raise ValueError("points must be 3-vectors")

    k = array.wavenumber
    out = np.empty(len(pts), dtype=complex)
    for start in range(0, len(pts), _PRESSURE_CHUNK):
        chunk = pts[start:start + _PRESSURE_CHUNK]
        terms = _piston_terms(chunk, array.positions, array.normals, array.phases,
                              array.amplitudes, k, array.emitter_radius)
        out[start:start + len(chunk)] = terms.sum(axis=1)
    return out[0] if single else out


def gorkov_from_pressure(pressure, pressure_gradient, medium: MediumAndParticle,
                         omega: float):
    """Potential U (J) from complex pressure(s) and gradient(s) (..., 3)."""
    k1, k2 = gorkov_coefficients(medium, omega)
    grad = np.asarray(pressure_gradient)
    return k1 * np.abs(pressure) ** 2 - k2 * np.sum(np.abs(grad) ** 2, axis=-1)


def gorkov_potential(array: TransducerArray, medium: MediumAndParticle, points,
                     step: float | None = None):
    """Small-sphere acoustic potential U (J) at one or many points."""
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    h = array.wavelength / 100.0 if step is None else float(step)

    offsets = h * np.eye(3)
    stencil = np.concatenate([
        pts,
        (pts[:, None, :] + offsets[None, :, :]).reshape(-1, 3),
        (pts[:, None, :] - offsets[None, :, :]).reshape(-1, 3),
    ])
    p = complex_pressure(array, stencil)
    n = len(pts)
    p0 = p[:n]
    p_plus = p[n:n + 3 * n].reshape(n, 3)
    p_minus = p[n + 3 * n:].reshape(n, 3)
    grad_p = (p_plus - p_minus) / (2.0 * h)

    potential = gorkov_from_pressure(p0, grad_p, medium, array.omega)
    return float(potential[0]) if single else potential


def acoustic_force(array: TransducerArray, medium: MediumAndParticle, points,
                   step: float | None = None):
    """Trapping force -grad U (N) at one point (3,) or many (N, 3)."""
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    h = array.wavelength / 100.0 if step is None else float(step)

    offsets = h * np.eye(3)
    plus = (pts[:, None, :] + offsets[None, :, :]).reshape(-1, 3)
    minus = (pts[:, None, :] - offsets[None, :, :]).reshape(-1, 3)
    potentials = gorkov_potential(array, medium, np.concatenate([plus, minus]), step=h)
    n = len(pts)
    u_plus = potentials[:3 * n].reshape(n, 3)
    u_minus = potentials[3 * n:].reshape(n, 3)
    force = -(u_plus - u_minus) / (2.0 * h)
    return force[0] if single else force


def solve_trap(array: TransducerArray, medium: MediumAndParticle, focus,
               volume: Box = LEVITATION_VOLUME) -> tuple[TransducerArray, np.ndarray]:
    """Focus both panels on ``focus`` and locate the trap center.

    Both panels are focused on the requested point, with the opposing panel
    driven half a cycle out of phase so the standing-wave pressure node (the
    potential minimum) sits at the focus itself rather than a quarter wave
    off it.  Returns the phased array and the polished trap center.
    """
    focus = np.asarray(focus, dtype=float)
    phases = compute_focus_phases(array, focus, volume)
    half = len(phases) // 2
    phases[half:] += np.pi
    focused = array.with_phases(phases)

    # Coarse scan one wavelength along the standing-wave axis, then polish
    # the nearest potential minimum by driving the force to zero.
    axis = focused.panel_axis
    offsets = np.linspace(-0.5, 0.5, 101) * focused.wavelength
    candidates = focus[None, :] + offsets[:, None] * axis[None, :]
    inside = np.all((candidates >= volume.lo) & (candidates <= volume.hi), axis=1)
    candidates = candidates[inside]
    potentials = gorkov_potential(focused, medium, candidates)
    start = candidates[np.argmin(potentials)]

    sol = optimize.root(lambda q: acoustic_force(focused, medium, q), start,
                        method="hybr", tol=1e-14)
    center = sol.x
    # hybr can report failure when the residual is already flat at machine
    # precision; judge convergence on the physics instead.
    if np.max(np.abs(sol.fun)) > 1e-8 or not volume.contains(center):
        raise DegenerateTrapError(f"no trap found near focus {focus.tolist()}")

    # The stationary point must be a potential minimum on all three axes.
    h = focused.wavelength / 100.0
    u0 = gorkov_potential(focused, medium, center)
    for i in range(3):
        for sign in (-1.0, 1.0):
            probe = center + sign * h * np.eye(3)[i]
            if gorkov_potential(focused, medium, probe) <= u0:
                raise DegenerateTrapError(f"stationary point near focus is not a minimum on axis {i}")
    return focused, center


def _axis_force_profile(force_fn, center, axis_index: int, displacements):
    """Force component along one axis for signed displacements from center."""
    center = np.asarray(center, dtype=float)
    d = np.asarray(displacements, dtype=float)
    pts = np.tile(center, (len(d), 1))
    pts[:, axis_index] += d
    return force_fn(pts)[:, axis_index]


def scan_trap_axis(force_fn, center, axis_index: int, scan_step: float,
                   limit: float) -> tuple[float, float, float, bool]:
    """Walk outward from the trap center until the restoring force dies.

    Returns (radius, max_force, max_force_offset, volume_bounded).
    The radius is the first zero-crossing of the force component beyond the
    restoring region, averaged over both scan directions; the max force is
    the strongest pull-back seen inside it.
    """
    radii = []
    max_forces = []
    max_offsets = []
    bounded = False
    for direction in (1.0, -1.0):
        steps = np.arange(1, int(np.floor(limit / scan_step)) + 1)
        displacements = direction * steps * scan_step
        forces = _axis_force_profile(force_fn, center, axis_index, displacements)
        restoring = forces * direction  # restoring pull has negative sign here
        if restoring[0] >= 0.0:
            raise DegenerateTrapError(f"axis {axis_index} is not restoring at the trap center")
        crossing = np.nonzero(restoring >= 0.0)[0]
        if len(crossing) == 0:
            radius = abs(displacements[-1])
            bounded = True
            in_trap = slice(None)
        else:
            j = crossing[0]
            # Linear interpolation between the last restoring sample and the
            # first non-restoring one.
            d0, d1 = abs(displacements[j - 1]), abs(displacements[j])
            f0, f1 = restoring[j - 1], restoring[j]
            radius = d0 + (d1 - d0) * (-f0) / (f1 - f0)
            in_trap = slice(0, j)
        peak = np.argmax(np.abs(restoring[in_trap]))
        radii.append(radius)
        max_forces.append(abs(forces[in_trap][peak]))
        max_offsets.append(displacements[in_trap][peak])
    strongest = int(np.argmax(max_forces))
    return (float(np.mean(radii)), float(max_forces[strongest]),
            float(max_offsets[strongest]), bounded)


def fit_axis_stiffness(force_fn, center, axis_index: int, fit_radius: float,
                       samples: int = 21) -> float:
    """Least-squares restoring stiffness b (N/m) for F = -b*x near the center."""
    d = np.linspace(-fit_radius, fit_radius, samples)
    d = d[d != 0.0]
    forces = _axis_force_profile(force_fn, center, axis_index, d)
    b = -np.dot(forces, d) / np.dot(d, d)
    if b <= 0.0:
        raise DegenerateTrapError(f"axis {axis_index} stiffness is not restoring (b={b:.3e})")
    residual = np.sqrt(np.mean((forces + b * d) ** 2))
    peak = np.max(np.abs(forces))
    if residual > 0.05 * peak:
        raise DegenerateTrapError(
            f"axis {axis_index} force is not linear over the fit window "
            f"(residual {residual:.2e} vs peak {peak:.2e})")
    return float(b)


def linearize_trap(array: TransducerArray, medium: MediumAndParticle, trap_center,
                   fit_fraction: float = 0.10, scan_step: float = 1e-4,
                   volume: Box = LEVITATION_VOLUME, force_fn=None) -> np.ndarray:
    """Per-axis stiffness vector b (N/m) from a fit over the trap core."""
    center = np.asarray(trap_center, dtype=float)
    if force_fn is None:
        force_fn = lambda pts: acoustic_force(array, medium, pts)
    stiffness = np.empty(3)
    for i in range(3):
        limit = min(center[i] - volume.lo[i], volume.hi[i] - center[i])
        radius, _, _, _ = scan_trap_axis(force_fn, center, i, scan_step, limit)
        stiffness[i] = fit_axis_stiffness(force_fn, center, i, fit_fraction * radius)
    return stiffness


def characterize_trap(array: TransducerArray, medium: MediumAndParticle, trap_center,
                      scan_step: float = 1e-4, fit_fraction: float = 0.10,
                      volume: Box = LEVITATION_VOLUME, force_fn=None) -> TrapCharacterization:
    """Trap ellipsoid diameters, peak restoring forces and stiffness."""
    center = np.asarray(trap_center, dtype=float)
    if force_fn is None:
        force_fn = lambda pts: acoustic_force(array, medium, pts)
    diameters = np.empty(3)
    max_forces = np.empty(3)
    max_offsets = np.empty(3)
    stiffness = np.empty(3)
    bounded = np.zeros(3, dtype=bool)
    for i in range(3):
        limit = min(center[i] - volume.lo[i], volume.hi[i] - center[i])
        radius, fmax, offset, vol_bounded = scan_trap_axis(force_fn, center, i, scan_step, limit)
        diameters[i] = 2.0 * radius
        max_forces[i] = fmax
        max_offsets[i] = offset
        bounded[i] = vol_bounded
        stiffness[i] = fit_axis_stiffness(force_fn, center, i, fit_fraction * radius)
    return TrapCharacterization(center=center, diameters=diameters, max_forces=max_forces,
                                max_force_offsets=max_offsets, stiffness=stiffness,
                                volume_bounded=bounded)


def calibrate_amplitude(array: TransducerArray, medium: MediumAndParticle,
                        target_max_y_force: float, trap_center=None,
                        scan_step: float = 1e-4,
                        volume: Box = LEVITATION_VOLUME) -> float:
    """Common emitter amplitude that yields the target peak vertical force.

    The force scales with amplitude squared, so the exact scale factor is the
    square root of the force ratio.  Returns the new amplitude (Pa*m).
    """
    if not target_max_y_force > 0.0:
        raise ValueError("target force must be positive")
    if trap_center is None:
        _, trap_center = solve_trap(array, medium, volume.center, volume)
    center = np.asarray(trap_center, dtype=float)
    force_fn = lambda pts: acoustic_force(array, medium, pts)
    limit = min(center[1] - volume.lo[1], volume.hi[1] - center[1])
    _, current_max, _, _ = scan_trap_axis(force_fn, center, 1, scan_step, limit)
    scale = np.sqrt(target_max_y_force / current_max)
    return float(array.amplitudes[0] * scale)


def export_force_profiles(array: TransducerArray, medium: MediumAndParticle,
                          trap_center, path, scan_step: float = 1e-4,
                          volume: Box = LEVITATION_VOLUME) -> None:
    """Write per-axis force sweeps through the trap center as CSV.

    Columns: axis, displacement_m, Fx_N, Fy_N, Fz_N.
    """
    center = np.asarray(trap_center, dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["axis", "displacement_m", "Fx_N", "Fy_N", "Fz_N"])
        for i, axis in enumerate(("x", "y", "z")):
            limit = min(center[i] - volume.lo[i], volume.hi[i] - center[i])
            d = np.arange(-limit, limit + scan_step / 2, scan_step)
            pts = np.tile(center, (len(d), 1))
            pts[:, i] += d
            forces = acoustic_force(array, medium, pts)
            for dj, f in zip(d, forces):
                writer.writerow([axis, repr(float(dj)), repr(float(f[0])),
                                 repr(float(f[1])), repr(float(f[2]))])


def load_array_config(path, volume: Box = LEVITATION_VOLUME):
    """Build (array, medium) from a JSON rig description.

    Recognized keys: grid [nx, nz], pitch_m, separation_m, frequency_hz,
    emitter_radius_m, amplitude_pa_m OR calibrate_max_y_force_n, and nested
    medium/particle constant blocks.  If a calibration target is given the
    returned array is focused and calibrated at the volume center.
    """
    with open(path) as fh:
        cfg = json.load(fh)
    medium_cfg = cfg.get("medium", {})
    particle_cfg = cfg.get("particle", {})
    medium = MediumAndParticle(
        medium_sound_speed=medium_cfg.get("sound_speed_m_s", AIR_SOUND_SPEED),
        medium_density=medium_cfg.get("density_kg_m3", AIR_DENSITY),
        particle_sound_speed=particle_cfg.get("sound_speed_m_s", EPS_SOUND_SPEED),
        particle_density=particle_cfg.get("density_kg_m3", EPS_DENSITY),
        particle_radius=particle_cfg.get("radius_m", BEAD_RADIUS),
    )
    array = build_two_panel_array(
        frequency=cfg.get("frequency_hz", DEFAULT_FREQUENCY),
        pitch=cfg.get("pitch_m", GRID_PITCH),
        separation=cfg.get("separation_m", PANEL_SEPARATION),
        grid_shape=tuple(cfg.get("grid", GRID_SHAPE)),
        amplitude=cfg.get("amplitude_pa_m", 1.0),
        emitter_radius=cfg.get("emitter_radius_m", EMITTER_RADIUS),
    )
    target = cfg.get("calibrate_max_y_force_n")
    if target is not None:
        focused, center = solve_trap(array, medium, volume.center, volume)
        amplitude = calibrate_amplitude(focused, medium, target, center, volume=volume)
        array = focused.with_amplitude(amplitude)
    return array, medium
