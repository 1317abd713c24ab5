"""Acoustic field model: pressure, potential, forces, trap geometry."""

import numpy as np
import pytest

from sonotrap import field
from sonotrap.field import (
    DegenerateTrapError,
    EmitterProximityError,
    MediumAndParticle,
    OutOfVolumeError,
    ParticleSizeWarning,
    Transducer,
    TrapCharacterization,
    acoustic_force,
    build_two_panel_array,
    calibrate_amplitude,
    characterize_trap,
    complex_pressure,
    compute_focus_phases,
    fit_axis_stiffness,
    gorkov_coefficients,
    gorkov_from_pressure,
    gorkov_potential,
    linearize_trap,
    piston_pressure,
    scan_trap_axis,
    solve_trap,
)
from sonotrap.geometry import LEVITATION_VOLUME


WAVELENGTH = field.AIR_SOUND_SPEED / field.DEFAULT_FREQUENCY


# ---------------------------------------------------------------- domain types

def test_transducer_rejects_non_unit_normal():
    with pytest.raises(ValueError):
        Transducer(np.zeros(3), np.array([0.0, 2.0, 0.0]), 0.0, 1.0)


def test_transducer_rejects_out_of_range_phase():
    with pytest.raises(ValueError):
        Transducer(np.zeros(3), np.array([0.0, 1.0, 0.0]), 2.0 * np.pi, 1.0)
    with pytest.raises(ValueError):
        Transducer(np.zeros(3), np.array([0.0, 1.0, 0.0]), -0.1, 1.0)


def test_transducer_rejects_non_positive_amplitude():
    with pytest.raises(ValueError):
        Transducer(np.zeros(3), np.array([0.0, 1.0, 0.0]), 0.0, 0.0)


def test_array_requires_exact_emitter_count():
    array = build_two_panel_array()
    with pytest.raises(ValueError):
        field.TransducerArray(array.transducers[:-1])


def test_array_requires_opposed_panels():
    array = build_two_panel_array()
    half = len(array.transducers) // 2
    tilted = [t if i < half else field.Transducer(t.position, np.array([0.0, -0.9995, 0.03162]) / np.linalg.norm([0.0, -0.9995, 0.03162]), t.phase, t.amplitude)
              for i, t in enumerate(array.transducers)]
    with pytest.raises(ValueError):
        field.TransducerArray(tilted)


def test_medium_rejects_non_positive_fields():
    with pytest.raises(ValueError):
        MediumAndParticle(particle_radius=0.0)


def test_oversized_particle_warns():
    # default 1 mm bead radius exceeds lambda/10 = 0.86 mm at 40 kHz
    with pytest.warns(ParticleSizeWarning):
        gorkov_coefficients(MediumAndParticle(), 2.0 * np.pi * field.DEFAULT_FREQUENCY)


def test_small_particle_does_not_warn(recwarn):
    gorkov_coefficients(MediumAndParticle(particle_radius=1e-4),
                        2.0 * np.pi * field.DEFAULT_FREQUENCY)
    assert not [w for w in recwarn if issubclass(w.category, ParticleSizeWarning)]


def test_characterization_rejects_non_restoring_axis():
    with pytest.raises(ValueError):
        TrapCharacterization(center=np.zeros(3), diameters=np.array([0.01, 0.005, 0.01]),
                             max_forces=np.ones(3), max_force_offsets=np.zeros(3),
                             stiffness=np.array([1.0, -1.0, 1.0]),
                             volume_bounded=np.zeros(3, bool))


# ---------------------------------------------------------------- focus phases

def test_focus_phases_equidistant_emitters_match():
    array = build_two_panel_array()
    focus = LEVITATION_VOLUME.center  # equidistant from mirrored emitter pairs
    phases = compute_focus_phases(array, focus)
    pos = array.positions
    # pick an emitter and its x-mirror twin
    i = 0
    mirrored = pos.copy()
    mirrored[:, 0] *= -1.0
    j = int(np.argmin(np.linalg.norm(pos - mirrored[i], axis=1)))
    assert i != j
    assert phases[i] == pytest.approx(phases[j], abs=1e-12)


def test_focus_phases_align_all_contributions():
    array = build_two_panel_array()
    focus = np.array([0.012, -0.004, 0.007])
    phased = array.with_phases(compute_focus_phases(array, focus))
    k = array.wavenumber
    d = np.linalg.norm(phased.positions - focus, axis=1)
    arrival = np.mod(phased.phases + k * d, 2.0 * np.pi)
    # wrap to (-pi, pi] around zero before comparing pairwise
    arrival = np.angle(np.exp(1j * arrival))
    assert np.max(arrival) - np.min(arrival) < 1e-9


def test_focused_pressure_magnitude_equals_scalar_amplitude_sum():
    # with all contributions phase-aligned, |p| is the plain sum of the
    # per-emitter amplitude/distance/directivity magnitudes
    array = build_two_panel_array()
    focus = LEVITATION_VOLUME.center
    phased = array.with_phases(compute_focus_phases(array, focus))
    p = complex_pressure(phased, focus)
    scalar_sum = sum(
        abs(piston_pressure(t, array.frequency, focus))
        for t in phased.transducers
    )
    assert abs(p) == pytest.approx(scalar_sum, rel=1e-9)


def test_focus_shift_by_wavelength_preserves_phase():
    array = build_two_panel_array()
    emitter = array.transducers[0]
    focus = emitter.position + 0.06 * emitter.normal
    shifted = focus + WAVELENGTH * emitter.normal
    p0 = compute_focus_phases(array, focus)[0]
    p1 = compute_focus_phases(array, shifted)[0]
    delta = np.angle(np.exp(1j * (p1 - p0)))
    assert abs(delta) < 1e-9


def test_focus_outside_volume_rejected():
    array = build_two_panel_array()
    with pytest.raises(OutOfVolumeError):
        compute_focus_phases(array, np.array([0.0, 0.08, 0.0]))


# ---------------------------------------------------------------- pressure

def test_single_emitter_on_axis_normalization():
    t = Transducer(np.zeros(3), np.array([0.0, 1.0, 0.0]), 0.0, 3.7)
    p = piston_pressure(t, field.DEFAULT_FREQUENCY, np.array([0.0, 1.0, 0.0]))
    assert abs(p) == pytest.approx(3.7, rel=1e-12)


def test_counter_propagating_pair_doubles_midpoint_pressure():
    a = Transducer(np.array([0.0, -0.05, 0.0]), np.array([0.0, 1.0, 0.0]), 0.0, 1.0)
    b = Transducer(np.array([0.0, 0.05, 0.0]), np.array([0.0, -1.0, 0.0]), 0.0, 1.0)
    mid = np.zeros(3)
    p_pair = piston_pressure(a, field.DEFAULT_FREQUENCY, mid) + piston_pressure(b, field.DEFAULT_FREQUENCY, mid)
    p_single = piston_pressure(a, field.DEFAULT_FREQUENCY, mid)
    assert abs(p_pair) == pytest.approx(2.0 * abs(p_single), rel=1e-12)


def test_array_pressure_is_sum_of_piston_terms():
    array = build_two_panel_array()
    point = np.array([0.011, 0.003, -0.009])
    total = complex_pressure(array, point)
    summed = sum(piston_pressure(t, array.frequency, point) for t in array.transducers)
    assert total == pytest.approx(summed, rel=1e-12)


def test_pressure_rejects_points_on_emitters():
    array = build_two_panel_array()
    with pytest.raises(EmitterProximityError):
        complex_pressure(array, array.positions[0] + np.array([0.0, 5e-4, 0.0]))


def test_standing_wave_node_spacing(rig):
    # pressure minima along the vertical axis sit half a wavelength apart,
    # stretched slightly by the focal convergence angle
    ys = np.arange(-0.015, 0.015, 2e-5)
    pts = np.tile(rig.center, (len(ys), 1))
    pts[:, 1] = rig.center[1] + ys
    mag = np.abs(complex_pressure(rig.array, pts))
    interior = np.nonzero((mag[1:-1] < mag[:-2]) & (mag[1:-1] < mag[2:]))[0] + 1
    spacing = np.diff(ys[interior])
    assert len(spacing) >= 4
    assert np.all(spacing > 0.9 * WAVELENGTH / 2)
    assert np.all(spacing < 1.2 * WAVELENGTH / 2)


# ---------------------------------------------------------------- potential

def test_uniform_pressure_field_potential():
    # zero-gradient field: U reduces to the monopole term, grad U vanishes
    medium = MediumAndParticle(particle_radius=1e-4)
    omega = 2.0 * np.pi * field.DEFAULT_FREQUENCY
    k1, _ = gorkov_coefficients(medium, omega)
    p = 120.0 + 45.0j
    u = gorkov_from_pressure(p, np.zeros(3, complex), medium, omega)
    assert u == pytest.approx(k1 * abs(p) ** 2, rel=1e-12)
    assert gorkov_from_pressure(p, np.zeros(3, complex), medium, omega) == \
        gorkov_from_pressure(p, np.zeros(3, complex), medium, omega)


def test_trap_center_is_local_minimum(rig):
    h = rig.array.wavelength / 100.0
    u0 = gorkov_potential(rig.array, rig.medium, rig.center)
    offsets = np.array(np.meshgrid([-h, 0, h], [-h, 0, h], [-h, 0, h])).T.reshape(-1, 3)
    for off in offsets:
        if np.allclose(off, 0.0):
            continue
        assert gorkov_potential(rig.array, rig.medium, rig.center + off) > u0


def test_potential_step_halving_stable(rig):
    h = rig.array.wavelength / 100.0
    u1 = gorkov_potential(rig.array, rig.medium, rig.center, step=h)
    u2 = gorkov_potential(rig.array, rig.medium, rig.center, step=h / 2.0)
    assert abs(u1 - u2) / abs(u2) < 1e-3


# ---------------------------------------------------------------- force

def test_force_vanishes_at_trap_center(rig):
    f = acoustic_force(rig.array, rig.medium, rig.center)
    assert np.all(np.abs(f) < 1e-8)


def test_vertical_to_lateral_force_ratio(rig):
    ratio = rig.characterization.max_forces[1] / rig.characterization.max_forces[0]
    assert 2.5 <= ratio <= 7.5  # nominal 5, +-50%


def test_force_profiles_odd_symmetric(rig):
    for axis in range(3):
        radius = rig.characterization.diameters[axis] / 2.0
        d = np.linspace(0.05 * radius, 0.95 * radius, 10)
        plus = np.tile(rig.center, (10, 1))
        plus[:, axis] += d
        minus = np.tile(rig.center, (10, 1))
        minus[:, axis] -= d
        f_plus = acoustic_force(rig.array, rig.medium, plus)[:, axis]
        f_minus = acoustic_force(rig.array, rig.medium, minus)[:, axis]
        deviation = np.abs(np.abs(f_plus) - np.abs(f_minus)) / np.max(np.abs(f_plus))
        assert np.max(deviation) < 0.02


def test_restoring_inside_trap(rig):
    # displacements along each axis, within that axis's trap radius, are
    # always pulled back toward the center
    radii = rig.characterization.diameters / 2.0
    for axis in range(3):
        d = np.concatenate([np.linspace(-0.97, -0.03, 30), np.linspace(0.03, 0.97, 30)])
        d *= radii[axis]
        pts = np.tile(rig.center, (len(d), 1))
        pts[:, axis] += d
        forces = acoustic_force(rig.array, rig.medium, pts)
        assert np.all(forces[:, axis] * d < 0.0)


def test_gradient_consistency(rig):
    # force from the module vs an independent half-step differentiation
    rng = np.random.default_rng(42)
    radii = rig.characterization.diameters / 2.0
    direction = rng.normal(size=(1000, 3))
    direction /= np.linalg.norm(direction, axis=1)[:, None]
    scale = rng.uniform(0.0, 0.9, 1000) ** (1.0 / 3.0)
    pts = rig.center + direction * (scale[:, None] * radii[None, :])

    h = rig.array.wavelength / 100.0
    f_module = acoustic_force(rig.array, rig.medium, pts, step=h)

    half = h / 2.0
    offsets = half * np.eye(3)
    plus = (pts[:, None, :] + offsets[None, :, :]).reshape(-1, 3)
    minus = (pts[:, None, :] - offsets[None, :, :]).reshape(-1, 3)
    u = gorkov_potential(rig.array, rig.medium, np.concatenate([plus, minus]), step=half)
    n = len(pts)
    f_half = -(u[:3 * n].reshape(n, 3) - u[3 * n:].reshape(n, 3)) / (2.0 * half)

    # per component against the local force magnitude; a component's own
    # value is ill-posed as a denominator at its zero crossings, where both
    # evaluations agree to ~1e-8 N absolute
    local = np.linalg.norm(f_half, axis=1)
    denom = np.maximum(local, 1e-3 * local.max())
    rel = np.abs(f_module - f_half) / denom[:, None]
    assert np.max(rel) < 0.01


def test_mirror_symmetry_across_x(rig):
    point = rig.center + np.array([0.003, 0.0008, -0.002])
    mirrored = rig.center + np.array([-0.003, 0.0008, -0.002])
    f = acoustic_force(rig.array, rig.medium, point)
    g = acoustic_force(rig.array, rig.medium, mirrored)
    scale = np.max(np.abs(f))
    assert abs(f[0] + g[0]) / scale < 1e-9
    assert abs(f[1] - g[1]) / scale < 1e-9
    assert abs(f[2] - g[2]) / scale < 1e-9


def test_amplitude_scaling_squares_forces(rig):
    # power-of-two scale keeps the comparison exact in floating point
    doubled = rig.array.with_amplitude(float(rig.array.amplitudes[0]) * 2.0)
    pts = rig.center + np.array([[0.002, 0.0004, -0.001], [-0.001, -0.0006, 0.003]])
    f1 = acoustic_force(rig.array, rig.medium, pts)
    f2 = acoustic_force(doubled, rig.medium, pts)
    assert np.array_equal(f2, 4.0 * f1)
    u1 = gorkov_potential(rig.array, rig.medium, pts)
    u2 = gorkov_potential(doubled, rig.medium, pts)
    assert np.array_equal(u2, 4.0 * u1)


# ---------------------------------------------------------------- calibration

def test_calibration_hits_target_peak_force(rig):
    measured = rig.characterization.max_forces[1]
    assert 2.19e-4 <= measured <= 2.21e-4


def test_calibrated_lateral_peak_force(rig):
    assert 2.2e-5 <= rig.characterization.max_forces[0] <= 8.8e-5


def test_calibration_rejects_non_positive_target(rig):
    with pytest.raises(ValueError):
        calibrate_amplitude(rig.array, rig.medium, 0.0, rig.center)


# ---------------------------------------------------------------- linearization

def test_stiffness_ratios(rig):
    b = rig.characterization.stiffness
    assert 10.0 <= b[1] / b[0] <= 25.0
    assert 15.0 <= b[1] / b[2] <= 35.0


def test_linearize_recovers_synthetic_quadratic():
    kappa = np.array([0.02, 0.3, 0.015])
    force_fn = lambda pts: -kappa[None, :] * pts
    b = linearize_trap(None, None, np.zeros(3), force_fn=force_fn)
    assert np.allclose(b, kappa, rtol=1e-6)


def test_linearize_window_sensitivity(rig):
    b_full = rig.characterization.stiffness  # default window
    b_half = linearize_trap(rig.array, rig.medium, rig.center, fit_fraction=0.05)
    assert np.all(np.abs(b_half - b_full) / b_full < 0.05)


def test_linearize_rejects_non_restoring_axis():
    force_fn = lambda pts: np.column_stack([
        -0.02 * pts[:, 0], +0.1 * pts[:, 1], -0.015 * pts[:, 2]])
    with pytest.raises(DegenerateTrapError):
        linearize_trap(None, None, np.zeros(3), force_fn=force_fn)


def test_stiffness_matches_local_slope(rig):
    # b should equal the numerical -dF/dx at the center
    h = 5e-5
    for axis in range(3):
        plus = rig.center.copy()
        plus[axis] += h
        minus = rig.center.copy()
        minus[axis] -= h
        slope = (acoustic_force(rig.array, rig.medium, plus)[axis]
                 - acoustic_force(rig.array, rig.medium, minus)[axis]) / (2.0 * h)
        assert -slope == pytest.approx(rig.characterization.stiffness[axis], rel=0.05)


# ---------------------------------------------------------------- trap geometry

def test_vertical_trap_diameter(rig):
    assert 4e-3 <= rig.characterization.diameters[1] <= 6e-3


def test_lateral_trap_diameters_dwarf_vertical(rig):
    d = rig.characterization.diameters
    assert d[0] >= 2.0 * d[1]
    assert d[2] >= 2.0 * d[1]


def test_characterize_synthetic_sinusoid():
    wavelength = 8e-3
    amplitude = 2e-4
    force_fn = lambda pts: -amplitude * np.sin(2.0 * np.pi * pts / wavelength)
    scan_step = 1e-4
    ch = characterize_trap(None, None, np.zeros(3), scan_step=scan_step,
                           force_fn=force_fn)
    assert np.all(np.abs(ch.diameters / 2.0 - wavelength / 2.0) <= scan_step)
    assert np.allclose(ch.max_forces, amplitude, rtol=1e-3)


def test_scan_reports_volume_bounded_when_no_crossing():
    force_fn = lambda pts: -0.01 * pts  # restoring everywhere
    radius, fmax, _, bounded = scan_trap_axis(force_fn, np.zeros(3), 0, 1e-3, 0.05)
    assert bounded
    assert radius == pytest.approx(0.05, abs=1e-3)


def test_solve_trap_center_matches_focus(rig):
    # opposing panel runs half a cycle out of phase, so the node is the focus
    assert np.all(np.abs(rig.center - LEVITATION_VOLUME.center) < 1e-6)


def test_solve_trap_off_center():
    array = build_two_panel_array()
    medium = MediumAndParticle()
    target = np.array([0.02, 0.01, -0.01])
    focused, center = solve_trap(array, medium, target)
    assert np.all(np.abs(center - target) < 1e-4)
    f = acoustic_force(focused, medium, center)
    assert np.all(np.abs(f) < 1e-8)


# ---------------------------------------------------------------- interfaces

def test_export_force_profiles(rig, tmp_path):
    import csv
    path = tmp_path / "profiles.csv"
    field.export_force_profiles(rig.array, rig.medium, rig.center, path, scan_step=2e-3)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["axis", "displacement_m", "Fx_N", "Fy_N", "Fz_N"]
    axes = {row[0] for row in rows[1:]}
    assert axes == {"x", "y", "z"}
    # displacement column parses and brackets zero
    displacements = [float(r[1]) for r in rows[1:] if r[0] == "x"]
    assert min(displacements) < 0.0 < max(displacements)


def test_load_array_config(tmp_path):
    import json
    cfg = {
        "grid": [14, 9],
        "pitch_m": 0.01,
        "separation_m": 0.15,
        "frequency_hz": 40000.0,
        "amplitude_pa_m": 1.5,
        "medium": {"sound_speed_m_s": 343.0, "density_kg_m3": 1.18},
        "particle": {"sound_speed_m_s": 2400.0, "density_kg_m3": 25.0, "radius_m": 0.001},
    }
    path = tmp_path / "rig.json"
    path.write_text(json.dumps(cfg))
    array, medium = field.load_array_config(path)
    assert len(array.transducers) == 252
    assert array.amplitudes[0] == 1.5
    assert medium.particle_density == 25.0
