"""Solve a trap, calibrate it, and look at the force landscape.

Builds the default two-panel rig, focuses a trap at the volume center,
calibrates the emitter drive so the peak vertical restoring force is
2.2e-4 N, then characterizes the trap and exports per-axis force profiles
to CSV.  With matplotlib installed, also plots the three profiles.

Run:  python demos/trap_force_field.py [out.csv]
"""

import sys
import warnings

import numpy as np

from sonotrap import field
from sonotrap.geometry import LEVITATION_VOLUME

warnings.simplefilter("ignore", field.ParticleSizeWarning)

out_path = sys.argv[1] if len(sys.argv) > 1 else "force_profiles.csv"

print("Building the 2 x 14 x 9 emitter rig ...")
array = field.build_two_panel_array()
medium = field.MediumAndParticle()
print(f"  frequency {array.frequency / 1e3:.0f} kHz, wavelength {array.wavelength * 1e3:.2f} mm")
print(f"  bead: {medium.particle_radius * 2e3:.1f} mm EPS sphere, "
      f"mass {medium.particle_mass * 1e9:.1f} ng" .replace("ng", "e-9 kg"))

print("Focusing the trap at the volume center ...")
focused, center = field.solve_trap(array, medium, LEVITATION_VOLUME.center)
residual = np.abs(field.acoustic_force(focused, medium, center)).max()
print(f"  trap center {np.round(center * 1e3, 3).tolist()} mm, residual force {residual:.2e} N")

print("Calibrating the emitter amplitude to a 2.2e-4 N vertical peak ...")
amplitude = field.calibrate_amplitude(focused, medium, 2.2e-4, center)
calibrated = focused.with_amplitude(amplitude)
print(f"  common amplitude: {amplitude:.3f} Pa*m")

print("Characterizing the trap (0.1 mm per-axis scan) ...")
trap = field.characterize_trap(calibrated, medium, center)
for i, axis in enumerate("xyz"):
    print(f"  {axis}: diameter {trap.diameters[i] * 1e3:6.2f} mm   "
          f"peak force {trap.max_forces[i]:.2e} N   "
          f"stiffness {trap.stiffness[i]:.4f} N/m")
print(f"  stiffness anisotropy: b_y/b_x = {trap.stiffness[1] / trap.stiffness[0]:.1f}, "
      f"b_y/b_z = {trap.stiffness[1] / trap.stiffness[2]:.1f}")

field.export_force_profiles(calibrated, medium, center, out_path, scan_step=2e-4)
print(f"Force profiles written to {out_path}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not installed; skipping the plot")
    sys.exit(0)

import csv

profiles = {"x": [], "y": [], "z": []}
with open(out_path, newline="") as fh:
    reader = csv.reader(fh)
    next(reader)
    for axis, displacement, fx, fy, fz in reader:
        force = {"x": fx, "y": fy, "z": fz}[axis]
        profiles[axis].append((float(displacement), float(force)))

fig, axes = plt.subplots(1, 3, figsize=(12, 3.2), sharey=False)
for ax, axis in zip(axes, "xyz"):
    data = np.array(profiles[axis])
    ax.plot(data[:, 0] * 1e3, data[:, 1] * 1e6)
    ax.axhline(0.0, color="gray", lw=0.5)
    ax.set_title(f"restoring force along {axis}")
    ax.set_xlabel("displacement (mm)")
    ax.set_ylabel("force (uN)")
fig.tight_layout()
fig.savefig("force_profiles.png", dpi=120)
print("Plot saved to force_profiles.png")
