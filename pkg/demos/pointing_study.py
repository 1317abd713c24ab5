"""A complete pointing experiment against the simulator, start to finish.

Schedules the six within-interface conditions with a balanced Latin square,
runs scripted reciprocal movements through the live tick loop with the hit
harness attached, then feeds the recorded logs through the analysis CLI
pipeline: hit detection, warm-up discard, regression and throughput.

Run:  python demos/pointing_study.py
"""

import tempfile
from pathlib import Path

import numpy as np

from sonotrap.fitts import (
    PointingHarness,
    PointingTask,
    analyze_logs,
    generate_condition_schedule,
)
from sonotrap.geometry import LEVITATION_VOLUME
from sonotrap.protocol import TrapCommand
from sonotrap.server import GainConfig, ServerConfig, SimServer
from sonotrap.session import SessionRecorder

AMPLITUDE = 0.05  # 5 cm between target centers
WIDTHS = (0.016, 0.008, 0.004)

conditions = []
for direction in ("left-right", "front-back"):
    axis = 0 if direction == "left-right" else 2
    for width in WIDTHS:
        a = LEVITATION_VOLUME.center.copy()
        b = LEVITATION_VOLUME.center.copy()
        a[axis] -= AMPLITUDE / 2.0
        b[axis] += AMPLITUDE / 2.0
        task = PointingTask(target_a=a, target_b=b, width=width, direction=direction)
        conditions.append((f"{direction}-{int(width * 1e3)}mm", task))

participant = 4
schedule = generate_condition_schedule(conditions, participant)
print(f"participant {participant} condition order: {[label for label, _ in schedule]}")

workdir = Path(tempfile.mkdtemp(prefix="pointing_"))
log_paths = []
for label, task in schedule:
    server = SimServer(ServerConfig(gain=GainConfig(ratio=1.0)))
    harness = PointingHarness(task)
    server.frame_taggers.append(harness.frame_events)
    path = workdir / f"{label}.csv"
    recorder = SessionRecorder(path)
    server.frame_sinks.append(recorder.write)

    # scripted operator: alternate targets, with a Fitts-plausible cadence
    # (harder conditions get proportionally longer movement intervals)
    dwell_ticks = 40 + round(16 * task.index_of_difficulty)
    commands = {}
    seq = 0
    targets = (task.target_a, task.target_b)
    for movement in range(72):
        seq += 1
        tick = movement * dwell_ticks
        commands[tick] = [TrapCommand(seq, tick, targets[movement % 2].copy())]
    server.run_ticks(72 * dwell_ticks, commands=commands)
    recorder.close()

    sidecar = path.with_suffix(".csv.task.json")
    sidecar.write_text(
        '{"label": "%s", "target_a_m": %s, "target_b_m": %s, "width_m": %r, '
        '"direction": "%s"}' % (label, task.target_a.tolist(), task.target_b.tolist(),
                                task.width, task.direction))
    log_paths.append(path)
    print(f"  {label}: {len(harness.hit_timestamps_us)} hits recorded")

model = analyze_logs(log_paths, workdir / "results.csv")
print(f"\nfit over {len(log_paths)} conditions:")
print(f"  MT = {model.intercept_s:.3f} + {model.slope_s_per_bit:.3f} * ID")
print(f"  R^2 = {model.r_squared:.3f}")
print(f"  throughput = {model.throughput_bits_per_s:.2f} bits/s")
print(f"outputs: {workdir}/results.csv and results_model.csv")
