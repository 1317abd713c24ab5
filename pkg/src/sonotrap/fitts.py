"""Reciprocal pointing experiment: task setup, hit detection and analysis.

Movements go back and forth between two invisible target spheres; a hit
fires the moment the bead enters the current sphere (closed ball), the
targets alternate, and movement time is the interval between consecutive
hits.  Analysis follows the Shannon formulation: ID = log2(D/W + 1),
MT = a + b*ID fitted on per-ID group means, and throughput is the mean of
ID over mean MT across the ID groups.  The first 20 movements of every
trial are warm-up and get discarded.
"""

from __future__ import annotations

import argparse
import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import Box, LEVITATION_VOLUME
from .session import FrameRecord, read_session

DISCARDED_WARMUP_MOVEMENTS = 20


class InsufficientDataError(ValueError):
    """Too few movements to survive the warm-up discard."""


@dataclass(frozen=True)
class PointingTask:
    """Two spherical targets, alternating, inside the levitation volume."""

    target_a: np.ndarray  # m
    target_b: np.ndarray  # m
    width: float  # m, sphere diameter
    direction: str = "left-right"  # or "front-back"
    repetitions: int = 70
    target_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    # per-session calibration shift applied to both targets

    def __post_init__(self):
        a = np.asarray(self.target_a, dtype=float) + np.asarray(self.target_offset, dtype=float)
        b = np.asarray(self.target_b, dtype=float) + np.asarray(self.target_offset, dtype=float)
        if not self.width > 0.0:
            raise ValueError("target width must be positive")
        if self.direction not in ("left-right", "front-back"):
            raise ValueError("direction must be 'left-right' or 'front-back'")
        for center in (a, b):
            if not (LEVITATION_VOLUME.contains(center - self.width / 2.0)
                    and LEVITATION_VOLUME.contains(center + self.width / 2.0)):
                raise ValueError("target spheres must lie inside the levitation volume")
        object.__setattr__(self, "target_a", a)
        object.__setattr__(self, "target_b", b)
        object.__setattr__(self, "target_offset", np.asarray(self.target_offset, dtype=float))

    @property
    def amplitude(self) -> float:
        """Center-to-center movement distance D (m)."""
        return float(np.linalg.norm(self.target_b - self.target_a))

    @property
    def index_of_difficulty(self) -> float:
        return index_of_difficulty(self.amplitude, self.width)


@dataclass(frozen=True)
class MovementLog:
    """Frames plus detected hits for one condition."""

    frames: tuple
    hit_timestamps_us: tuple  # strictly increasing
    task: PointingTask
    interface: str = "sim"

    def __post_init__(self):
        stamps = tuple(self.hit_timestamps_us)
        if any(b <= a for a, b in zip(stamps, stamps[1:])):
            raise ValueError("hit timestamps must strictly increase")
        object.__setattr__(self, "hit_timestamps_us", stamps)

    @property
    def movement_durations_s(self) -> np.ndarray:
        stamps = np.asarray(self.hit_timestamps_us, dtype=float)
        return np.diff(stamps) / 1e6


@dataclass(frozen=True)
class TrialSummary:
    id_bits: float
    mean_mt_s: float
    n_used: int
    n_discarded: int
    condition: str = ""

    def __post_init__(self):
        if not self.id_bits > 0.0:
            raise ValueError("index of difficulty must be positive")
        if not self.mean_mt_s > 0.0:
            raise ValueError("mean movement time must be positive")


@dataclass(frozen=True)
class FittsModel:
    intercept_s: float
    slope_s_per_bit: float
    r_squared: float
    throughput_bits_per_s: float

    def __post_init__(self):
        if not 0.0 <= self.r_squared <= 1.0 + 1e-12:
            raise ValueError("R^2 must lie in [0, 1]")


def index_of_difficulty(amplitude: float, width: float) -> float:
    """Shannon-form difficulty log2(D/W + 1) in bits."""
    if not width > 0.0:
        raise ValueError("target width must be positive")
    if amplitude < 0.0:
        raise ValueError("movement amplitude must be non-negative")
    return float(np.log2(amplitude / width + 1.0))


def detect_hits(frames, task: PointingTask) -> MovementLog:
    """Alternating-target hit detection over a frame sequence.

    The first target is A; a hit fires on the first frame with the bead
    inside the current sphere (distance <= W/2, closed), then the target
    switches.  Appends "hit:A"/"hit:B" labels in frame order.
    """
    frames = tuple(frames)
    if not frames:
        raise ValueError("need at least one frame")
    radius = task.width / 2.0
    centers = (task.target_a, task.target_b)
    current = 0
    stamps = []
    for frame in frames:
        if np.linalg.norm(frame.particle_position - centers[current]) <= radius:
            stamps.append(frame.frame_us)
            current = 1 - current
    return MovementLog(frames=frames, hit_timestamps_us=tuple(stamps), task=task)


def summarize_trial(durations, task: PointingTask, condition: str = "",
                    discard: int = DISCARDED_WARMUP_MOVEMENTS) -> TrialSummary:
    """Mean movement time after discarding the warm-up movements."""
    durations = np.asarray(durations, dtype=float)
    if len(durations) <= discard:
        raise InsufficientDataError(
            f"{len(durations)} movements, need more than {discard}")
    used = durations[discard:]
    return TrialSummary(
        id_bits=task.index_of_difficulty,
        mean_mt_s=float(np.mean(used)),
        n_used=len(used),
        n_discarded=discard,
        condition=condition)


def _group_means(points) -> tuple[np.ndarray, np.ndarray]:
    """Points are (id_bits, mt_s) pairs or TrialSummary; group by ID value."""
    groups: dict[float, list[float]] = {}
    for point in points:
        if isinstance(point, TrialSummary):
            groups.setdefault(point.id_bits, []).append(point.mean_mt_s)
        else:
            id_bits, mt = point
            groups.setdefault(float(id_bits), []).append(float(mt))
    ids = np.array(sorted(groups))
    mts = np.array([np.mean(groups[i]) for i in ids])
    return ids, mts


def fit_fitts(summaries) -> FittsModel:
    """OLS of group-mean MT on group-mean ID, plus group-mean throughput."""
    ids, mts = _group_means(summaries)
    if len(ids) < 2:
        raise ValueError("need at least two distinct ID groups to fit")
    id_center = ids - ids.mean()
    mt_center = mts - mts.mean()
    sxx = float(np.dot(id_center, id_center))
    sxy = float(np.dot(id_center, mt_center))
    syy = float(np.dot(mt_center, mt_center))
    slope = sxy / sxx
    intercept = float(mts.mean() - slope * ids.mean())
    r_squared = 1.0 if syy == 0.0 else min(1.0, sxy * sxy / (sxx * syy))
    return FittsModel(
        intercept_s=intercept,
        slope_s_per_bit=slope,
        r_squared=r_squared,
        throughput_bits_per_s=throughput(summaries))


def throughput(summaries) -> float:
    """Mean over ID groups of group ID / group mean MT (bits/s)."""
    ids, mts = _group_means(summaries)
    if len(ids) == 0:
        raise ValueError("need at least one ID group")
    return float(np.mean(ids / mts))


def participant_mean_throughput(per_participant_summaries) -> float:
    """Two-level mean: throughput per participant, then across participants."""
    return float(np.mean([throughput(s) for s in per_participant_summaries]))


def generate_condition_schedule(conditions, participant_id: int) -> list:
    """Balanced Latin square row for this participant (even condition count)."""
    if participant_id < 0:
        raise ValueError("participant id must be non-negative")
    conditions = list(conditions)
    n = len(conditions)
    if n == 0:
        return []
    if n % 2 != 0:
        raise ValueError("balanced Latin square construction needs an even count")
    # Williams design first row: 0, 1, n-1, 2, n-2, ...
    first = [0]
    low, high = 1, n - 1
    toggle = True
    while len(first) < n:
        first.append(low if toggle else high)
        if toggle:
            low += 1
        else:
            high -= 1
        toggle = not toggle
    row = participant_id % n
    return [conditions[(c + row) % n] for c in first]


class PointingHarness:
    """Live hit detector: attach to the server frame stream, tag hit events.

    Register :meth:`frame_events` in SimServer.frame_taggers.  Keeps the
    alternating-target state and the running hit list for later analysis.
    """

    def __init__(self, task: PointingTask):
        self.task = task
        self._current = 0
        self.hit_timestamps_us: list[int] = []

    def frame_events(self, frame_us: int, particle_position) -> list[str]:
        centers = (self.task.target_a, self.task.target_b)
        labels = ("hit:A", "hit:B")
        if np.linalg.norm(np.asarray(particle_position) - centers[self._current]) \
                <= self.task.width / 2.0:
            self.hit_timestamps_us.append(frame_us)
            label = labels[self._current]
            self._current = 1 - self._current
            return [label]
        return []

    @property
    def movement_durations_s(self) -> np.ndarray:
        return np.diff(np.asarray(self.hit_timestamps_us, dtype=float)) / 1e6


def load_conditions(path) -> list[tuple[str, PointingTask]]:
    """Condition list from JSON: label, targets, width, direction, repetitions."""
    with open(path) as fh:
        spec = json.load(fh)
    conditions = []
    for entry in spec["conditions"]:
        task = PointingTask(
            target_a=np.asarray(entry["target_a_m"], dtype=float),
            target_b=np.asarray(entry["target_b_m"], dtype=float),
            width=float(entry["width_m"]),
            direction=entry.get("direction", "left-right"),
            repetitions=int(entry.get("repetitions", 70)),
            target_offset=np.asarray(entry.get("target_offset_m", [0.0, 0.0, 0.0]),
                                     dtype=float))
        conditions.append((entry.get("label", f"id={task.index_of_difficulty:.2f}"), task))
    return conditions


def _task_from_sidecar(log_path: Path) -> tuple[str, PointingTask]:
    sidecar = log_path.with_suffix(log_path.suffix + ".task.json")
    if not sidecar.exists():
        raise FileNotFoundError(
            f"no task sidecar for {log_path}: expected {sidecar.name} next to it")
    with open(sidecar) as fh:
        entry = json.load(fh)
    task = PointingTask(
        target_a=np.asarray(entry["target_a_m"], dtype=float),
        target_b=np.asarray(entry["target_b_m"], dtype=float),
        width=float(entry["width_m"]),
        direction=entry.get("direction", "left-right"),
        repetitions=int(entry.get("repetitions", 70)),
        target_offset=np.asarray(entry.get("target_offset_m", [0.0, 0.0, 0.0]), dtype=float))
    return entry.get("label", log_path.stem), task


def analyze_logs(log_paths, out_path, group_by: str = "id") -> FittsModel:
    """detect_hits -> summarize -> fit over recorded session logs.

    Writes per-trial summaries to out_path and the fitted model next to it
    (suffix _model.csv).  Returns the fitted model.
    """
    if group_by != "id":
        raise ValueError("only --group-by id is supported")
    summaries = []
    for log_path in map(Path, log_paths):
        label, task = _task_from_sidecar(log_path)
        frames = read_session(log_path)
        log = detect_hits(frames, task)
        summaries.append(summarize_trial(log.movement_durations_s, task, condition=label))
    out_path = Path(out_path)
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["condition", "id_bits", "mean_mt_s", "n_used", "n_discarded"])
        for s in summaries:
            writer.writerow([s.condition, repr(s.id_bits), repr(s.mean_mt_s),
                             s.n_used, s.n_discarded])
    model = fit_fitts(summaries)
    model_path = out_path.with_name(out_path.stem + "_model.csv")
    with open(model_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["a_s", "b_s_per_bit", "r2", "tp_bits_per_s"])
        writer.writerow([repr(model.intercept_s), repr(model.slope_s_per_bit),
                         repr(model.r_squared), repr(model.throughput_bits_per_s)])
    return model


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sonotrap-analyze",
        description="Analysis over recorded pointing sessions.")
    sub = parser.add_subparsers(dest="command", required=True)
    fitts_cmd = sub.add_parser("fitts", help="Fitts'-law regression and throughput")
    fitts_cmd.add_argument("logs", nargs="+", help="session CSVs (each with a .task.json sidecar)")
    fitts_cmd.add_argument("--group-by", default="id", choices=["id"])
    fitts_cmd.add_argument("--out", required=True, help="summary CSV output path")
    args = parser.parse_args(argv)

    model = analyze_logs(args.logs, args.out, group_by=args.group_by)
    print(f"MT = {model.intercept_s:.3f} + {model.slope_s_per_bit:.3f} * ID  "
          f"(R^2 = {model.r_squared:.3f}, TP = {model.throughput_bits_per_s:.2f} bits/s)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
