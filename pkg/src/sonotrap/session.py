"""Per-frame session logs: CSV recording, reading and replay.

One row per rendered frame: timestamp, raw input position, applied trap,
particle position and an event tag column (semicolon-separated when several
events land on one frame).  Replay re-emits the logged particle stream
without re-simulating.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .protocol import FLAG_ESCAPED, FLAG_TARGET_HIT, ParticleUpdate

SESSION_COLUMNS = ["frame_us", "in_x", "in_y", "in_z", "trap_x", "trap_y", "trap_z",
                   "p_x", "p_y", "p_z", "event"]


class ReplayFormatError(RuntimeError):
    """Corrupt session log row; carries the 1-based row number."""

    def __init__(self, message: str, row: int):
        super().__init__(f"{message} (row {row})")
        self.row = row


@dataclass(frozen=True)
class FrameRecord:
    frame_us: int
    input_position: np.ndarray  # m
    trap_position: np.ndarray  # m
    particle_position: np.ndarray  # m
    event: str = ""

    def __post_init__(self):
        for name in ("input_position", "trap_position", "particle_position"):
            value = np.asarray(getattr(self, name), dtype=float)
            if value.shape != (3,):
                raise ValueError(f"{name} must be a 3-vector")
            object.__setattr__(self, name, value)


class SessionRecorder:
    """Streams FrameRecords to a CSV file; timestamps must strictly increase."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="")
        self._writer = csv.writer(self._fh)
        self._writer.writerow(SESSION_COLUMNS)
        self._last_us = -1
        self.frames_written = 0

    def write(self, frame: FrameRecord) -> None:
        if frame.frame_us <= self._last_us:
            raise ValueError("frame timestamps must strictly increase")
        self._last_us = frame.frame_us
        self._writer.writerow(
            [frame.frame_us]
            + [repr(float(v)) for v in frame.input_position]
            + [repr(float(v)) for v in frame.trap_position]
            + [repr(float(v)) for v in frame.particle_position]
            + [frame.event])
        self.frames_written += 1

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.flush()
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_session(path) -> list[FrameRecord]:
    """Parse a session CSV; raises ReplayFormatError with the offending row."""
    frames = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for row_number, row in enumerate(reader, start=1):
            if row_number == 1:
                if row != SESSION_COLUMNS:
                    raise ReplayFormatError("unrecognized session header", 1)
                continue
            if len(row) != len(SESSION_COLUMNS):
                raise ReplayFormatError(f"expected {len(SESSION_COLUMNS)} columns, got {len(row)}",
                                        row_number)
            try:
                frames.append(FrameRecord(
                    frame_us=int(row[0]),
                    input_position=np.array([float(v) for v in row[1:4]]),
                    trap_position=np.array([float(v) for v in row[4:7]]),
                    particle_position=np.array([float(v) for v in row[7:10]]),
                    event=row[10]))
            except ValueError as exc:
                raise ReplayFormatError(f"unparseable row: {exc}", row_number) from exc
    return frames


def frame_to_update(frame: FrameRecord, sequence: int) -> ParticleUpdate:
    """Particle update re-emitted from a log row; velocity is not logged."""
    flags = 0
    events = frame.event.split(";") if frame.event else []
    if "escaped" in events:
        flags |= FLAG_ESCAPED
    if any(e.startswith("hit:") for e in events):
        flags |= FLAG_TARGET_HIT
    return ParticleUpdate(sequence, frame.frame_us, frame.particle_position,
                          np.zeros(3), flags)


def replay_session(path, speed: float = 1.0, pace: bool = True) -> Iterator[FrameRecord]:
    """Yield logged frames, paced by their timestamp spacing over ``speed``."""
    if not speed > 0.0:
        raise ValueError("replay speed must be positive")
    frames = read_session(path)
    if not frames:
        return
    start_wall = time.perf_counter()
    start_us = frames[0].frame_us
    for frame in frames:
        if pace:
            due = start_wall + (frame.frame_us - start_us) / 1e6 / speed
            delay = due - time.perf_counter()
            if delay > 0:
                time.sleep(delay)
        yield frame
