"""Axis-aligned working volume shared by the field, server and game code."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Box:
    """Axis-aligned box, lo/hi corners in metres."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != (3,) or hi.shape != (3,):
            raise ValueError("box corners must be 3-vectors")
        if np.any(hi <= lo):
            raise ValueError("box must have positive extent on every axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @property
    def size(self) -> np.ndarray:
        return self.hi - self.lo

    def contains(self, point, margin: float = 0.0) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(p >= self.lo - margin) and np.all(p <= self.hi + margin))

    def clamp(self, point) -> np.ndarray:
        return np.clip(np.asarray(point, dtype=float), self.lo, self.hi)

    def grow(self, margin: float) -> "Box":
        return Box(self.lo - margin, self.hi + margin)


# Working volume of the two-panel rig: 14 cm across the long panel edge (x),
# 10.6 cm between the opposed panels (y, vertical), 9 cm along the short
# panel edge (z).  Centered on the origin.
LEVITATION_VOLUME = Box(
    lo=np.array([-0.07, -0.053, -0.045]),
    hi=np.array([0.07, 0.053, 0.045]),
)
