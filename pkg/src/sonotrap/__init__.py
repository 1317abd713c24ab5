"""Phased-array acoustic levitation sandbox.

Subpackages cover the trap field model (:mod:`sonotrap.field`), bead motion
(:mod:`sonotrap.dynamics`), the real-time interaction server
(:mod:`sonotrap.server` and friends), pointing-study tooling
(:mod:`sonotrap.fitts`) and the two minigames (:mod:`sonotrap.games`).
"""

from .geometry import Box, LEVITATION_VOLUME

__all__ = ["Box", "LEVITATION_VOLUME"]
__version__ = "0.1.0"
