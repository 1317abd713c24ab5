"""Shared fixtures: the calibrated default rig is expensive, solve it once."""

import warnings
from dataclasses import dataclass

import numpy as np
import pytest

from sonotrap import field
from sonotrap.geometry import LEVITATION_VOLUME


@dataclass(frozen=True)
class Rig:
    array: field.TransducerArray  # focused + calibrated
    medium: field.MediumAndParticle
    center: np.ndarray
    characterization: field.TrapCharacterization


@pytest.fixture(scope="session")
def rig() -> Rig:
    """Default two-panel rig, trapped at the volume center, calibrated to the
    2.2e-4 N peak vertical force anchor."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", field.ParticleSizeWarning)
        array = field.build_two_panel_array()
        medium = field.MediumAndParticle()
        focused, center = field.solve_trap(array, medium, LEVITATION_VOLUME.center)
        amplitude = field.calibrate_amplitude(focused, medium, 2.2e-4, center)
        calibrated = focused.with_amplitude(amplitude)
        characterization = field.characterize_trap(calibrated, medium, center)
    return Rig(calibrated, medium, center, characterization)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    rows = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = str(getattr(report, "nodeid", ""))
            if "test_acceptance" in nodeid and "::" in nodeid:
                rows.append((nodeid.split("::")[-1], outcome))
    if not rows:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in sorted(rows):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}")
