"""Result containers shared by the solver engines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Trace:
    """Per-sweep series recorded during a single run (sweep-end values)."""

    energy: np.ndarray
    best_energy: np.ndarray
    control: np.ndarray
    control_name: str  # "p_s" or "temperature"

    def __len__(self) -> int:
        return len(self.energy)


@dataclass(frozen=True)
class SolveResult:
    """Outcome of one solver run."""

    final_spins: np.ndarray
    best_spins: np.ndarray
    final_energy: int
    best_energy: int
    sweeps: int
    max_update_delta_e: int | None = None
    trace: Trace | None = None
