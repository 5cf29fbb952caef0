"""Input validation helpers and the package exception hierarchy."""

from __future__ import annotations

import numpy as np


class ValidationError(ValueError):
    """An input violates a documented contract (bad spins, bad schedule, ...)."""


class ParseError(ValidationError):
    """An instance file could not be parsed; message names the offending line."""


class BracketingError(RuntimeError):
    """A temperature bracket does not enclose the target mean energy."""


class ExtrapolationError(RuntimeError):
    """Linear extrapolation of the sparsity-temperature map failed."""


class GroundTruthError(RuntimeError):
    """A reference energy is missing or cannot be computed under the given cap."""


def check_spins(spins, n: int) -> np.ndarray:
    """Validate a spin vector (length n, entries exactly -1 or +1) and return it as int8."""
    arr = np.ascontiguousarray(spins, dtype=np.int8)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise ValidationError(f"spin vector must have shape ({n},), got {arr.shape}")
    if not np.all((arr == 1) | (arr == -1)):
        raise ValidationError("spin entries must be exactly -1 or +1")
    return arr


def check_spin_index(i: int, n: int) -> int:
    i = int(i)
    if not 0 <= i < n:
        raise ValidationError(f"spin index {i} out of range for n={n}")
    return i


def check_probability(value: float, name: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{name} must lie in [0, 1], got {value}")
    return value


def check_positive(value, name: str):
    if value <= 0:
        raise ValidationError(f"{name} must be positive, got {value}")
    return value
