"""Control-parameter schedules: sparsity ramps and annealing temperature ramps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import ValidationError


@dataclass(frozen=True)
class SparsitySchedule:
    """Linear sparsity ramp evaluated once per sweep.

    value(t) = p_init + (p_fin - p_init) * t / (t_fin - 1), so both endpoints
    are hit exactly; t_fin == 1 stays at p_init.
    """

    p_init: float
    p_fin: float
    t_fin: int
    shape: str = "linear"

    def __post_init__(self):
        if self.shape != "linear":
            raise ValidationError(f"unsupported sparsity schedule shape {self.shape!r}")
        if not 0.0 <= self.p_fin <= self.p_init <= 1.0:
            raise ValidationError(
                f"need 0 <= p_fin <= p_init <= 1, got p_init={self.p_init}, p_fin={self.p_fin}"
            )
        if int(self.t_fin) < 1:
            raise ValidationError(f"t_fin must be >= 1, got {self.t_fin}")
        object.__setattr__(self, "p_init", float(self.p_init))
        object.__setattr__(self, "p_fin", float(self.p_fin))
        object.__setattr__(self, "t_fin", int(self.t_fin))

    def value(self, t: int) -> float:
        if not 0 <= t < self.t_fin:
            raise ValidationError(f"sweep index {t} out of range [0, {self.t_fin})")
        if self.t_fin == 1:
            return self.p_init
        return self.p_init + (self.p_fin - self.p_init) * t / (self.t_fin - 1)

    def values(self) -> np.ndarray:
        """Per-sweep sparsity values, length t_fin."""
        return np.array([self.value(t) for t in range(self.t_fin)], dtype=np.float64)

    @staticmethod
    def constant(p_s: float, sweeps: int) -> "SparsitySchedule":
        return SparsitySchedule(p_init=p_s, p_fin=p_s, t_fin=sweeps)


@dataclass(frozen=True)
class BetaLinear:
    """Temperature schedule linear in inverse temperature: T(t) = 1 / beta(t)."""

    beta_start: float
    beta_end: float
    t_fin: int

    def __post_init__(self):
        if not 0.0 < self.beta_start <= self.beta_end:
            raise ValidationError(
                f"need 0 < beta_start <= beta_end, got {self.beta_start}, {self.beta_end}"
            )
        if int(self.t_fin) < 1:
            raise ValidationError(f"t_fin must be >= 1, got {self.t_fin}")
        object.__setattr__(self, "beta_start", float(self.beta_start))
        object.__setattr__(self, "beta_end", float(self.beta_end))
        object.__setattr__(self, "t_fin", int(self.t_fin))

    def temperature(self, t: int) -> float:
        if not 0 <= t < self.t_fin:
            raise ValidationError(f"sweep index {t} out of range [0, {self.t_fin})")
        if self.t_fin == 1:
            return 1.0 / self.beta_start
        beta = self.beta_start + (self.beta_end - self.beta_start) * t / (self.t_fin - 1)
        return 1.0 / beta

    def values(self) -> np.ndarray:
        return np.array([self.temperature(t) for t in range(self.t_fin)], dtype=np.float64)

    def describe(self) -> str:
        return f"beta_linear({self.beta_start:g}->{self.beta_end:g})"


@dataclass(frozen=True)
class TempLinear:
    """Temperature schedule linear in T (the shape of a sparsity-mapped ramp)."""

    t_start: float
    t_end: float
    t_fin: int

    def __post_init__(self):
        if not self.t_start >= self.t_end > 0.0:
            raise ValidationError(
                f"need t_start >= t_end > 0, got {self.t_start}, {self.t_end}"
            )
        if int(self.t_fin) < 1:
            raise ValidationError(f"t_fin must be >= 1, got {self.t_fin}")
        object.__setattr__(self, "t_start", float(self.t_start))
        object.__setattr__(self, "t_end", float(self.t_end))
        object.__setattr__(self, "t_fin", int(self.t_fin))

    def temperature(self, t: int) -> float:
        if not 0 <= t < self.t_fin:
            raise ValidationError(f"sweep index {t} out of range [0, {self.t_fin})")
        if self.t_fin == 1:
            return self.t_start
        return self.t_start + (self.t_end - self.t_start) * t / (self.t_fin - 1)

    def values(self) -> np.ndarray:
        return np.array([self.temperature(t) for t in range(self.t_fin)], dtype=np.float64)

    def describe(self) -> str:
        return f"temp_linear({self.t_start:g}->{self.t_end:g})"

    @staticmethod
    def constant(temperature: float, sweeps: int) -> "TempLinear":
        return TempLinear(t_start=temperature, t_end=temperature, t_fin=sweeps)


TemperatureSchedule = BetaLinear | TempLinear
