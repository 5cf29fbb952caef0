"""Metropolis simulated annealing baselines.

Two variants with identical Markov chains: the conventional one recomputes
the local field for every proposal by a row scan; the optimized one keeps an
incrementally updated local-field cache (and a per-sweep table of uphill
acceptance probabilities for unit couplings).  Given the same seed both
produce the same trajectory, which is asserted in the tests.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator

from . import _kernels
from .model import IsingModel
from .results import SolveResult, Trace
from .rng import Xoshiro256, trial_seeds
from .schedules import BetaLinear, TemperatureSchedule, TempLinear
from .validation import ValidationError

VARIANTS = ("conventional", "optimized")


def metropolis_accept(delta_e: int, temperature: float, rng: Xoshiro256) -> bool:
    """Accept with probability min(1, exp(-delta_e / T)); no draw for downhill moves."""
    if temperature <= 0:
        raise ValidationError(f"temperature must be positive, got {temperature}")
    if delta_e <= 0:
        return True
    return rng.random() < math.exp(-float(delta_e) / temperature)


def _table_config(model: IsingModel, variant: str) -> tuple[bool, int]:
    if variant != "optimized":
        return False, 1
    max_abs = int(np.max(np.abs(model.couplings))) if model.n > 1 else 0
    if max_abs > 1:
        return False, 1
    dmax = 2 * int(
        np.max(np.sum(np.abs(model.couplings.astype(np.int64)), axis=1) + np.abs(model.fields))
    )
    return True, max(dmax, 1)


def run_sa(
    model: IsingModel,
    schedule: TemperatureSchedule,
    seed: int,
    variant: str = "conventional",
    collect_trace: bool = False,
) -> SolveResult:
    """Anneal for schedule.t_fin sweeps (random visit order, single-flip proposals)."""
    if variant not in VARIANTS:
        raise ValidationError(f"variant must be one of {VARIANTS}, got {variant!r}")
    temps = schedule.values()
    use_table, dmax = _table_config(model, variant)
    sigma, best_sigma, e, be, trace_e, trace_b = _kernels.sa_run_kernel(
        model.couplings,
        model.fields,
        temps,
        np.uint64(seed),
        variant == "optimized",
        use_table,
        np.int64(dmax),
        collect_trace,
    )
    trace = None
    if collect_trace:
        trace = Trace(
            energy=trace_e, best_energy=trace_b, control=temps, control_name="temperature"
        )
    return SolveResult(
        final_spins=sigma,
        best_spins=best_sigma,
        final_energy=int(e),
        best_energy=int(be),
        sweeps=len(temps),
        trace=trace,
    )


def run_sa_trials(
    model: IsingModel,
    schedule: TemperatureSchedule,
    master_seed: int,
    trials: int,
    variant: str = "conventional",
    context: str | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Independent annealing restarts; see run_emvl_trials for the seed discipline."""
    if variant not in VARIANTS:
        raise ValidationError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    ctx = model.instance_id if context is None else context
    seeds = trial_seeds(master_seed, ctx, trials)
    use_table, dmax = _table_config(model, variant)
    finals, bests = _kernels.sa_batch_kernel(
        model.couplings,
        model.fields,
        schedule.values(),
        seeds,
        variant == "optimized",
        use_table,
        np.int64(dmax),
    )
    return finals, bests, seeds


def best_energy_stagnation(trace: Trace, tail_fraction: float = 0.5) -> bool:
    """True when the best-so-far energy stops improving over the trailing fraction
    of sweeps (the premature-freezing signature of a too-cold schedule)."""
    if not 0.0 < tail_fraction < 1.0:
        raise ValidationError(f"tail_fraction must lie in (0, 1), got {tail_fraction}")
    sweeps = len(trace)
    if sweeps < 2:
        return False
    cut = sweeps - int(math.ceil(sweeps * tail_fraction))
    cut = max(cut, 1)
    best = np.minimum.accumulate(trace.energy)
    return int(best[cut - 1]) == int(best[-1])


class SASolver(BaseEstimator):
    """Estimator wrapper around run_sa; attributes mirror EMVLSolver."""

    def __init__(
        self,
        schedule: TemperatureSchedule | None = None,
        variant: str = "conventional",
        random_state: int = 0,
        collect_trace: bool = False,
    ):
        self.schedule = schedule
        self.variant = variant
        self.random_state = random_state
        self.collect_trace = collect_trace

    def fit(self, model: IsingModel, y=None):
        schedule = self.schedule
        if schedule is None:
            schedule = BetaLinear(beta_start=0.01, beta_end=10.0, t_fin=1000)
        result = run_sa(
            model, schedule, self.random_state, self.variant, self.collect_trace
        )
        self.result_ = result
        self.final_state_ = result.final_spins
        self.best_state_ = result.best_spins
        self.final_energy_ = result.final_energy
        self.best_energy_ = result.best_energy
        self.trace_ = result.trace
        return self
