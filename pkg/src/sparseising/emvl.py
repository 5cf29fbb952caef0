"""Majority-vote solver with scheduled connectivity sparsification (E-MVL).

Each spin update extracts a random subset of that spin's connection slots,
sums the extracted contributions into an internal signal, and sets the spin
to the signal's sign (fair coin on zero).  The extraction fraction is driven
by a sparsity ramp: high sparsity early emulates thermal fluctuations, zero
sparsity at the end turns every update into a strict majority vote that can
only lower the energy.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator

from . import _kernels
from .model import IsingModel
from .results import SolveResult, Trace
from .rng import Xoshiro256, trial_seeds
from .schedules import SparsitySchedule
from .validation import ValidationError, check_spin_index, check_spins

# Every spin exposes n connection slots: slot j != i is the coupling to spin j,
# slot i is the self slot contributing the external field (zero for SK runs).


def extraction_count(p_s: float, total_slots: int) -> int:
    """Number of slots extracted at sparsity p_s: max(1, floor((1 - p_s) * L))."""
    if not 0.0 <= p_s <= 1.0:
        raise ValidationError(f"sparsity must lie in [0, 1], got {p_s}")
    if total_slots < 1:
        raise ValidationError(f"slot count must be >= 1, got {total_slots}")
    return max(1, math.floor((1.0 - p_s) * total_slots))


def sample_extraction_set(rng: Xoshiro256, owner: int, total_slots: int, count: int) -> np.ndarray:
    """Uniform random count-subset of slots {0..total_slots-1} (partial shuffle)."""
    check_spin_index(owner, total_slots)
    if not 1 <= count <= total_slots:
        raise ValidationError(
            f"extraction count must lie in [1, {total_slots}], got {count}"
        )
    buf = np.arange(total_slots, dtype=np.int64)
    _kernels._partial_shuffle(rng.state, buf, count)
    return buf[:count].copy()


def internal_signal(model: IsingModel, spins, owner: int, members) -> int:
    """Partial local field over an extraction set.

    Slot owner contributes the external field (only if extracted); any other
    slot k contributes J[owner, k] * s_k.
    """
    s = check_spins(spins, model.n)
    owner = check_spin_index(owner, model.n)
    sig = 0
    for k in np.asarray(members, dtype=np.int64):
        k = check_spin_index(int(k), model.n)
        if k == owner:
            sig += int(model.fields[owner])
        else:
            sig += int(model.couplings[owner, k]) * int(s[k])
    return sig


def decide_spin(signal: int, rng: Xoshiro256) -> int:
    """Next spin value from the signal polarity; fair +/-1 when the signal is zero."""
    if signal > 0:
        return 1
    if signal < 0:
        return -1
    return rng.coin_spin()


def _result_from_kernel(out, schedule_values, control_name, collect_trace, max_de=None):
    sigma, best_sigma, e, be, trace_e, trace_b = out
    trace = None
    if collect_trace:
        trace = Trace(
            energy=trace_e,
            best_energy=trace_b,
            control=schedule_values,
            control_name=control_name,
        )
    return SolveResult(
        final_spins=sigma,
        best_spins=best_sigma,
        final_energy=int(e),
        best_energy=int(be),
        sweeps=len(schedule_values),
        max_update_delta_e=max_de,
        trace=trace,
    )


def run_emvl(
    model: IsingModel,
    schedule: SparsitySchedule,
    seed: int,
    collect_trace: bool = False,
) -> SolveResult:
    """Run the sparsified majority-vote solver for schedule.t_fin sweeps.

    Each sweep visits all spins in a fresh random permutation and updates them
    sequentially in place.  Deterministic in (model, schedule, seed); the RNG
    consumption order is documented in the kernel module.
    """
    ps = schedule.values()
    sigma, best_sigma, e, be, max_de, trace_e, trace_b = _kernels.emvl_run_kernel(
        model.couplings, model.fields, ps, np.uint64(seed), collect_trace
    )
    return _result_from_kernel(
        (sigma, best_sigma, e, be, trace_e, trace_b), ps, "p_s", collect_trace, int(max_de)
    )


def run_emvl_trials(
    model: IsingModel,
    schedule: SparsitySchedule,
    master_seed: int,
    trials: int,
    context: str | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Independent restarts; returns (final_energies, best_energies, stream_seeds).

    Trial k runs with stream seed hash(master_seed, context, k); context
    defaults to the instance id.
    """
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    ctx = model.instance_id if context is None else context
    seeds = trial_seeds(master_seed, ctx, trials)
    finals, bests = _kernels.emvl_batch_kernel(
        model.couplings, model.fields, schedule.values(), seeds
    )
    return finals, bests, seeds


class EMVLSolver(BaseEstimator):
    """Estimator wrapper: fit(model) runs one solve and stores the outcome.

    Attributes after fit: best_state_, best_energy_, final_state_,
    final_energy_, trace_ (None unless collect_trace), result_.
    """

    def __init__(
        self,
        p_init: float = 0.4,
        p_fin: float = 0.0,
        t_fin: int = 1000,
        engine: str = "arithmetic",
        random_state: int = 0,
        collect_trace: bool = False,
    ):
        self.p_init = p_init
        self.p_fin = p_fin
        self.t_fin = t_fin
        self.engine = engine
        self.random_state = random_state
        self.collect_trace = collect_trace

    def fit(self, model: IsingModel, y=None):
        schedule = SparsitySchedule(self.p_init, self.p_fin, self.t_fin)
        if self.engine == "arithmetic":
            result = run_emvl(model, schedule, self.random_state, self.collect_trace)
        elif self.engine == "bits":
            from .gatesim import run_emvl_bits

            result = run_emvl_bits(model, schedule, self.random_state, self.collect_trace)
        else:
            raise ValidationError(f"unknown engine {self.engine!r}")
        self.result_ = result
        self.final_state_ = result.final_spins
        self.best_state_ = result.best_spins
        self.final_energy_ = result.final_energy
        self.best_energy_ = result.best_energy
        self.trace_ = result.trace
        return self
