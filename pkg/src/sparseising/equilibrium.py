"""Fixed-parameter equilibrium sampling and sparsity-to-temperature calibration.

Holding the sparsity of the majority-vote solver constant yields a stationary
energy distribution; Metropolis sampling at a constant temperature does the
same.  Matching the two mean energies by bisection gives the temperature
equivalent of each sparsity level, and a linear fit over the low-sparsity
regime (p_s <= 0.6, where the relationship is approximately linear)
extrapolates to the temperature at zero sparsity.  Mapping a linear sparsity
ramp through that relation produces a linear annealing temperature schedule.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import _kernels
from .model import Distribution, IsingModel, generate_instance
from .rng import derive_seed, trial_seeds
from .schedules import SparsitySchedule, TempLinear
from .validation import (
    BracketingError,
    ExtrapolationError,
    ValidationError,
    check_positive,
)

BURN_IN_SWEEPS_DEFAULT = 1000
TRIALS_DEFAULT = 10000
LINEAR_REGIME_MAX_PS = 0.6


@dataclass(frozen=True)
class EquilibriumSample:
    """Final-energy statistics of many independent chains at one control value."""

    control_kind: str  # "sparsity" or "temperature"
    control_value: float
    energies: np.ndarray
    mean: float
    std: float
    bin_edges: np.ndarray
    bin_counts: np.ndarray
    unreliable: bool = False

    @property
    def trials(self) -> int:
        return int(self.energies.size)

    @property
    def stderr(self) -> float:
        return float(self.std / math.sqrt(self.trials)) if self.trials else float("nan")

    @staticmethod
    def from_energies(
        control_kind: str, control_value: float, energies: np.ndarray, unreliable: bool = False
    ) -> "EquilibriumSample":
        energies = np.asarray(energies, dtype=np.int64)
        if energies.size < 1:
            raise ValidationError("equilibrium sample needs at least one trial")
        mean = float(energies.mean())
        std = float(energies.std(ddof=1)) if energies.size > 1 else 0.0
        if energies.min() == energies.max():
            edges = np.array([energies[0] - 0.5, energies[0] + 0.5], dtype=np.float64)
        else:
            edges = np.histogram_bin_edges(energies, bins="fd")
        counts, edges = np.histogram(energies, bins=edges)
        return EquilibriumSample(
            control_kind=control_kind,
            control_value=float(control_value),
            energies=energies,
            mean=mean,
            std=std,
            bin_edges=edges,
            bin_counts=counts,
            unreliable=unreliable,
        )


def sample_emvl_equilibrium(
    model: IsingModel,
    p_s: float,
    trials: int = TRIALS_DEFAULT,
    burn_in_sweeps: int = BURN_IN_SWEEPS_DEFAULT,
    seed: int = 0,
) -> EquilibriumSample:
    """Final energies of `trials` fixed-sparsity chains from random starts.

    p_s = 0 is rejected: with every interaction active the dynamics descend
    to a local minimum instead of reaching a stationary distribution.
    """
    if not 0.0 < p_s <= 1.0:
        raise ValidationError(
            "fixed sparsity must lie in (0, 1]: at p_s = 0 updates are strict "
            "majority votes and no equilibrium is established"
        )
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    if burn_in_sweeps < 1:
        raise ValidationError(f"burn_in_sweeps must be >= 1, got {burn_in_sweeps}")
    seeds = trial_seeds(seed, f"{model.instance_id}/eq-ps-{p_s!r}", trials)
    ps = SparsitySchedule.constant(p_s, burn_in_sweeps).values()
    finals, _bests = _kernels.emvl_batch_kernel(model.couplings, model.fields, ps, seeds)
    return EquilibriumSample.from_energies("sparsity", p_s, finals, unreliable=p_s == 1.0)


def sample_mcmc_equilibrium(
    model: IsingModel,
    temperature: float,
    trials: int = TRIALS_DEFAULT,
    burn_in_sweeps: int = BURN_IN_SWEEPS_DEFAULT,
    seed: int = 0,
) -> EquilibriumSample:
    """Final energies of `trials` fixed-temperature Metropolis chains."""
    check_positive(temperature, "temperature")
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    if burn_in_sweeps < 1:
        raise ValidationError(f"burn_in_sweeps must be >= 1, got {burn_in_sweeps}")
    seeds = trial_seeds(seed, f"{model.instance_id}/eq-t-{temperature!r}", trials)
    temps = TempLinear.constant(temperature, burn_in_sweeps).values()
    use_table = int(np.max(np.abs(model.couplings))) <= 1 if model.n > 1 else False
    dmax = 1
    if use_table:
        dmax = max(
            2
            * int(
                np.max(
                    np.sum(np.abs(model.couplings.astype(np.int64)), axis=1)
                    + np.abs(model.fields)
                )
            ),
            1,
        )
    finals, _bests = _kernels.sa_batch_kernel(
        model.couplings, model.fields, temps, seeds, True, use_table, np.int64(dmax)
    )
    return EquilibriumSample.from_energies("temperature", temperature, finals)


@dataclass(frozen=True)
class TemperatureFit:
    """Bisection result matching Metropolis mean energy to a target sample."""

    temperature: float
    ks_distance: float
    achieved_mean: float
    target_mean: float
    iterations: int


def fit_temperature(
    model: IsingModel,
    target: EquilibriumSample,
    t_lo: float,
    t_hi: float,
    tolerance: float,
    seed: int = 0,
    trials: int = 2000,
    burn_in_sweeps: int = 300,
    max_iterations: int = 40,
    rel_width: float = 0.005,
) -> TemperatureFit:
    """Bisect on temperature until the Metropolis mean energy matches target.mean.

    Mean energy is monotone in temperature, so bisection converges; stops when
    the mean is within `tolerance` (energy units) or the bracket width falls
    below rel_width * temperature.  Reports the two-sample Kolmogorov-Smirnov
    distance at the fitted temperature as a fit-quality diagnostic.
    """
    check_positive(t_lo, "t_lo")
    if t_hi <= t_lo:
        raise ValidationError(f"need t_lo < t_hi, got [{t_lo}, {t_hi}]")
    check_positive(tolerance, "tolerance")

    def mean_at(temperature: float, tag) -> tuple[float, EquilibriumSample]:
        sample = sample_mcmc_equilibrium(
            model,
            temperature,
            trials=trials,
            burn_in_sweeps=burn_in_sweeps,
            seed=derive_seed(seed, "fit-temperature", tag),
        )
        return sample.mean, sample

    target_mean = target.mean
    mean_lo, _ = mean_at(t_lo, "lo")
    mean_hi, _ = mean_at(t_hi, "hi")
    if not mean_lo <= target_mean <= mean_hi:
        raise BracketingError(
            f"target mean {target_mean:.2f} is outside [{mean_lo:.2f}, {mean_hi:.2f}] "
            f"for temperatures [{t_lo}, {t_hi}]; widen the bracket"
        )
    lo, hi = float(t_lo), float(t_hi)
    mid = 0.5 * (lo + hi)
    mid_sample = None
    iterations = 0
    for k in range(max_iterations):
        mid = 0.5 * (lo + hi)
        mean_mid, mid_sample = mean_at(mid, k)
        iterations = k + 1
        if abs(mean_mid - target_mean) <= tolerance:
            break
        if mean_mid < target_mean:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rel_width * mid:
            mid = 0.5 * (lo + hi)
            _, mid_sample = mean_at(mid, f"final-{k}")
            iterations = k + 2
            break
    ks = float(stats.ks_2samp(target.energies, mid_sample.energies).statistic)
    return TemperatureFit(
        temperature=float(mid),
        ks_distance=ks,
        achieved_mean=mid_sample.mean,
        target_mean=target_mean,
        iterations=iterations,
    )


@dataclass(frozen=True)
class SparsityTemperatureMap:
    """Fitted temperature equivalents of a sparsity grid for one instance family."""

    n: int
    distribution: str
    p_s: tuple          # ascending grid
    t_fit: tuple        # fitted temperature per grid point
    ks_distance: tuple
    extrapolated_t_at_zero: float
    slope: float        # least-squares line through points with p_s <= linear cutoff
    intercept: float
    linear_cutoff: float
    unreliable: tuple = ()  # subset of p_s flagged unreliable (p_s == 1)

    def __post_init__(self):
        ps = tuple(float(p) for p in self.p_s)
        ts = tuple(float(t) for t in self.t_fit)
        if len(ps) != len(ts) or len(ps) < 2:
            raise ValidationError("map needs matching p_s/t_fit arrays of length >= 2")
        if any(b <= a for a, b in zip(ps, ps[1:])):
            raise ValidationError("map grid must be strictly increasing in p_s")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValidationError("fitted temperatures must increase strictly with p_s")
        object.__setattr__(self, "p_s", ps)
        object.__setattr__(self, "t_fit", ts)

    def temperature_at(self, p_s: float) -> float:
        """Interpolated fitted temperature; extrapolates linearly below the grid."""
        if not 0.0 <= p_s <= self.p_s[-1]:
            raise ValidationError(
                f"p_s {p_s} outside the mapped range [0, {self.p_s[-1]}]"
            )
        if p_s < self.p_s[0]:
            return self.intercept + self.slope * p_s
        return float(np.interp(p_s, self.p_s, self.t_fit))

    def to_json_obj(self) -> dict:
        return {
            "n": self.n,
            "distribution": self.distribution,
            "points": [
                {
                    "p_s": p,
                    "t_fit": t,
                    "ks_distance": k,
                    "unreliable": p in self.unreliable,
                }
                for p, t, k in zip(self.p_s, self.t_fit, self.ks_distance)
            ],
            "extrapolated_t_at_zero": self.extrapolated_t_at_zero,
            "linear_fit": {
                "slope": self.slope,
                "intercept": self.intercept,
                "max_p_s": self.linear_cutoff,
            },
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_obj(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @staticmethod
    def from_json_obj(obj: dict) -> "SparsityTemperatureMap":
        points = sorted(obj["points"], key=lambda p: p["p_s"])
        return SparsityTemperatureMap(
            n=int(obj["n"]),
            distribution=str(obj["distribution"]),
            p_s=tuple(p["p_s"] for p in points),
            t_fit=tuple(p["t_fit"] for p in points),
            ks_distance=tuple(p["ks_distance"] for p in points),
            extrapolated_t_at_zero=float(obj["extrapolated_t_at_zero"]),
            slope=float(obj["linear_fit"]["slope"]),
            intercept=float(obj["linear_fit"]["intercept"]),
            linear_cutoff=float(obj["linear_fit"]["max_p_s"]),
            unreliable=tuple(p["p_s"] for p in points if p.get("unreliable")),
        )

    @staticmethod
    def load(path) -> "SparsityTemperatureMap":
        with open(path, "r", encoding="utf-8") as fh:
            return SparsityTemperatureMap.from_json_obj(json.load(fh))


def build_sparsity_map(
    n: int,
    distribution: Distribution | str,
    ps_grid,
    t_lo: float,
    t_hi: float,
    tolerance: float,
    seed: int = 0,
    trials: int = 2000,
    burn_in_sweeps: int = 300,
    instance_seed: int | None = None,
    linear_cutoff: float = LINEAR_REGIME_MAX_PS,
    model: IsingModel | None = None,
) -> SparsityTemperatureMap:
    """Fit the temperature equivalent of each grid sparsity on one seeded instance.

    Requires at least three grid points in (0, linear_cutoff] for the linear
    extrapolation to zero sparsity; the extrapolated temperature must come out
    positive.
    """
    grid = sorted(float(p) for p in ps_grid)
    if any(not 0.0 < p <= 1.0 for p in grid):
        raise ValidationError("sparsity grid must lie in (0, 1]")
    if len(grid) != len(set(grid)):
        raise ValidationError("sparsity grid must not contain duplicates")
    linear_points = [p for p in grid if p <= linear_cutoff]
    if len(linear_points) < 3:
        raise ValidationError(
            f"need at least 3 grid points in (0, {linear_cutoff}] for extrapolation, "
            f"got {len(linear_points)}"
        )
    if model is None:
        if instance_seed is None:
            instance_seed = derive_seed(seed, "map-instance", n, str(distribution))
        model = generate_instance(distribution, n, instance_seed)
    dist_tag = model.distribution.value

    t_fits = []
    ks_values = []
    for p_s in grid:
        target = sample_emvl_equilibrium(
            model,
            p_s,
            trials=trials,
            burn_in_sweeps=burn_in_sweeps,
            seed=derive_seed(seed, "map-target", p_s),
        )
        fit = fit_temperature(
            model,
            target,
            t_lo,
            t_hi,
            tolerance=tolerance,
            seed=derive_seed(seed, "map-fit", p_s),
            trials=trials,
            burn_in_sweeps=burn_in_sweeps,
        )
        t_fits.append(fit.temperature)
        ks_values.append(fit.ks_distance)

    xs = np.array(linear_points)
    ys = np.array([t_fits[grid.index(p)] for p in linear_points])
    slope, intercept = np.polyfit(xs, ys, 1)
    if intercept <= 0:
        raise ExtrapolationError(
            f"extrapolated temperature at zero sparsity is {intercept:.3f} <= 0; "
            "grid too coarse or fits unstable"
        )
    return SparsityTemperatureMap(
        n=model.n,
        distribution=dist_tag,
        p_s=tuple(grid),
        t_fit=tuple(t_fits),
        ks_distance=tuple(ks_values),
        extrapolated_t_at_zero=float(intercept),
        slope=float(slope),
        intercept=float(intercept),
        linear_cutoff=float(linear_cutoff),
        unreliable=tuple(p for p in grid if p == 1.0),
    )


def map_to_sa_schedule(
    tmap: SparsityTemperatureMap, sparsity_schedule: SparsitySchedule
) -> TempLinear:
    """Translate a linear sparsity ramp into a linear temperature ramp.

    t_start is the mapped temperature at p_init; t_end is the extrapolated
    temperature at zero sparsity; the sweep count is preserved.
    """
    if sparsity_schedule.shape != "linear" or sparsity_schedule.p_fin != 0.0:
        raise ValidationError("only linear ramps ending at p_fin = 0 can be mapped")
    p_init = sparsity_schedule.p_init
    if not 0.0 < p_init <= tmap.p_s[-1]:
        raise ValidationError(
            f"p_init {p_init} outside the mapped range (0, {tmap.p_s[-1]}]"
        )
    t_start = tmap.temperature_at(p_init)
    t_end = tmap.extrapolated_t_at_zero
    if not t_start > t_end > 0:
        raise ExtrapolationError(
            f"mapped endpoints not ordered: t_start={t_start:.3f}, t_end={t_end:.3f}"
        )
    return TempLinear(t_start=t_start, t_end=t_end, t_fin=sparsity_schedule.t_fin)


def normalized_energy_curve(
    model: IsingModel,
    ps_grid,
    e_gs: int,
    trials: int = 2000,
    burn_in_sweeps: int = 300,
    seed: int = 0,
    samples: list[EquilibriumSample] | None = None,
) -> list[tuple[float, float, float]]:
    """Equilibrium mean and spread scaled by a reference energy.

    Returns (p_s, mean / e_gs, std / |e_gs|) per grid point; e_gs must be
    negative, so the normalized mean grows toward 1 as sparsity drops.
    """
    if e_gs >= 0:
        raise ValidationError(f"reference energy must be negative, got {e_gs}")
    grid = sorted(float(p) for p in ps_grid)
    if samples is None:
        samples = [
            sample_emvl_equilibrium(
                model,
                p_s,
                trials=trials,
                burn_in_sweeps=burn_in_sweeps,
                seed=derive_seed(seed, "curve", p_s),
            )
            for p_s in grid
        ]
    else:
        samples = sorted(samples, key=lambda s: s.control_value)
        grid = [s.control_value for s in samples]
    return [
        (p_s, sample.mean / e_gs, sample.std / abs(e_gs))
        for p_s, sample in zip(grid, samples)
    ]
