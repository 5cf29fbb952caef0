"""Sparsified-connectivity Ising solvers, annealing baselines, and benchmarking.

The core algorithm updates each spin by majority vote over a randomly
extracted subset of its couplings; a sparsity ramp shrinks the disconnected
fraction from high values to zero, trading early exploration for final
descent.  Alongside it ship Metropolis annealing baselines, equilibrium
analysis that maps sparsity levels to matching annealing temperatures, and
iteration-count benchmarking (STT/STS) against exhaustive or best-known
reference energies.
"""

from .emvl import (
    EMVLSolver,
    decide_spin,
    extraction_count,
    internal_signal,
    run_emvl,
    run_emvl_trials,
    sample_extraction_set,
)
from .equilibrium import (
    EquilibriumSample,
    SparsityTemperatureMap,
    TemperatureFit,
    build_sparsity_map,
    fit_temperature,
    map_to_sa_schedule,
    normalized_energy_curve,
    sample_emvl_equilibrium,
    sample_mcmc_equilibrium,
)
from .gatesim import (
    coupling_words,
    majority_signal,
    pack_spins,
    run_emvl_bits,
    unpack_spins,
    xnor_contrib,
)
from .metrics import (
    GroundTruth,
    RunMetrics,
    best_known_energy,
    exhaustive_ground_state,
    exhaustive_ground_truth,
    ground_truth_for,
    load_registry,
    optimize_tfin,
    r99,
    save_registry,
    stt,
    sts,
    success_probability,
    target_energy_99,
)
from .model import (
    Distribution,
    GAUSSIAN_QUANT_SCALE,
    IsingModel,
    delta_energy,
    energy,
    gen_sk_bimodal,
    gen_sk_gaussian,
    generate_instance,
    load_instance,
    local_field,
    random_spins,
    save_instance,
)
from .results import SolveResult, Trace
from .rng import Xoshiro256, derive_seed, derive_stream_seed, trial_seeds
from .sa import SASolver, best_energy_stagnation, metropolis_accept, run_sa, run_sa_trials
from .schedules import BetaLinear, SparsitySchedule, TemperatureSchedule, TempLinear
from .validation import (
    BracketingError,
    ExtrapolationError,
    GroundTruthError,
    ParseError,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "BetaLinear",
    "BracketingError",
    "Distribution",
    "EMVLSolver",
    "EquilibriumSample",
    "ExtrapolationError",
    "GAUSSIAN_QUANT_SCALE",
    "GroundTruth",
    "GroundTruthError",
    "IsingModel",
    "ParseError",
    "RunMetrics",
    "SASolver",
    "SolveResult",
    "SparsitySchedule",
    "SparsityTemperatureMap",
    "TemperatureFit",
    "TemperatureSchedule",
    "TempLinear",
    "Trace",
    "ValidationError",
    "Xoshiro256",
    "best_energy_stagnation",
    "best_known_energy",
    "build_sparsity_map",
    "coupling_words",
    "decide_spin",
    "delta_energy",
    "derive_seed",
    "derive_stream_seed",
    "energy",
    "exhaustive_ground_state",
    "exhaustive_ground_truth",
    "extraction_count",
    "fit_temperature",
    "gen_sk_bimodal",
    "gen_sk_gaussian",
    "generate_instance",
    "ground_truth_for",
    "internal_signal",
    "load_instance",
    "load_registry",
    "local_field",
    "majority_signal",
    "map_to_sa_schedule",
    "metropolis_accept",
    "normalized_energy_curve",
    "optimize_tfin",
    "pack_spins",
    "r99",
    "random_spins",
    "run_emvl",
    "run_emvl_bits",
    "run_emvl_trials",
    "run_sa",
    "run_sa_trials",
    "sample_emvl_equilibrium",
    "sample_extraction_set",
    "sample_mcmc_equilibrium",
    "save_instance",
    "save_registry",
    "stt",
    "sts",
    "success_probability",
    "target_energy_99",
    "trial_seeds",
    "unpack_spins",
    "xnor_contrib",
]
