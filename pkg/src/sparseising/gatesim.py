"""Bit-level realization of the majority-vote solver for unit couplings.

Spins map to bits ((s+1)/2), couplings of -1/+1 map to bits the same way,
pair interactions become XNOR words, and the vote is a popcount over the
extracted mask.  The packed engine consumes the random stream exactly like
the arithmetic engine, so trajectories are bit-identical, not merely
statistically equivalent.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .emvl import _result_from_kernel
from .model import Distribution, IsingModel
from .schedules import SparsitySchedule
from .validation import ValidationError, check_spins


def pack_spins(spins) -> np.ndarray:
    """Pack a +/-1 vector into uint64 words, bit j = (s_j + 1) / 2."""
    s = check_spins(spins, len(spins))
    n = len(s)
    words = np.zeros((n + 63) // 64, np.uint64)
    for j in range(n):
        if s[j] == 1:
            words[j >> 6] |= np.uint64(1) << np.uint64(j & 63)
    return words


def unpack_spins(words: np.ndarray, n: int) -> np.ndarray:
    """Inverse of pack_spins."""
    out = np.empty(n, np.int8)
    for j in range(n):
        bit = (int(words[j >> 6]) >> (j & 63)) & 1
        out[j] = 1 if bit else -1
    return out


def xnor_contrib(sigma_bit: int, j_bit: int) -> int:
    """One interaction bit: XNOR of a spin bit and a coupling bit.

    Returns 1 when the +/-1 product would be +1 (energy-lowering alignment).
    """
    if sigma_bit not in (0, 1) or j_bit not in (0, 1):
        raise ValidationError("xnor_contrib expects single bits")
    return (~(sigma_bit ^ j_bit)) & 1


def majority_signal(contrib_bits: int, count: int) -> int:
    """Vote tally 2 * popcount - count over count meaningful contribution bits."""
    if count < 0:
        raise ValidationError(f"count must be >= 0, got {count}")
    if contrib_bits < 0 or (contrib_bits >> count) != 0:
        raise ValidationError("contrib_bits must fit in the low `count` bits")
    pop = bin(contrib_bits).count("1")
    return 2 * pop - count


def coupling_words(model: IsingModel) -> np.ndarray:
    """Per-spin packed coupling rows: bit j of row i is (J[i,j] + 1) / 2, bit i clear."""
    n = model.n
    words = np.zeros((n, (n + 63) // 64), np.uint64)
    J = model.couplings
    for i in range(n):
        for j in range(n):
            if j != i and J[i, j] == 1:
                words[i, j >> 6] |= np.uint64(1) << np.uint64(j & 63)
    return words


def _require_bit_compatible(model: IsingModel) -> None:
    if model.distribution is not Distribution.BIMODAL or model.has_fields:
        raise ValidationError(
            "the packed-bit engine supports only bimodal couplings with zero fields"
        )
    off = model.couplings[~np.eye(model.n, dtype=bool)]
    if off.size and not np.all(np.abs(off) == 1):
        raise ValidationError("the packed-bit engine requires all couplings in {-1, +1}")


def run_emvl_bits(
    model: IsingModel,
    schedule: SparsitySchedule,
    seed: int,
    collect_trace: bool = False,
):
    """Bit-level counterpart of run_emvl; same outputs, same trajectory per seed."""
    _require_bit_compatible(model)
    ps = schedule.values()
    jw = coupling_words(model)
    sigma, best_sigma, e, be, max_de, trace_e, trace_b = _kernels.bits_run_kernel(
        jw, model.n, ps, np.uint64(seed), collect_trace
    )
    return _result_from_kernel(
        (sigma, best_sigma, e, be, trace_e, trace_b), ps, "p_s", collect_trace, int(max_de)
    )
