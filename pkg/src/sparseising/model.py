"""Ising problem instances: energy bookkeeping, SK generators, and file I/O.

Energy convention: one term per unordered pair,
``E = -sum_{i<j} J_ij s_i s_j - sum_i h_i s_i``, all integer arithmetic.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .rng import Xoshiro256, derive_seed
from .validation import ParseError, ValidationError, check_spin_index, check_spins

# Pre-quantization scale for the 10-bit Gaussian coupling distribution:
# couplings are clamp(round(g * GAUSSIAN_QUANT_SCALE), -512, +511) for g ~ N(0,1),
# so ~4 standard deviations span the signed 10-bit range.
GAUSSIAN_QUANT_SCALE = 128.0
GAUSSIAN_MIN = -512
GAUSSIAN_MAX = 511


class Distribution(str, enum.Enum):
    BIMODAL = "bimodal"
    GAUSSIAN_Q10 = "gaussian_q10"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class IsingModel:
    """Immutable fully specified Ising instance.

    couplings is a dense symmetric int32 matrix with zero diagonal; fields is
    an int64 vector.  Arrays are frozen (non-writeable) after construction so
    instances can be shared across concurrent workers.
    """

    n: int
    couplings: np.ndarray
    fields: np.ndarray
    distribution: Distribution = Distribution.CUSTOM
    instance_id: str = ""
    seed: int = 0

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise ValidationError(f"spin count must be >= 1, got {n}")
        J = np.ascontiguousarray(self.couplings, dtype=np.int64)
        if J.shape != (n, n):
            raise ValidationError(f"couplings must be {n}x{n}, got {J.shape}")
        if np.any(J != J.T):
            raise ValidationError("couplings must be symmetric (J[i,j] == J[j,i])")
        if np.any(np.diag(J) != 0):
            raise ValidationError("coupling diagonal must be zero")
        if np.any(np.abs(J) > np.iinfo(np.int32).max):
            raise ValidationError("couplings exceed the supported 32-bit range")
        h = np.ascontiguousarray(self.fields, dtype=np.int64)
        if h.shape != (n,):
            raise ValidationError(f"fields must have shape ({n},), got {h.shape}")
        dist = Distribution(self.distribution)
        if dist is Distribution.BIMODAL:
            off = J[~np.eye(n, dtype=bool)]
            if off.size and not np.all(np.abs(off) == 1):
                raise ValidationError("bimodal couplings must all be -1 or +1")
        elif dist is Distribution.GAUSSIAN_Q10:
            if np.any(J < GAUSSIAN_MIN) or np.any(J > GAUSSIAN_MAX):
                raise ValidationError(
                    f"gaussian_q10 couplings must lie in [{GAUSSIAN_MIN}, {GAUSSIAN_MAX}]"
                )
        J32 = np.ascontiguousarray(J, dtype=np.int32)
        J32.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "couplings", J32)
        object.__setattr__(self, "fields", h)
        object.__setattr__(self, "distribution", dist)
        object.__setattr__(self, "seed", int(self.seed))
        if not self.instance_id:
            object.__setattr__(
                self, "instance_id", f"{dist.value}_n{n}_s{int(self.seed)}"
            )

    def __eq__(self, other):
        if not isinstance(other, IsingModel):
            return NotImplemented
        return (
            self.n == other.n
            and self.distribution == other.distribution
            and self.seed == other.seed
            and self.instance_id == other.instance_id
            and np.array_equal(self.couplings, other.couplings)
            and np.array_equal(self.fields, other.fields)
        )

    @property
    def has_fields(self) -> bool:
        return bool(np.any(self.fields != 0))


def energy(model: IsingModel, spins) -> int:
    """Exact integer energy -sum_{i<j} J_ij s_i s_j - sum_i h_i s_i."""
    s = check_spins(spins, model.n).astype(np.int64)
    quad = s @ (model.couplings.astype(np.int64) @ s)
    return int(-(quad // 2) - model.fields @ s)


def local_field(model: IsingModel, spins, i: int) -> int:
    """h_i + sum_{j != i} J_ij s_j."""
    s = check_spins(spins, model.n).astype(np.int64)
    i = check_spin_index(i, model.n)
    return int(model.fields[i] + model.couplings[i].astype(np.int64) @ s)


def delta_energy(model: IsingModel, spins, i: int) -> int:
    """Energy change from flipping spin i: 2 * s_i * local_field(i)."""
    s = check_spins(spins, model.n)
    i = check_spin_index(i, model.n)
    return 2 * int(s[i]) * local_field(model, s, i)


def random_spins(n: int, rng: Xoshiro256) -> np.ndarray:
    """Random +/-1 vector; one generator draw per spin (low bit -> +1)."""
    out = np.empty(n, np.int8)
    for i in range(n):
        out[i] = 1 if rng.next_u64() & 1 else -1
    return out


def _pair_count(n: int) -> int:
    return n * (n - 1) // 2


def _fill_symmetric(n: int, upper: np.ndarray) -> np.ndarray:
    J = np.zeros((n, n), dtype=np.int32)
    iu = np.triu_indices(n, k=1)
    J[iu] = upper
    J[(iu[1], iu[0])] = upper
    return J


def gen_sk_bimodal(n: int, seed: int, instance_id: str = "") -> IsingModel:
    """Fully connected +/-1 couplings, equal probability, zero fields.

    Pure function of (n, seed); couplings are not rescaled with system size.
    """
    if n < 2:
        raise ValidationError(f"SK instances need n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    upper = (rng.integers(0, 2, size=_pair_count(n), dtype=np.int64) * 2 - 1).astype(
        np.int32
    )
    return IsingModel(
        n=n,
        couplings=_fill_symmetric(n, upper),
        fields=np.zeros(n, np.int64),
        distribution=Distribution.BIMODAL,
        instance_id=instance_id,
        seed=seed,
    )


def gen_sk_gaussian(
    n: int, seed: int, instance_id: str = "", scale: float = GAUSSIAN_QUANT_SCALE
) -> IsingModel:
    """Fully connected N(0,1) couplings quantized to signed 10-bit integers.

    Each pair draws g ~ N(0,1) and stores clamp(round(g*scale), -512, +511);
    zero fields; pure function of (n, seed, scale).
    """
    if n < 2:
        raise ValidationError(f"SK instances need n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal(_pair_count(n))
    upper = np.clip(np.rint(g * scale), GAUSSIAN_MIN, GAUSSIAN_MAX).astype(np.int32)
    return IsingModel(
        n=n,
        couplings=_fill_symmetric(n, upper),
        fields=np.zeros(n, np.int64),
        distribution=Distribution.GAUSSIAN_Q10,
        instance_id=instance_id,
        seed=seed,
    )


def generate_instance(
    distribution: Distribution | str, n: int, seed: int, instance_id: str = ""
) -> IsingModel:
    dist = Distribution(distribution)
    if dist is Distribution.BIMODAL:
        return gen_sk_bimodal(n, seed, instance_id)
    if dist is Distribution.GAUSSIAN_Q10:
        return gen_sk_gaussian(n, seed, instance_id)
    raise ValidationError("only bimodal and gaussian_q10 instances can be generated")


def save_instance(model: IsingModel, path) -> None:
    """Write the line-oriented instance format (see load_instance)."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"ising {model.n} {model.distribution.value} {model.seed}\n")
        if model.instance_id:
            fh.write(f"# id {model.instance_id}\n")
        h = model.fields
        for i in range(model.n):
            if h[i] != 0:
                fh.write(f"h {i} {int(h[i])}\n")
        J = model.couplings
        for i in range(model.n):
            for j in range(i + 1, model.n):
                fh.write(f"J {i} {j} {int(J[i, j])}\n")


def load_instance(path) -> IsingModel:
    """Read an instance file.

    Format: header ``ising <n> <distribution> <seed>``; ``h <i> <value>`` lines
    for nonzero fields; ``J <i> <j> <value>`` lines, one per unordered pair
    (either index order accepted, pairs may appear at most once); 0-based
    indices, decimal integers, ``#`` comments.  Unlisted pairs are zero.
    """
    n = None
    dist = None
    seed = 0
    instance_id = ""
    h = None
    J = None
    seen = set()
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line.startswith("# id "):
                instance_id = line[5:].strip()
                continue
            if not line or line.startswith("#"):
                continue
            tok = line.split()
            if tok[0] == "ising":
                if n is not None:
                    raise ParseError(f"{path}:{lineno}: duplicate header line")
                if len(tok) != 4:
                    raise ParseError(
                        f"{path}:{lineno}: header must be 'ising <n> <distribution> <seed>'"
                    )
                try:
                    n = int(tok[1])
                    seed = int(tok[3])
                except ValueError as exc:
                    raise ParseError(f"{path}:{lineno}: non-integer header field") from exc
                try:
                    dist = Distribution(tok[2])
                except ValueError as exc:
                    raise ParseError(
                        f"{path}:{lineno}: unknown distribution tag {tok[2]!r}"
                    ) from exc
                if n < 1:
                    raise ParseError(f"{path}:{lineno}: n must be >= 1")
                h = np.zeros(n, np.int64)
                J = np.zeros((n, n), np.int64)
            elif tok[0] == "h":
                if n is None:
                    raise ParseError(f"{path}:{lineno}: 'h' line before header")
                if len(tok) != 3:
                    raise ParseError(f"{path}:{lineno}: field line must be 'h <i> <value>'")
                try:
                    i, v = int(tok[1]), int(tok[2])
                except ValueError as exc:
                    raise ParseError(f"{path}:{lineno}: non-integer field entry") from exc
                if not 0 <= i < n:
                    raise ParseError(f"{path}:{lineno}: field index {i} out of range")
                h[i] = v
            elif tok[0] == "J":
                if n is None:
                    raise ParseError(f"{path}:{lineno}: 'J' line before header")
                if len(tok) != 4:
                    raise ParseError(
                        f"{path}:{lineno}: coupling line must be 'J <i> <j> <value>'"
                    )
                try:
                    i, j, v = int(tok[1]), int(tok[2]), int(tok[3])
                except ValueError as exc:
                    raise ParseError(f"{path}:{lineno}: non-integer coupling entry") from exc
                if not (0 <= i < n and 0 <= j < n):
                    raise ParseError(
                        f"{path}:{lineno}: coupling indices ({i},{j}) out of range"
                    )
                if i == j:
                    raise ParseError(f"{path}:{lineno}: self-coupling J[{i},{i}] not allowed")
                key = (min(i, j), max(i, j))
                if key in seen:
                    raise ValidationError(
                        f"{path}:{lineno}: pair J[{key[0]},{key[1]}] specified more than once "
                        "(asymmetric or duplicate couplings)"
                    )
                seen.add(key)
                J[i, j] = v
                J[j, i] = v
            else:
                raise ParseError(f"{path}:{lineno}: unknown record {tok[0]!r}")
    if n is None:
        raise ParseError(f"{path}: missing 'ising' header line")
    return IsingModel(
        n=n, couplings=J, fields=h, distribution=dist, instance_id=instance_id, seed=seed
    )
