"""Seedable generators for the sparse i.i.d. model and its relatives.

The sparse matrix has entries ``X_ij = B_ij * A_ij / sqrt(K)`` where ``B`` is a
Bernoulli(K/n) mask and ``A`` is a centered, unit-variance entry law.  Every
generator here is a pure function of its arguments: the same configuration and
seed give bit-identical arrays.

Seeds for individual Monte Carlo trials come from :func:`derive_seed`, which
hashes ``(master_seed, trial_index, role)`` with BLAKE2b truncated to 64 bits.
Each derived seed drives its own PCG64 stream, so trials can run in any order
on any worker.
"""
from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "Family",
    "EntryLaw",
    "TruncatedLaw",
    "EnsembleConfig",
    "Deformation",
    "derive_seed",
    "make_rng",
    "sample_iid_matrix",
    "sample_ginibre_real",
    "truncated_law",
    "deformation_matrix",
    "hermitize",
    "basis_vector",
    "random_unit_vector",
    "constant_vector",
]

SEED_MASK = (1 << 64) - 1
_SQRT3 = math.sqrt(3.0)


def derive_seed(master_seed: int, index: int, role: str = "") -> int:
    """64-bit seed for trial `index` of an experiment with `master_seed`.

    The value is the first 8 bytes (little endian) of
    ``blake2b(f"{master_seed}:{index}:{role}", digest_size=8)``.  It never
    depends on the platform, the numpy version or the evaluation order.
    """
    key = f"{int(master_seed) & SEED_MASK}:{int(index)}:{role}".encode()
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return int.from_bytes(digest, "little")


def make_rng(seed: int) -> np.random.Generator:
    if seed < 0 or seed > SEED_MASK:
        raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.Generator(np.random.PCG64(seed))


class Family(enum.Enum):
    REAL_GAUSSIAN = "real_gaussian"
    COMPLEX_GAUSSIAN = "complex_gaussian"
    RADEMACHER = "rademacher"
    UNIFORM = "uniform"


_ALIASES = {
    "realgaussian": Family.REAL_GAUSSIAN,
    "gaussian": Family.REAL_GAUSSIAN,
    "normal": Family.REAL_GAUSSIAN,
    "complexcirculargaussian": Family.COMPLEX_GAUSSIAN,
    "complexgaussian": Family.COMPLEX_GAUSSIAN,
    "complex": Family.COMPLEX_GAUSSIAN,
    "rademacher": Family.RADEMACHER,
    "uniformsymmetric": Family.UNIFORM,
    "uniform": Family.UNIFORM,
}


@dataclass(frozen=True)
class EntryLaw:
    """Centered law with ``E|A|^2 = 1``.

    ``second_moment`` is the (complex) pseudo-variance ``E A^2``: 1 for the
    real families and 0 for the circular complex Gaussian.
    """

    family: Family

    @classmethod
    def from_name(cls, name: str) -> "EntryLaw":
        key = name.lower().replace("_", "").replace("-", "")
        try:
            return cls(_ALIASES[key])
        except KeyError:
            known = ", ".join(f.value for f in Family)
            raise ConfigurationError(f"unknown entry law {name!r}; expected one of {known}") from None

    @property
    def name(self) -> str:
        return self.family.value

    @property
    def second_moment(self) -> complex:
        return 0j if self.family is Family.COMPLEX_GAUSSIAN else 1 + 0j

    @property
    def sub_gaussian(self) -> bool:
        return True

    @property
    def is_complex(self) -> bool:
        return self.family is Family.COMPLEX_GAUSSIAN

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        fam = self.family
        if fam is Family.REAL_GAUSSIAN:
            return rng.standard_normal(size)
        if fam is Family.RADEMACHER:
            return rng.integers(0, 2, size=size).astype(np.float64) * 2.0 - 1.0
        if fam is Family.UNIFORM:
            return rng.uniform(-_SQRT3, _SQRT3, size=size)
        g = rng.standard_normal((2,) + tuple(np.atleast_1d(size)))
        return (g[0] + 1j * g[1]) / math.sqrt(2.0)


# E[|A|^2 1{|A| <= d}] for each family, in closed form.
def _truncated_abs_moment(family: Family, d: float) -> float:
    if family is Family.REAL_GAUSSIAN:
        return math.erf(d / math.sqrt(2.0)) - 2.0 * d * math.exp(-0.5 * d * d) / math.sqrt(2.0 * math.pi)
    if family is Family.RADEMACHER:
        return 1.0 if d >= 1.0 else 0.0
    if family is Family.UNIFORM:
        m = min(d, _SQRT3)
        return m**3 / (3.0 * _SQRT3)
    # |A|^2 is Exp(1) for the circular complex Gaussian
    return 1.0 - (1.0 + d * d) * math.exp(-d * d)


@dataclass(frozen=True)
class TruncatedLaw:
    """Entry law of ``A 1{|A| <= d} - E[A 1{|A| <= d}]``.

    All base families are symmetric, so the centering constant is exactly 0.
    ``variance`` (``E|A^d|^2``) and ``second_moment`` (``E (A^d)^2``) are
    computed in closed form.
    """

    base: EntryLaw
    d: float

    @property
    def name(self) -> str:
        return f"{self.base.name}|trunc={self.d!r}"

    @property
    def mean(self) -> complex:
        return 0j

    @property
    def variance(self) -> float:
        return _truncated_abs_moment(self.base.family, self.d)

    @property
    def second_moment(self) -> complex:
        if self.base.family is Family.COMPLEX_GAUSSIAN:
            return 0j
        return complex(self.variance)

    @property
    def sub_gaussian(self) -> bool:
        return True

    @property
    def is_complex(self) -> bool:
        return self.base.is_complex

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        a = self.base.sample(rng, size)
        a = np.where(np.abs(a) <= self.d, a, 0.0)
        return a - self.mean if self.is_complex else a - self.mean.real


def truncated_law(law: EntryLaw, d: float) -> TruncatedLaw:
    if not d > 0:
        raise ConfigurationError(f"truncation level must be positive, got {d}")
    return TruncatedLaw(law, float(d))


@dataclass(frozen=True)
class EnsembleConfig:
    """Everything needed to reproduce one sparse matrix draw."""

    n: int
    k: int
    law: EntryLaw
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError(f"n must be >= 1, got {self.n}")
        if not 1 <= self.k <= self.n:
            raise ConfigurationError(f"sparsity k must satisfy 1 <= k <= n, got k={self.k}, n={self.n}")
        if not 0 <= self.seed <= SEED_MASK:
            raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def with_seed(self, seed: int) -> "EnsembleConfig":
        return EnsembleConfig(self.n, self.k, self.law, seed)


def sample_iid_matrix(cfg: EnsembleConfig) -> np.ndarray:
    """Draw ``X = B * A / sqrt(K)``.

    One PCG64 stream is consumed in a fixed order: first ``n*n`` uniforms for
    the Bernoulli mask (row-major), then one law sample per retained entry,
    again in row-major order.
    """
    n, k = cfg.n, cfg.k
    rng = make_rng(cfg.seed)
    mask = rng.random(n * n) < k / n
    values = cfg.law.sample(rng, int(mask.sum()))
    dtype = np.complex128 if cfg.law.is_complex else np.float64
    x = np.zeros(n * n, dtype=dtype)
    x[mask] = values / math.sqrt(k)
    return x.reshape(n, n)


def sample_ginibre_real(n: int, seed: int) -> np.ndarray:
    """Real Gaussian matrix with i.i.d. N(0, 1/n) entries."""
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    return make_rng(seed).standard_normal((n, n)) / math.sqrt(n)


class Deformation:
    """Finite-rank perturbation ``E = sum_t u_t v_t^*``.

    Parameters
    ----------
    pairs : sequence of (u, v)
        Complex vectors of a common length ``n``.
    """

    def __init__(self, pairs):
        pairs = [(np.asarray(u, dtype=np.complex128), np.asarray(v, dtype=np.complex128)) for u, v in pairs]
        if not pairs:
            raise ConfigurationError("a deformation needs at least one (u, v) pair")
        n = pairs[0][0].shape
        for u, v in pairs:
            if u.ndim != 1 or u.shape != n or v.shape != n:
                raise ConfigurationError("all deformation vectors must be 1-d with the same length")
        self.pairs = pairs

    @classmethod
    def rank_one(cls, u, v) -> "Deformation":
        return cls([(u, v)])

    @property
    def n(self) -> int:
        return self.pairs[0][0].shape[0]

    @property
    def rank(self) -> int:
        return len(self.pairs)

    @property
    def norm_budget(self) -> float:
        return float(sum(np.linalg.norm(u) + np.linalg.norm(v) for u, v in self.pairs))

    @property
    def U(self) -> np.ndarray:
        return np.stack([u for u, _ in self.pairs], axis=1)

    @property
    def V(self) -> np.ndarray:
        return np.stack([v for _, v in self.pairs], axis=1)

    def reduced_matrix(self) -> np.ndarray:
        """The r x r matrix ``V^* U`` with entries ``v_s^* u_t``.

        ``U V^*`` and ``V^* U`` share their nonzero eigenvalues, so this gives
        the spectrum of ``E`` without an n x n eigensolve.
        """
        return self.V.conj().T @ self.U

    def eigenvalues(self) -> np.ndarray:
        """The r eigenvalues of the reduced matrix (the rest of sigma(E) is 0)."""
        return np.linalg.eigvals(self.reduced_matrix())

    def b(self, z) -> complex:
        """``det(I - z E)`` via the reduced matrix."""
        m = self.reduced_matrix()
        return complex(np.linalg.det(np.eye(self.rank) - z * m))

    def __repr__(self):
        return f"Deformation(n={self.n}, rank={self.rank}, norm_budget={self.norm_budget:.6g})"


def deformation_matrix(defm: Deformation) -> np.ndarray:
    return defm.U @ defm.V.conj().T


def hermitize(m: np.ndarray, xi: complex) -> np.ndarray:
    """The 2n x 2n Hermitian matrix ``[[0, M - xi I], [(M - xi I)^*, 0]]``."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigurationError(f"hermitize needs a square matrix, got shape {m.shape}")
    n = m.shape[0]
    shifted = m - xi * np.eye(n)
    h = np.zeros((2 * n, 2 * n), dtype=np.result_type(shifted, np.complex128))
    h[:n, n:] = shifted
    h[n:, :n] = shifted.conj().T
    return h


def basis_vector(n: int, index: int = 0, scale: complex = 1.0) -> np.ndarray:
    e = np.zeros(n, dtype=np.complex128)
    e[index] = scale
    return e


def random_unit_vector(n: int, seed: int, complex_valued: bool = False) -> np.ndarray:
    rng = make_rng(seed)
    g = rng.standard_normal(n) + (1j * rng.standard_normal(n) if complex_valued else 0.0)
    g = np.asarray(g, dtype=np.complex128)
    return g / np.linalg.norm(g)


def constant_vector(n: int) -> np.ndarray:
    return np.full(n, 1.0 / math.sqrt(n), dtype=np.complex128)
