"""Reverse characteristic polynomials and their Gaussian limit.

``q(z) = det(I - zY)`` is compared in law with ``b(z) kappa(z) exp(-F(z))``
where ``b(z) = det(I - zE)``, ``kappa(z) = sqrt(1 - z^2 E A^2)`` and
``F(z) = sum_k z^k Z_k / sqrt(k)`` with independent complex Gaussians
``Z_k`` of unit variance and pseudo-variance ``(E A^2)^k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensemble import Deformation, EnsembleConfig, derive_seed, make_rng, sample_iid_matrix, deformation_matrix
from .errors import ConfigurationError, DomainError, TruncationError
from .spectra import ComplexSpectrum, eig
from .stats import holm, ks_two_sample

__all__ = [
    "PowerSeries",
    "CorrelatedGaussians",
    "TAIL_TOL",
    "trace_powers",
    "newton_charpoly",
    "eval_reverse_charpoly",
    "kappa_series",
    "truncation_order",
    "tail_bound",
    "gaussian_coefficients",
    "sample_correlated_gaussians",
    "limit_function",
    "deformation_polynomial",
    "equivalence_trial",
    "g_comparison_trial",
    "equivalence_verdict",
    "equivalence_test",
    "EquivalenceReport",
]

# bound on the rms of the neglected tail of F
TAIL_TOL = 1e-6


@dataclass
class PowerSeries:
    """Truncated series ``sum_{k<=M} c_k z^k``, evaluated only for ``|z| <= radius``."""

    coeffs: np.ndarray
    radius: float = math.inf

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if not np.isfinite(self.coeffs[0]):
            raise ConfigurationError("leading coefficient must be finite")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        if np.any(np.abs(z) > self.radius * (1 + 1e-12)):
            raise DomainError(f"series evaluated outside its radius {self.radius}")
        out = np.zeros_like(z)
        for c in self.coeffs[::-1]:
            out = out * z + c
        return out[()] if out.ndim == 0 else out

    def __mul__(self, other: "PowerSeries") -> "PowerSeries":
        m = min(self.order, other.order)
        prod = np.convolve(self.coeffs, other.coeffs)[: m + 1]
        return PowerSeries(prod, min(self.radius, other.radius))


def trace_powers(m, kmax: int) -> np.ndarray:
    """``[tr M, tr M^2, ..., tr M^kmax]`` by repeated multiplication."""
    if kmax < 1:
        raise ConfigurationError(f"kmax must be >= 1, got {kmax}")
    m = np.asarray(m)
    p = m.copy()
    out = np.empty(kmax, dtype=np.complex128)
    for k in range(kmax):
        if k:
            p = p @ m
        out[k] = np.trace(p)
    return out


def newton_charpoly(traces, m: int) -> PowerSeries:
    """First ``m + 1`` coefficients of ``det(I - zM)`` from power sums ``p_k = tr M^k``.

    Newton's identities: ``c_0 = 1`` and ``c_k = -(1/k) sum_{j=1..k} p_j c_{k-j}``.
    """
    p = np.asarray(traces, dtype=np.complex128)
    if m > len(p):
        raise ConfigurationError(f"order {m} needs {m} traces, got {len(p)}")
    c = np.zeros(m + 1, dtype=np.complex128)
    c[0] = 1.0
    for k in range(1, m + 1):
        c[k] = -np.dot(p[:k], c[k - 1::-1]) / k
    return PowerSeries(c)


def eval_reverse_charpoly(s, z):
    """``prod_i (1 - z lambda_i)``; `z` may be a scalar or an array of points."""
    vals = s.values if isinstance(s, ComplexSpectrum) else np.asarray(s, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    out = np.prod(1.0 - z[..., None] * vals, axis=-1)
    return out[()] if out.ndim == 0 else out


def kappa_series(second_moment: complex, m: int) -> PowerSeries:
    """Taylor coefficients of ``sqrt(1 - z^2 s)`` up to order m (principal branch)."""
    c = np.zeros(m + 1, dtype=np.complex128)
    binom = 1.0
    for j in range(m // 2 + 1):
        if j:
            binom *= (0.5 - (j - 1)) / j
        c[2 * j] = binom * (-second_moment) ** j
    radius = 1.0 / math.sqrt(abs(second_moment)) if second_moment != 0 else math.inf
    return PowerSeries(c, radius)


def tail_bound(r: float, m: int) -> float:
    """Upper bound on ``E|sum_{k>m} z^k Z_k/sqrt(k)|^2`` for ``|z| = r``."""
    return r ** (2 * (m + 1)) / ((m + 1) * (1.0 - r * r))


def truncation_order(r: float, tol: float = TAIL_TOL) -> int:
    """Smallest M with ``tail_bound(r, M) <= tol^2``."""
    if not 0 <= r < 1:
        raise DomainError(f"|z| must be < 1, got {r}")
    m = 1
    while tail_bound(r, m) > tol * tol:
        m += 1
    return m


@dataclass
class CorrelatedGaussians:
    values: np.ndarray
    pseudo_variances: np.ndarray


def gaussian_coefficients(second_moment: complex, m: int, rng: np.random.Generator, size=None) -> np.ndarray:
    """Independent ``Z_1..Z_m`` with ``E|Z_k|^2 = 1`` and ``E Z_k^2 = s^k``.

    Each ``Z = exp(i theta/2) (a g1 + i b g2)`` with ``s^k = rho exp(i theta)``,
    ``a = sqrt((1+rho)/2)``, ``b = sqrt((1-rho)/2)``.  Returns shape
    ``(m,)`` or ``size + (m,)``.
    """
    s = complex(second_moment)
    if abs(s) > 1 + 1e-12:
        raise DomainError(f"|E A^2| must be <= 1, got {abs(s)}")
    tau = s ** np.arange(1, m + 1)
    rho = np.minimum(np.abs(tau), 1.0)
    phase = np.exp(0.5j * np.angle(tau))
    a = np.sqrt((1 + rho) / 2)
    b = np.sqrt((1 - rho) / 2)
    shape = (2, m) if size is None else (2,) + tuple(np.atleast_1d(size)) + (m,)
    g = rng.standard_normal(shape)
    return phase * (a * g[0] + 1j * b * g[1])


def sample_correlated_gaussians(second_moment: complex, m: int, seed: int) -> CorrelatedGaussians:
    values = gaussian_coefficients(second_moment, m, make_rng(seed))
    return CorrelatedGaussians(values, complex(second_moment) ** np.arange(1, m + 1))


def limit_function(b, second_moment: complex, zs: CorrelatedGaussians, z, tol: float = TAIL_TOL):
    """``b(z) sqrt(1 - z^2 s) exp(-sum_k z^k Z_k / sqrt(k))`` at one point or an array of points.

    `zs` may hold a batch of draws with shape ``(..., M)``; the result then has
    shape ``batch + z.shape``.

    Raises :class:`TruncationError` when ``len(zs.values)`` is too short for
    the tail of F to stay below `tol` in rms.
    """
    z = np.asarray(z, dtype=np.complex128)
    r = float(np.max(np.abs(z))) if z.size else 0.0
    if r >= 1:
        raise DomainError(f"|z| must be < 1, got {r}")
    coeffs = np.asarray(zs.values if isinstance(zs, CorrelatedGaussians) else zs)
    m = coeffs.shape[-1]
    if tail_bound(r, m) > tol * tol:
        raise TruncationError(f"truncation order {m} too small at |z|={r:.3g}; need {truncation_order(r, tol)}")
    k = np.arange(1, m + 1)
    # shape coeffs.shape[:-1] + z.shape, so a batch of draws evaluates at once
    f = np.tensordot(coeffs / np.sqrt(k), z[..., None] ** k, axes=([-1], [-1]))
    kappa = np.sqrt(1.0 - z * z * complex(second_moment))
    bz = b(z) if b is not None else 1.0
    return bz * kappa * np.exp(-f)


def deformation_polynomial(defm: Deformation | None) -> PowerSeries:
    """``b(z) = det(I - zE)`` as an exact polynomial of degree r."""
    if defm is None:
        return PowerSeries([1.0])
    red = defm.reduced_matrix()
    return newton_charpoly(trace_powers(red, defm.rank), defm.rank)


def equivalence_trial(cfg: EnsembleConfig, defm: Deformation | None, z_grid, master_seed: int, index: int,
                      tol: float = TAIL_TOL) -> tuple[np.ndarray, np.ndarray]:
    """One draw of ``q(z)`` and one independent draw of the limit, over the grid."""
    z_grid = np.asarray(z_grid, dtype=np.complex128)
    x = sample_iid_matrix(cfg.with_seed(derive_seed(master_seed, index, "charpoly-matrix")))
    y = x if defm is None else x + deformation_matrix(defm)
    q = eval_reverse_charpoly(eig(y), z_grid)
    order = truncation_order(float(np.max(np.abs(z_grid), initial=0.0)), tol)
    rng = make_rng(derive_seed(master_seed, index, "charpoly-gaussian"))
    zs = gaussian_coefficients(cfg.law.second_moment, order, rng)
    lim = limit_function(deformation_polynomial(defm), cfg.law.second_moment, CorrelatedGaussians(zs, None), z_grid, tol)
    return np.atleast_1d(q), np.atleast_1d(lim)


def g_comparison_trial(cfg: EnsembleConfig, defm: Deformation | None, z_grid, master_seed: int,
                       index: int) -> tuple[np.ndarray, np.ndarray]:
    """``q(z)`` and ``G(z) = b(z) det(I - zX)`` on the same draw of X.

    X is the matrix used by :func:`equivalence_trial` with the same seed and
    index, so the two functions can be compared trial by trial.
    """
    z_grid = np.atleast_1d(np.asarray(z_grid, dtype=np.complex128))
    x = sample_iid_matrix(cfg.with_seed(derive_seed(master_seed, index, "charpoly-matrix")))
    y = x if defm is None else x + deformation_matrix(defm)
    q = eval_reverse_charpoly(eig(y), z_grid)
    g = deformation_polynomial(defm)(z_grid) * eval_reverse_charpoly(eig(x), z_grid)
    return np.atleast_1d(q), np.atleast_1d(g)


def _is_constant(x) -> bool:
    x = np.asarray(x, dtype=float)
    return float(np.ptp(x)) <= 1e-9 * (1.0 + float(np.max(np.abs(x))))


@dataclass
class EquivalenceReport:
    blocks: list
    alpha: float
    passed: bool
    flags: list

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "passed": self.passed, "flags": self.flags, "blocks": self.blocks}


def equivalence_verdict(q_samples, limit_samples, z_grid, alpha: float) -> EquivalenceReport:
    """Per-point KS tests on real and imaginary parts, Holm-corrected over the grid.

    A part whose two samples are both constant and equal is skipped; both
    constant but different is flagged and fails.
    """
    q_samples = np.asarray(q_samples, dtype=np.complex128)
    limit_samples = np.asarray(limit_samples, dtype=np.complex128)
    z_grid = np.asarray(z_grid, dtype=np.complex128)
    blocks, tests, flags = [], [], []
    for j, z in enumerate(z_grid):
        block = {"z": [z.real, z.imag], "n_trials": [len(q_samples), len(limit_samples)]}
        for part, fn in (("re", np.real), ("im", np.imag)):
            a, b = fn(q_samples[:, j]), fn(limit_samples[:, j])
            if _is_constant(a) and _is_constant(b):
                if abs(float(np.mean(a)) - float(np.mean(b))) <= 1e-9 * (1 + abs(float(np.mean(a)))):
                    block[f"ks_{part}"], block[f"p_{part}"] = None, None
                    block[f"skipped_{part}"] = "degenerate"
                    continue
                flags.append(f"degenerate-mismatch:{part}@{z}")
                block[f"ks_{part}"], block[f"p_{part}"] = 1.0, 0.0
                tests.append((j, part, 0.0))
                continue
            d, p = ks_two_sample(a, b)
            block[f"ks_{part}"], block[f"p_{part}"] = d, p
            tests.append((j, part, p))
        blocks.append(block)
    rejected = holm([t[2] for t in tests], alpha)
    for (j, part, _), rej in zip(tests, rejected):
        blocks[j][f"reject_{part}"] = bool(rej)
    return EquivalenceReport(blocks, alpha, not any(rejected), flags)


def equivalence_test(cfg: EnsembleConfig, defm: Deformation | None, z_grid, trials: int, alpha: float,
                     master_seed: int | None = None) -> EquivalenceReport:
    """Compare ``q_n`` with its Gaussian limit over a grid of points with ``|z| <= 0.7``."""
    z_grid = np.atleast_1d(np.asarray(z_grid, dtype=np.complex128))
    if np.any(np.abs(z_grid) > 0.7):
        raise ConfigurationError("all grid points must satisfy |z| <= 0.7")
    if trials < 100:
        raise ConfigurationError(f"need at least 100 trials, got {trials}")
    if defm is not None and defm.n != cfg.n:
        raise ConfigurationError("deformation size does not match n")
    seed = cfg.seed if master_seed is None else master_seed
    q, lim = zip(*(equivalence_trial(cfg, defm, z_grid, seed, t) for t in range(trials)))
    return equivalence_verdict(np.array(q), np.array(lim), z_grid, alpha)
