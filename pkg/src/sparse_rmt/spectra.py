"""Dense eigenvalues, singular values and resolvent bilinear forms."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConfigurationError, DomainError, NumericalError

__all__ = [
    "TOL_EIG",
    "ComplexSpectrum",
    "eig",
    "spectral_radius",
    "singular_values",
    "esd_radial_fractions",
    "resolvent_bilinear",
]

# relative backward error accepted from the dense eigensolver
TOL_EIG = 1e-8


@dataclass
class ComplexSpectrum:
    """Multiset of eigenvalues of an n x n matrix.

    ``backward_error`` is ``||MV - V diag(values)||_F / (||M||_F ||V||_F)``
    when eigenvectors were computed, and the trace proxy
    ``|sum(values) - tr M| / (n ||M||_F)`` otherwise.
    """

    values: np.ndarray
    backward_error: float
    source_dim: int
    flagged: bool = False
    diagnostic: str = ""
    vectors: np.ndarray | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.values)


def _as_square(m) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigurationError(f"expected a square matrix, got shape {m.shape}")
    return m


def eig(m, vectors: bool = False) -> ComplexSpectrum:
    """All eigenvalues of a dense square matrix (LAPACK ``geev``).

    Failures never pass silently: LAPACK non-convergence or a backward error
    above ``TOL_EIG`` yields ``flagged=True`` with a diagnostic.
    """
    m = _as_square(m)
    n = m.shape[0]
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix has non-finite entries")
    try:
        if vectors:
            vals, vecs = np.linalg.eig(m)
        else:
            vals, vecs = np.linalg.eigvals(m), None
    except np.linalg.LinAlgError as exc:
        return ComplexSpectrum(np.full(n, np.nan + 0j), np.inf, n, True, f"eigensolver failed: {exc}")

    vals = np.asarray(vals, dtype=np.complex128)
    scale = np.linalg.norm(m)
    if scale == 0.0:
        err = float(np.max(np.abs(vals), initial=0.0))
    elif vecs is not None:
        err = float(np.linalg.norm(m @ vecs - vecs * vals) / (scale * np.linalg.norm(vecs)))
    else:
        err = float(abs(vals.sum() - np.trace(m)) / (n * scale))
    spec = ComplexSpectrum(vals, err, n, vectors=vecs)
    if not err <= TOL_EIG:
        spec.flagged = True
        spec.diagnostic = f"backward error {err:.3e} exceeds {TOL_EIG:.0e}"
    return spec


def spectral_radius(s: ComplexSpectrum) -> float:
    values = s.values if isinstance(s, ComplexSpectrum) else np.asarray(s)
    if len(values) == 0:
        raise ConfigurationError("spectral radius of an empty spectrum")
    return float(np.max(np.abs(values)))


def singular_values(m) -> np.ndarray:
    """Singular values in nonincreasing order; the last one is ``s_min``."""
    m = np.asarray(m)
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix has non-finite entries")
    try:
        return scipy.linalg.svdvals(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc


def esd_radial_fractions(s, radii) -> list[float]:
    """Fraction of eigenvalues with modulus at most r, for each r in `radii`."""
    values = s.values if isinstance(s, ComplexSpectrum) else np.asarray(s)
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0) or np.any(np.diff(radii) < 0):
        raise ConfigurationError("radii must be positive and sorted")
    mods = np.sort(np.abs(values))
    counts = np.searchsorted(mods, radii, side="right")
    return [float(c) / len(mods) for c in counts]


def resolvent_bilinear(h, z: complex, w, q) -> complex:
    """``<(H - z)^{-1} w, q> = q^* (H - z)^{-1} w`` for Hermitian `h`, Im z > 0."""
    h = _as_square(h)
    w = np.asarray(w)
    q = np.asarray(q)
    if z.imag <= 0:
        raise DomainError(f"resolvent needs Im z > 0, got z={z}")
    if w.shape != (h.shape[0],) or q.shape != (h.shape[0],):
        raise ConfigurationError("vector dimensions do not match the matrix")
    a = h - z * np.eye(h.shape[0])
    x = scipy.linalg.solve(a, w, check_finite=False)
    resid = np.linalg.norm(a @ x - w)
    if resid > 1e-10 * max(np.linalg.norm(w), np.finfo(float).tiny):
        raise NumericalError(f"resolvent solve residual {resid:.3e} too large")
    return complex(np.vdot(q, x))
