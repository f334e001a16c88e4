"""Outliers of ``Y = X + E``: extraction, Hausdorff distance, secular equation
and eigenvector overlaps.

Inner products follow ``<a, b> = b^* a`` (linear in the first slot), so the
secular function is ``1 + <(X - z)^{-1} u, v> = 1 + v^* (X - z)^{-1} u`` and
the nonzero eigenvalue of ``u v^*`` is ``v^* u``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg.lapack import get_lapack_funcs

from .errors import (
    ConfigurationError,
    ConvergenceError,
    DegenerateOutlierError,
    DomainError,
    NotAnOutlierError,
    SingularPointError,
)
from .spectra import ComplexSpectrum, eig

__all__ = [
    "OutlierReport",
    "OverlapResult",
    "outlier_set",
    "predicted_set",
    "default_eps",
    "hausdorff",
    "outlier_report",
    "secular_value",
    "secular_root",
    "eigvec_overlap",
    "predicted_overlap",
]

# reciprocal condition number below which (X - zI) counts as singular
RCOND_MIN = 1e-13


def _values(s) -> np.ndarray:
    if isinstance(s, ComplexSpectrum):
        return s.values
    return np.asarray(s, dtype=np.complex128).ravel()


def outlier_set(s, eps: float) -> np.ndarray:
    """Eigenvalues of modulus >= 1 + eps, multiplicities kept."""
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    vals = _values(s)
    return vals[np.abs(vals) >= 1.0 + eps]


def predicted_set(e_eigenvalues) -> np.ndarray:
    """Eigenvalues of E with modulus > 1."""
    vals = _values(e_eigenvalues)
    return vals[np.abs(vals) > 1.0]


def default_eps(e_eigenvalues) -> float:
    """A quarter of the gap between the unit circle and the closest predicted outlier."""
    pred = predicted_set(e_eigenvalues)
    if len(pred) == 0:
        raise DomainError("E has no eigenvalue outside the unit disk; give eps explicitly")
    return 0.25 * (float(np.min(np.abs(pred))) - 1.0)


def hausdorff(a, b) -> float:
    """Hausdorff distance between two finite subsets of the complex plane.

    Both empty gives 0, exactly one empty gives ``inf``.
    """
    a = _values(a)
    b = _values(b)
    if len(a) == 0 and len(b) == 0:
        return 0.0
    if len(a) == 0 or len(b) == 0:
        return math.inf
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


@dataclass
class OutlierReport:
    eps: float
    observed: np.ndarray
    predicted: np.ndarray
    hausdorff: float
    count_match: bool

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "observed": [[z.real, z.imag] for z in self.observed],
            "predicted": [[z.real, z.imag] for z in self.predicted],
            "hausdorff": self.hausdorff,
            "count_match": self.count_match,
        }


def outlier_report(s, e_eigenvalues, eps: float | None = None) -> OutlierReport:
    predicted = predicted_set(e_eigenvalues)
    if eps is None:
        eps = default_eps(predicted)
    observed = outlier_set(s, eps)
    return OutlierReport(
        eps=float(eps),
        observed=observed,
        predicted=predicted,
        hausdorff=hausdorff(observed, predicted),
        count_match=len(observed) == len(predicted),
    )


class _ShiftedSolver:
    """LU factorization of ``X - zI`` with a conditioning check."""

    def __init__(self, x: np.ndarray, z: complex):
        a = np.asarray(x, dtype=np.complex128) - z * np.eye(x.shape[0])
        self.a = a
        with np.errstate(all="ignore"), warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            self.lu, self.piv = scipy.linalg.lu_factor(a, check_finite=False)
        gecon, = get_lapack_funcs(("gecon",), (self.lu,))
        rcond, _ = gecon(self.lu, np.linalg.norm(a, 1), norm="1")
        if not np.isfinite(rcond) or rcond < RCOND_MIN:
            raise SingularPointError(f"X - zI is numerically singular at z={z} (rcond={rcond:.2e})")

    def solve(self, b: np.ndarray) -> np.ndarray:
        y = scipy.linalg.lu_solve((self.lu, self.piv), b, check_finite=False)
        scale = np.linalg.norm(self.a, 1) * np.linalg.norm(y, 1) + np.linalg.norm(b, 1)
        if np.linalg.norm(self.a @ y - b, 1) > 1e-10 * scale:
            raise SingularPointError("resolvent solve residual too large")
        return y


def _check_vectors(x, u, v):
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ConfigurationError(f"expected a square matrix, got shape {x.shape}")
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if u.shape != (x.shape[0],) or v.shape != (x.shape[0],):
        raise ConfigurationError("u and v must match the matrix dimension")
    return x, u, v


def secular_value(x, z: complex, u, v) -> complex:
    """``1 + v^* (X - zI)^{-1} u``; vanishes exactly at eigenvalues of ``X + u v^*`` off sigma(X)."""
    x, u, v = _check_vectors(x, u, v)
    y = _ShiftedSolver(x, z).solve(u)
    return complex(1.0 + np.vdot(v, y))


def secular_root(x, u, v, z_init: complex, tol: float = 1e-10, max_iter: int = 100) -> complex:
    """Newton iteration on the secular function, started at `z_init`.

    The derivative ``v^* (X - zI)^{-2} u`` comes from a second solve with the
    same factorization.  A step that increases ``|f|`` or lands on sigma(X) is
    halved.
    """
    x, u, v = _check_vectors(x, u, v)
    if abs(z_init) <= 1.0:
        raise DomainError(f"z_init must lie outside the unit disk, got {z_init}")

    def f_and_solver(z):
        solver = _ShiftedSolver(x, z)
        y = solver.solve(u)
        return complex(1.0 + np.vdot(v, y)), solver, y

    z = complex(z_init)
    f, solver, y = f_and_solver(z)
    for it in range(max_iter):
        if abs(f) <= tol:
            break
        df = complex(np.vdot(v, solver.solve(y)))
        if df == 0:
            raise ConvergenceError(f"zero derivative at z={z}")
        step = f / df
        for _ in range(60):
            try:
                f_new, solver_new, y_new = f_and_solver(z - step)
            except SingularPointError:
                step *= 0.5
                continue
            if abs(f_new) <= abs(f) or abs(f_new) <= tol:
                break
            step *= 0.5
        else:
            raise ConvergenceError(f"secular Newton stalled at z={z}, |f|={abs(f):.3e}")
        z, f, solver, y = z - step, f_new, solver_new, y_new
    else:
        if abs(f) > tol:
            raise ConvergenceError(f"secular Newton did not converge in {max_iter} steps (|f|={abs(f):.3e})")
    if abs(z) <= 1.0:
        raise NotAnOutlierError(f"secular root {z} lies inside the unit disk", z)
    return z


@dataclass
class OverlapResult:
    lambda_max: complex
    overlap_sq: float
    predicted: float
    inner_uv: complex
    residual: float = 0.0

    def to_dict(self) -> dict:
        return {
            "lambda_max": [self.lambda_max.real, self.lambda_max.imag],
            "overlap_sq": self.overlap_sq,
            "predicted": self.predicted,
            "inner_uv": [self.inner_uv.real, self.inner_uv.imag],
            "residual": self.residual,
        }


def predicted_overlap(inner_uv: complex) -> float:
    """Large-n limit ``1 - 1/|<v, u>|^2`` of the squared overlap."""
    a = abs(inner_uv)
    if a <= 1.0:
        raise DomainError(f"|<v,u>| must exceed 1, got {a}")
    return 1.0 - 1.0 / a**2


def eigvec_overlap(y, u, v, eps: float | None = None, x=None, spectrum: ComplexSpectrum | None = None,
                   max_iter: int = 10) -> OverlapResult:
    """Squared overlap between the outlier eigenvector of `y` and ``u/|u|``.

    The unique eigenvalue of modulus >= 1 + eps is taken from a dense eigensolve
    (pass `spectrum` to reuse one).  Its right eigenvector is obtained by
    inverse iteration, started from ``(X - lambda)^{-1} u`` when the
    unperturbed matrix `x` is given and from `u` otherwise.
    """
    y, u, v = _check_vectors(y, u, v)
    inner_uv = complex(np.vdot(v, u))
    predicted = predicted_overlap(inner_uv)
    if eps is None:
        eps = default_eps([inner_uv])
    if spectrum is None:
        spectrum = eig(y)
    out = outlier_set(spectrum, eps)
    if len(out) != 1:
        raise DegenerateOutlierError(f"expected one outlier with |z| >= {1 + eps}, found {len(out)}", len(out))
    lam = complex(out[0])

    if x is not None:
        vec = _ShiftedSolver(np.asarray(x), lam).solve(u)
    else:
        vec = u.copy()
    vec /= np.linalg.norm(vec)
    ynorm = np.linalg.norm(y)
    # shift slightly off lambda so the factorization stays regular
    shift = lam + 1e-10 * max(1.0, abs(lam))
    a = np.asarray(y, dtype=np.complex128) - shift * np.eye(y.shape[0])
    with np.errstate(all="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu = scipy.linalg.lu_factor(a, check_finite=False)
    resid = np.linalg.norm(y @ vec - lam * vec)
    for _ in range(max_iter):
        if resid <= 1e-8 * ynorm:
            break
        vec = scipy.linalg.lu_solve(lu, vec, check_finite=False)
        vec /= np.linalg.norm(vec)
        resid = np.linalg.norm(y @ vec - lam * vec)
    else:
        if resid > 1e-8 * ynorm:
            raise ConvergenceError(f"inverse iteration residual {resid:.3e} above 1e-8*||Y||")
    overlap_sq = abs(np.vdot(u, vec)) ** 2 / np.vdot(u, u).real
    return OverlapResult(lam, float(min(overlap_sq, 1.0)), predicted, inner_uv, float(resid / ynorm))
