"""Stieltjes transform of the hermitized Gaussian model.

For ``|xi| > 1`` the limiting symmetric measure of the singular values of
``G - xi I`` (and their negatives) has a Stieltjes transform ``m(w)`` which is
the unique solution in the upper half-plane of

    -1/m = w + m - |xi|^2 / (w + m).

On the imaginary axis ``m(i eta) = i eta h(eta)`` where ``h`` is the positive
root of ``eta^2 h^3 + 2 eta^2 h^2 + (eta^2 + |xi|^2 - 1) h - 1 = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError, DomainError, NumericalError

__all__ = [
    "StieltjesSolution",
    "SupportEstimate",
    "solve_m",
    "fixed_point_residual",
    "h_eta",
    "density",
    "support_estimate",
    "gaussian_resolvent_prediction",
]

RESIDUAL_TOL = 1e-12
MAX_ITER = 100_000
ETA_SMALL = 1e-4
DENSITY_THRESHOLD = 1e-3


def _check_xi(xi_mod: float) -> float:
    if not xi_mod > 1:
        raise DomainError(f"|xi| must exceed 1, got {xi_mod}")
    return float(xi_mod) ** 2


def fixed_point_residual(m, w, xi_mod: float):
    """Relative residual ``|1 + m (w + m - |xi|^2/(w + m))|``.

    This is ``|-1/m - (w + m - |xi|^2/(w+m))|`` measured in units of ``|1/m|``,
    which stays meaningful when ``m`` is tiny.
    """
    x2 = float(xi_mod) ** 2
    s = w + m
    return np.abs(1.0 + m * (s - x2 / s))


@dataclass(frozen=True)
class StieltjesSolution:
    w: complex
    m: complex
    residual: float
    iterations: int


def _iterate(w, x2, tol, max_iter, damping=0.5):
    """Damped fixed-point iteration, vectorized over an array of points `w`."""
    w = np.asarray(w, dtype=np.complex128)
    shape = w.shape
    w = w.ravel()
    m = np.full(w.shape, 1j)
    res = np.full(w.shape, np.inf)
    iters = np.zeros(w.shape, dtype=np.int64)
    active = np.arange(len(w))
    wa, ma = w, m.copy()
    for it in range(max_iter + 1):
        s = wa + ma
        ra = np.abs(1.0 + ma * (s - x2 / s))
        conv = ra <= tol
        if conv.any():
            idx = active[conv]
            m[idx], res[idx], iters[idx] = ma[conv], ra[conv], it
            keep = ~conv
            active, wa, ma, s = active[keep], wa[keep], ma[keep], s[keep]
        if not len(active):
            break
        ma = (1 - damping) * ma - damping / (s - x2 / s)
        if np.any(ma.imag <= 0):
            raise ConvergenceError(f"iterate left the upper half-plane at w={wa[ma.imag <= 0][0]}")
    else:
        raise ConvergenceError(f"no convergence after {max_iter} steps at w={wa[0]}")
    return m.reshape(shape), res.reshape(shape), iters.reshape(shape)


def solve_m(w: complex, xi_mod: float, tol: float = RESIDUAL_TOL) -> StieltjesSolution:
    """Solve the fixed-point equation at a single point with ``Im w > 0``.

    Iterates ``m <- m/2 - 1/(2 (w + m - |xi|^2/(w + m)))`` from ``m = i``.
    """
    x2 = _check_xi(xi_mod)
    w = complex(w)
    if not w.imag > 0:
        raise DomainError(f"need Im w > 0, got w={w}")
    m, res, iters = _iterate(np.array(w), x2, tol, MAX_ITER)
    sol = StieltjesSolution(w, complex(m), float(res), int(iters))
    assert sol.residual <= tol and sol.m.imag > 0
    return sol


def h_eta(eta: float, xi_mod: float) -> float:
    """Positive root of ``eta^2 h^3 + 2 eta^2 h^2 + (eta^2 + |xi|^2 - 1) h - 1``.

    Equals ``Im m(i eta) / eta``; at ``eta = 0`` it is ``1/(|xi|^2 - 1)``.
    """
    x2 = _check_xi(xi_mod)
    if eta < 0:
        raise DomainError(f"eta must be >= 0, got {eta}")
    if eta == 0:
        return 1.0 / (x2 - 1.0)
    e2 = eta * eta

    def cubic(h):
        return ((e2 * h + 2 * e2) * h + (e2 + x2 - 1)) * h - 1.0

    def dcubic(h):
        return (3 * e2 * h + 4 * e2) * h + (e2 + x2 - 1)

    hi = 1.0 / (x2 - 1.0)
    if cubic(0.0) * cubic(hi) > 0:
        raise NumericalError(f"no sign change for h at eta={eta}, |xi|^2={x2}")
    h = brentq(cubic, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    for _ in range(3):
        h -= cubic(h) / dcubic(h)
    return float(h)


def density(x, xi_mod: float, eta_small: float = ETA_SMALL):
    """``Im m(x + i eta_small) / pi``, clipped at 0; `x` may be an array."""
    x2 = _check_xi(xi_mod)
    if not 0 < eta_small <= 1e-2:
        raise DomainError(f"eta_small must lie in (0, 1e-2], got {eta_small}")
    xs = np.asarray(x, dtype=float)
    m, _, _ = _iterate(xs + 1j * eta_small, x2, RESIDUAL_TOL, MAX_ITER)
    out = np.maximum(m.imag / math.pi, 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SupportEstimate:
    xi: float
    c: float
    C: float
    eta_small: float = ETA_SMALL
    threshold: float = DENSITY_THRESHOLD

    def to_dict(self) -> dict:
        return {"xi": self.xi, "c": self.c, "C": self.C, "eta_small": self.eta_small, "threshold": self.threshold}


def support_estimate(xi_mod: float, eta_small: float = ETA_SMALL, threshold: float = DENSITY_THRESHOLD,
                     points: int = 4000) -> SupportEstimate:
    """Inner and outer edge of the positive half of the support.

    The density is scanned on a log-spaced grid of (1e-3, |xi| + 3) and the
    first and last threshold crossings are located by linear interpolation.
    """
    _check_xi(xi_mod)
    grid = np.logspace(-3, math.log10(xi_mod + 3.0), points)
    rho = density(grid, xi_mod, eta_small)
    above = np.nonzero(rho > threshold)[0]
    if len(above) == 0 or above[0] == 0 or above[-1] == len(grid) - 1:
        raise NumericalError(f"density never crosses {threshold} inside the scan window for |xi|={xi_mod}")

    def crossing(i, j):
        t = (threshold - rho[i]) / (rho[j] - rho[i])
        return float(grid[i] + t * (grid[j] - grid[i]))

    lo, hi = above[0], above[-1]
    c = crossing(lo - 1, lo)
    C = crossing(hi, hi + 1)
    return SupportEstimate(float(xi_mod), c, C, eta_small, threshold)


def gaussian_resolvent_prediction(xi: complex, eta: float, w, q) -> complex:
    """Deterministic equivalent ``m(i eta) <w, q>`` of ``<(S - i eta)^{-1} w, q>``.

    `w` and `q` live in C^{2n} and must vanish on the last n coordinates.
    """
    w = np.asarray(w, dtype=np.complex128)
    q = np.asarray(q, dtype=np.complex128)
    if w.shape != q.shape or w.ndim != 1 or len(w) % 2:
        raise DomainError("w and q must be vectors of the same even length")
    n = len(w) // 2
    if np.any(w[n:] != 0) or np.any(q[n:] != 0):
        raise DomainError("w and q must be supported on the first n coordinates")
    if not eta > 0:
        raise DomainError(f"eta must be positive, got {eta}")
    m = solve_m(1j * eta, abs(xi)).m
    return m * complex(np.vdot(q, w))
