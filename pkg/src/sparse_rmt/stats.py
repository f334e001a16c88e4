"""Small statistics toolkit: two-sample KS, Holm correction, normal CIs."""
from __future__ import annotations

import math

import numpy as np
from scipy.special import kolmogorov

from .errors import ConfigurationError

__all__ = ["ks_two_sample", "holm", "mean_ci95", "proportion"]

MIN_KS_SAMPLE = 20


def ks_two_sample(a, b) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.

    The p-value is the Kolmogorov survival function evaluated at
    ``D * sqrt(m n / (m + n))``.
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    m, n = len(a), len(b)
    if m < MIN_KS_SAMPLE or n < MIN_KS_SAMPLE:
        raise ConfigurationError(f"KS needs at least {MIN_KS_SAMPLE} points per sample, got {m} and {n}")
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / m
    cdf_b = np.searchsorted(b, pooled, side="right") / n
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    p = float(kolmogorov(d * math.sqrt(m * n / (m + n))))
    return d, min(max(p, 0.0), 1.0)


def holm(p_values, alpha: float) -> list[bool]:
    """Holm step-down procedure; returns a rejection flag per hypothesis."""
    p = np.asarray(p_values, dtype=float)
    order = np.argsort(p, kind="stable")
    reject = [False] * len(p)
    m = len(p)
    for rank, idx in enumerate(order):
        if p[idx] <= alpha / (m - rank):
            reject[idx] = True
        else:
            break
    return reject


def mean_ci95(values) -> tuple[float, float, tuple[float, float], int]:
    """(mean, sample std, normal-approximation CI95, n)."""
    x = np.asarray(values, dtype=float)
    n = len(x)
    if n == 0:
        raise ConfigurationError("no values to summarize")
    mean = float(np.mean(x))
    std = float(np.std(x, ddof=1)) if n > 1 else 0.0
    half = 1.96 * std / math.sqrt(n)
    return mean, std, (mean - half, mean + half), n


def proportion(flags) -> float:
    flags = list(flags)
    if not flags:
        return math.nan
    return sum(bool(f) for f in flags) / len(flags)
