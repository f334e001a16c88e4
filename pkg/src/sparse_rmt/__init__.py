"""Sparse non-Hermitian random matrices with finite-rank deformations.

Modules
-------
ensemble   seedable generators for sparse, Gaussian and deformed matrices
spectra    dense eigenvalues, singular values, resolvent bilinear forms
outliers   outlier sets, Hausdorff distance, secular equation, overlaps
charpoly   reverse characteristic polynomials and their Gaussian limit
stieltjes  fixed-point Stieltjes transform of the hermitized Gaussian model
harness    deterministic Monte Carlo experiments and their verdicts
"""
from .ensemble import Deformation, EnsembleConfig, EntryLaw, Family

__version__ = "0.1.0"

__all__ = ["Deformation", "EnsembleConfig", "EntryLaw", "Family", "__version__"]
