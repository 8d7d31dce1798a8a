"""Error indicators for a sensor selection, and the estimator itself.

Indices are reported with the noise variance factored out (sigma^2 = 1);
``NoiseModel`` scales them back where a physical-units number is wanted.
Singular dual matrices report ``inf`` rather than huge finite numbers so that
benchmark aggregation stays honest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RankDeficiencyError
from .linalg import sym_eigendecompose

__all__ = [
    "NoiseModel",
    "MetricReport",
    "mse_index",
    "wcev_index",
    "condition_number",
    "frame_potential",
    "mvue_estimate",
    "reconstruct_field",
    "metric_report",
    "mse_from_eigenvalues",
    "wcev_from_eigenvalues",
    "condition_from_eigenvalues",
]

# Eigenvalues at or below this relative floor count as zero.
SINGULARITY_RTOL = 1e-12


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean i.i.d. Gaussian measurement noise with variance ``variance``."""

    variance: float

    def __post_init__(self):
        if not (self.variance > 0 and math.isfinite(self.variance)):
            raise ValueError("noise variance must be positive and finite")

    def mse(self, dual) -> float:
        return self.variance * mse_index(dual)

    def wcev(self, dual) -> float:
        return self.variance * wcev_index(dual)


@dataclass(frozen=True)
class MetricReport:
    mse_index: float
    wcev_index: float
    condition_number: float
    frame_potential: float
    lambda_min: float
    lambda_max: float


def _singularity_floor(lam_max: float) -> float:
    return SINGULARITY_RTOL * max(lam_max, 1e-30)


def mse_from_eigenvalues(lam) -> float:
    """sum(1/lambda_i) from a spectrum; inf if any eigenvalue is at the floor."""
    lam = np.asarray(lam, dtype=float)
    if np.min(lam) <= _singularity_floor(float(np.max(lam))):
        return math.inf
    return float(np.sum(1.0 / lam))


def wcev_from_eigenvalues(lam) -> float:
    """1/lambda_min from a spectrum; inf if singular."""
    lam = np.asarray(lam, dtype=float)
    lam_min = float(np.min(lam))
    if lam_min <= _singularity_floor(float(np.max(lam))):
        return math.inf
    return 1.0 / lam_min


def condition_from_eigenvalues(lam) -> float:
    lam = np.asarray(lam, dtype=float)
    lam_min = float(np.min(lam))
    lam_max = float(np.max(lam))
    if lam_min <= _singularity_floor(lam_max):
        return math.inf
    return lam_max / lam_min


def mse_index(dual) -> float:
    """Trace of the inverse dual matrix: sum over 1/lambda_i."""
    return mse_from_eigenvalues(sym_eigendecompose(dual).eigenvalues)


def wcev_index(dual) -> float:
    """Largest eigenvalue of the inverse dual matrix: 1/lambda_min."""
    return wcev_from_eigenvalues(sym_eigendecompose(dual).eigenvalues)


def condition_number(dual) -> float:
    """lambda_max / lambda_min of the dual matrix (inf when singular)."""
    return condition_from_eigenvalues(sym_eigendecompose(dual).eigenvalues)


def frame_potential(rows) -> float:
    """Sum of squared pairwise inner products, self-terms included."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.size == 0:
        return 0.0
    gram = rows @ rows.T
    return float(np.sum(gram * gram))


def mvue_estimate(phi, y) -> np.ndarray:
    """Minimum-variance unbiased estimate: pseudo-inverse applied to y.

    Solves the normal equations through the eigendecomposition of the dual
    matrix.  Raises ``RankDeficiencyError`` when phi is not full column rank.
    """
    phi = np.asarray(phi, dtype=float)
    y = np.asarray(y, dtype=float)
    if phi.ndim != 2 or y.shape != (phi.shape[0],):
        raise ValueError("phi must be 2-D with one measurement per row")
    eig = sym_eigendecompose(phi.T @ phi)
    lam = eig.eigenvalues
    if float(lam[-1]) <= _singularity_floor(float(lam[0])):
        raise RankDeficiencyError("observation matrix is rank deficient")
    rhs = eig.eigenvectors.T @ (phi.T @ y)
    return eig.eigenvectors @ (rhs / lam)


def reconstruct_field(representation, alpha) -> np.ndarray:
    """Field values at every candidate location for parameter vector alpha."""
    mat = np.asarray(getattr(representation, "matrix", representation), dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if mat.ndim != 2 or alpha.shape != (mat.shape[1],):
        raise ValueError(
            f"parameter vector of length {alpha.shape} does not match matrix {mat.shape}"
        )
    return mat @ alpha


def metric_report(dual, rows=None) -> MetricReport:
    """All error indicators for one selection.

    ``rows`` (the selected observation vectors) is optional: the frame
    potential equals the squared Frobenius norm of the dual matrix, so it can
    be derived from ``dual`` alone.
    """
    eig = sym_eigendecompose(dual)
    lam = eig.eigenvalues
    if rows is not None:
        fp = frame_potential(rows)
    else:
        d = np.asarray(dual, dtype=float)
        fp = float(np.sum(d * d))
    return MetricReport(
        mse_index=mse_from_eigenvalues(lam),
        wcev_index=wcev_from_eigenvalues(lam),
        condition_number=condition_from_eigenvalues(lam),
        frame_potential=fp,
        lambda_min=float(lam[-1]),
        lambda_max=float(lam[0]),
    )
