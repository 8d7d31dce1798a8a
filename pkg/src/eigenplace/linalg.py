"""Dense symmetric linear algebra used by the placement algorithms.

Eigendecomposition, Gram-Schmidt orthonormalization, eigenspace/null-space
projectors, and a bisection solver for the secular equation that governs how
the smallest eigenvalue of a symmetric matrix moves under a rank-one update.
The secular solver is deliberately independent of the dense eigensolver so the
two can cross-check each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import NumericFailureError

__all__ = [
    "SymmetricEigenSystem",
    "OrthonormalBasis",
    "Projector",
    "sym_eigendecompose",
    "orthonormalize",
    "nullspace_projector",
    "min_eigenspace_projector",
    "secular_min_eigenvalue",
]

# Eigenvalues within this relative distance of the smallest one are treated as
# part of the minimum eigenspace.
MULTIPLICITY_RTOL = 1e-8
# Residual-norm tolerance (relative to the input norm) below which a vector is
# dropped as linearly dependent during Gram-Schmidt.
GS_DROP_RTOL = 1e-10

_SECULAR_MAX_ITER = 200
_SECULAR_WIDTH_RTOL = 1e-14
_POLE_MARGIN_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class SymmetricEigenSystem:
    """Spectrum of a symmetric matrix.

    ``eigenvalues`` are sorted nonincreasing; column ``i`` of ``eigenvectors``
    is the unit eigenvector paired with ``eigenvalues[i]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """Mutually orthonormal vectors in R^dim, one per row of ``vectors``."""

    dim: int
    vectors: np.ndarray  # shape (count, dim)

    @property
    def count(self) -> int:
        return self.vectors.shape[0]


@dataclass(frozen=True, eq=False)
class Projector:
    """Symmetric idempotent matrix projecting onto a subspace."""

    dim: int
    matrix: np.ndarray
    subspace_dim: int


def _validated_square(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def _canonical_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive.

    Ties on magnitude break to the lowest row index (argmax semantics), which
    makes eigenvector output deterministic for golden-file tests.
    """
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0.0] = 1.0
    return vectors * signs


def sym_eigendecompose(a) -> SymmetricEigenSystem:
    """Full eigendecomposition of a symmetric matrix.

    The input is symmetrized internally; entries must be finite and the
    asymmetry must be small (1e-10 relative).  Eigenvalues come back sorted
    nonincreasing with a deterministic sign convention on the eigenvectors.

    Raises ``ValueError`` for invalid input and ``NumericFailureError`` if the
    underlying solver does not converge.
    """
    a = _validated_square(a)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and float(np.max(np.abs(a - a.T))) > 1e-10 * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    sym = 0.5 * (a + a.T)
    try:
        w, v = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise NumericFailureError(f"eigendecomposition failed: {exc}") from exc
    order = slice(None, None, -1)  # eigh returns ascending order
    return SymmetricEigenSystem(
        eigenvalues=np.ascontiguousarray(w[order]),
        eigenvectors=_canonical_signs(np.ascontiguousarray(v[:, order])),
    )


def gram_schmidt_append(basis_rows: Sequence[np.ndarray], v: np.ndarray):
    """Orthonormalize ``v`` against an existing orthonormal set.

    One modified Gram-Schmidt sweep plus one re-orthogonalization sweep.
    Returns the new unit vector, or ``None`` if the residual fell below the
    drop tolerance (``v`` linearly dependent on the basis).
    """
    orig_norm = float(np.linalg.norm(v))
    if orig_norm == 0.0:
        return None
    w = np.array(v, dtype=float)
    for _ in range(2):
        for b in basis_rows:
            w -= (b @ w) * b
    res = float(np.linalg.norm(w))
    if res <= GS_DROP_RTOL * orig_norm:
        return None
    return w / res


def orthonormalize(vectors: Iterable, dim: int | None = None) -> OrthonormalBasis:
    """Modified Gram-Schmidt orthonormalization of a vector sequence.

    Vectors whose residual after projection onto the partial basis is below
    ``GS_DROP_RTOL`` times their own norm are skipped.  ``dim`` is only needed
    when ``vectors`` is empty.
    """
    rows: list[np.ndarray] = []
    for v in vectors:
        v = np.asarray(v, dtype=float)
        if v.ndim != 1:
            raise ValueError("each input must be a 1-D vector")
        if not np.all(np.isfinite(v)):
            raise ValueError("input vector has non-finite entries")
        if dim is None:
            dim = v.shape[0]
        elif v.shape[0] != dim:
            raise ValueError(f"expected length-{dim} vector, got {v.shape[0]}")
        w = gram_schmidt_append(rows, v)
        if w is not None:
            rows.append(w)
    if dim is None:
        raise ValueError("dim is required for an empty input")
    mat = np.array(rows) if rows else np.zeros((0, dim))
    return OrthonormalBasis(dim=dim, vectors=mat)


def nullspace_projector(basis: OrthonormalBasis) -> Projector:
    """Projector onto the orthogonal complement of ``span(basis)``."""
    n = basis.dim
    p = np.eye(n) - basis.vectors.T @ basis.vectors
    return Projector(dim=n, matrix=p, subspace_dim=n - basis.count)


def min_eigenspace_projector(
    eig: SymmetricEigenSystem, mult_tol: float = MULTIPLICITY_RTOL
) -> tuple[Projector, int]:
    """Projector onto the eigenspace of all eigenvalues tied to the minimum.

    An eigenvalue belongs to the cluster iff
    ``lambda_i - lambda_n <= mult_tol * max(lambda_1, 1e-30)``.
    Returns the projector and the multiplicity of the cluster.
    """
    lam = eig.eigenvalues
    n = lam.shape[0]
    thresh = mult_tol * max(float(lam[0]), 1e-30)
    mu = int(np.count_nonzero(lam - lam[-1] <= thresh))
    u_min = eig.eigenvectors[:, n - mu:]
    return Projector(dim=n, matrix=u_min @ u_min.T, subspace_dim=mu), mu


def secular_min_eigenvalue(prior_eigenvalues, z, mu_n: int) -> float:
    """Smallest moving eigenvalue after a symmetric rank-one update.

    Given the nonincreasing spectrum ``prior_eigenvalues`` of a symmetric
    matrix whose minimum eigenvalue has multiplicity ``mu_n``, and the update
    vector ``z`` expressed in that matrix's eigenbasis, returns eigenvalue
    number ``n - mu_n + 1`` (1-based, nonincreasing order) of
    ``diag(prior) + z z^T``.

    The root of::

        1 + sum_{i <= n - mu_n, z_i != 0} z_i^2 / (lam_i - x)
          + zeta / (lam_min - x) = 0,        zeta = sum_{i > n - mu_n} z_i^2

    is located by bisection on the open interval between ``lam_min`` and the
    next prior eigenvalue up.  When the update leaves the cluster untouched
    (``zeta == 0``) the prior minimum is returned unchanged; when the moving
    root jumps past an unmoved eigenvalue (possible only if ``z`` has a zero
    at the interval's upper pole) interlacing pins the answer at that upper
    eigenvalue, which is what the bisection degenerates to.
    """
    lam = np.asarray(prior_eigenvalues, dtype=float)
    z = np.asarray(z, dtype=float)
    n = lam.shape[0]
    if lam.ndim != 1 or z.shape != (n,):
        raise ValueError("prior eigenvalues and z must be vectors of equal length")
    if not (np.all(np.isfinite(lam)) and np.all(np.isfinite(z))):
        raise ValueError("non-finite input")
    if not 1 <= mu_n <= n:
        raise ValueError(f"multiplicity {mu_n} out of range for n={n}")
    if np.any(lam[:-1] < lam[1:] - 1e-9 * max(1.0, float(np.max(np.abs(lam))))):
        raise ValueError("prior eigenvalues must be sorted nonincreasing")

    top = n - mu_n
    lam_min = float(lam[top])
    zeta = float(np.sum(z[top:] ** 2))
    if zeta == 0.0:
        return lam_min
    if top == 0:
        # No eigenvalues above the cluster: the root is explicit.
        return lam_min + zeta

    zsq = z[:top] ** 2
    active = zsq > 0.0
    lam_act = lam[:top][active]
    zsq_act = zsq[active]
    hi_pole = float(lam[top - 1])
    if hi_pole <= lam_min:
        # Degenerate call: the "next" eigenvalue is not above the cluster.
        return hi_pole

    def f(x: float) -> float:
        s = 1.0 + zeta / (lam_min - x)
        if lam_act.size:
            s += float(np.sum(zsq_act / (lam_act - x)))
        return s

    lo = lam_min + _POLE_MARGIN_RTOL * max(1.0, abs(lam_min))
    hi = hi_pole - _POLE_MARGIN_RTOL * max(1.0, abs(hi_pole))
    if lo >= hi:
        return 0.5 * (lam_min + hi_pole)
    if f(lo) >= 0.0:
        # Root within the margin of the lower pole.
        return lam_min
    if f(hi) <= 0.0:
        # No root below the next eigenvalue: interlacing pins it there.
        return hi_pole

    for _ in range(_SECULAR_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _SECULAR_WIDTH_RTOL * (1.0 + abs(mid)):
            return 0.5 * (lo + hi)
    if hi - lo <= math.sqrt(_SECULAR_WIDTH_RTOL) * (1.0 + abs(0.5 * (lo + hi))):
        return 0.5 * (lo + hi)
    raise NumericFailureError(
        f"secular bisection did not converge: interval width {hi - lo!r}"
    )
