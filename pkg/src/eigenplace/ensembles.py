"""Seeded random-matrix ensembles for Monte-Carlo campaigns.

Three kinds of candidate pool:

* ``gaussian`` -- i.i.d. standard normal entries,
* ``bernoulli`` -- i.i.d. entries in {0, 1} with probability 1/2,
* ``row_normalized_gaussian`` -- standard normal rows rescaled to unit norm.

Matrices come from the package's portable counter-based generator (see
``rng``), so the same spec yields the same pool bit for bit on any platform.
Trial ``t`` of a campaign uses the derived key ``rng.derive_seed(seed, t)``.
A pool that fails the full-column-rank check (possible for Bernoulli with
tiny probability) is regenerated with key ``seed XOR attempt``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import GenerationError, RankDeficiencyError
from .placement import CandidatePool
from . import rng

__all__ = ["EnsembleSpec", "generate", "trial_spec", "ENSEMBLE_KINDS"]

ENSEMBLE_KINDS = ("gaussian", "bernoulli", "row_normalized_gaussian")

_MAX_ATTEMPTS = 6  # first try plus five regenerations


@dataclass(frozen=True)
class EnsembleSpec:
    kind: str
    N: int
    n: int
    seed: int

    def __post_init__(self):
        if self.kind not in ENSEMBLE_KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if not self.n >= 1 or not self.N >= self.n:
            raise ValueError(f"need N >= n >= 1, got N={self.N}, n={self.n}")


def trial_spec(spec: EnsembleSpec, trial: int) -> EnsembleSpec:
    """Spec for Monte-Carlo trial ``trial`` of a campaign keyed by ``spec.seed``."""
    return replace(spec, seed=rng.derive_seed(spec.seed, trial))


def _entries(kind: str, N: int, n: int, key: int):
    count = N * n
    if kind == "bernoulli":
        return (rng.uniforms(key, count) < 0.5).astype(float).reshape(N, n)
    mat = rng.normals(key, count).reshape(N, n)
    if kind == "row_normalized_gaussian":
        mat = mat / np.linalg.norm(mat, axis=1, keepdims=True)
    return mat


def generate(spec: EnsembleSpec) -> CandidatePool:
    """Candidate pool for ``spec``; identical spec gives an identical matrix.

    Rank-deficient draws are retried with derived sub-seeds; more than
    ``_MAX_ATTEMPTS`` failures raise ``GenerationError`` (practically
    unreachable for these ensembles).  The attempt counter is recorded in the
    pool's ``meta``.
    """
    for attempt in range(_MAX_ATTEMPTS):
        key = spec.seed ^ attempt
        matrix = _entries(spec.kind, spec.N, spec.n, key)
        try:
            return CandidatePool(matrix, meta={"spec": spec, "attempt": attempt})
        except RankDeficiencyError:
            continue
    raise GenerationError(
        f"could not draw a full-column-rank {spec.N}x{spec.n} {spec.kind} matrix "
        f"in {_MAX_ATTEMPTS} attempts (seed {spec.seed})"
    )
