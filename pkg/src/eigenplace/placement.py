"""Sensor-selection algorithms over a pool of candidate observation vectors.

Two greedy eigenspace methods pick locations one at a time: one maximizes the
projection of each candidate onto the minimum eigenspace of the current dual
matrix (the cheap criterion), the other maximizes the minimum nonzero
eigenvalue of the updated dual matrix directly (the reference-slow criterion).
Baselines: worst-out frame-potential elimination, Frank-Wolfe log-det
relaxation with top-M rounding, a seeded uniform sample, and an exhaustive
oracle for desk-scale ground truth.  A 2-opt exchange pass can polish any
selection.

Ties everywhere break to the lowest index; floating-point ties are recognized
with a 1e-12 relative tolerance so that exact-arithmetic ties stay
deterministic under roundoff.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import RankDeficiencyError
from .linalg import (
    OrthonormalBasis,
    Projector,
    SymmetricEigenSystem,
    gram_schmidt_append,
    min_eigenspace_projector,
    nullspace_projector,
    sym_eigendecompose,
)
from .metrics import SINGULARITY_RTOL, mse_from_eigenvalues
from . import rng

__all__ = [
    "CandidatePool",
    "SelectionState",
    "StoppingRule",
    "PlacementResult",
    "FrankWolfeConfig",
    "RelaxationWeights",
    "init_state",
    "projection_score",
    "extend_state",
    "run_mpme",
    "run_mnep",
    "run_framesense",
    "framesense_order",
    "run_convex_relaxation",
    "run_random",
    "exhaustive_oracle",
    "local_optimize",
]

# Relative tolerance for recognizing score ties and strict improvements.
TIE_RTOL = 1e-12
# A candidate whose score is below this fraction of its own squared norm is
# linearly dependent on the current selection.
RANK_RTOL = 1e-12

ORACLE_DEFAULT_CAP = 2_000_000


@dataclass(eq=False)
class CandidatePool:
    """The full N x n signal representation matrix; rows are candidates.

    Construction verifies full column rank (smallest singular value above
    1e-10 of the largest), raising ``RankDeficiencyError`` otherwise.
    """

    matrix: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        if self.matrix.ndim != 2:
            raise ValueError("pool matrix must be 2-D")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("pool matrix has non-finite entries")
        n_rows, n_cols = self.matrix.shape
        if n_cols < 1 or n_rows < n_cols:
            raise RankDeficiencyError(
                f"need at least as many candidates as parameters, got {n_rows}x{n_cols}"
            )
        sv = np.linalg.svd(self.matrix, compute_uv=False)
        if sv[-1] <= 1e-10 * sv[0]:
            raise RankDeficiencyError("pool matrix is not full column rank")

    @property
    def N(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]


@dataclass(eq=False)
class SelectionState:
    """Incremental state after ``k`` selections.

    ``basis`` caches the Gram-Schmidt orthonormalization of the selected rows
    in selection order; appending one vector at a time reproduces, bit for
    bit, a from-scratch orthonormalization of the whole sequence, because each
    pass only ever projects a vector against basis vectors finished before it.
    ``eig`` is computed lazily and cached (valid once ``k >= 1``).
    """

    pool: CandidatePool
    selected: tuple[int, ...]
    dual: np.ndarray
    projector: Projector
    basis: OrthonormalBasis
    _eig: SymmetricEigenSystem | None = field(default=None, repr=False)

    @property
    def k(self) -> int:
        return len(self.selected)

    @property
    def mu_n(self) -> int:
        """Multiplicity of the minimum eigenvalue (the projector's rank)."""
        return self.projector.subspace_dim

    @property
    def eig(self) -> SymmetricEigenSystem | None:
        if self.k == 0:
            return None
        if self._eig is None:
            self._eig = sym_eigendecompose(self.dual)
        return self._eig


@dataclass(frozen=True)
class StoppingRule:
    """When a one-by-one selection run should stop.

    ``fixed_count``: stop after exactly M selections (n <= M <= N).
    ``wcev_threshold``: stop once lambda_n >= value.
    ``mse_threshold``: stop once sum(1/lambda_i) <= value.
    Thresholds are only ever checked at k >= n, where the dual matrix first
    becomes nonsingular.
    """

    kind: str
    value: float

    _KINDS = ("fixed_count", "wcev_threshold", "mse_threshold")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown stopping rule {self.kind!r}")
        if not (self.value > 0 and math.isfinite(self.value)):
            raise ValueError("stopping value must be positive and finite")

    @classmethod
    def fixed_count(cls, m: int) -> "StoppingRule":
        return cls("fixed_count", int(m))

    @classmethod
    def wcev_threshold(cls, gamma: float) -> "StoppingRule":
        return cls("wcev_threshold", float(gamma))

    @classmethod
    def mse_threshold(cls, tau: float) -> "StoppingRule":
        return cls("mse_threshold", float(tau))

    def validate_for(self, pool: CandidatePool) -> None:
        if self.kind == "fixed_count":
            m = int(self.value)
            if not pool.n <= m <= pool.N:
                raise ValueError(
                    f"fixed count {m} outside [{pool.n}, {pool.N}] for this pool"
                )

    def check(self, k: int, eigenvalues_desc: np.ndarray) -> tuple[bool, bool]:
        """(stop, satisfied) at step k; call only once k >= n."""
        if self.kind == "fixed_count":
            stop = k >= int(self.value)
            return stop, stop
        if self.kind == "wcev_threshold":
            sat = float(eigenvalues_desc[-1]) >= self.value
            return sat, sat
        sat = mse_from_eigenvalues(eigenvalues_desc) <= self.value
        return sat, sat


@dataclass(eq=False)
class PlacementResult:
    """Outcome of one placement run.

    ``lambda_trace`` holds lambda_n after each step with k >= n (selection
    algorithms) or the single final value (one-shot baselines).
    ``score_trace`` holds the winning per-step score for the greedy methods.
    """

    selected: list[int]
    M: int
    lambda_trace: list[float]
    score_trace: list[float]
    satisfied: bool
    algorithm: str
    local_opt_converged: bool | None = None


def init_state(pool: CandidatePool) -> SelectionState:
    """Empty selection: zero dual matrix, identity projector."""
    n = pool.n
    return SelectionState(
        pool=pool,
        selected=(),
        dual=np.zeros((n, n)),
        projector=Projector(dim=n, matrix=np.eye(n), subspace_dim=n),
        basis=OrthonormalBasis(dim=n, vectors=np.zeros((0, n))),
    )


def _check_unselected(state: SelectionState, index: int) -> int:
    index = int(index)
    if not 0 <= index < state.pool.N:
        raise ValueError(f"candidate index {index} out of range")
    if index in state.selected:
        raise ValueError(f"candidate {index} is already selected")
    return index


def projection_score(state: SelectionState, candidate: int) -> float:
    """Squared norm of the candidate row projected onto the minimum eigenspace."""
    candidate = _check_unselected(state, candidate)
    p = state.projector.matrix @ state.pool.matrix[candidate]
    return float(p @ p)


def extend_state(state: SelectionState, index: int) -> SelectionState:
    """New state with one more selection.

    The dual matrix gets a rank-one addition.  Below k = n the projector is
    rebuilt from the Gram-Schmidt null-space construction; from k = n on it
    spans the (clustered) minimum eigenspace of a fresh eigendecomposition.
    """
    index = _check_unselected(state, index)
    pool = state.pool
    row = pool.matrix[index]
    dual = state.dual + np.outer(row, row)
    selected = state.selected + (index,)
    k = len(selected)
    eig = None
    basis = state.basis
    if k < pool.n:
        w = gram_schmidt_append(list(basis.vectors), row)
        if w is not None:
            basis = OrthonormalBasis(
                dim=pool.n, vectors=np.vstack([basis.vectors, w])
            )
        projector = nullspace_projector(basis)
    else:
        eig = sym_eigendecompose(dual)
        projector, _ = min_eigenspace_projector(eig)
    return SelectionState(
        pool=pool,
        selected=selected,
        dual=dual,
        projector=projector,
        basis=basis,
        _eig=eig,
    )


def _argbest(scores: np.ndarray) -> tuple[int, float]:
    """Index of the maximum score; exact-math ties go to the lowest index.

    Ineligible entries must be -inf.  Scores within ``TIE_RTOL`` (relative) of
    the maximum count as tied.
    """
    best = float(np.max(scores))
    tol = TIE_RTOL * max(1.0, abs(best))
    return int(np.argmax(scores >= best - tol)), best


def _greedy_run(pool: CandidatePool, rule: StoppingRule, algorithm: str) -> PlacementResult:
    """Shared one-by-one selection loop for the two greedy criteria."""
    rule.validate_for(pool)
    rows = pool.matrix
    n_rows, n = rows.shape
    sqnorms = np.einsum("ij,ij->i", rows, rows)
    mnep = algorithm == "mnep"
    outers = rows[:, :, None] * rows[:, None, :] if mnep else None

    state = init_state(pool)
    taken = np.zeros(n_rows, dtype=bool)
    scores = np.empty(n_rows)
    lambda_trace: list[float] = []
    score_trace: list[float] = []
    satisfied = False

    while state.k < n_rows:
        k = state.k + 1
        scores.fill(-np.inf)
        if mnep:
            dual = state.dual
            lam_idx = max(n - k, 0)
            for i in range(n_rows):
                if taken[i]:
                    continue
                lam = np.linalg.eigvalsh(dual + outers[i])
                scores[i] = lam[lam_idx]
        else:
            proj = state.projector.matrix
            for i in range(n_rows):
                if taken[i]:
                    continue
                p = proj @ rows[i]
                scores[i] = p @ p
        if k <= n:
            free = ~taken
            if np.all(scores[free] <= RANK_RTOL * sqnorms[free]):
                raise RankDeficiencyError(
                    "no remaining candidate extends the selection to full rank"
                )
        winner, best = _argbest(scores)
        state = extend_state(state, winner)
        taken[winner] = True
        score_trace.append(best)
        if state.k >= n:
            eig = state.eig
            lambda_trace.append(float(eig.eigenvalues[-1]))
            stop, satisfied = rule.check(state.k, eig.eigenvalues)
            if stop:
                break

    return PlacementResult(
        selected=list(state.selected),
        M=state.k,
        lambda_trace=lambda_trace,
        score_trace=score_trace,
        satisfied=satisfied,
        algorithm=algorithm,
    )


def run_mpme(pool: CandidatePool, rule: StoppingRule) -> PlacementResult:
    """Greedy selection maximizing the minimum-eigenspace projection score.

    Each step picks the unselected candidate with the largest squared
    projection onto the minimum eigenspace of the current dual matrix.  With a
    threshold rule, the pool is exhausted (``satisfied=False``, M = N) if the
    threshold is never met.
    """
    return _greedy_run(pool, rule, "mpme")


def run_mnep(pool: CandidatePool, rule: StoppingRule) -> PlacementResult:
    """Greedy selection maximizing the minimum nonzero eigenvalue.

    Steps k <= n-1 maximize eigenvalue k (nonincreasing order) of the updated
    dual matrix; later steps maximize eigenvalue n.  Every candidate is scored
    by a dense eigenvalue solve, which is what makes this the reference-slow
    method.
    """
    return _greedy_run(pool, rule, "mnep")


def framesense_order(pool: CandidatePool) -> np.ndarray:
    """Worst-out elimination order, removing rows until only n remain.

    Each step removes the row whose removal leaves the smallest frame
    potential among the remaining rows (equivalently, the row contributing
    most to the current frame potential).
    """
    rows = pool.matrix
    n_rows, n = rows.shape
    g2 = (rows @ rows.T) ** 2
    diag = np.diag(g2).copy()
    rowsum = g2.sum(axis=1)  # includes the self term
    alive = np.ones(n_rows, dtype=bool)
    order = np.empty(n_rows - n, dtype=int)
    for step in range(n_rows - n):
        contrib = 2.0 * rowsum - diag
        contrib[~alive] = -np.inf
        r, _ = _argbest(contrib)
        order[step] = r
        alive[r] = False
        rowsum -= g2[:, r]
    return order


def _one_shot_result(pool, selected, algorithm) -> PlacementResult:
    sel = [int(i) for i in selected]
    sub = pool.matrix[sel]
    lam = np.linalg.eigvalsh(sub.T @ sub)
    return PlacementResult(
        selected=sel,
        M=len(sel),
        lambda_trace=[float(lam[0])],
        score_trace=[],
        satisfied=True,
        algorithm=algorithm,
    )


def run_framesense(pool: CandidatePool, M: int) -> PlacementResult:
    """Frame-potential worst-out elimination down to M rows."""
    M = int(M)
    if not pool.n <= M <= pool.N:
        raise ValueError(f"M={M} outside [{pool.n}, {pool.N}]")
    removed = framesense_order(pool)[: pool.N - M]
    keep = np.ones(pool.N, dtype=bool)
    keep[removed] = False
    return _one_shot_result(pool, np.flatnonzero(keep), "framesense")


@dataclass(frozen=True)
class FrankWolfeConfig:
    """Knobs for the log-det relaxation solver."""

    max_iterations: int = 500
    gap_rtol: float = 1e-6
    golden_steps: int = 50
    ridge_rtol: float = 1e-8


@dataclass(eq=False)
class RelaxationWeights:
    """Relaxed selection weights on the capped simplex {0<=w<=1, sum w = M}."""

    w: np.ndarray
    budget: int
    iterations: int
    objective_trace: list[float]


def _golden_section_max(theta: np.ndarray, steps: int) -> float:
    """argmax over [0, 1] of sum(log1p(t * theta)) by golden-section search."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    buf = np.empty_like(theta)
    multiply, log1p = np.multiply, np.log1p

    def val(t: float) -> float:
        multiply(theta, t, out=buf)
        log1p(buf, out=buf)
        return buf.sum()

    a, b = 0.0, 1.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = val(c), val(d)
    for _ in range(steps):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = val(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = val(d)
    return 0.5 * (a + b)


def run_convex_relaxation(
    pool: CandidatePool, M: int, config: FrankWolfeConfig | None = None
) -> tuple[RelaxationWeights, PlacementResult]:
    """Boolean-relaxed log-det maximization, solved by Frank-Wolfe.

    Maximizes ``log det(sum_i w_i phi_i phi_i^T + eps I)`` over the capped
    simplex.  The linear subproblem puts unit weight on the M largest gradient
    entries; the step size comes from an exact 1-D line search (golden
    section on the concave restriction).  The M largest final weights are the
    selection, ties to the lowest index.  Non-convergence is not an error: the
    best iterate is returned with the iteration count.
    """
    config = config or FrankWolfeConfig()
    M = int(M)
    if not pool.n <= M <= pool.N:
        raise ValueError(f"M={M} outside [{pool.n}, {pool.N}]")
    rows = pool.matrix
    rows_t = rows.T.copy()
    n_rows, n = rows.shape
    eps = config.ridge_rtol * float(np.einsum("ij,ij->", rows, rows)) / n
    ridge = eps * np.eye(n)

    w = np.full(n_rows, M / n_rows)
    trace: list[float] = []
    iterations = 0
    for _ in range(config.max_iterations):
        iterations += 1
        wmat = (rows * w[:, None]).T @ rows + ridge
        chol = np.linalg.cholesky(wmat)
        linv = np.linalg.inv(chol)
        x = linv @ rows_t
        grad = np.einsum("ij,ij->j", x, x)
        objective = 2.0 * float(np.sum(np.log(np.diag(chol))))
        trace.append(objective)
        top = np.argsort(-grad, kind="stable")[:M]
        gap = float(grad[top].sum() - grad @ w)
        if gap <= config.gap_rtol * abs(objective):
            break
        d = -w.copy()
        d[top] += 1.0
        dmat = (rows * d[:, None]).T @ rows
        theta = np.linalg.eigvalsh(linv @ dmat @ linv.T)
        t = _golden_section_max(theta, config.golden_steps)
        gain = float(np.sum(np.log1p(t * theta)))
        if gain <= 0.0:
            break
        w = np.clip(w + t * d, 0.0, 1.0)

    weights = RelaxationWeights(
        w=w, budget=M, iterations=iterations, objective_trace=trace
    )
    chosen = np.sort(np.argsort(-w, kind="stable")[:M])
    result = _one_shot_result(pool, chosen, "convex")
    return weights, result


def run_random(pool: CandidatePool, M: int, seed: int) -> PlacementResult:
    """Uniform sample of M distinct indices; deterministic per seed."""
    M = int(M)
    if not pool.n <= M <= pool.N:
        raise ValueError(f"M={M} outside [{pool.n}, {pool.N}]")
    idx = rng.sample_indices(pool.N, M, seed)
    return _one_shot_result(pool, idx, "random")


def _chunked(iterable: Iterable, size: int):
    it = iter(iterable)
    while True:
        chunk = list(itertools.islice(it, size))
        if not chunk:
            return
        yield chunk


def exhaustive_oracle(
    pool: CandidatePool,
    M: int,
    objective: str = "wcev",
    cap: int = ORACLE_DEFAULT_CAP,
) -> PlacementResult:
    """Ground truth by full enumeration of all size-M subsets.

    ``objective='wcev'`` maximizes lambda_n; ``objective='mse'`` minimizes the
    MSE index.  Ties go to the lexicographically smallest subset.  Refuses to
    run when C(N, M) exceeds ``cap``.
    """
    M = int(M)
    if not 1 <= M <= pool.N:
        raise ValueError(f"M={M} outside [1, {pool.N}]")
    if objective not in ("wcev", "mse"):
        raise ValueError(f"unknown oracle objective {objective!r}")
    total = math.comb(pool.N, M)
    if total > cap:
        raise ValueError(
            f"C({pool.N},{M}) = {total} subsets exceeds the enumeration cap {cap}"
        )
    rows = pool.matrix
    best_val = -math.inf if objective == "wcev" else math.inf
    best_subset: tuple[int, ...] | None = None
    for chunk in _chunked(itertools.combinations(range(pool.N), M), 1024):
        arr = np.array(chunk)
        mats = rows[arr].transpose(0, 2, 1) @ rows[arr]
        lam = np.linalg.eigvalsh(mats)
        if objective == "wcev":
            vals = lam[:, 0]
            local = int(np.argmax(vals))
            if vals[local] > best_val:
                best_val = float(vals[local])
                best_subset = chunk[local]
        else:
            vals = _criterion_values(lam, "mse")
            local = int(np.argmin(vals))
            if vals[local] < best_val:
                best_val = float(vals[local])
                best_subset = chunk[local]
    result = _one_shot_result(pool, best_subset, "oracle")
    return result


def _criterion_values(lam_batch: np.ndarray, criterion: str) -> np.ndarray:
    """WCEV or MSE index for each spectrum in a batch (ascending rows)."""
    lam_min = lam_batch[:, 0]
    lam_max = lam_batch[:, -1]
    floor = SINGULARITY_RTOL * np.maximum(lam_max, 1e-30)
    singular = lam_min <= floor
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if criterion == "wcev":
            raw = 1.0 / lam_min
        else:
            raw = np.sum(1.0 / lam_batch, axis=1)
    return np.where(singular, np.inf, raw)


def _swap_values(pool, selection: list[int], criterion: str):
    """Criterion value for every single selected-for-unselected exchange."""
    rows = pool.matrix
    n = pool.n
    sel = np.array(selection)
    unsel = np.setdiff1d(np.arange(pool.N), sel)
    base = rows[sel].T @ rows[sel]
    out_sel = rows[sel][:, :, None] * rows[sel][:, None, :]
    out_un = rows[unsel][:, :, None] * rows[unsel][:, None, :]
    mats = base[None, None] - out_sel[:, None] + out_un[None, :]
    lam = np.linalg.eigvalsh(mats.reshape(-1, n, n))
    vals = _criterion_values(lam, criterion)
    return vals.reshape(len(sel), len(unsel)), unsel


def local_optimize(
    pool: CandidatePool,
    result: PlacementResult,
    criterion: str = "wcev",
    max_passes: int = 100,
) -> PlacementResult:
    """Best-improvement 2-opt exchange until no single swap helps.

    Each pass evaluates every selected-for-unselected exchange and applies the
    best one if it improves the criterion by more than 1e-12 relative.  The
    output is 2-opt; if the pass cap is hit first, ``local_opt_converged`` is
    False on the returned result (not an error).
    """
    if criterion not in ("wcev", "mse"):
        raise ValueError(f"unknown criterion {criterion!r}")
    selection = [int(i) for i in result.selected]
    if len(set(selection)) != len(selection):
        raise ValueError("selection contains duplicate indices")
    if not selection or len(selection) >= pool.N:
        converged = True
    else:
        sub = pool.matrix[selection]
        current = float(
            _criterion_values(np.linalg.eigvalsh(sub.T @ sub)[None, :], criterion)[0]
        )
        converged = False
        for _ in range(max_passes):
            vals, unsel = _swap_values(pool, selection, criterion)
            flat = vals.ravel()
            best = float(np.min(flat))
            if math.isinf(current):
                improves = math.isfinite(best)
            else:
                improves = (current - best) > TIE_RTOL * abs(current)
            if not improves:
                converged = True
                break
            tol = TIE_RTOL * max(1.0, abs(best)) if math.isfinite(best) else 0.0
            winner = int(np.argmax(flat <= best + tol))
            pos, j = divmod(winner, len(unsel))
            selection[pos] = int(unsel[j])
            current = best

    sub = pool.matrix[selection]
    lam = np.linalg.eigvalsh(sub.T @ sub)
    return PlacementResult(
        selected=selection,
        M=len(selection),
        lambda_trace=[float(lam[0])],
        score_trace=[],
        satisfied=result.satisfied,
        algorithm=f"{result.algorithm}+2opt",
        local_opt_converged=converged,
    )
