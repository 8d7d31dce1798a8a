"""Monte-Carlo campaign engine, single-matrix placement, and timing studies.

A campaign draws one pool per trial from a seeded ensemble, runs each
requested algorithm over the whole sensor-count range, and records the error
indices per (trial, algorithm, k).  Output is a records CSV plus a summary
JSON with per-(algorithm, k) means; record order is canonical (trial,
algorithm, k) regardless of how workers finish.

Campaign thresholds are stated in *index* form (WCEV index = 1/lambda_n, MSE
index = trace of the inverse), matching how result curves are read; the
per-run ``StoppingRule`` used by ``place_file`` instead bounds lambda_n
directly.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .ensembles import ENSEMBLE_KINDS, EnsembleSpec, generate, trial_spec
from .errors import ConfigError
from .metrics import (
    condition_from_eigenvalues,
    mse_from_eigenvalues,
    wcev_from_eigenvalues,
)
from .placement import (
    CandidatePool,
    FrankWolfeConfig,
    PlacementResult,
    StoppingRule,
    framesense_order,
    local_optimize,
    run_convex_relaxation,
    run_framesense,
    run_mnep,
    run_mpme,
    run_random,
)
from . import rng

__all__ = [
    "ALGORITHMS",
    "BenchmarkConfig",
    "TrialRecord",
    "CampaignReport",
    "TimingReport",
    "run_campaign",
    "place_file",
    "timing_study",
    "write_records_csv",
    "load_matrix_csv",
]

ALGORITHMS = ("mpme", "mnep", "framesense", "convex", "random")

CSV_COLUMNS = (
    "trial",
    "algorithm",
    "k",
    "mse_index",
    "wcev_index",
    "condition_number",
    "runtime_seconds",
    "satisfied",
    "M_required",
)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class BenchmarkConfig:
    ensemble: EnsembleSpec
    trials: int
    algorithms: tuple[str, ...]
    k_min: int
    k_max: int
    local_opt: str | None = None  # None, "wcev" or "mse"
    wcev_index_threshold: float | None = None
    mse_index_threshold: float | None = None
    records_csv: str | None = None
    summary_json: str | None = None
    workers: int = 1
    frank_wolfe: FrankWolfeConfig = field(default_factory=FrankWolfeConfig)

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.algorithms:
            raise ConfigError("at least one algorithm is required")
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {alg!r}")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ConfigError("duplicate algorithm in config")
        if not self.ensemble.n <= self.k_min <= self.k_max <= self.ensemble.N:
            raise ConfigError(
                f"sensor range [{self.k_min}, {self.k_max}] outside "
                f"[{self.ensemble.n}, {self.ensemble.N}]"
            )
        if self.local_opt not in (None, "wcev", "mse"):
            raise ConfigError(f"invalid local_opt {self.local_opt!r}")
        for name in ("wcev_index_threshold", "mse_index_threshold"):
            v = getattr(self, name)
            if v is not None and not (v > 0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be positive and finite")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "BenchmarkConfig":
        try:
            ens = d["ensemble"]
            spec = EnsembleSpec(
                kind=ens["kind"], N=int(ens["N"]), n=int(ens["n"]),
                seed=int(ens["seed"]),
            )
            k_lo, k_hi = d["sensor_range"]
            thresholds = d.get("thresholds") or {}
            output = d.get("output") or {}
            fw = d.get("frank_wolfe") or {}
            return cls(
                ensemble=spec,
                trials=int(d["trials"]),
                algorithms=tuple(d["algorithms"]),
                k_min=int(k_lo),
                k_max=int(k_hi),
                local_opt=d.get("local_opt"),
                wcev_index_threshold=thresholds.get("wcev_index"),
                mse_index_threshold=thresholds.get("mse_index"),
                records_csv=output.get("records_csv"),
                summary_json=output.get("summary_json"),
                workers=int(d.get("workers", 1)),
                frank_wolfe=FrankWolfeConfig(**fw),
            )
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad campaign config: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "ensemble": asdict(self.ensemble),
            "trials": self.trials,
            "algorithms": list(self.algorithms),
            "sensor_range": [self.k_min, self.k_max],
            "local_opt": self.local_opt,
            "thresholds": {
                "wcev_index": self.wcev_index_threshold,
                "mse_index": self.mse_index_threshold,
            },
            "workers": self.workers,
            "frank_wolfe": asdict(self.frank_wolfe),
        }


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    algorithm: str
    k: int
    mse_index: float
    wcev_index: float
    condition_number: float
    runtime_seconds: float
    satisfied: bool | None
    M_required: int | None


@dataclass
class CampaignReport:
    config: BenchmarkConfig
    records: list[TrialRecord]
    means: dict  # algorithm -> k -> {"mse_index", "wcev_index", "condition_number"}
    m_required_mean_curve: dict  # "wcev"/"mse" -> algorithm -> k or None


def _selections_for_trial(config: BenchmarkConfig, pool: CandidatePool,
                          tseed: int, alg: str):
    """Selected-index lists and runtimes for every k in the configured range.

    For the incremental algorithms one run produces every prefix, and the
    recorded runtime is the wall time of that full run (not a per-k
    marginal); convex relaxation and the random baseline are re-run per k and
    timed individually.
    """
    ks = range(config.k_min, config.k_max + 1)
    selections: dict[int, list[int]] = {}
    runtimes: dict[int, float] = {}
    if alg in ("mpme", "mnep"):
        runner = run_mpme if alg == "mpme" else run_mnep
        t0 = time.perf_counter()
        result = runner(pool, StoppingRule.fixed_count(config.k_max))
        elapsed = time.perf_counter() - t0
        for k in ks:
            selections[k] = result.selected[:k]
            runtimes[k] = elapsed
    elif alg == "framesense":
        t0 = time.perf_counter()
        order = framesense_order(pool)
        elapsed = time.perf_counter() - t0
        keep = np.ones(pool.N, dtype=bool)
        keep[order[: pool.N - config.k_max]] = False
        for k in range(config.k_max, config.k_min - 1, -1):
            selections[k] = [int(i) for i in np.flatnonzero(keep)]
            runtimes[k] = elapsed
            if k > config.k_min:
                keep[order[pool.N - k]] = False
    elif alg == "convex":
        for k in ks:
            t0 = time.perf_counter()
            _, result = run_convex_relaxation(pool, k, config.frank_wolfe)
            runtimes[k] = time.perf_counter() - t0
            selections[k] = result.selected
    elif alg == "random":
        for k in ks:
            t0 = time.perf_counter()
            result = run_random(pool, k, seed=rng.derive_seed(tseed, k))
            runtimes[k] = time.perf_counter() - t0
            selections[k] = result.selected
    else:  # pragma: no cover - guarded by config validation
        raise ConfigError(f"unknown algorithm {alg!r}")

    if config.local_opt:
        for k in ks:
            stub = PlacementResult(
                selected=selections[k], M=k, lambda_trace=[], score_trace=[],
                satisfied=True, algorithm=alg,
            )
            t0 = time.perf_counter()
            improved = local_optimize(pool, stub, criterion=config.local_opt)
            runtimes[k] += time.perf_counter() - t0
            selections[k] = improved.selected
    return selections, runtimes


def _run_trial(config: BenchmarkConfig, trial: int) -> list[TrialRecord]:
    tspec = trial_spec(config.ensemble, trial)
    pool = generate(tspec)
    records: list[TrialRecord] = []
    threshold_kind = "wcev" if config.wcev_index_threshold is not None else (
        "mse" if config.mse_index_threshold is not None else None
    )
    for alg in config.algorithms:
        selections, runtimes = _selections_for_trial(config, pool, tspec.seed, alg)
        indices = {}
        for k in range(config.k_min, config.k_max + 1):
            sub = pool.matrix[selections[k]]
            lam = np.linalg.eigvalsh(sub.T @ sub)
            indices[k] = (
                mse_from_eigenvalues(lam),
                wcev_from_eigenvalues(lam),
                condition_from_eigenvalues(lam),
            )
        m_required = None
        if threshold_kind == "wcev":
            bound = config.wcev_index_threshold
            met = [k for k, v in indices.items() if v[1] <= bound]
            m_required = min(met) if met else None
        elif threshold_kind == "mse":
            bound = config.mse_index_threshold
            met = [k for k, v in indices.items() if v[0] <= bound]
            m_required = min(met) if met else None
        for k, (mse, wcev, cond) in indices.items():
            if threshold_kind == "wcev":
                sat = wcev <= config.wcev_index_threshold
            elif threshold_kind == "mse":
                sat = mse <= config.mse_index_threshold
            else:
                sat = None
            records.append(TrialRecord(
                trial=trial, algorithm=alg, k=k,
                mse_index=mse, wcev_index=wcev, condition_number=cond,
                runtime_seconds=runtimes[k], satisfied=sat,
                M_required=m_required,
            ))
    return records


def _trial_worker(payload):
    config, trial = payload
    return _run_trial(config, trial)


def run_campaign(config: BenchmarkConfig) -> CampaignReport:
    """Run all trials, aggregate means, and write any configured outputs."""
    if config.workers > 1 and config.trials > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(pool.map(
                _trial_worker, [(config, t) for t in range(config.trials)]
            ))
    else:
        chunks = [_run_trial(config, t) for t in range(config.trials)]
    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda r: (r.trial, r.algorithm, r.k))

    sums: dict = {
        alg: {k: [0.0, 0.0, 0.0, 0]
              for k in range(config.k_min, config.k_max + 1)}
        for alg in config.algorithms
    }
    for r in records:
        acc = sums[r.algorithm][r.k]
        acc[0] += r.mse_index
        acc[1] += r.wcev_index
        acc[2] += r.condition_number
        acc[3] += 1
    means: dict = {
        alg: {
            k: {
                "mse_index": acc[0] / acc[3],
                "wcev_index": acc[1] / acc[3],
                "condition_number": acc[2] / acc[3],
            }
            for k, acc in per_k.items()
        }
        for alg, per_k in sums.items()
    }

    m_curve: dict = {}
    for kind, bound, key in (
        ("wcev", config.wcev_index_threshold, "wcev_index"),
        ("mse", config.mse_index_threshold, "mse_index"),
    ):
        if bound is None:
            continue
        m_curve[kind] = {}
        for alg in config.algorithms:
            met = [k for k in sorted(means[alg]) if means[alg][k][key] <= bound]
            m_curve[kind][alg] = met[0] if met else None

    report = CampaignReport(
        config=config, records=records, means=means,
        m_required_mean_curve=m_curve,
    )
    if config.records_csv:
        write_records_csv(records, config.records_csv)
    if config.summary_json:
        _write_summary_json(report, config.summary_json)
    return report


def _format_float(x: float) -> str:
    return repr(float(x))


def write_records_csv(records, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([
                r.trial,
                r.algorithm,
                r.k,
                _format_float(r.mse_index),
                _format_float(r.wcev_index),
                _format_float(r.condition_number),
                _format_float(r.runtime_seconds),
                "" if r.satisfied is None else str(r.satisfied).lower(),
                "" if r.M_required is None else r.M_required,
            ])


def _write_summary_json(report: CampaignReport, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "campaign_summary",
        "config": report.config.to_dict(),
        "means": {
            alg: {str(k): v for k, v in per_k.items()}
            for alg, per_k in report.means.items()
        },
        "m_required_mean_curve": report.m_required_mean_curve,
    }
    with path.open("w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_matrix_csv(path) -> np.ndarray:
    """Plain CSV, one candidate observation vector per row, no header."""
    try:
        mat = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    except (ValueError, UnicodeDecodeError) as exc:
        raise ValueError(f"could not parse matrix CSV {path}: {exc}") from exc
    if mat.size == 0:
        raise ValueError(f"matrix CSV {path} is empty")
    return mat


def _framesense_threshold(pool: CandidatePool, rule: StoppingRule) -> PlacementResult:
    """Worst-out elimination that stops before the constraint would break."""
    order = framesense_order(pool)
    keep = np.ones(pool.N, dtype=bool)
    full = pool.matrix
    lam = np.linalg.eigvalsh(full.T @ full)
    stop, satisfied = rule.check(pool.N, lam[::-1])
    if not satisfied:
        # Even the whole pool misses the threshold: report it, keep all rows.
        return PlacementResult(
            selected=list(range(pool.N)), M=pool.N, lambda_trace=[float(lam[0])],
            score_trace=[], satisfied=False, algorithm="framesense",
        )
    for r in order:
        keep[r] = False
        sub = pool.matrix[keep]
        lam = np.linalg.eigvalsh(sub.T @ sub)
        _, ok = rule.check(int(keep.sum()), lam[::-1])
        if not ok:
            keep[r] = True  # reserve the row; previous set was minimal
            break
    sel = [int(i) for i in np.flatnonzero(keep)]
    sub = pool.matrix[sel]
    lam = np.linalg.eigvalsh(sub.T @ sub)
    return PlacementResult(
        selected=sel, M=len(sel), lambda_trace=[float(lam[0])],
        score_trace=[], satisfied=True, algorithm="framesense",
    )


def _convex_threshold(pool: CandidatePool, rule: StoppingRule,
                      fw: FrankWolfeConfig) -> PlacementResult:
    """Re-solve the relaxation at each M from n upward until satisfied."""
    last = None
    for m in range(pool.n, pool.N + 1):
        _, result = run_convex_relaxation(pool, m, fw)
        sub = pool.matrix[result.selected]
        lam = np.linalg.eigvalsh(sub.T @ sub)
        _, ok = rule.check(m, lam[::-1])
        last = result
        if ok:
            result.satisfied = True
            return result
    last.satisfied = False
    return last


def place_file(
    matrix_path,
    algorithm: str,
    rule: StoppingRule,
    local_opt: str | None = None,
    seed: int = 0,
    out=None,
    fw: FrankWolfeConfig | None = None,
) -> dict:
    """Run one placement on a CSV matrix and return (optionally write) JSON.

    Threshold rules apply Remark-1 style minimum-sensor searches for
    framesense and convex; the random baseline needs a fixed count.
    """
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {algorithm!r}")
    pool = CandidatePool(load_matrix_csv(matrix_path))
    fixed = rule.kind == "fixed_count"
    if fixed:
        m = int(rule.value)
        if not pool.n <= m <= pool.N:
            raise ConfigError(f"M={m} outside [{pool.n}, {pool.N}]")
    if algorithm == "mpme":
        result = run_mpme(pool, rule)
    elif algorithm == "mnep":
        result = run_mnep(pool, rule)
    elif algorithm == "framesense":
        result = (run_framesense(pool, int(rule.value)) if fixed
                  else _framesense_threshold(pool, rule))
    elif algorithm == "convex":
        if fixed:
            _, result = run_convex_relaxation(pool, int(rule.value), fw)
        else:
            result = _convex_threshold(pool, rule, fw or FrankWolfeConfig())
    else:  # random
        if not fixed:
            raise ConfigError("the random baseline needs a fixed sensor count")
        result = run_random(pool, int(rule.value), seed)
    if local_opt:
        result = local_optimize(pool, result, criterion=local_opt)

    sub = pool.matrix[result.selected]
    lam = np.linalg.eigvalsh(sub.T @ sub)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "placement",
        "algorithm": result.algorithm,
        "selected": [int(i) for i in result.selected],
        "M": result.M,
        "lambda_n": float(lam[0]),
        "wcev_index": wcev_from_eigenvalues(lam),
        "mse_index": mse_from_eigenvalues(lam),
        "satisfied": bool(result.satisfied),
    }
    if out:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with out.open("w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return doc


@dataclass
class TimingReport:
    rows: list  # (algorithm, N, mean_seconds)
    slopes: dict  # algorithm -> log-log slope of mean time vs N


def timing_study(
    n: int,
    M: int,
    N_values,
    algorithms=("mpme", "mnep"),
    trials: int = 3,
    seed: int = 0,
    csv_path=None,
) -> TimingReport:
    """Mean wall-clock per (algorithm, N) on Gaussian pools, plus slopes.

    One warm-up run per (algorithm, N) is excluded from the mean; pool
    generation is never timed.  Times come from a monotonic clock.
    """
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    N_values = [int(v) for v in N_values]
    if len(N_values) < 2:
        raise ConfigError("need at least two N values for a slope")
    for alg in algorithms:
        if alg not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {alg!r}")
    if not n <= M:
        raise ConfigError("need M >= n")
    if min(N_values) < M:
        raise ConfigError("every N must be at least M")

    def run_once(alg: str, pool: CandidatePool, tseed: int) -> None:
        if alg == "mpme":
            run_mpme(pool, StoppingRule.fixed_count(M))
        elif alg == "mnep":
            run_mnep(pool, StoppingRule.fixed_count(M))
        elif alg == "framesense":
            run_framesense(pool, M)
        elif alg == "convex":
            run_convex_relaxation(pool, M)
        else:
            run_random(pool, M, tseed)

    rows = []
    slopes = {}
    for alg in algorithms:
        mean_times = []
        for N in N_values:
            base = rng.derive_seed(seed, N)
            pools = [
                generate(EnsembleSpec("gaussian", N, n, rng.derive_seed(base, t)))
                for t in range(trials + 1)
            ]
            run_once(alg, pools[0], base)  # warm-up, untimed
            total = 0.0
            for t in range(1, trials + 1):
                t0 = time.perf_counter()
                run_once(alg, pools[t], rng.derive_seed(base, t))
                total += time.perf_counter() - t0
            mean_times.append(total / trials)
            rows.append((alg, N, total / trials))
        slopes[alg] = float(np.polyfit(
            np.log(N_values), np.log(mean_times), 1
        )[0])

    if csv_path:
        path = Path(csv_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["algorithm", "N", "mean_seconds"])
            for alg, N, mean_s in rows:
                writer.writerow([alg, N, _format_float(mean_s)])
    return TimingReport(rows=rows, slopes=slopes)
