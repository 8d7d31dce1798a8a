"""Command-line front end.

Subcommands: ``place`` (one placement on a CSV matrix), ``campaign``
(Monte-Carlo comparison of algorithms), ``oracle`` (exhaustive ground truth),
``timing`` (wall-clock scaling study).  All indices in output are 0-based.

Exit codes: 0 success, 2 parse error, 3 rank/precondition error, 4 config
error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bench import (
    ALGORITHMS,
    BenchmarkConfig,
    place_file,
    run_campaign,
    timing_study,
)
from .errors import ConfigError, GenerationError, RankDeficiencyError
from .metrics import mse_from_eigenvalues, wcev_from_eigenvalues
from .placement import CandidatePool, StoppingRule, exhaustive_oracle

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_RANK = 3
EXIT_CONFIG = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eigenplace",
        description="Sensor placement for linear inverse problems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    place = sub.add_parser("place", help="run one algorithm on a CSV matrix")
    place.add_argument("--matrix", required=True, help="CSV file, one row per candidate")
    place.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    place.add_argument("--M", type=int, help="fixed sensor count")
    place.add_argument("--gamma", type=float,
                       help="stop once lambda_n >= gamma (WCEV constraint)")
    place.add_argument("--mse-threshold", type=float,
                       help="stop once the MSE index <= this value")
    place.add_argument("--seed", type=int, default=0,
                       help="seed for the random baseline")
    place.add_argument("--local-opt", nargs="?", const="wcev",
                       choices=["wcev", "mse"], default=None,
                       help="apply 2-opt exchange to the result")
    place.add_argument("--out", help="write the result JSON here")

    camp = sub.add_parser("campaign", help="Monte-Carlo comparison campaign")
    camp.add_argument("--config", help="campaign config JSON")
    camp.add_argument("--ensemble-kind", choices=["gaussian", "bernoulli",
                                                  "row_normalized_gaussian"])
    camp.add_argument("--N", type=int)
    camp.add_argument("--n", type=int)
    camp.add_argument("--seed", type=int, default=0)
    camp.add_argument("--trials", type=int)
    camp.add_argument("--algorithms", help="comma-separated subset of "
                                           + ",".join(ALGORITHMS))
    camp.add_argument("--k-min", type=int)
    camp.add_argument("--k-max", type=int)
    camp.add_argument("--gamma", type=float,
                      help="WCEV-index threshold for M_required bookkeeping")
    camp.add_argument("--mse-threshold", type=float,
                      help="MSE-index threshold for M_required bookkeeping")
    camp.add_argument("--local-opt", nargs="?", const="wcev",
                      choices=["wcev", "mse"], default=None)
    camp.add_argument("--workers", type=int, default=1)
    camp.add_argument("--out", help="records CSV path")
    camp.add_argument("--summary", help="summary JSON path")

    orc = sub.add_parser("oracle", help="exhaustive search at desk scale")
    orc.add_argument("--matrix", required=True)
    orc.add_argument("--M", type=int, required=True)
    orc.add_argument("--objective", choices=["wcev", "mse"], default="wcev")
    orc.add_argument("--cap", type=int, default=2_000_000)
    orc.add_argument("--out", help="write the result JSON here")

    tim = sub.add_parser("timing", help="wall-clock scaling study")
    tim.add_argument("--n", type=int, default=20)
    tim.add_argument("--M", type=int, default=20)
    tim.add_argument("--N-sweep", default="100,200,400,800",
                     help="comma-separated candidate counts")
    tim.add_argument("--algorithms", default="mpme,mnep")
    tim.add_argument("--trials", type=int, default=3)
    tim.add_argument("--seed", type=int, default=0)
    tim.add_argument("--out", help="timing CSV path")
    return parser


def _rule_from_args(args) -> StoppingRule:
    given = [x for x in (args.M, args.gamma, args.mse_threshold) if x is not None]
    if len(given) != 1:
        raise ConfigError("give exactly one of --M, --gamma, --mse-threshold")
    if args.M is not None:
        return StoppingRule.fixed_count(args.M)
    if args.gamma is not None:
        return StoppingRule.wcev_threshold(args.gamma)
    return StoppingRule.mse_threshold(args.mse_threshold)


def _cmd_place(args) -> int:
    doc = place_file(
        args.matrix, args.algorithm, _rule_from_args(args),
        local_opt=args.local_opt, seed=args.seed, out=args.out,
    )
    json.dump(doc, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def _campaign_config(args) -> BenchmarkConfig:
    if args.config:
        with open(args.config) as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"bad config JSON: {exc}") from exc
        cfg = BenchmarkConfig.from_dict(raw)
        overrides = {}
        if args.out:
            overrides["records_csv"] = args.out
        if args.summary:
            overrides["summary_json"] = args.summary
        if overrides:
            from dataclasses import replace
            cfg = replace(cfg, **overrides)
        return cfg
    missing = [name for name, v in (
        ("--ensemble-kind", args.ensemble_kind), ("--N", args.N),
        ("--n", args.n), ("--trials", args.trials),
        ("--algorithms", args.algorithms), ("--k-min", args.k_min),
        ("--k-max", args.k_max),
    ) if v is None]
    if missing:
        raise ConfigError(f"missing {', '.join(missing)} (or use --config)")
    from .ensembles import EnsembleSpec
    return BenchmarkConfig(
        ensemble=EnsembleSpec(args.ensemble_kind, args.N, args.n, args.seed),
        trials=args.trials,
        algorithms=tuple(args.algorithms.split(",")),
        k_min=args.k_min,
        k_max=args.k_max,
        local_opt=args.local_opt,
        wcev_index_threshold=args.gamma,
        mse_index_threshold=args.mse_threshold,
        records_csv=args.out,
        summary_json=args.summary,
        workers=args.workers,
    )


def _cmd_campaign(args) -> int:
    report = run_campaign(_campaign_config(args))
    for kind, per_alg in report.m_required_mean_curve.items():
        for alg, k in per_alg.items():
            print(f"M_required[{kind}] {alg}: {k if k is not None else 'unmet'}")
    print(f"records: {len(report.records)}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    from .bench import load_matrix_csv

    pool = CandidatePool(load_matrix_csv(args.matrix))
    result = exhaustive_oracle(pool, args.M, objective=args.objective,
                               cap=args.cap)
    import numpy as np

    sub = pool.matrix[result.selected]
    lam = np.linalg.eigvalsh(sub.T @ sub)
    doc = {
        "schema_version": 1,
        "kind": "placement",
        "algorithm": "oracle",
        "objective": args.objective,
        "selected": result.selected,
        "M": result.M,
        "lambda_n": float(lam[0]),
        "wcev_index": wcev_from_eigenvalues(lam),
        "mse_index": mse_from_eigenvalues(lam),
        "satisfied": True,
    }
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    json.dump(doc, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def _cmd_timing(args) -> int:
    sweep = [int(x) for x in args.N_sweep.split(",") if x]
    algorithms = tuple(x for x in args.algorithms.split(",") if x)
    report = timing_study(
        n=args.n, M=args.M, N_values=sweep, algorithms=algorithms,
        trials=args.trials, seed=args.seed, csv_path=args.out,
    )
    for alg, N, mean_s in report.rows:
        print(f"{alg} N={N}: {mean_s:.6f}s")
    for alg, slope in report.slopes.items():
        print(f"slope[{alg}] = {slope:.3f}")
    return EXIT_OK


_COMMANDS = {
    "place": _cmd_place,
    "campaign": _cmd_campaign,
    "oracle": _cmd_oracle,
    "timing": _cmd_timing,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RankDeficiencyError, GenerationError) as exc:
        print(f"rank/precondition error: {exc}", file=sys.stderr)
        return EXIT_RANK
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    raise SystemExit(main())
