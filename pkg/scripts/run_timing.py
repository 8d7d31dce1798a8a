#!/usr/bin/env python3
"""Wall-clock scaling of the placement algorithms over the candidate count."""

import argparse

from eigenplace import timing_study


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--M", type=int, default=20)
    ap.add_argument("--N-sweep", default="100,200,400,800")
    ap.add_argument("--algorithms", default="mpme,mnep,framesense,convex")
    ap.add_argument("--trials", type=int, default=3)
    ap.add_argument("--out", default="timing.csv")
    args = ap.parse_args()

    report = timing_study(
        n=args.n,
        M=args.M,
        N_values=[int(x) for x in args.N_sweep.split(",")],
        algorithms=tuple(args.algorithms.split(",")),
        trials=args.trials,
        csv_path=args.out,
    )
    for alg, N, mean_s in report.rows:
        print(f"{alg:11s} N={N:5d}  {mean_s * 1e3:9.2f} ms")
    for alg, slope in report.slopes.items():
        print(f"log-log slope vs N [{alg}]: {slope:.3f}")


if __name__ == "__main__":
    main()
