#!/usr/bin/env python3
"""Readout error as a function of acquisition time.

Generates (or reuses) the reference dataset, then sweeps the
classification cutoff t_f over an integer grid for both feature
families and both smoothing scales, writing one long-format CSV:

    classifier,channel,t_f,tau,error,std

Expect the raw-scale (tau = dt) errors to collapse within a couple of
inverse linewidths while the heavily smoothed records need several
times longer to reach the same error.
"""

import argparse
import os
import sys

from kerrsense import ExperimentConfig, generate_dataset, repeated_cv
from kerrsense.signal import rife_features, tab_features
from kerrsense.trajectory import read_dataset, write_dataset


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-per-class", type=int, default=1000)
    parser.add_argument("--t-max", type=float, default=15.0)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--reps", type=int, default=100)
    parser.add_argument("--folds", type=int, default=5)
    parser.add_argument("--channel", default="x_mean")
    parser.add_argument("--tf-max", type=int, default=15)
    parser.add_argument("--tau", type=float, nargs="+", default=[1e-3, 1e-1])
    parser.add_argument("--data", default="out/reference_dataset",
                        help="dataset directory (reused if it exists)")
    parser.add_argument("--out", default="out/error_vs_measurement_time.csv")
    args = parser.parse_args()

    cfg = ExperimentConfig(
        n_per_class=args.n_per_class, t_max=args.t_max, seed=args.seed,
        workers=args.workers,
    )
    if os.path.exists(args.data):
        dataset = read_dataset(args.data)
    else:
        dataset = generate_dataset(
            cfg.to_params(), cfg.model, cfg.n_per_class, cfg.t_max,
            cfg.dt, cfg.seed, workers=cfg.workers,
        )
        write_dataset(dataset, args.data)
        print(f"wrote dataset to {args.data}")

    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    with open(args.out, "w") as fh:
        fh.write("classifier,channel,t_f,tau,error,std\n")
        for tau in args.tau:
            for t_f in range(1, args.tf_max + 1):
                for kind in ("tab", "rife"):
                    if kind == "tab":
                        feats = tab_features(dataset, t_f, tau, channel=args.channel)
                    else:
                        feats = rife_features(dataset, t_f, tau, n_intervals=50,
                                              seed=args.seed, channel=args.channel)
                    report = repeated_cv(feats, reps=args.reps, folds=args.folds,
                                         seed=args.seed)
                    fh.write(f"{kind},{args.channel},{t_f},{tau!r},"
                             f"{report.error!r},{report.std_accuracy!r}\n")
                    fh.flush()
                    print(f"{kind} tau={tau:g} t_f={t_f}: error={report.error:.4g}")
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
