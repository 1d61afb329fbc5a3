"""Command line interface.

Subcommands: ``generate`` simulates and writes a trajectory dataset,
``average`` compares ensemble means against the master equation,
``classify`` runs repeated cross-validation on extracted features,
``scan`` sweeps pump and detuning re-generating a small dataset per
point, and ``report`` aggregates classify outputs into one table.

Exit codes: 0 success, 1 usage or invalid values, 2 numerical failure,
3 I/O failure (missing paths, refusal to overwrite).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from glob import glob

import numpy as np

from .config import ExperimentConfig, load_config, merge_config
from .errors import NumericalError
from .hilbert import annihilation, hamiltonian_dispersive, hamiltonian_full, kron
from .learner import repeated_cv, write_cv_report
from .master import evolve_master
from .signal import CHANNELS, rife_features, tab_features, write_features
from .trajectory import (
    FORMAT_VERSION,
    MODELS,
    config_hash,
    generate_dataset,
    manifest_dict,
    read_dataset,
    write_dataset,
)


class UsageError(Exception):
    """Bad command line; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _add_physics_flags(sub: argparse.ArgumentParser, scan: bool = False) -> None:
    eps_kwargs = {"action": "append"} if scan else {}
    omega_kwargs = {"action": "append"} if scan else {}
    sub.add_argument("--epsilon", type=float, **eps_kwargs, help="two-photon pump amplitude")
    sub.add_argument("--omega", type=float, **omega_kwargs,
                     help="resonator frequency (default: critical value)")
    sub.add_argument("--delta-omega", type=float, dest="delta_omega",
                     help="dispersive branch splitting")
    sub.add_argument("--chi", type=float, help="Kerr coefficient")
    sub.add_argument("--g", type=float, help="qubit-resonator coupling")
    sub.add_argument("--gamma", type=float, help="single-photon decay rate")
    sub.add_argument("--n-fock", type=int, dest="n_fock", help="Fock truncation")
    sub.add_argument("--model", choices=MODELS, help="simulation model")


def _add_sim_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--n-per-class", type=int, dest="n_per_class",
                     help="records per qubit label")
    sub.add_argument("--dt", type=float, help="integration step")
    sub.add_argument("--t-max", type=float, dest="t_max", help="record duration")
    sub.add_argument("--seed", type=int, help="master seed")
    sub.add_argument("--workers", type=int, help="parallel workers (output-invariant)")


def _add_classify_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--features", choices=("tab", "rife"), help="feature family")
    sub.add_argument("--channel", choices=CHANNELS, help="record channel to classify")
    sub.add_argument("--tf", type=float, action="append",
                     help="acquisition cutoff, repeatable")
    sub.add_argument("--tau", type=float, action="append",
                     help="smoothing time, repeatable")
    sub.add_argument("--n-intervals", type=int, dest="n_intervals",
                     help="random intervals for rife features")
    sub.add_argument("--reps", type=int, help="cross-validation repetitions")
    sub.add_argument("--folds", type=int, help="cross-validation folds")
    sub.add_argument("--c-reg", type=float, dest="c_reg", help="SVC regularization")
    sub.add_argument("--gamma-kernel", dest="gamma_kernel",
                     help="RBF width, 'scale' or a number")
    sub.add_argument("--grid", action="store_true", default=None,
                     help="select hyperparameters on training folds")


def build_parser() -> _Parser:
    parser = _Parser(prog="kerrsense",
                     description="Trajectory simulation and qubit readout benchmarks "
                                 "for a two-photon driven Kerr resonator.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="simulate a trajectory dataset")
    _add_physics_flags(p_gen)
    _add_sim_flags(p_gen)
    p_gen.add_argument("--config", help="JSON config file")
    p_gen.add_argument("--out", required=True, help="output dataset directory")
    p_gen.add_argument("--force", action="store_true", help="overwrite existing output")
    p_gen.set_defaults(func=cmd_generate)

    p_avg = sub.add_parser("average", help="ensemble means vs the master equation")
    p_avg.add_argument("data", help="dataset directory")
    p_avg.add_argument("--out", default="averages.csv", help="output CSV path")
    p_avg.add_argument("--force", action="store_true", help="overwrite existing output")
    p_avg.set_defaults(func=cmd_average)

    p_cls = sub.add_parser("classify", help="cross-validated readout error")
    p_cls.add_argument("data", help="dataset directory")
    _add_classify_flags(p_cls)
    p_cls.add_argument("--seed", type=int, help="seed for folds and intervals")
    p_cls.add_argument("--config", help="JSON config file")
    p_cls.add_argument("--save-features", action="store_true",
                       help="also write the extracted feature matrices")
    p_cls.add_argument("--out", required=True, help="output directory")
    p_cls.add_argument("--force", action="store_true", help="overwrite existing output")
    p_cls.set_defaults(func=cmd_classify)

    p_scan = sub.add_parser("scan", help="error across pump and detuning")
    _add_physics_flags(p_scan, scan=True)
    _add_sim_flags(p_scan)
    _add_classify_flags(p_scan)
    p_scan.add_argument("--config", help="JSON config file")
    p_scan.add_argument("--out", default="scan.csv", help="output CSV path")
    p_scan.add_argument("--force", action="store_true", help="overwrite existing output")
    p_scan.set_defaults(func=cmd_scan)

    p_rep = sub.add_parser("report", help="aggregate classify outputs")
    p_rep.add_argument("results", help="directory written by classify")
    p_rep.add_argument("--out", help="optional output CSV path")
    p_rep.add_argument("--force", action="store_true", help="overwrite existing output")
    p_rep.set_defaults(func=cmd_report)
    return parser


_CONFIG_KEYS = (
    "model", "epsilon", "omega", "delta_omega", "chi", "g", "gamma", "n_fock",
    "n_per_class", "dt", "t_max", "seed", "workers", "channel", "features",
    "n_intervals", "reps", "folds", "c_reg", "gamma_kernel", "grid",
)


def _merged_config(args: argparse.Namespace) -> ExperimentConfig:
    file_values = load_config(args.config) if getattr(args, "config", None) else {}
    overrides = {}
    for key in _CONFIG_KEYS:
        if hasattr(args, key):
            value = getattr(args, key)
            if isinstance(value, list):
                continue  # scan passes epsilon/omega lists separately
            overrides[key] = value
    if getattr(args, "tf", None):
        overrides["t_f"] = tuple(args.tf)
    if getattr(args, "tau", None):
        overrides["tau"] = tuple(args.tau)
    if overrides.get("gamma_kernel") is not None:
        raw = overrides["gamma_kernel"]
        if isinstance(raw, str) and raw != "scale":
            try:
                overrides["gamma_kernel"] = float(raw)
            except ValueError:
                raise UsageError(f"--gamma-kernel must be 'scale' or a number, got {raw!r}")
    return merge_config(file_values, overrides)


def _check_overwrite(path: str, force: bool) -> None:
    if not force and os.path.exists(path):
        raise FileExistsError(f"{path} already exists; pass --force to replace")


def cmd_generate(args: argparse.Namespace) -> None:
    cfg = _merged_config(args)
    params = cfg.to_params()
    dataset = generate_dataset(
        params, cfg.model, cfg.n_per_class, cfg.t_max, cfg.dt, cfg.seed,
        workers=cfg.workers,
    )
    write_dataset(dataset, args.out, force=args.force)
    digest = config_hash(manifest_dict(dataset))
    print(f"wrote {len(dataset.records)} records to {args.out} (config {digest[:12]})")


def cmd_average(args: argparse.Namespace) -> None:
    dataset = read_dataset(args.data)
    _check_overwrite(args.out, args.force)
    params = dataset.params
    digest = config_hash(manifest_dict(dataset))

    labels = np.array([rec.label for rec in dataset.records])
    times = dataset.records[0].times
    lines = []
    for label in (0, 1):
        members = [rec for rec, lab in zip(dataset.records, labels) if lab == label]
        if not members:
            raise ValueError(f"dataset has no records with label {label}")
        n_traj = np.mean([rec.n_mean for rec in members], axis=0)
        x_traj = np.mean([rec.x_mean for rec in members], axis=0)

        a = annihilation(params.n_fock)
        if dataset.model == "dispersive":
            ham = hamiltonian_dispersive(params, "up" if label == 1 else "down")
            a_op = a
            rho0 = np.zeros((params.n_fock, params.n_fock), dtype=complex)
            rho0[0, 0] = 1.0
        else:
            ham = hamiltonian_full(params)
            a_op = kron(a, np.eye(2, dtype=complex))
            dim = 2 * params.n_fock
            rho0 = np.zeros((dim, dim), dtype=complex)
            rho0[label, label] = 1.0
        n_op = a_op.conj().T @ a_op
        x_op = a_op + a_op.conj().T
        series = evolve_master(
            rho0, ham, params.gamma, dataset.t_max, dataset.dt,
            record=[n_op, x_op], names=["n", "x"], a_op=a_op,
        )
        ts = times.tolist()
        nt = n_traj.tolist()
        xt = x_traj.tolist()
        nm = series[0].values.tolist()
        xm = series[1].values.tolist()
        for k in range(len(ts)):
            lines.append(
                f"{ts[k]!r},{label},{nt[k]!r},{xt[k]!r},{nm[k]!r},{xm[k]!r}\n"
            )
        print(
            f"label {label}: trajectory <n>({times[-1]:g}) = {n_traj[-1]:.4f}, "
            f"master = {series[0].values[-1]:.4f}"
        )

    with open(args.out, "w") as fh:
        fh.write(f"# config_hash={digest},format_version={FORMAT_VERSION}\n")
        fh.write("t,label,n_traj,x_traj,n_master,x_master\n")
        fh.writelines(lines)
    print(f"wrote {args.out}")


def cmd_classify(args: argparse.Namespace) -> None:
    cfg = _merged_config(args)
    dataset = read_dataset(args.data)
    os.makedirs(args.out, exist_ok=True)
    summary_path = os.path.join(args.out, "summary.csv")
    _check_overwrite(summary_path, args.force)
    digest = cfg.digest()

    rows = []
    for t_f in cfg.t_f:
        for tau in cfg.tau:
            if cfg.features == "tab":
                feats = tab_features(dataset, t_f, tau, channel=cfg.channel)
            else:
                feats = rife_features(
                    dataset, t_f, tau, n_intervals=cfg.n_intervals,
                    seed=cfg.seed, channel=cfg.channel,
                )
            report = repeated_cv(
                feats, reps=cfg.reps, folds=cfg.folds, c_reg=cfg.c_reg,
                gamma=cfg.gamma_kernel, seed=cfg.seed, grid=cfg.grid,
            )
            stem = f"cv_{cfg.features}_tf{t_f:g}_tau{tau:g}"
            write_cv_report(
                report,
                os.path.join(args.out, stem + ".csv"),
                os.path.join(args.out, stem + ".json"),
                force=args.force,
                config_digest=digest,
                extra={"features": cfg.features, "t_f": t_f, "tau": tau,
                       "channel": cfg.channel},
            )
            if args.save_features:
                write_features(
                    feats, os.path.join(args.out, f"features_{cfg.features}_tf{t_f:g}_tau{tau:g}.csv"),
                    force=args.force, config_digest=digest,
                )
            rows.append((cfg.features, t_f, tau, report.error, report.std_accuracy))
            print(f"{cfg.features} t_f={t_f:g} tau={tau:g}: "
                  f"error={report.error:.4g} std={report.std_accuracy:.4g}")

    with open(summary_path, "w") as fh:
        fh.write(f"# config_hash={digest},format_version={FORMAT_VERSION}\n")
        fh.write("classifier,t_f,tau,error,std\n")
        for kind, t_f, tau, error, std in rows:
            fh.write(f"{kind},{t_f!r},{tau!r},{error!r},{std!r}\n")
    print(f"wrote {summary_path}")


def cmd_scan(args: argparse.Namespace) -> None:
    cfg = _merged_config(args)
    if len(cfg.t_f) != 1 or len(cfg.tau) != 1:
        raise UsageError("scan takes a single --tf and a single --tau")
    _check_overwrite(args.out, args.force)
    epsilons = args.epsilon if args.epsilon else [cfg.epsilon]
    omegas = args.omega if args.omega else [None]
    digest = cfg.digest()

    rows = []
    for eps in epsilons:
        for omega in omegas:
            point = replace(cfg, epsilon=eps, omega=omega)
            params = point.to_params()
            dataset = generate_dataset(
                params, point.model, point.n_per_class, point.t_max, point.dt,
                point.seed, workers=point.workers,
            )
            if point.features == "tab":
                feats = tab_features(dataset, point.t_f[0], point.tau[0],
                                     channel=point.channel)
            else:
                feats = rife_features(dataset, point.t_f[0], point.tau[0],
                                      n_intervals=point.n_intervals,
                                      seed=point.seed, channel=point.channel)
            report = repeated_cv(
                feats, reps=point.reps, folds=point.folds, c_reg=point.c_reg,
                gamma=point.gamma_kernel, seed=point.seed, grid=point.grid,
            )
            rows.append((eps, point.resolved_omega(), report.error, report.std_accuracy))
            print(f"epsilon={eps:g} omega={point.resolved_omega():.6g}: "
                  f"error={report.error:.4g}")

    best = min(range(len(rows)), key=lambda k: rows[k][2])
    with open(args.out, "w") as fh:
        fh.write(f"# config_hash={digest},format_version={FORMAT_VERSION}\n")
        fh.write("epsilon,omega,error,std,best\n")
        for k, (eps, omega, error, std) in enumerate(rows):
            fh.write(f"{eps!r},{omega!r},{error!r},{std!r},{int(k == best)}\n")
    print(f"best point: epsilon={rows[best][0]:g} omega={rows[best][1]:.6g} "
          f"error={rows[best][2]:.4g}")
    print(f"wrote {args.out}")


def cmd_report(args: argparse.Namespace) -> None:
    paths = sorted(glob(os.path.join(args.results, "cv_*.json")))
    if not paths:
        raise FileNotFoundError(f"no cv_*.json summaries under {args.results}")
    rows = []
    for path in paths:
        with open(path) as fh:
            summary = json.load(fh)
        rows.append((
            summary.get("features", "?"),
            float(summary.get("t_f", float("nan"))),
            float(summary.get("tau", float("nan"))),
            float(summary["error"]),
            float(summary["std_accuracy"]),
        ))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))

    print(f"{'classifier':<12}{'t_f':>8}{'tau':>10}{'error':>12}{'std':>10}")
    for kind, t_f, tau, error, std in rows:
        print(f"{kind:<12}{t_f:>8g}{tau:>10g}{error:>12.4g}{std:>10.4g}")
    if args.out:
        _check_overwrite(args.out, args.force)
        with open(args.out, "w") as fh:
            fh.write("classifier,t_f,tau,error,std\n")
            for kind, t_f, tau, error, std in rows:
                fh.write(f"{kind},{t_f!r},{tau!r},{error!r},{std!r}\n")
        print(f"wrote {args.out}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
        return 0
    except SystemExit as exc:  # argparse --help
        code = exc.code
        return int(code) if code is not None else 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
