#!/usr/bin/env python3
"""Readout error across the pump-amplitude / resonator-frequency plane.

Each grid point regenerates a smaller dataset and classifies it at a
fixed (t_f, tau), so the scan shows where the operating point sits
relative to the critical line omega = sqrt(epsilon^2 - gamma^2). Thin
wrapper over the ``kerrsense scan`` command.
"""

import os
import sys

import numpy as np

from kerrsense.cli import main as cli_main


def main() -> int:
    os.makedirs("out", exist_ok=True)
    epsilons = np.round(np.linspace(1.2, 2.2, 6), 3)
    omegas = np.round(np.linspace(0.8, 1.8, 6), 3)
    argv = ["scan", "--out", "out/pump_detuning_scan.csv", "--force",
            "--n-per-class", "200", "--t-max", "10",
            "--tf", "5", "--tau", "1e-3", "--reps", "20"]
    for eps in epsilons:
        argv += ["--epsilon", str(eps)]
    for omega in omegas:
        argv += ["--omega", str(omega)]
    argv += sys.argv[1:]  # trailing overrides, e.g. --seed 11
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
