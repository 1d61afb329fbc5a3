"""Experiment configuration and the reference operating point.

The defaults reproduce the regime the package was built around: pump
epsilon = 1.67 gamma, branch splitting delta_omega = 2.3 gamma, Kerr
chi = 0.1 gamma, with the bare resonator frequency sitting exactly at
the critical value sqrt(epsilon^2 - gamma^2) so the two qubit branches
land symmetrically on the bright and dim sides of the transition.

Configs can be loaded from a JSON file holding a flat dict of field
names; command line flags override file values, which override the
defaults.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace

from .hilbert import SystemParams, critical_frequency
from .trajectory import config_hash

# Qubit-resonator detuning used when the full model has to invent a
# qubit frequency from delta_omega alone (in units of gamma).
FULL_MODEL_DETUNING = 100.0


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a command needs, with the reference point as default."""

    model: str = "dispersive"
    epsilon: float = 1.67
    omega: float | None = None  # None means the critical frequency
    delta_omega: float | None = 2.3
    chi: float = 0.1
    g: float | None = None  # None means derived (full model) or absent
    omega_q: float | None = None
    gamma: float = 1.0
    n_fock: int = 20
    n_per_class: int = 1000
    dt: float = 1e-3
    t_max: float = 15.0
    seed: int = 7
    workers: int = 1
    channel: str = "x_mean"
    features: str = "tab"
    t_f: tuple[float, ...] = (2.0,)
    tau: tuple[float, ...] = (1e-3,)
    n_intervals: int = 50
    reps: int = 100
    folds: int = 5
    c_reg: float = 1.0
    gamma_kernel: float | str = "scale"
    grid: bool = False

    def resolved_omega(self) -> float:
        if self.omega is not None:
            return self.omega
        return critical_frequency(self.epsilon, self.gamma)

    def to_params(self) -> SystemParams:
        """System parameters implied by the config.

        For the full model the qubit frequency and coupling are derived
        from ``delta_omega`` and ``FULL_MODEL_DETUNING`` when not given
        explicitly, keeping ``delta_omega = g^2 / |omega_q - omega|``.
        """
        omega = self.resolved_omega()
        if self.model == "full":
            if self.delta_omega is None and (self.g is None or self.omega_q is None):
                raise ValueError("full model needs delta_omega or explicit g and omega_q")
            if self.g is None or self.omega_q is None:
                detuning = (
                    abs(self.omega_q - omega)
                    if self.omega_q is not None
                    else FULL_MODEL_DETUNING
                )
                g = math.sqrt(self.delta_omega * detuning)
                omega_q = omega + detuning
            else:
                g, omega_q = self.g, self.omega_q
        else:
            g = 0.0 if self.g is None else self.g
            omega_q = omega if self.omega_q is None else self.omega_q
            if self.delta_omega is None:
                raise ValueError("dispersive model needs delta_omega")
        return SystemParams(
            omega=omega,
            omega_q=omega_q,
            epsilon=self.epsilon,
            chi=self.chi,
            g=g,
            gamma=self.gamma,
            delta_omega=self.delta_omega,
            n_fock=self.n_fock,
        )

    def digest(self) -> str:
        payload = asdict(self)
        payload["t_f"] = list(self.t_f)
        payload["tau"] = list(self.tau)
        return config_hash(payload)


def reference_params(model: str = "dispersive", n_fock: int = 20) -> SystemParams:
    """System parameters at the reference operating point."""
    return replace(ExperimentConfig(), model=model, n_fock=n_fock).to_params()


def load_config(path: str) -> dict:
    """Read a flat JSON config; unknown keys raise ValueError."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"config {path} must hold a JSON object")
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys in {path}: {sorted(unknown)}")
    for key in ("t_f", "tau"):
        if key in data and isinstance(data[key], list):
            data[key] = tuple(float(v) for v in data[key])
    return data


def merge_config(file_values: dict, overrides: dict) -> ExperimentConfig:
    """Defaults, then file values, then non-None overrides."""
    cfg = replace(ExperimentConfig(), **file_values)
    cleaned = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **cleaned)
