"""Operators and Hamiltonians for a two-photon driven Kerr resonator.

The resonator is pumped at twice its frequency (squeezing drive of
amplitude epsilon), carries a Kerr nonlinearity chi, decays with single
photon rate gamma, and couples to a two-level system with strength g:

    H = omega a'a + omega_q s+s- + (epsilon/2)(a'^2 + a^2)
        + chi a'^2 a^2 + g (a' s- + a s+)

with a' the creation operator. Above threshold (epsilon > gamma) the
resonator settles into a bright squeezed state when its effective
frequency lies below the critical value sqrt(epsilon^2 - gamma^2) and
stays dim above it. A dispersively coupled qubit shifts the effective
frequency by +/- delta_omega/2 (delta_omega = g^2/Delta), so the two
qubit states select the two sides of the transition.

Conventions used throughout the package:

* all frequencies and rates are in units of gamma unless stated;
* composite kets are ordered resonator (x) qubit, so the flat index of
  ``|n, s>`` is ``2 n + s`` with ``s = 0`` for qubit down, ``1`` for up;
* operators are dense complex ``numpy`` arrays (dimensions stay small,
  a few tens at most).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Relative slack allowed between delta_omega and g^2/Delta when both are given.
_DISPERSIVE_CONSISTENCY_RTOL = 1e-9


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of the resonator-qubit system.

    Parameters
    ----------
    omega : float
        Bare resonator frequency (rotating-frame detuning).
    omega_q : float
        Qubit frequency.
    epsilon : float
        Two-photon pump amplitude, must be nonnegative.
    chi : float
        Kerr coefficient.
    g : float
        Resonator-qubit coupling. Zero for a resonator-only model.
    gamma : float
        Single-photon decay rate, must be positive.
    delta_omega : float or None
        Dispersive frequency shift between the two qubit branches. If
        both ``g`` and ``delta_omega`` are given they must satisfy
        ``delta_omega = g**2 / |omega_q - omega|``.
    n_fock : int
        Fock-space truncation of the resonator, at least 2.
    """

    omega: float = 0.0
    omega_q: float = 0.0
    epsilon: float = 0.0
    chi: float = 0.0
    g: float = 0.0
    gamma: float = 1.0
    delta_omega: float | None = None
    n_fock: int = 20

    def __post_init__(self) -> None:
        numeric = {
            "omega": self.omega,
            "omega_q": self.omega_q,
            "epsilon": self.epsilon,
            "chi": self.chi,
            "g": self.g,
            "gamma": self.gamma,
        }
        for name, value in numeric.items():
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.delta_omega is not None:
            if not math.isfinite(self.delta_omega) or self.delta_omega < 0:
                raise ValueError(
                    f"delta_omega must be a nonnegative number, got {self.delta_omega!r}"
                )
        if not isinstance(self.n_fock, int) or self.n_fock < 2:
            raise ValueError(f"n_fock must be an integer >= 2, got {self.n_fock!r}")
        if self.delta_omega is not None and self.g != 0.0:
            detuning = abs(self.omega_q - self.omega)
            if detuning == 0.0:
                raise ValueError("g and delta_omega both set but qubit is resonant")
            implied = self.g**2 / detuning
            tol = _DISPERSIVE_CONSISTENCY_RTOL * max(abs(self.delta_omega), abs(implied))
            if abs(self.delta_omega - implied) > tol:
                raise ValueError(
                    f"delta_omega={self.delta_omega} inconsistent with "
                    f"g^2/Delta={implied} (Delta={detuning})"
                )

    def dispersive_shift(self) -> float:
        """Branch splitting delta_omega, derived from g and the detuning if unset."""
        if self.delta_omega is not None:
            return self.delta_omega
        detuning = abs(self.omega_q - self.omega)
        if self.g == 0.0 or detuning == 0.0:
            raise ValueError("dispersive shift undefined: need delta_omega or g with detuning")
        return self.g**2 / detuning


def annihilation(n_fock: int) -> np.ndarray:
    """Annihilation operator on an ``n_fock``-dimensional Fock space."""
    if n_fock < 2:
        raise ValueError(f"n_fock must be >= 2, got {n_fock}")
    return np.diag(np.sqrt(np.arange(1, n_fock, dtype=float)), k=1).astype(complex)


def qubit_ops() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Qubit operators (sigma_minus, sigma_plus, sigma_z).

    Basis order is (down, up), matching the flat index ``2 n + s``, so
    ``sigma_z = diag(-1, +1)``.
    """
    sigma_minus = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    sigma_plus = sigma_minus.conj().T
    sigma_z = np.diag([-1.0, 1.0]).astype(complex)
    return sigma_minus, sigma_plus, sigma_z


def kron(resonator_op: np.ndarray, qubit_op: np.ndarray) -> np.ndarray:
    """Composite-space operator with the resonator factor first.

    Keeps the ``|n, s> -> 2 n + s`` index convention in one place.
    """
    return np.kron(resonator_op, qubit_op)


def hamiltonian_full(params: SystemParams) -> np.ndarray:
    """Resonator-qubit Hamiltonian on the composite space.

    Returns a dense Hermitian matrix of dimension ``2 * n_fock``.
    """
    a = annihilation(params.n_fock)
    adag = a.conj().T
    n_op = adag @ a
    pump = adag @ adag + a @ a
    kerr = adag @ adag @ a @ a
    sm, sp, _ = qubit_ops()
    eye_q = np.eye(2, dtype=complex)
    h = params.omega * kron(n_op, eye_q)
    h += params.omega_q * kron(np.eye(params.n_fock, dtype=complex), sp @ sm)
    h += 0.5 * params.epsilon * kron(pump, eye_q)
    h += params.chi * kron(kerr, eye_q)
    h += params.g * (kron(adag, sm) + kron(a, sp))
    return h


def hamiltonian_dispersive(params: SystemParams, branch: str) -> np.ndarray:
    """Resonator-only Hamiltonian with the qubit folded into a frequency shift.

    Parameters
    ----------
    params : SystemParams
        System parameters; the dispersive shift comes from
        ``params.dispersive_shift()``.
    branch : str
        ``"up"`` shifts the resonator frequency by ``+delta_omega/2``,
        ``"down"`` by ``-delta_omega/2``.

    Returns
    -------
    numpy.ndarray
        Dense Hermitian matrix of dimension ``n_fock``.
    """
    if branch not in ("up", "down"):
        raise ValueError(f"branch must be 'up' or 'down', got {branch!r}")
    sign = 1.0 if branch == "up" else -1.0
    omega_eff = params.omega + 0.5 * sign * params.dispersive_shift()
    a = annihilation(params.n_fock)
    adag = a.conj().T
    h = omega_eff * (adag @ a)
    h += 0.5 * params.epsilon * (adag @ adag + a @ a)
    h += params.chi * (adag @ adag @ a @ a)
    return h


def critical_frequency(epsilon: float, gamma: float) -> float:
    """Effective frequency at which the bright-to-dim transition sits.

    For a two-photon pump of amplitude ``epsilon`` and decay ``gamma``
    the bright solution exists below ``sqrt(epsilon**2 - gamma**2)``.
    Requires ``epsilon >= gamma`` (above threshold).
    """
    if epsilon < gamma:
        raise ValueError(f"no transition below threshold: epsilon={epsilon} < gamma={gamma}")
    return math.sqrt(epsilon**2 - gamma**2)
