"""Deterministic master-equation evolution of the lossy resonator.

The density matrix follows

    d rho / dt = -i [H, rho] + gamma (2 a rho a' - a'a rho - rho a'a)

integrated with a fixed-step classical Runge-Kutta scheme. The step is
not trace-preserving by construction, so the integrator watches the
trace and aborts when it drifts: a drift beyond 1e-6 means the step
size is too large for the spectral radius of the problem and the
results could not be trusted anyway.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SteadyStateError, TraceDriftError
from .hilbert import annihilation

# Abort threshold for |tr(rho) - 1| during evolution.
TRACE_TOL = 1e-6


@dataclass
class ObservableSeries:
    """Expectation values of one observable on a uniform time grid."""

    observable_name: str
    times: np.ndarray
    values: np.ndarray


def expect(op: np.ndarray, rho: np.ndarray) -> float:
    """Expectation value tr(op rho), real part.

    Intended for Hermitian observables; the imaginary part of the trace
    is discarded.
    """
    return float(np.einsum("ij,ji->", op, rho).real)


def lindblad_rhs(
    rho: np.ndarray,
    h: np.ndarray,
    gamma: float,
    a_op: np.ndarray | None = None,
) -> np.ndarray:
    """Right-hand side of the master equation.

    Parameters
    ----------
    rho : numpy.ndarray
        Density matrix.
    h : numpy.ndarray
        Hamiltonian, same dimension as ``rho``.
    gamma : float
        Single-photon decay rate.
    a_op : numpy.ndarray, optional
        Operator through which the decay acts. Defaults to the
        annihilation operator on the full space, which is the right
        choice for resonator-only models; composite models pass
        ``kron(annihilation(n_fock), eye(2))``.
    """
    if a_op is None:
        a_op = annihilation(rho.shape[0])
    a_dag = a_op.conj().T
    n_op = a_dag @ a_op
    comm = h @ rho - rho @ h
    a_rho = a_op @ rho
    return -1j * comm + gamma * (2.0 * (a_rho @ a_dag) - n_op @ rho - rho @ n_op)


def rk4_step(
    rho: np.ndarray,
    dt: float,
    h: np.ndarray,
    gamma: float,
    a_op: np.ndarray | None = None,
) -> np.ndarray:
    """One classical Runge-Kutta step of the master equation."""
    k1 = lindblad_rhs(rho, h, gamma, a_op)
    k2 = lindblad_rhs(rho + 0.5 * dt * k1, h, gamma, a_op)
    k3 = lindblad_rhs(rho + 0.5 * dt * k2, h, gamma, a_op)
    k4 = lindblad_rhs(rho + dt * k3, h, gamma, a_op)
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def evolve_master(
    rho0: np.ndarray,
    h: np.ndarray,
    gamma: float,
    t_max: float,
    dt: float,
    record: Sequence[np.ndarray],
    names: Sequence[str] | None = None,
    a_op: np.ndarray | None = None,
) -> list[ObservableSeries]:
    """Evolve ``rho0`` for ``t_max`` and record observables at every step.

    Parameters
    ----------
    rho0 : numpy.ndarray
        Initial density matrix, trace one.
    h : numpy.ndarray
        Hamiltonian.
    gamma : float
        Decay rate.
    t_max, dt : float
        Total time and fixed step; the grid is ``t_k = k dt`` with
        ``k = 0 .. round(t_max / dt)``.
    record : sequence of numpy.ndarray
        Observables to track.
    names : sequence of str, optional
        Labels for the recorded series; defaults to ``obs0, obs1, ...``.
    a_op : numpy.ndarray, optional
        Decay operator, see :func:`lindblad_rhs`.

    Returns
    -------
    list of ObservableSeries

    Raises
    ------
    TraceDriftError
        If ``|tr(rho) - 1|`` exceeds ``TRACE_TOL`` at any step.
    """
    if dt <= 0 or t_max < 0:
        raise ValueError("t_max must be nonnegative and dt positive")
    if names is None:
        names = [f"obs{i}" for i in range(len(record))]
    if len(names) != len(record):
        raise ValueError("names and record must have the same length")
    if a_op is None:
        a_op = annihilation(rho0.shape[0])

    n_steps = int(round(t_max / dt))
    times = np.arange(n_steps + 1) * dt
    values = np.empty((len(record), n_steps + 1))
    rho = rho0.astype(complex, copy=True)
    for k in range(n_steps + 1):
        drift = abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)
        if drift > TRACE_TOL:
            raise TraceDriftError(
                f"trace drifted by {drift:.3e} at t={k * dt:.6f}; reduce dt"
            )
        for i, op in enumerate(record):
            values[i, k] = expect(op, rho)
        if k < n_steps:
            rho = rk4_step(rho, dt, h, gamma, a_op)
    return [
        ObservableSeries(observable_name=nm, times=times, values=values[i])
        for i, nm in enumerate(names)
    ]


def steady_state(
    h: np.ndarray,
    gamma: float,
    a_op: np.ndarray | None = None,
    rho0: np.ndarray | None = None,
    dt: float = 1e-3,
    tol: float = 1e-9,
    max_time: float = 200.0,
) -> np.ndarray:
    """Relax to the steady state by time evolution.

    Integrates from ``rho0`` (vacuum by default) until the largest
    entry of the right-hand side falls below ``tol``.

    Raises
    ------
    SteadyStateError
        If the residual is still above ``tol`` at ``max_time``.
    TraceDriftError
        If the trace drifts on the way.
    """
    dim = h.shape[0]
    if a_op is None:
        a_op = annihilation(dim)
    if rho0 is None:
        rho = np.zeros((dim, dim), dtype=complex)
        rho[0, 0] = 1.0
    else:
        rho = rho0.astype(complex, copy=True)

    n_steps = int(round(max_time / dt))
    check_every = 100
    for k in range(n_steps):
        if k % check_every == 0:
            drift = abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)
            if drift > TRACE_TOL:
                raise TraceDriftError(
                    f"trace drifted by {drift:.3e} at t={k * dt:.6f}; reduce dt"
                )
            residual = np.max(np.abs(lindblad_rhs(rho, h, gamma, a_op)))
            if residual < tol:
                return rho
        rho = rk4_step(rho, dt, h, gamma, a_op)
    residual = np.max(np.abs(lindblad_rhs(rho, h, gamma, a_op)))
    if residual < tol:
        return rho
    raise SteadyStateError(
        f"residual {residual:.3e} above tol {tol:.1e} after t={max_time}"
    )
