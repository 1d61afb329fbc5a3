"""Homodyne quantum trajectories of the driven Kerr resonator.

A single trajectory follows the Ito update

    d psi = [-i H - (C'C - m C + m^2/4)/2] psi dt + (C - m/2) psi dW

with collapse operator ``C = sqrt(2 gamma) a`` and homodyne signal
``m = <C + C'>`` evaluated at the pre-step state. Steps are explicit
Euler-Maruyama followed by renormalization; the scheme is weakly first
order, which is adequate at the step sizes used here, and the analytic
norm drift is O(dt^(3/2)) so a norm outside [0.5, 2] before
renormalization flags a broken step and raises. The measured current
increment is ``dJ = m dt + dW``.

Determinism contract: every record draws its noise from a counter-based
generator keyed by a seed derived from ``(master_seed, label, index)``
alone, and the integrator applies operators band by band with purely
elementwise array operations, so a record's bytes do not depend on how
many records are simulated together or on the worker count. Dataset
generation always proceeds in fixed batches of ``BATCH`` trajectories
per label; workers only distribute whole batches.

On disk a dataset is a directory with ``manifest.json`` (parameters and
a hash of them) and ``records.csv`` with columns
``traj,label,seed,t,x_mean,n_mean,sz_mean,current``, rows sorted by
``(traj, t)``, floats written in shortest round-trip form. ``sz_mean``
is empty for resonator-only records. ``current[0]`` is zero by
convention; ``current[k]`` is the increment accumulated over the step
ending at ``t_k``.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import StepFailureError
from .hilbert import (
    SystemParams,
    annihilation,
    hamiltonian_dispersive,
    hamiltonian_full,
    kron,
)

# Trajectories per simulation batch; part of the output contract only in
# that batches are fixed by (label, index), never by scheduling.
BATCH = 64

# Pre-renormalization norm window; outside it the step is rejected.
NORM_MIN = 0.5
NORM_MAX = 2.0

FORMAT_VERSION = 1

MODELS = ("dispersive", "full")

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    """One splitmix64 output for input x (64-bit avalanche, bijective)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def record_seed(master_seed: int, label: int, index: int) -> int:
    """Seed for one record, distinct across (label, index) pairs.

    The label sits in the top bits and the index in the bottom 48, so
    the combined word is unique per record and the avalanche step keeps
    neighbouring records' streams unrelated.
    """
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label}")
    if not 0 <= index < (1 << 48):
        raise ValueError(f"index out of range: {index}")
    base = _splitmix64(master_seed & _MASK64)
    return _splitmix64((base + ((label << 48) | index)) & _MASK64)


def _record_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


@dataclass
class TrajectoryRecord:
    """One simulated record on the grid ``t_k = k dt``."""

    label: int
    seed: int
    times: np.ndarray
    x_mean: np.ndarray
    n_mean: np.ndarray
    current: np.ndarray
    sz_mean: np.ndarray | None = None


@dataclass
class TrajectoryDataset:
    params: SystemParams
    model: str
    dt: float
    t_max: float
    n_per_class: int
    master_seed: int
    records: list[TrajectoryRecord]


@dataclass
class _ModelOps:
    """Banded operators and measurement weights for one (model, label)."""

    dim: int
    kdrift_bands: list[tuple[int, np.ndarray]]
    c_bands: list[tuple[int, np.ndarray]]
    sqrt_2gamma: float
    n_weights: np.ndarray
    sz_weights: np.ndarray | None
    psi0: np.ndarray


def _bands(mat: np.ndarray) -> list[tuple[int, np.ndarray]]:
    """Nonzero diagonals of a matrix as (offset, values) pairs.

    The returned bands reconstruct the matrix exactly; offsets are
    ascending so band application order is fixed.
    """
    n = mat.shape[0]
    out: list[tuple[int, np.ndarray]] = []
    for k in range(-(n - 1), n):
        vals = np.diagonal(mat, offset=k)
        if np.any(vals != 0):
            out.append((k, np.ascontiguousarray(vals)))
    return out


def _apply_bands(
    bands: list[tuple[int, np.ndarray]], psi: np.ndarray, out: np.ndarray
) -> np.ndarray:
    """out <- M psi for banded M, elementwise per batch row."""
    out[...] = 0.0
    n = psi.shape[-1]
    for k, vals in bands:
        if k >= 0:
            out[..., : n - k] += vals * psi[..., k:]
        else:
            out[..., -k:] += vals * psi[..., : n + k]
    return out


def _build_ops(params: SystemParams, model: str, label: int) -> _ModelOps:
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}, got {model!r}")
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label}")
    nf = params.n_fock
    if model == "dispersive":
        h = hamiltonian_dispersive(params, "up" if label == 1 else "down")
        a_op = annihilation(nf)
        dim = nf
        n_weights = np.arange(nf, dtype=float)
        sz_weights = None
        psi0 = np.zeros(dim, dtype=complex)
        psi0[0] = 1.0
    else:
        h = hamiltonian_full(params)
        a_op = kron(annihilation(nf), np.eye(2, dtype=complex))
        dim = 2 * nf
        n_weights = np.repeat(np.arange(nf, dtype=float), 2)
        sz_weights = np.tile(np.array([-1.0, 1.0]), nf)
        psi0 = np.zeros(dim, dtype=complex)
        psi0[label] = 1.0
    c_op = math.sqrt(2.0 * params.gamma) * a_op
    kdrift = -1j * h - 0.5 * (c_op.conj().T @ c_op)
    return _ModelOps(
        dim=dim,
        kdrift_bands=_bands(kdrift),
        c_bands=_bands(c_op),
        sqrt_2gamma=math.sqrt(2.0 * params.gamma),
        n_weights=n_weights,
        sz_weights=sz_weights,
        psi0=psi0,
    )


def _homodyne_signal(
    ops: _ModelOps, psi: np.ndarray, cpsi: np.ndarray
) -> np.ndarray:
    """m = <C + C'> per batch row, for normalized psi with cpsi = C psi."""
    return 2.0 * np.sum(psi.real * cpsi.real + psi.imag * cpsi.imag, axis=-1)


def _step_core(
    ops: _ModelOps,
    psi: np.ndarray,
    cpsi: np.ndarray,
    m: np.ndarray,
    dt: float,
    dw: np.ndarray,
    kpsi_buf: np.ndarray,
    t: float,
) -> np.ndarray:
    """One Euler-Maruyama step plus renormalization; psi is (B, dim)."""
    kpsi = _apply_bands(ops.kdrift_bands, psi, kpsi_buf)
    coef0 = 1.0 - dt * (m * m) / 8.0 - 0.5 * (dw * m)
    coef1 = 0.5 * dt * m + dw
    new = coef0[:, None] * psi + dt * kpsi + coef1[:, None] * cpsi
    norm = np.sqrt(np.sum(new.real**2 + new.imag**2, axis=-1))
    if not np.all((norm >= NORM_MIN) & (norm <= NORM_MAX)):
        bad = float(norm.min()) if norm.min() < NORM_MIN else float(norm.max())
        raise StepFailureError(
            f"state norm {bad:.3e} outside [{NORM_MIN}, {NORM_MAX}] at t={t:.6f}"
        )
    new /= norm[:, None]
    return new


def _simulate_batch(
    ops: _ModelOps, dws: np.ndarray, dt: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray | None, np.ndarray]:
    """Integrate a batch; dws is (B, n_steps). Returns per-point series.

    Output arrays are (B, n_steps + 1): x_mean, n_mean, sz_mean (None
    for resonator-only models) and the current increments.
    """
    n_batch, n_steps = dws.shape
    psi = np.tile(ops.psi0, (n_batch, 1))
    x_rec = np.empty((n_batch, n_steps + 1))
    n_rec = np.empty((n_batch, n_steps + 1))
    sz_rec = None if ops.sz_weights is None else np.empty((n_batch, n_steps + 1))
    cur = np.empty((n_batch, n_steps + 1))
    cur[:, 0] = 0.0
    cpsi_buf = np.empty_like(psi)
    kpsi_buf = np.empty_like(psi)
    for k in range(n_steps + 1):
        cpsi = _apply_bands(ops.c_bands, psi, cpsi_buf)
        m = _homodyne_signal(ops, psi, cpsi)
        x_rec[:, k] = m / ops.sqrt_2gamma
        prob = psi.real**2 + psi.imag**2
        n_rec[:, k] = np.sum(prob * ops.n_weights, axis=-1)
        if sz_rec is not None:
            sz_rec[:, k] = np.sum(prob * ops.sz_weights, axis=-1)
        if k < n_steps:
            dw = dws[:, k]
            cur[:, k + 1] = m * dt + dw
            psi = _step_core(ops, psi, cpsi, m, dt, dw, kpsi_buf, t=k * dt)
    return x_rec, n_rec, sz_rec, cur


def homodyne_step(
    psi: np.ndarray,
    h: np.ndarray,
    gamma: float,
    dt: float,
    dw: float,
    a_op: np.ndarray | None = None,
) -> tuple[np.ndarray, float]:
    """Advance one normalized state by one homodyne step.

    Parameters
    ----------
    psi : numpy.ndarray
        Normalized state vector.
    h : numpy.ndarray
        Hamiltonian.
    gamma : float
        Decay rate behind the collapse operator ``sqrt(2 gamma) a``.
    dt : float
        Step size.
    dw : float
        Wiener increment for this step (variance ``dt``).
    a_op : numpy.ndarray, optional
        Decay operator, defaults to the annihilation operator on the
        full space.

    Returns
    -------
    (psi_next, dj)
        The renormalized post-step state and the current increment
        ``dj = m dt + dw``.
    """
    if a_op is None:
        a_op = annihilation(psi.shape[0])
    c_op = math.sqrt(2.0 * gamma) * a_op
    kdrift = -1j * h - 0.5 * (c_op.conj().T @ c_op)
    ops = _ModelOps(
        dim=psi.shape[0],
        kdrift_bands=_bands(kdrift),
        c_bands=_bands(c_op),
        sqrt_2gamma=math.sqrt(2.0 * gamma),
        n_weights=np.arange(psi.shape[0], dtype=float),
        sz_weights=None,
        psi0=psi,
    )
    psi2 = psi[None, :].astype(complex)
    cpsi = _apply_bands(ops.c_bands, psi2, np.empty_like(psi2))
    m = _homodyne_signal(ops, psi2, cpsi)
    dwa = np.array([dw], dtype=float)
    new = _step_core(ops, psi2, cpsi, m, dt, dwa, np.empty_like(psi2), t=0.0)
    dj = float(m[0] * dt + dw)
    return new[0], dj


def simulate_trajectory(
    params: SystemParams,
    model: str,
    label: int,
    t_max: float,
    dt: float,
    seed: int,
) -> TrajectoryRecord:
    """Simulate one record from the vacuum with the qubit in ``label``.

    Deterministic given the arguments; the noise stream comes from a
    counter-based generator keyed by ``seed`` alone.
    """
    n_steps = _grid_steps(t_max, dt)
    ops = _build_ops(params, model, label)
    dws = _record_rng(seed).normal(0.0, math.sqrt(dt), size=n_steps)[None, :]
    x_rec, n_rec, sz_rec, cur = _simulate_batch(ops, dws, dt)
    times = np.arange(n_steps + 1) * dt
    return TrajectoryRecord(
        label=label,
        seed=seed,
        times=times,
        x_mean=x_rec[0],
        n_mean=n_rec[0],
        current=cur[0],
        sz_mean=None if sz_rec is None else sz_rec[0],
    )


def _grid_steps(t_max: float, dt: float) -> int:
    if dt <= 0 or t_max <= 0:
        raise ValueError("t_max and dt must be positive")
    n_steps = int(round(t_max / dt))
    if n_steps < 1:
        raise ValueError(f"t_max={t_max} shorter than one step dt={dt}")
    return n_steps


def _run_batch(
    params: SystemParams,
    model: str,
    label: int,
    start: int,
    count: int,
    t_max: float,
    dt: float,
    master_seed: int,
) -> tuple:
    n_steps = _grid_steps(t_max, dt)
    seeds = [record_seed(master_seed, label, start + i) for i in range(count)]
    dws = np.empty((count, n_steps))
    for i, seed in enumerate(seeds):
        dws[i] = _record_rng(seed).normal(0.0, math.sqrt(dt), size=n_steps)
    ops = _build_ops(params, model, label)
    x_rec, n_rec, sz_rec, cur = _simulate_batch(ops, dws, dt)
    return seeds, x_rec, n_rec, sz_rec, cur


def generate_dataset(
    params: SystemParams,
    model: str,
    n_per_class: int,
    t_max: float,
    dt: float,
    master_seed: int,
    workers: int = 1,
) -> TrajectoryDataset:
    """Simulate ``n_per_class`` records per label.

    Records are ordered label 0 first, then label 1, each in index
    order. Output is byte-for-byte independent of ``workers``.
    """
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}, got {model!r}")
    if n_per_class < 1:
        raise ValueError(f"n_per_class must be >= 1, got {n_per_class}")
    n_steps = _grid_steps(t_max, dt)
    jobs = [
        (params, model, label, start, min(BATCH, n_per_class - start), t_max, dt, master_seed)
        for label in (0, 1)
        for start in range(0, n_per_class, BATCH)
    ]
    if workers <= 1:
        results = [_run_batch(*job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_batch, *zip(*jobs)))

    times = np.arange(n_steps + 1) * dt
    records: list[TrajectoryRecord] = []
    for (_, _, label, _, _, _, _, _), (seeds, x_rec, n_rec, sz_rec, cur) in zip(
        jobs, results
    ):
        for i, seed in enumerate(seeds):
            records.append(
                TrajectoryRecord(
                    label=label,
                    seed=seed,
                    times=times,
                    x_mean=x_rec[i],
                    n_mean=n_rec[i],
                    current=cur[i],
                    sz_mean=None if sz_rec is None else sz_rec[i],
                )
            )
    return TrajectoryDataset(
        params=params,
        model=model,
        dt=dt,
        t_max=t_max,
        n_per_class=n_per_class,
        master_seed=master_seed,
        records=records,
    )


def manifest_dict(dataset: TrajectoryDataset) -> dict:
    """Manifest content without the hash field, in canonical key order."""
    p = dataset.params
    return {
        "format_version": FORMAT_VERSION,
        "model": dataset.model,
        "dt": dataset.dt,
        "t_max": dataset.t_max,
        "n_per_class": dataset.n_per_class,
        "master_seed": dataset.master_seed,
        "params": {
            "omega": p.omega,
            "omega_q": p.omega_q,
            "epsilon": p.epsilon,
            "chi": p.chi,
            "g": p.g,
            "gamma": p.gamma,
            "delta_omega": p.delta_omega,
            "n_fock": p.n_fock,
        },
    }


def config_hash(config: dict) -> str:
    """sha256 of the canonical JSON encoding of a configuration dict."""
    import hashlib

    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def write_dataset(dataset: TrajectoryDataset, out_dir: str, force: bool = False) -> None:
    """Write ``manifest.json`` and ``records.csv`` under ``out_dir``.

    Refuses to overwrite an existing dataset unless ``force``.
    """
    manifest = manifest_dict(dataset)
    digest = config_hash(manifest)
    manifest["config_hash"] = digest
    man_path = os.path.join(out_dir, "manifest.json")
    csv_path = os.path.join(out_dir, "records.csv")
    if not force and (os.path.exists(man_path) or os.path.exists(csv_path)):
        raise FileExistsError(f"dataset already exists in {out_dir}; pass force to replace")
    os.makedirs(out_dir, exist_ok=True)
    with open(man_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(csv_path, "w") as fh:
        fh.write(f"# config_hash={digest},format_version={FORMAT_VERSION}\n")
        fh.write("traj,label,seed,t,x_mean,n_mean,sz_mean,current\n")
        for traj, rec in enumerate(dataset.records):
            prefix = f"{traj},{rec.label},{rec.seed},"
            # tolist() yields Python floats, whose repr is the shortest
            # round-trip form
            ts = rec.times.tolist()
            xs = rec.x_mean.tolist()
            ns = rec.n_mean.tolist()
            cs = rec.current.tolist()
            szs = None if rec.sz_mean is None else rec.sz_mean.tolist()
            for k in range(len(ts)):
                sz_txt = "" if szs is None else repr(szs[k])
                fh.write(
                    f"{prefix}{ts[k]!r},{xs[k]!r},{ns[k]!r},{sz_txt},{cs[k]!r}\n"
                )


def read_dataset(path: str) -> TrajectoryDataset:
    """Load a dataset written by :func:`write_dataset`."""
    man_path = os.path.join(path, "manifest.json")
    csv_path = os.path.join(path, "records.csv")
    with open(man_path) as fh:
        manifest = json.load(fh)
    params = SystemParams(**manifest["params"])
    frame = pd.read_csv(
        csv_path,
        comment="#",
        dtype={"traj": np.int64, "label": np.int64, "seed": np.uint64},
        float_precision="round_trip",
    )
    if not frame["traj"].is_monotonic_increasing:
        raise ValueError(f"records in {csv_path} are not sorted by traj")
    has_sz = not frame["sz_mean"].isna().all()
    records: list[TrajectoryRecord] = []
    times_shared: np.ndarray | None = None
    for traj, group in frame.groupby("traj", sort=True):
        times = group["t"].to_numpy()
        if times_shared is None or times.shape != times_shared.shape or not np.array_equal(times, times_shared):
            times_shared = times
        records.append(
            TrajectoryRecord(
                label=int(group["label"].iloc[0]),
                seed=int(group["seed"].iloc[0]),
                times=times_shared,
                x_mean=group["x_mean"].to_numpy(),
                n_mean=group["n_mean"].to_numpy(),
                current=group["current"].to_numpy(),
                sz_mean=group["sz_mean"].to_numpy() if has_sz else None,
            )
        )
    return TrajectoryDataset(
        params=params,
        model=manifest["model"],
        dt=manifest["dt"],
        t_max=manifest["t_max"],
        n_per_class=manifest["n_per_class"],
        master_seed=manifest["master_seed"],
        records=records,
    )
