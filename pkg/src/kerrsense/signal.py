"""Feature extraction from simulated measurement records.

Two feature families feed the classifier:

* tab: the smoothed record itself, truncated to ``t <= t_f`` and
  subsampled on a regular stride, one feature per kept grid point;
* rife: summary statistics (mean, standard deviation, least-squares
  slope) over a fixed set of random index intervals of the truncated
  grid. The intervals are drawn once per extraction from an explicit
  seed, so every record sees the same intervals and feature ``3 k + c``
  means the same thing across records and runs.

Smoothing is a trailing boxcar of ``window = round(tau / dt)`` samples;
the first ``window - 1`` outputs average the samples seen so far, so
the output is causal and has no artificial startup transient. Because
the window only looks backwards, smoothing commutes with truncation.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .trajectory import FORMAT_VERSION, TrajectoryDataset

CHANNELS = ("x_mean", "current", "n_mean")

# Default cap on tab feature count; stride grows to keep under it.
TAB_MAX_POINTS = 2000

DEFAULT_N_INTERVALS = 50


@dataclass(frozen=True)
class FeatureSpec:
    """Identity of one feature extraction; equal specs give equal layouts."""

    kind: str
    t_f: float
    tau: float
    channel: str
    stride: int | None = None
    n_intervals: int | None = None
    seed: int | None = None


@dataclass
class FeatureMatrix:
    values: np.ndarray
    labels: np.ndarray
    spec: FeatureSpec

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


def _boxcar(values: np.ndarray, window: int) -> np.ndarray:
    """Trailing boxcar average along the last axis.

    ``out[k]`` is the mean of ``values[max(0, k - window + 1) : k + 1]``.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    values = np.asarray(values, dtype=float)
    if window == 1:
        return values.copy()
    n = values.shape[-1]
    cs = np.cumsum(values, axis=-1)
    if window >= n:
        return cs / np.arange(1, n + 1, dtype=float)
    out = np.empty_like(values)
    out[..., : window - 1] = cs[..., : window - 1] / np.arange(1, window, dtype=float)
    out[..., window - 1 :] = cs[..., window - 1 :]
    out[..., window:] -= cs[..., :-window]
    out[..., window - 1 :] /= float(window)
    return out


def smooth(series: np.ndarray, dt: float, tau: float) -> np.ndarray:
    """Causal boxcar average of a record at instrument scale ``tau``.

    The window is ``round(tau / dt)`` samples; the first ``window - 1``
    outputs average over the available prefix only, so the operation
    never looks ahead of the current time.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if tau < dt:
        raise ValueError(f"tau={tau} is below the grid step dt={dt}")
    return _boxcar(series, int(round(tau / dt)))


def _grid_cut(dataset: TrajectoryDataset, t_f: float) -> int:
    """Index of the last kept grid point, snapping t_f to the grid."""
    if t_f <= 0:
        raise ValueError(f"t_f must be positive, got {t_f}")
    cut = int(round(t_f / dataset.dt))
    n_last = dataset.records[0].times.shape[0] - 1
    if cut < 1 or cut > n_last:
        raise ValueError(
            f"t_f={t_f} outside the record grid (dt={dataset.dt}, t_max={dataset.t_max})"
        )
    return cut


def _channel_matrix(dataset: TrajectoryDataset, channel: str, cut: int) -> np.ndarray:
    """Stack one channel across records, truncated to the first cut+1 points."""
    if channel not in CHANNELS:
        raise ValueError(f"channel must be one of {CHANNELS}, got {channel!r}")
    rows = []
    for rec in dataset.records:
        if channel == "x_mean":
            rows.append(rec.x_mean[: cut + 1])
        elif channel == "n_mean":
            rows.append(rec.n_mean[: cut + 1])
        else:
            # measured current samples; entry 0 is the zero placeholder
            rows.append(rec.current[: cut + 1] / dataset.dt)
    return np.stack(rows)


def _labels(dataset: TrajectoryDataset) -> np.ndarray:
    return np.array([rec.label for rec in dataset.records], dtype=np.int64)


def tab_features(
    dataset: TrajectoryDataset,
    t_f: float,
    tau: float,
    stride: int | None = None,
    channel: str = "x_mean",
) -> FeatureMatrix:
    """Smoothed, truncated, subsampled records as one feature per point.

    The kept grid indices are ``0, stride, 2 stride, ...`` up to
    ``round(t_f / dt)``, giving ``floor(round(t_f / dt) / stride) + 1``
    features. The default stride is the smallest that keeps at most
    ``TAB_MAX_POINTS`` features.
    """
    cut = _grid_cut(dataset, t_f)
    if stride is None:
        stride = max(1, math.ceil((cut + 1) / TAB_MAX_POINTS))
    elif stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    matrix = smooth(_channel_matrix(dataset, channel, cut), dataset.dt, tau)
    values = np.ascontiguousarray(matrix[:, ::stride])
    spec = FeatureSpec(kind="tab", t_f=t_f, tau=tau, channel=channel, stride=stride)
    return FeatureMatrix(values=values, labels=_labels(dataset), spec=spec)


def rife_features(
    dataset: TrajectoryDataset,
    t_f: float,
    tau: float,
    n_intervals: int = DEFAULT_N_INTERVALS,
    seed: int = 0,
    channel: str = "x_mean",
) -> FeatureMatrix:
    """Random-interval summary features of the smoothed records.

    For each of ``n_intervals`` index intervals ``[i, j]`` (i < j, both
    ends inclusive, drawn uniformly over the truncated grid from
    ``seed``) the features are the interval mean, standard deviation
    and least-squares slope, laid out as columns ``3 k``, ``3 k + 1``,
    ``3 k + 2``.
    """
    if n_intervals < 1:
        raise ValueError(f"n_intervals must be >= 1, got {n_intervals}")
    cut = _grid_cut(dataset, t_f)
    matrix = smooth(_channel_matrix(dataset, channel, cut), dataset.dt, tau)
    times = dataset.records[0].times[: cut + 1]

    rng = np.random.default_rng(seed)
    intervals: list[tuple[int, int]] = []
    for _ in range(n_intervals):
        i, j = rng.integers(0, cut + 1, size=2)
        while i == j:
            i, j = rng.integers(0, cut + 1, size=2)
        intervals.append((int(min(i, j)), int(max(i, j))))

    values = np.empty((matrix.shape[0], 3 * n_intervals))
    for k, (i, j) in enumerate(intervals):
        seg = matrix[:, i : j + 1]
        t_seg = times[i : j + 1]
        mean = seg.mean(axis=1)
        std = seg.std(axis=1)
        t_c = t_seg - t_seg.mean()
        denom = float(np.sum(t_c * t_c))
        slope = np.sum(t_c * (seg - mean[:, None]), axis=1) / denom
        values[:, 3 * k] = mean
        values[:, 3 * k + 1] = std
        values[:, 3 * k + 2] = slope
    spec = FeatureSpec(
        kind="rife",
        t_f=t_f,
        tau=tau,
        channel=channel,
        n_intervals=n_intervals,
        seed=seed,
    )
    return FeatureMatrix(values=values, labels=_labels(dataset), spec=spec)


def _spec_header(spec: FeatureSpec, config_digest: str | None) -> str:
    fields = [
        f"kind={spec.kind}",
        f"t_f={spec.t_f!r}",
        f"tau={spec.tau!r}",
        f"channel={spec.channel}",
        f"stride={'' if spec.stride is None else spec.stride}",
        f"n_intervals={'' if spec.n_intervals is None else spec.n_intervals}",
        f"seed={'' if spec.seed is None else spec.seed}",
        f"format_version={FORMAT_VERSION}",
    ]
    if config_digest is not None:
        fields.append(f"config_hash={config_digest}")
    return "# " + ",".join(fields)


def write_features(
    features: FeatureMatrix,
    path: str,
    force: bool = False,
    config_digest: str | None = None,
) -> None:
    """Write a feature matrix as CSV with the spec in a comment header."""
    if not force and os.path.exists(path):
        raise FileExistsError(f"{path} already exists; pass force to replace")
    n_feat = features.values.shape[1]
    with open(path, "w") as fh:
        fh.write(_spec_header(features.spec, config_digest) + "\n")
        fh.write("label," + ",".join(f"f{i}" for i in range(n_feat)) + "\n")
        for label, row in zip(features.labels.tolist(), features.values.tolist()):
            fh.write(f"{label}," + ",".join(repr(v) for v in row) + "\n")


def read_features(path: str) -> FeatureMatrix:
    """Load a feature matrix written by :func:`write_features`."""
    with open(path) as fh:
        header = fh.readline().strip()
    if not header.startswith("# "):
        raise ValueError(f"{path} lacks the feature spec header")
    parsed: dict[str, str] = {}
    for item in header[2:].split(","):
        key, _, value = item.partition("=")
        parsed[key] = value
    spec = FeatureSpec(
        kind=parsed["kind"],
        t_f=float(parsed["t_f"]),
        tau=float(parsed["tau"]),
        channel=parsed["channel"],
        stride=int(parsed["stride"]) if parsed.get("stride") else None,
        n_intervals=int(parsed["n_intervals"]) if parsed.get("n_intervals") else None,
        seed=int(parsed["seed"]) if parsed.get("seed") else None,
    )
    frame = pd.read_csv(path, comment="#", float_precision="round_trip")
    labels = frame["label"].to_numpy(dtype=np.int64)
    values = frame.drop(columns="label").to_numpy(dtype=float)
    return FeatureMatrix(values=values, labels=labels, spec=spec)
