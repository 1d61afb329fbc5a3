"""RBF-kernel support vector classifier trained by sequential minimal
optimization, plus repeated stratified cross-validation.

The dual problem

    min_a  a'Qa / 2 - sum(a)   s.t.  0 <= a_i <= C,  y'a = 0,
    Q_ij = y_i y_j K(x_i, x_j)

is solved with maximal-violating-pair working set selection: at each
iteration the pair that most violates the KKT conditions is updated
analytically and the gradient is refreshed in O(n). The stop criterion
is the duality-gap surrogate m(a) - M(a) <= tol. Features are
standardized inside the learner (per training split, so cross
validation never leaks test statistics into the scaler); all stored
support vectors live in standardized space.

Labels are 0 and 1 throughout; internally they map to -1 and +1 and a
decision value strictly greater than zero predicts label 1.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import ConvergenceError
from .signal import FeatureMatrix
from .trajectory import FORMAT_VERSION

DEFAULT_TOL = 1e-3

# Hyperparameter grid for the optional in-training selection.
GRID_C = (0.1, 1.0, 10.0)
GRID_GAMMA_SCALE = (0.1, 1.0, 10.0)


@dataclass
class SvcModel:
    """Trained classifier; vectors and coefficients in standardized space."""

    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    intercept: float
    gamma_value: float
    c_reg: float
    mean: np.ndarray
    scale: np.ndarray
    support_indices: np.ndarray
    n_iter: int


@dataclass
class CvReport:
    """Accuracies from repeated stratified cross-validation.

    ``accuracies[r, f]`` is the held-out accuracy of repetition ``r``,
    fold ``f``; ``std_accuracy`` is the sample standard deviation over
    all repetition-fold entries.
    """

    accuracies: np.ndarray
    mean_accuracy: float
    std_accuracy: float
    error: float
    reps: int
    folds: int
    c_reg: float
    gamma: float | str
    seed: int
    n_records: int
    n_features: int


def rbf_kernel(x: np.ndarray, y: np.ndarray, gamma_value: float) -> np.ndarray:
    """Gram matrix exp(-gamma |x_i - y_j|^2), shape (len(x), len(y))."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    sq = (
        np.sum(x * x, axis=1)[:, None]
        + np.sum(y * y, axis=1)[None, :]
        - 2.0 * (x @ y.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma_value * sq)


def _standardize_fit(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale = np.where(scale == 0.0, 1.0, scale)
    return mean, scale


def _resolve_gamma(gamma: float | str, x_std: np.ndarray) -> float:
    if isinstance(gamma, str):
        if gamma != "scale":
            raise ValueError(f"gamma must be 'scale' or a positive number, got {gamma!r}")
        var = float(x_std.var())
        denom = x_std.shape[1] * var if var > 0 else x_std.shape[1]
        return 1.0 / denom
    value = float(gamma)
    if value <= 0:
        raise ValueError(f"gamma must be positive, got {value}")
    return value


def _smo(
    kernel: np.ndarray,
    y: np.ndarray,
    c_reg: float,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, float, int]:
    """Maximal-violating-pair SMO on a precomputed kernel.

    Returns (alpha, intercept, iterations). ``y`` holds -1/+1 floats.
    """
    n = y.shape[0]
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of the dual objective at alpha = 0
    snap = 1e-12 * max(1.0, c_reg)
    pos = y > 0
    it = 0
    while True:
        minus_y_grad = -y * grad
        up_mask = np.where(pos, alpha < c_reg, alpha > 0.0)
        low_mask = np.where(pos, alpha > 0.0, alpha < c_reg)
        if not up_mask.any() or not low_mask.any():
            m_val = m_low = 0.0
            break
        up_vals = np.where(up_mask, minus_y_grad, -np.inf)
        low_vals = np.where(low_mask, minus_y_grad, np.inf)
        i = int(np.argmax(up_vals))
        j = int(np.argmin(low_vals))
        m_val = up_vals[i]
        m_low = low_vals[j]
        if m_val - m_low <= tol:
            break
        if it >= max_iter:
            raise ConvergenceError(
                f"SMO did not reach tol={tol:g} in {max_iter} iterations "
                f"(gap {m_val - m_low:.3e})"
            )
        quad = kernel[i, i] + kernel[j, j] - 2.0 * kernel[i, j]
        if quad <= 1e-12:
            quad = 1e-12
        step = (m_val - m_low) / quad
        slack_i = c_reg - alpha[i] if pos[i] else alpha[i]
        slack_j = alpha[j] if pos[j] else c_reg - alpha[j]
        step = min(step, slack_i, slack_j)
        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        for idx in (i, j):
            if alpha[idx] < snap:
                alpha[idx] = 0.0
            elif alpha[idx] > c_reg - snap:
                alpha[idx] = c_reg
        grad += step * y * (kernel[:, i] - kernel[:, j])
        it += 1
    intercept = (m_val + m_low) / 2.0
    if not math.isfinite(intercept):
        intercept = 0.0
    return alpha, float(intercept), it


def _fit_arrays(
    x: np.ndarray,
    labels: np.ndarray,
    c_reg: float,
    gamma: float | str,
    tol: float,
    max_iter: int | None,
) -> SvcModel:
    x = np.asarray(x, dtype=float)
    labels = np.asarray(labels)
    if x.ndim != 2 or labels.shape != (x.shape[0],):
        raise ValueError("need a 2-d feature matrix and one label per row")
    classes = np.unique(labels)
    if not np.array_equal(classes, [0, 1]):
        raise ValueError(f"labels must contain both classes 0 and 1, got {classes}")
    if c_reg <= 0:
        raise ValueError(f"c_reg must be positive, got {c_reg}")
    mean, scale = _standardize_fit(x)
    x_std = (x - mean) / scale
    gamma_value = _resolve_gamma(gamma, x_std)
    y = np.where(labels == 1, 1.0, -1.0)
    kernel = rbf_kernel(x_std, x_std, gamma_value)
    if max_iter is None:
        max_iter = 10_000 * x.shape[0]
    alpha, intercept, n_iter = _smo(kernel, y, c_reg, tol, max_iter)
    sv = alpha > 0.0
    return SvcModel(
        support_vectors=np.ascontiguousarray(x_std[sv]),
        dual_coefs=alpha[sv] * y[sv],
        intercept=intercept,
        gamma_value=gamma_value,
        c_reg=c_reg,
        mean=mean,
        scale=scale,
        support_indices=np.flatnonzero(sv),
        n_iter=n_iter,
    )


def train_svc(
    features: FeatureMatrix | tuple[np.ndarray, np.ndarray],
    c_reg: float = 1.0,
    gamma: float | str = "scale",
    tol: float = DEFAULT_TOL,
    max_iter: int | None = None,
) -> SvcModel:
    """Train the classifier on a feature matrix (or an (x, labels) pair)."""
    if isinstance(features, FeatureMatrix):
        x, labels = features.values, features.labels
    else:
        x, labels = features
    return _fit_arrays(x, labels, c_reg, gamma, tol, max_iter)


def decision_function(model: SvcModel, x: np.ndarray) -> float | np.ndarray:
    """Signed distance surrogate; positive means label 1."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x_std = (np.atleast_2d(x) - model.mean) / model.scale
    kernel = rbf_kernel(model.support_vectors, x_std, model.gamma_value)
    dec = model.dual_coefs @ kernel + model.intercept
    return float(dec[0]) if single else dec


def predict(model: SvcModel, x: np.ndarray) -> int | np.ndarray:
    """Predicted label(s); ties (decision exactly zero) go to label 0."""
    dec = decision_function(model, x)
    if isinstance(dec, float):
        return int(dec > 0)
    return (dec > 0).astype(np.int64)


def _fold_assignment(
    labels: np.ndarray, folds: int, rng: np.random.Generator
) -> list[np.ndarray]:
    """Stratified fold membership; fold f gets the f-th chunk of each class."""
    per_fold: list[list[np.ndarray]] = [[] for _ in range(folds)]
    for cls in (0, 1):
        idx = np.flatnonzero(labels == cls)
        perm = rng.permutation(idx)
        for f, chunk in enumerate(np.array_split(perm, folds)):
            per_fold[f].append(chunk)
    return [np.sort(np.concatenate(chunks)) for chunks in per_fold]


def _select_hyperparams(
    x: np.ndarray,
    labels: np.ndarray,
    tol: float,
    seed_key: tuple,
) -> tuple[float, float | str]:
    """Pick (c_reg, gamma) on the training split by inner 3-fold CV."""
    mean, scale = _standardize_fit(x)
    base = _resolve_gamma("scale", (x - mean) / scale)
    rng = np.random.default_rng(seed_key)
    inner = _fold_assignment(labels, 3, rng)
    best = (-1.0, 1.0, "scale")
    for c_reg in GRID_C:
        for mult in GRID_GAMMA_SCALE:
            gamma_value = base * mult
            scores = []
            for f in range(3):
                test_idx = inner[f]
                train_idx = np.setdiff1d(np.arange(labels.shape[0]), test_idx)
                if len(np.unique(labels[train_idx])) < 2:
                    continue
                model = _fit_arrays(
                    x[train_idx], labels[train_idx], c_reg, gamma_value, tol, None
                )
                pred = predict(model, x[test_idx])
                scores.append(float(np.mean(pred == labels[test_idx])))
            score = float(np.mean(scores)) if scores else -1.0
            if score > best[0]:
                best = (score, c_reg, gamma_value)
    return best[1], best[2]


def repeated_cv(
    features: FeatureMatrix | tuple[np.ndarray, np.ndarray],
    reps: int = 100,
    folds: int = 5,
    c_reg: float = 1.0,
    gamma: float | str = "scale",
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    grid: bool = False,
) -> CvReport:
    """Repeated stratified k-fold cross-validation.

    Fold assignments are reshuffled every repetition from a single
    generator seeded by ``seed``, consumed in repetition order, so the
    report depends only on the inputs. With ``grid=True`` the
    hyperparameters are re-selected on every training split by inner
    cross-validation (the held-out fold never participates).
    """
    if isinstance(features, FeatureMatrix):
        x, labels = features.values, features.labels
    else:
        x, labels = features
    x = np.asarray(x, dtype=float)
    labels = np.asarray(labels)
    if reps < 1 or folds < 2:
        raise ValueError("need reps >= 1 and folds >= 2")
    counts = [int(np.sum(labels == cls)) for cls in (0, 1)]
    if min(counts) < folds:
        raise ValueError(f"class counts {counts} too small for {folds} folds")

    rng = np.random.default_rng(seed)
    accuracies = np.empty((reps, folds))
    all_idx = np.arange(labels.shape[0])
    for rep in range(reps):
        fold_members = _fold_assignment(labels, folds, rng)
        for f in range(folds):
            test_idx = fold_members[f]
            train_idx = np.setdiff1d(all_idx, test_idx)
            if grid:
                c_use, gamma_use = _select_hyperparams(
                    x[train_idx], labels[train_idx], tol, (seed, rep, f)
                )
            else:
                c_use, gamma_use = c_reg, gamma
            model = _fit_arrays(x[train_idx], labels[train_idx], c_use, gamma_use, tol, None)
            pred = predict(model, x[test_idx])
            accuracies[rep, f] = float(np.mean(pred == labels[test_idx]))

    mean_acc = float(accuracies.mean())
    std_acc = float(accuracies.std(ddof=1)) if accuracies.size > 1 else 0.0
    return CvReport(
        accuracies=accuracies,
        mean_accuracy=mean_acc,
        std_accuracy=std_acc,
        error=1.0 - mean_acc,
        reps=reps,
        folds=folds,
        c_reg=c_reg,
        gamma=gamma,
        seed=seed,
        n_records=labels.shape[0],
        n_features=x.shape[1],
    )


def write_cv_report(
    report: CvReport,
    csv_path: str,
    json_path: str,
    force: bool = False,
    config_digest: str | None = None,
    extra: dict | None = None,
) -> None:
    """Write per-fold accuracies as CSV and the summary as JSON.

    ``extra`` entries are merged into the JSON summary; callers use it
    to record which feature extraction produced the report.
    """
    for path in (csv_path, json_path):
        if not force and os.path.exists(path):
            raise FileExistsError(f"{path} already exists; pass force to replace")
    digest_part = "" if config_digest is None else f"config_hash={config_digest},"
    with open(csv_path, "w") as fh:
        fh.write(f"# {digest_part}format_version={FORMAT_VERSION}\n")
        fh.write("rep,fold,accuracy\n")
        acc = report.accuracies.tolist()
        for rep in range(report.reps):
            for f in range(report.folds):
                fh.write(f"{rep},{f},{acc[rep][f]!r}\n")
    summary = {
        "mean_accuracy": report.mean_accuracy,
        "std_accuracy": report.std_accuracy,
        "error": report.error,
        "reps": report.reps,
        "folds": report.folds,
        "c_reg": report.c_reg,
        "gamma": report.gamma,
        "seed": report.seed,
        "n_records": report.n_records,
        "n_features": report.n_features,
        "format_version": FORMAT_VERSION,
    }
    if config_digest is not None:
        summary["config_hash"] = config_digest
    if extra:
        summary.update(extra)
    with open(json_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_cv_report(csv_path: str, json_path: str) -> CvReport:
    """Load a report written by :func:`write_cv_report`."""
    with open(json_path) as fh:
        summary = json.load(fh)
    frame = pd.read_csv(csv_path, comment="#", float_precision="round_trip")
    reps = int(summary["reps"])
    folds = int(summary["folds"])
    accuracies = np.full((reps, folds), np.nan)
    accuracies[frame["rep"].to_numpy(), frame["fold"].to_numpy()] = frame[
        "accuracy"
    ].to_numpy()
    gamma = summary["gamma"]
    return CvReport(
        accuracies=accuracies,
        mean_accuracy=summary["mean_accuracy"],
        std_accuracy=summary["std_accuracy"],
        error=summary["error"],
        reps=reps,
        folds=folds,
        c_reg=summary["c_reg"],
        gamma=gamma,
        seed=summary["seed"],
        n_records=summary["n_records"],
        n_features=summary["n_features"],
    )
