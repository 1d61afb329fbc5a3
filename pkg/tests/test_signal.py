"""Smoothing and feature extraction."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kerrsense import (
    FeatureSpec,
    SystemParams,
    TrajectoryDataset,
    TrajectoryRecord,
    read_features,
    rife_features,
    smooth,
    tab_features,
    write_features,
)


def _boxcar_reference(values, window):
    out = np.empty_like(values, dtype=float)
    for k in range(len(values)):
        lo = max(0, k - window + 1)
        out[k] = np.mean(values[lo : k + 1])
    return out


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 10_000),
    n=st.integers(1, 60),
    window=st.integers(1, 70),
)
def test_smooth_matches_direct_average(seed, n, window):
    values = np.random.default_rng(seed).normal(size=n)
    got = smooth(values, 1.0, float(window))
    want = _boxcar_reference(values, window)
    assert np.allclose(got, want, rtol=1e-10, atol=1e-12)


def test_smooth_tau_equal_dt_is_identity():
    values = np.arange(5.0)
    assert np.array_equal(smooth(values, 0.25, 0.25), values)


def test_smooth_keeps_constants():
    values = np.full(50, 2.75)
    assert np.allclose(smooth(values, 1.0, 7.0), values, rtol=1e-12)


def test_smooth_is_causal():
    rng = np.random.default_rng(0)
    values = rng.normal(size=100)
    other = values.copy()
    other[60:] += 5.0
    tau = 10.0
    assert np.array_equal(smooth(values, 1.0, tau)[:60], smooth(other, 1.0, tau)[:60])


def test_smooth_rows_independent():
    rng = np.random.default_rng(1)
    block = rng.normal(size=(4, 30))
    sm = smooth(block, 1.0, 6.0)
    for i in range(4):
        assert np.array_equal(sm[i], smooth(block[i], 1.0, 6.0))


def test_smooth_rejects_tau_below_grid():
    with pytest.raises(ValueError):
        smooth(np.ones(4), 0.1, 0.05)


# --- synthetic dataset helpers -------------------------------------------------

def _synthetic_dataset(series_by_label, dt=0.01):
    """Build a dataset whose x_mean rows are given directly."""
    params = SystemParams(epsilon=1.2, delta_omega=1.0, gamma=1.0, n_fock=2)
    records = []
    n_points = len(next(iter(series_by_label))[1])
    times = np.arange(n_points) * dt
    for label, series in series_by_label:
        series = np.asarray(series, dtype=float)
        records.append(
            TrajectoryRecord(
                label=label,
                seed=0,
                times=times,
                x_mean=series,
                n_mean=np.abs(series),
                current=np.concatenate([[0.0], np.diff(series)]),
            )
        )
    return TrajectoryDataset(
        params=params,
        model="dispersive",
        dt=dt,
        t_max=times[-1],
        n_per_class=len(series_by_label) // 2,
        master_seed=0,
        records=records,
    )


def test_tab_grid_and_count():
    rng = np.random.default_rng(2)
    ds = _synthetic_dataset(
        [(0, rng.normal(size=101)), (1, rng.normal(size=101))], dt=0.01
    )
    fm = tab_features(ds, t_f=0.8, tau=0.01, stride=3)
    cut = 80
    assert fm.values.shape == (2, cut // 3 + 1)
    # tau = dt means no smoothing: features are the raw subsampled points
    raw = np.stack([ds.records[0].x_mean, ds.records[1].x_mean])
    assert np.array_equal(fm.values, raw[:, : cut + 1 : 3])
    assert np.array_equal(fm.labels, [0, 1])
    assert fm.spec == FeatureSpec(kind="tab", t_f=0.8, tau=0.01,
                                  channel="x_mean", stride=3)


def test_tab_default_stride_caps_features():
    rng = np.random.default_rng(3)
    ds = _synthetic_dataset(
        [(0, rng.normal(size=5001)), (1, rng.normal(size=5001))], dt=0.01
    )
    fm = tab_features(ds, t_f=50.0, tau=0.01)
    assert fm.spec.stride == 3  # ceil(5001 / 2000)
    assert fm.values.shape[1] == 5000 // 3 + 1


def test_tab_smoothing_applied():
    rng = np.random.default_rng(4)
    ds = _synthetic_dataset(
        [(0, rng.normal(size=51)), (1, rng.normal(size=51))], dt=0.01
    )
    fm = tab_features(ds, t_f=0.5, tau=0.05, stride=1)
    want = smooth(ds.records[0].x_mean, 0.01, 0.05)
    assert np.allclose(fm.values[0], want, rtol=1e-12)


def test_tab_current_channel_scales_increments():
    rng = np.random.default_rng(5)
    ds = _synthetic_dataset(
        [(0, rng.normal(size=51)), (1, rng.normal(size=51))], dt=0.01
    )
    fm = tab_features(ds, t_f=0.5, tau=0.01, stride=1, channel="current")
    want = ds.records[0].current / ds.dt
    assert np.allclose(fm.values[0], want, rtol=1e-12)


def test_tab_rejects_out_of_range():
    rng = np.random.default_rng(6)
    ds = _synthetic_dataset([(0, rng.normal(size=11)), (1, rng.normal(size=11))])
    with pytest.raises(ValueError):
        tab_features(ds, t_f=1.0, tau=0.01)
    with pytest.raises(ValueError):
        tab_features(ds, t_f=-0.1, tau=0.01)
    with pytest.raises(ValueError):
        tab_features(ds, t_f=0.05, tau=0.01, channel="volume")


def test_rife_known_line():
    # on the line x(t) = 3 t + 1 every interval has slope 3, mean at the
    # interval centre, and the variance of a centred uniform grid
    dt = 0.01
    t = np.arange(201) * dt
    line = 3.0 * t + 1.0
    ds = _synthetic_dataset([(0, line), (1, line)], dt=dt)
    fm = rife_features(ds, t_f=2.0, tau=dt, n_intervals=8, seed=123)
    assert fm.values.shape == (2, 24)
    rng = np.random.default_rng(123)
    for k in range(8):
        i, j = rng.integers(0, 201, size=2)
        while i == j:
            i, j = rng.integers(0, 201, size=2)
        i, j = int(min(i, j)), int(max(i, j))
        seg_t = t[i : j + 1]
        assert fm.values[0, 3 * k] == pytest.approx(3.0 * seg_t.mean() + 1.0, rel=1e-12)
        assert fm.values[0, 3 * k + 1] == pytest.approx(3.0 * seg_t.std(), rel=1e-9)
        assert fm.values[0, 3 * k + 2] == pytest.approx(3.0, rel=1e-9)


def test_rife_slope_matches_polyfit():
    rng = np.random.default_rng(7)
    series = rng.normal(size=101)
    ds = _synthetic_dataset([(0, series), (1, series)], dt=0.01)
    fm = rife_features(ds, t_f=1.0, tau=0.01, n_intervals=5, seed=11)
    draw = np.random.default_rng(11)
    t = ds.records[0].times
    sm = series  # tau = dt leaves the series untouched
    for k in range(5):
        i, j = draw.integers(0, 101, size=2)
        while i == j:
            i, j = draw.integers(0, 101, size=2)
        i, j = int(min(i, j)), int(max(i, j))
        coeff = np.polyfit(t[i : j + 1], sm[i : j + 1], 1)[0]
        assert fm.values[0, 3 * k + 2] == pytest.approx(coeff, rel=1e-8, abs=1e-10)


def test_rife_same_seed_same_intervals():
    rng = np.random.default_rng(8)
    ds = _synthetic_dataset(
        [(0, rng.normal(size=101)), (1, rng.normal(size=101))], dt=0.01
    )
    fm_a = rife_features(ds, t_f=1.0, tau=0.02, n_intervals=6, seed=5)
    fm_b = rife_features(ds, t_f=1.0, tau=0.02, n_intervals=6, seed=5)
    fm_c = rife_features(ds, t_f=1.0, tau=0.02, n_intervals=6, seed=6)
    assert np.array_equal(fm_a.values, fm_b.values)
    assert not np.array_equal(fm_a.values, fm_c.values)


def test_rife_identical_records_identical_features():
    rng = np.random.default_rng(9)
    series = rng.normal(size=101)
    ds = _synthetic_dataset([(0, series), (1, series.copy())], dt=0.01)
    fm = rife_features(ds, t_f=1.0, tau=0.03, n_intervals=10, seed=0)
    assert np.array_equal(fm.values[0], fm.values[1])


def test_features_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(10)
    ds = _synthetic_dataset(
        [(0, rng.normal(size=101)), (1, rng.normal(size=101))], dt=0.01
    )
    for fm in (
        tab_features(ds, t_f=1.0, tau=0.02, stride=2),
        rife_features(ds, t_f=1.0, tau=0.02, n_intervals=4, seed=3),
    ):
        path = tmp_path / f"{fm.spec.kind}.csv"
        write_features(fm, str(path), config_digest="ab12")
        loaded = read_features(str(path))
        assert loaded.spec == fm.spec
        assert np.array_equal(loaded.labels, fm.labels)
        assert np.array_equal(loaded.values, fm.values)
        header = path.read_text().splitlines()[0]
        assert header.startswith(f"# kind={fm.spec.kind},t_f=1.0,tau=0.02,")
        assert "config_hash=ab12" in header
        # rewriting the loaded matrix reproduces the bytes
        path2 = tmp_path / f"{fm.spec.kind}_again.csv"
        write_features(loaded, str(path2), config_digest="ab12")
        assert path.read_bytes() == path2.read_bytes()
        with pytest.raises(FileExistsError):
            write_features(fm, str(path))
