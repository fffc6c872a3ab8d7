"""Residual reporting and Monte-Carlo repeatability."""

import numpy as np
import pytest

import psidemod as p
from psidemod.errors import RefusalError

from conftest import make_bandlimited, make_ramp


# --- wrapped difference ---


def test_wrapped_diff_trivial_cases():
    truth = make_ramp(64)
    same = p.wrapped_diff(truth, truth)
    assert np.abs(same.values).max() == 0.0
    shifted = p.PhaseMap(truth.values + 2 * np.pi)
    assert np.abs(p.wrapped_diff(shifted, truth).values).max() < 1e-12
    offset = p.PhaseMap(truth.values + 0.3)
    assert p.wrapped_diff(truth, offset).values == pytest.approx(-0.3, abs=1e-12)


def test_wrapped_diff_antisymmetric():
    rng = np.random.default_rng(7)
    a = p.PhaseMap(rng.uniform(-np.pi, np.pi, (16, 16)))
    b = p.PhaseMap(rng.uniform(-np.pi, np.pi, (16, 16)))
    forward = p.wrapped_diff(a, b).values
    backward = p.wrapped_diff(b, a).values
    assert np.abs(p.wrap(forward + backward)).max() < 1e-12


def test_wrapped_diff_shape_mismatch():
    with pytest.raises(ValueError):
        p.wrapped_diff(make_ramp(8), make_ramp(16))


# --- piston/tilt removal ---


def test_constant_offset_removed_exactly():
    diff = p.PhaseMap(np.full((32, 32), 0.7))
    residual, report = p.remove_piston_tilt(diff)
    assert np.abs(residual.values).max() < 1e-12
    assert report.piston_removed == pytest.approx(0.7, abs=1e-12)
    assert report.pv == pytest.approx(0.0, abs=1e-12)


def test_plane_removed_exactly():
    y, x = np.indices((64, 64), dtype=np.float64)
    alpha, beta = 0.003, -0.002
    diff = p.PhaseMap(0.1 + alpha * x + beta * y)
    residual, report = p.remove_piston_tilt(diff)
    assert np.abs(residual.values).max() < 1e-10
    assert report.tilt_removed[0] == pytest.approx(alpha, abs=1e-9)
    assert report.tilt_removed[1] == pytest.approx(beta, abs=1e-9)


def test_tilt_removal_preserves_ripple_amplitude():
    # the fit is orthogonal to the ripple when the truth is even-symmetric,
    # so piston/tilt removal must leave the peak-to-valley untouched
    truth = p.synthesize_wavefront("defocus", 6.0, (256, 256))
    error = p.predicted_error_map(truth, p.ConjugatePair(1.0, 0.1))
    raw_pv = error.values.max() - error.values.min()
    _, report = p.remove_piston_tilt(error)
    assert report.pv * 2 * np.pi == pytest.approx(raw_pv, rel=1e-9)
    assert abs(report.tilt_removed[0]) < 1e-12
    assert abs(report.tilt_removed[1]) < 1e-12


def test_piston_tilt_idempotent():
    rng = np.random.default_rng(9)
    diff = p.PhaseMap(0.4 + 0.002 * rng.normal(size=(48, 48)))
    once, _ = p.remove_piston_tilt(diff, crop=4)
    twice, again = p.remove_piston_tilt(once, crop=4)
    assert np.abs(twice.values - once.values).max() < 1e-12
    assert abs(again.piston_removed) < 1e-12


def test_wraparound_residual_refused():
    # a dense multi-cycle ramp keeps wrapping after piston removal
    ramp = np.linspace(0.0, 4 * np.pi, 4096).reshape(64, 64)
    diff = p.PhaseMap(p.wrap(ramp), wrapped=True)
    with pytest.raises(RefusalError, match="span"):
        p.remove_piston_tilt(diff)


def test_crop_validation():
    diff = p.PhaseMap(np.zeros((16, 16)))
    p.remove_piston_tilt(diff, crop=6)
    with pytest.raises(ValueError):
        p.remove_piston_tilt(diff, crop=8)
    with pytest.raises(ValueError):
        p.remove_piston_tilt(diff, crop=-1)


def test_report_serializes():
    diff = p.PhaseMap(np.full((16, 16), 0.25))
    _, report = p.remove_piston_tilt(diff, crop=2)
    d = report.to_dict()
    assert set(d) >= {
        "pv_waves",
        "rms_waves",
        "piston_removed_rad",
        "tilt_removed_rad_per_px",
        "crop",
    }
    assert d["crop"] == 2


# --- scalar summaries ---


def test_pv_rms_basics():
    pv, rms = p.pv_rms(p.PhaseMap(np.zeros((8, 8))))
    assert pv == 0.0 and rms == 0.0
    values = np.array([[0.0, 2 * np.pi], [0.0, 2 * np.pi]])
    pv, rms = p.pv_rms(p.PhaseMap(values))
    assert pv == pytest.approx(1.0, rel=1e-15)
    assert rms == pytest.approx(0.5, rel=1e-15)


def test_pv_rms_honors_crop():
    values = np.zeros((16, 16))
    values[0, 0] = 1.0
    assert p.pv_rms(p.PhaseMap(values))[0] > 0.0
    assert p.pv_rms(p.PhaseMap(values), crop=2)[0] == 0.0


def test_pv_of_known_leak_ratio():
    # r = sin(0.1*pi): artifact P-V = 2*arcsin(r)/(2*pi) = 0.1 waves exactly
    r = np.sin(0.1 * np.pi)
    truth = make_ramp(8192, height=2)
    error = p.predicted_error_map(truth, p.ConjugatePair(1.0, r))
    pv, _ = p.pv_rms(error)
    assert abs(pv - 0.1) < 1e-3


# --- Monte-Carlo ---


def test_montecarlo_zero_errors_zero_spread(sh5):
    truth = make_bandlimited((64, 64), pv=1.0, cycles=(2, 1))
    summary = p.montecarlo_repeatability(
        truth, sh5, error_kind="zero", trials=4, seed=1
    )
    assert summary.n_failed == 0
    assert max(summary.pv_waves) < 1e-6
    assert max(summary.leak_ratios) < 1e-12


def test_montecarlo_temporal_median_matches_model(sh5, defocus_truth):
    summary = p.montecarlo_repeatability(
        defocus_truth,
        sh5,
        error_kind="uniform",
        error_magnitude=0.3,
        trials=40,
        seed=42,
    )
    assert summary.n_failed == 0
    # each trial's P-V should track its own measured leak ratio
    for ratio, pv in zip(summary.leak_ratios, summary.pv_waves):
        oracle = 2 * np.arcsin(ratio) / (2 * np.pi)
        assert pv == pytest.approx(oracle, rel=0.05, abs=1e-4)
    assert summary.percentiles["p50"] > 0.005


def test_montecarlo_spatial_stays_flat(sh5):
    truth = make_bandlimited((128, 128), pv=2.0, cycles=(2, 2))
    summary = p.montecarlo_repeatability(
        truth,
        sh5,
        method="spatial",
        carrier=p.CarrierSpec(np.pi / 4, 0.0),
        error_kind="uniform",
        error_magnitude=0.3,
        trials=20,
        seed=7,
    )
    assert summary.n_failed == 0
    assert summary.percentiles["p99"] < 0.01


def test_montecarlo_deterministic(sh5):
    truth = make_bandlimited((64, 64), pv=1.0, cycles=(2, 1))
    kwargs = dict(error_kind="uniform", error_magnitude=0.2, trials=6, seed=99)
    first = p.montecarlo_repeatability(truth, sh5, **kwargs)
    second = p.montecarlo_repeatability(truth, sh5, **kwargs)
    assert first.pv_waves == second.pv_waves
    assert first.leak_ratios == second.leak_ratios
    assert first.to_dict() == second.to_dict()


def test_montecarlo_records_failures_without_aborting(sh5):
    # +-pi step errors occasionally push the leak past r = 1; those trials
    # flip the sign of the recovered phase and must be reported, not raised
    truth = p.synthesize_wavefront("defocus", 3.5, (64, 64))
    summary = p.montecarlo_repeatability(
        truth,
        sh5,
        error_kind="uniform",
        error_magnitude=np.pi,
        trials=30,
        seed=3,
    )
    assert 0 < summary.n_failed < summary.trials
    assert len(summary.pv_waves) + summary.n_failed == summary.trials
    for index, message in summary.failures:
        assert 0 <= index < summary.trials
        assert isinstance(message, str) and message


def test_montecarlo_validation(sh5, defocus_truth):
    with pytest.raises(ValueError):
        p.montecarlo_repeatability(defocus_truth, sh5, trials=1)
    with pytest.raises(ValueError):
        p.montecarlo_repeatability(defocus_truth, sh5, method="spatial")
    with pytest.raises(ValueError):
        p.montecarlo_repeatability(defocus_truth, sh5, method="fourier")
    with pytest.raises(ValueError):
        p.montecarlo_repeatability(defocus_truth, sh5, error_kind="fixed")


def test_montecarlo_summary_serializes(sh5):
    truth = make_bandlimited((64, 64), pv=1.0, cycles=(2, 1))
    summary = p.montecarlo_repeatability(
        truth, sh5, error_kind="gaussian", error_magnitude=0.1, trials=3, seed=5
    )
    d = summary.to_dict()
    assert d["method"] == "temporal"
    assert d["trials"] == 3
    assert d["error_kind"] == "gaussian"
    assert len(d["pv_waves"]) == 3
    assert set(d["percentiles"]) == {"p50", "p90", "p95", "p99"}
