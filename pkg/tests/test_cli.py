"""End-to-end command-line runs: exit codes, output files, replays."""

import contextlib
import io
import json

import numpy as np
import pytest

import psidemod as p
from psidemod import cli
from psidemod.formats import load_phase_map, save_stack

from conftest import FIXED_SCHEDULE


def run_cli(*args):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = cli.main([str(a) for a in args])
    return code, out.getvalue(), err.getvalue()


def dir_bytes(root):
    return {
        path.relative_to(root).as_posix(): path.read_bytes()
        for path in sorted(root.rglob("*"))
        if path.is_file()
    }


def read_json(path):
    return json.loads(path.read_text())


# --- simulate ---


def test_simulate_fig1_outputs(tmp_path):
    out = tmp_path / "fig1"
    code, _, err = run_cli("simulate", "--preset", "fig1", "--out", out)
    assert code == 0, err
    for name in (
        "stack.json",
        "stack_000.f32",
        "stack_004.f32",
        "truth.f32",
        "frame_000.pgm",
        "predicted_error.f32",
        "error_cut.csv",
        "manifest.json",
    ):
        assert (out / name).exists(), name
    manifest = read_json(out / "manifest.json")
    assert manifest["command"] == "simulate"
    params = manifest["parameters"]
    assert params["wavefront"] == "tilt"
    assert params["width"] == 512
    assert params["artifact_leak"] == 0.1
    assert "out" not in params
    error = load_phase_map(out / "predicted_error.json")
    assert abs(np.abs(error.values).max() - np.arcsin(0.1)) < 1e-3
    cut = (out / "error_cut.csv").read_text().splitlines()
    assert cut[0] == "x,truth,predicted_error"
    assert len(cut) == 513


def test_simulate_deterministic(tmp_path):
    args = (
        "simulate",
        "--width", 48,
        "--height", 32,
        "--amplitude", 1.0,
        "--noise-sigma", 1.5,
        "--seed", 11,
        "--errors", "uniform:0.2",
        "--error-seed", 4,
    )
    code1, _, _ = run_cli(*args, "--out", tmp_path / "a")
    code2, _, _ = run_cli(*args, "--out", tmp_path / "b")
    assert code1 == code2 == 0
    assert dir_bytes(tmp_path / "a") == dir_bytes(tmp_path / "b")


def test_simulate_carrier_echoed(tmp_path):
    out = tmp_path / "c"
    code, _, err = run_cli(
        "simulate", "--out", out,
        "--width", 64, "--height", 64, "--amplitude", 1.0,
        "--carrier", "pi/4",
    )
    assert code == 0, err
    params = read_json(out / "manifest.json")["parameters"]
    assert params["carrier"] == [np.pi / 4, 0.0]
    sidecar = read_json(out / "stack.json")
    assert sidecar["carrier"]["u0"] == pytest.approx(np.pi / 4)


# --- demod ---


def test_demod_clean_run_recovers_truth(tmp_path):
    out = tmp_path / "clean"
    code, _, err = run_cli(
        "demod", "--out", out,
        "--width", 64, "--height", 64, "--amplitude", 1.0,
        "--compare-truth",
    )
    assert code == 0, err
    report = read_json(out / "report.json")
    assert report["method"] == "temporal"
    assert report["pv_waves"] < 1e-9


def test_demod_fig8_shows_ripple(tmp_path):
    out = tmp_path / "fig8"
    code, _, err = run_cli("demod", "--preset", "fig8", "--out", out)
    assert code == 0, err
    pair = p.conjugate_amplitudes(
        p.sh5_spec(), p.ErrorSchedule(FIXED_SCHEDULE), 100.0
    )
    oracle = 2 * np.arcsin(pair.leak_ratio) / (2 * np.pi)
    report = read_json(out / "report.json")
    assert report["method"] == "temporal"
    assert report["pv_waves"] == pytest.approx(oracle, rel=0.02)
    for name in ("spectrum.f32", "spectrum.json", "spectrum.pgm", "residual.f32"):
        assert (out / name).exists(), name
    cut = (out / "line_cut.csv").read_text().splitlines()
    assert cut[0] == "x,phase,reference,error"


def test_demod_fig9_removes_ripple(tmp_path):
    out = tmp_path / "fig9"
    code, _, err = run_cli("demod", "--preset", "fig9", "--out", out)
    assert code == 0, err
    report = read_json(out / "report.json")
    assert report["method"] == "spatial"
    assert report["pv_waves"] < 0.005
    diag = read_json(out / "diagnostics.json")
    assert diag["carrier_source"] == "metadata"
    assert diag["filter_applied"] is True
    cut = (out / "line_cut.csv").read_text().splitlines()
    assert cut[0] == "x,filtered,unfiltered,reference,error"


def test_demod_spatial_needs_a_carrier(tmp_path):
    code, _, err = run_cli(
        "demod", "--out", tmp_path / "x",
        "--width", 64, "--height", 64, "--amplitude", 1.0,
        "--method", "spatial",
    )
    assert code == 2
    assert "carrier" in err


def test_demod_missing_stack_is_io_error(tmp_path):
    code, _, err = run_cli(
        "demod", "--out", tmp_path / "x", "--stack", tmp_path / "nope" / "stack.json"
    )
    assert code == 4
    assert "error:" in err


def test_demod_ambiguous_carrier_is_degenerate(tmp_path):
    # real-valued temporal field: I_n = a + b cos(u0 x) cos(n w0) demodulates
    # to 4 b cos(u0 x), whose mirrored lobes defeat carrier estimation
    x = np.arange(96, dtype=np.float64)
    frames = np.stack(
        [
            128.0 + 100.0 * np.cos(np.pi / 4 * x)[None, :] * np.cos(n * np.pi / 2)
            + np.zeros((64, 96))
            for n in range(5)
        ]
    )
    stack = p.InterferogramStack(frames, np.pi / 2)
    save_stack(tmp_path / "cam", stack, "cam")
    code, _, err = run_cli(
        "demod", "--out", tmp_path / "x",
        "--stack", tmp_path / "cam" / "cam.json",
        "--method", "spatial",
    )
    assert code == 3
    assert "ambiguous" in err


def test_demod_compare_truth_needs_synthesis(tmp_path, defocus_truth):
    stack = p.generate_stack(defocus_truth, 128.0, 100.0, np.pi / 2, 5)
    save_stack(tmp_path / "s", stack)
    code, _, err = run_cli(
        "demod", "--out", tmp_path / "x",
        "--stack", tmp_path / "s" / "stack.json",
        "--compare-truth",
    )
    assert code == 2
    assert "truth" in err


def test_demod_bad_parameters_exit_2(tmp_path):
    code, _, err = run_cli(
        "demod", "--out", tmp_path / "a",
        "--width", 32, "--height", 32, "--amplitude", 1.0,
        "--errors", "fixed:0,0.1",
    )
    assert code == 2 and "schedule" in err
    code, _, err = run_cli(
        "demod", "--out", tmp_path / "b",
        "--width", 32, "--height", 32, "--amplitude", 1.0,
        "--method", "spatial", "--carrier", "pi/4", "--border-crop", 4,
    )
    assert code == 2 and "cutoff" in err
    code, _, err = run_cli(
        "demod", "--out", tmp_path / "c", "--psa", "taps",
    )
    assert code == 2 and "taps" in err


# --- ftf ---


def test_ftf_fig2_preset(tmp_path):
    out = tmp_path / "fig2"
    code, _, err = run_cli("ftf", "--preset", "fig2", "--out", out)
    assert code == 0, err
    info = read_json(out / "ftf.json")
    assert info["n_steps"] == 5
    assert info["rejects_background"] is True
    assert info["passband_gain"] == pytest.approx(8.0, abs=1e-12)
    lines = (out / "ftf.csv").read_text().splitlines()
    assert lines[0] == "omega_over_pi,re,im,abs"
    assert len(lines) == 1025


def test_ftf_from_zero_placement(tmp_path):
    out = tmp_path / "zeros"
    code, _, err = run_cli(
        "ftf", "--out", out,
        "--psa", "zeros", "--zeros", "0,pi/2,pi/2,pi", "--psa-step", "pi/2",
        "--samples", 1024,
    )
    assert code == 0, err
    info = read_json(out / "ftf.json")
    assert info["n_steps"] == 5
    assert info["rejects_background"] is True
    response = {}
    for line in (out / "ftf.csv").read_text().splitlines()[1:]:
        cells = line.split(",")
        response[round(float(cells[0]), 6)] = float(cells[3])
    for omega_over_pi in (-1.0, 0.0, 0.5):
        assert response[omega_over_pi] < 1e-12
    assert response[-0.5] > 1.0


def test_ftf_zeros_on_passband_refused(tmp_path):
    code, _, err = run_cli(
        "ftf", "--out", tmp_path / "x",
        "--psa", "zeros", "--zeros=-pi/2", "--psa-step", "pi/2",
    )
    assert code == 2
    assert "passband" in err


# --- compare ---


def test_compare_identical_maps(tmp_path, bandlimited_truth):
    from psidemod.formats import save_phase_map

    save_phase_map(tmp_path / "m", bandlimited_truth)
    out = tmp_path / "cmp"
    code, _, err = run_cli(
        "compare", "--out", out,
        "--phase1", tmp_path / "m.json", "--phase2", tmp_path / "m.json",
        "--pgm",
    )
    assert code == 0, err
    report = read_json(out / "report.json")
    assert report["pv_waves"] == 0.0
    image = np.fromfile(out / "residual.pgm", dtype=np.uint8)
    assert (out / "residual.pgm").exists()
    assert image.size > 0


def test_compare_two_temporal_runs_shows_artifact(tmp_path):
    base = (
        "demod",
        "--width", 256, "--height", 256, "--amplitude", 3.0,
    )
    code1, _, err1 = run_cli(
        *base, "--errors", "fixed:0.3,-0.3,0.3,-0.3,0.3", "--out", tmp_path / "a"
    )
    code2, _, err2 = run_cli(*base, "--errors", "zero", "--out", tmp_path / "b")
    assert code1 == 0 and code2 == 0, err1 + err2
    out = tmp_path / "cmp"
    code, _, err = run_cli(
        "compare", "--out", out,
        "--phase1", tmp_path / "a" / "phase.json",
        "--phase2", tmp_path / "b" / "phase.json",
    )
    assert code == 0, err
    # alternating +-0.3 leaks r = 0.309, a ripple of ~0.1 waves P-V
    assert 0.07 < read_json(out / "report.json")["pv_waves"] < 0.13


def test_compare_two_spatial_runs_agree(tmp_path):
    base = (
        "demod",
        "--width", 128, "--height", 128, "--amplitude", 1.0,
        "--carrier", "pi/4", "--method", "spatial",
    )
    run_cli(*base, "--errors", "fixed:0,0.1,-0.15,0.2,-0.05", "--out", tmp_path / "a")
    run_cli(*base, "--errors", "fixed:0.2,-0.1,0.05,-0.2,0.1", "--out", tmp_path / "b")
    out = tmp_path / "cmp"
    code, _, err = run_cli(
        "compare", "--out", out,
        "--phase1", tmp_path / "a" / "phase.json",
        "--phase2", tmp_path / "b" / "phase.json",
        "--crop", 16,
    )
    assert code == 0, err
    assert read_json(out / "report.json")["pv_waves"] < 0.01


def test_compare_requires_both_maps(tmp_path):
    code, _, err = run_cli("compare", "--out", tmp_path / "x")
    assert code == 2
    assert "phase1" in err


# --- montecarlo ---


def test_montecarlo_cli(tmp_path):
    args = (
        "montecarlo",
        "--width", 64, "--height", 64, "--amplitude", 1.0,
        "--errors", "uniform:0.2", "--trials", 4, "--seed", 5,
    )
    code, _, err = run_cli(*args, "--out", tmp_path / "a")
    assert code == 0, err
    summary = read_json(tmp_path / "a" / "summary.json")
    assert summary["trials"] == 4
    assert len(summary["pv_waves"]) == 4
    assert summary["error_kind"] == "uniform"
    rows = (tmp_path / "a" / "trials.csv").read_text().splitlines()
    assert len(rows) == 5
    code, _, _ = run_cli(*args, "--out", tmp_path / "b")
    assert code == 0
    assert dir_bytes(tmp_path / "a") == dir_bytes(tmp_path / "b")


def test_montecarlo_rejects_fixed_and_bad_trials(tmp_path):
    code, _, err = run_cli(
        "montecarlo", "--out", tmp_path / "x", "--errors", "fixed:0,0,0,0,0"
    )
    assert code == 2 and "random" in err
    code, _, err = run_cli(
        "montecarlo", "--out", tmp_path / "y", "--trials", 1
    )
    assert code == 2 and "trials" in err


# --- replay ---


def test_replay_reproduces_bytes(tmp_path):
    out1 = tmp_path / "run"
    code, _, err = run_cli(
        "demod", "--out", out1,
        "--width", 128, "--height", 128, "--amplitude", 1.0,
        "--carrier", "pi/4", "--errors", "fixed:0,0.1,-0.15,0.2,-0.05",
        "--method", "spatial", "--cutoff", "pi/8",
        "--export-spectrum", "--line-cut-row", 64, "--compare-truth",
    )
    assert code == 0, err
    out2 = tmp_path / "again"
    code, _, err = run_cli("replay", out1 / "manifest.json", "--out", out2)
    assert code == 0, err
    first, second = dir_bytes(out1), dir_bytes(out2)
    assert set(first) == set(second)
    assert first == second


def test_replay_rejects_foreign_manifest(tmp_path):
    from psidemod.formats import dump_json

    dump_json(tmp_path / "m.json", {"command": "demod", "parameters": {"bogus": 1}})
    code, _, err = run_cli("replay", tmp_path / "m.json", "--out", tmp_path / "x")
    assert code == 2
    assert "bogus" in err


# --- configuration and parsing ---


def test_config_file_overrides(tmp_path):
    from psidemod.formats import dump_json

    dump_json(tmp_path / "cfg.json", {"width": 32, "height": 32, "amplitude": 1.0})
    out = tmp_path / "o"
    code, _, err = run_cli("simulate", "--out", out, "--config", tmp_path / "cfg.json")
    assert code == 0, err
    params = read_json(out / "manifest.json")["parameters"]
    assert params["width"] == 32
    # explicit flags still beat the config file
    out2 = tmp_path / "o2"
    code, _, _ = run_cli(
        "simulate", "--out", out2, "--config", tmp_path / "cfg.json", "--width", 40
    )
    assert code == 0
    assert read_json(out2 / "manifest.json")["parameters"]["width"] == 40


def test_config_unknown_key_refused(tmp_path):
    from psidemod.formats import dump_json

    dump_json(tmp_path / "cfg.json", {"widht": 32})
    code, _, err = run_cli("simulate", "--out", tmp_path / "x", "--config", tmp_path / "cfg.json")
    assert code == 2
    assert "widht" in err


def test_parse_angle():
    assert cli.parse_angle("pi/2") == pytest.approx(np.pi / 2)
    assert cli.parse_angle("-3pi/4") == pytest.approx(-3 * np.pi / 4)
    assert cli.parse_angle("0.5pi") == pytest.approx(np.pi / 2)
    assert cli.parse_angle("2*pi") == pytest.approx(2 * np.pi)
    assert cli.parse_angle("1.25") == 1.25
    assert cli.parse_angle(-2) == -2.0
    with pytest.raises(ValueError):
        cli.parse_angle("about pi")


def test_parse_carrier():
    assert cli.parse_carrier("none") is None
    assert cli.parse_carrier(None) is None
    assert cli.parse_carrier("pi/4") == [pytest.approx(np.pi / 4), 0.0]
    assert cli.parse_carrier("pi/4,pi/8") == [
        pytest.approx(np.pi / 4),
        pytest.approx(np.pi / 8),
    ]
    with pytest.raises(ValueError):
        cli.parse_carrier("1,2,3")
    assert cli.parse_demod_carrier("auto") == "auto"
    assert cli.parse_demod_carrier("estimate") == "estimate"
    assert cli.parse_demod_carrier("pi/4") == [pytest.approx(np.pi / 4), 0.0]


def test_help_and_usage_exit_codes():
    code, out, _ = run_cli("--help")
    assert code == 0
    assert "simulate" in out
    code, _, err = run_cli("simulate")  # missing --out
    assert code == 2
    code, _, _ = run_cli()
    assert code == 2
