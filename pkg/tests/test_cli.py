import json
import os
import subprocess
import sys

import numpy as np
import pytest

from eitcorr.cli import SUBCOMMANDS, main, read_csv
from eitcorr.scenarios import default_config, synthesize_waveforms
from eitcorr.signal_analysis import IntensitySeries, cross_correlation

SMALL = ("[experiment]\nrecord_length_us = 0.3\nb_max_gauss = 1.0\nn_b = 7\nmax_lag_us = 0.02\n"
         "[phase_lock]\nn_steps = 5000\n")
STAMP = ["--timestamp", "2026-01-01T00:00:00+00:00"]


@pytest.fixture
def small_toml(tmp_path):
    p = tmp_path / "small.toml"
    p.write_text(SMALL)
    return str(p)


def _summary(d):
    with open(os.path.join(d, "summary.json"), encoding="utf-8") as fh:
        return json.load(fh)


def test_eit_sweep_on_defaults(tmp_path):
    out = tmp_path / "o"
    assert main(["eit-sweep", "--out", str(out)] + STAMP) == 0
    header, data = read_csv(out / "eit_sweep.csv")
    assert header == ["b_gauss", "transmission1", "transmission2"]
    assert data[np.argmax(data[:, 1]), 0] == 0.0
    s = _summary(out)
    assert s["results"]["peak_b_gauss"] == 0.0
    assert s["manifest"]["subcommand"] == "eit-sweep"
    assert s["manifest"]["config_path"] is None
    assert data.shape == (41, 3)
    assert s["manifest"]["timestamp"] == STAMP[1]


def test_csv_manifest_and_precision(tmp_path, small_toml):
    out = tmp_path / "o"
    assert main(["waveforms", "--config", small_toml, "--out", str(out), "--seed", "9"] + STAMP) == 0
    lines = (out / "waveforms.csv").read_text().splitlines()
    comments = [ln for ln in lines if ln.startswith("#")]
    assert {"# subcommand: waveforms", "# seed: 9"} <= set(comments)
    assert lines[len(comments)] == "t_s,dI1,dI2"
    _, data = read_csv(out / "waveforms.csv")
    s1, s2 = synthesize_waveforms(default_config(record_length=0.3e-6), 0.0, seed=9)
    assert np.array_equal(data[:, 1], s1.fluctuations)  # 17 digits survive the text round trip
    assert np.array_equal(data[:, 2], s2.fluctuations)


def test_reanalysis_reproduces_g2_curve(tmp_path, small_toml):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["waveforms", "--config", small_toml, "--out", str(a)] + STAMP) == 0
    assert main(["analyze", "--config", small_toml, "--input", str(a / "waveforms.csv"),
                 "--out", str(b)] + STAMP) == 0
    _, ga = read_csv(a / "g2_curve.csv")
    _, gb = read_csv(b / "g2_curve.csv")
    assert np.array_equal(ga, gb)


def test_analyze_external_csv_matches_library(tmp_path):
    rng = np.random.default_rng(0)
    x = 1.0 + rng.normal(size=2000)
    y = 0.5 * x + rng.normal(size=2000)
    src = tmp_path / "ext.csv"
    np.savetxt(src, np.column_stack([x, y]), fmt="%.17g", delimiter=",", header="I1,I2", comments="")
    cfg = tmp_path / "c.toml"
    cfg.write_text("[experiment]\nmax_lag_us = 0.01\n")
    out = tmp_path / "o"
    assert main(["analyze", "--config", str(cfg), "--input", str(src), "--out", str(out)] + STAMP) == 0
    dt = default_config().sample_dt
    ref = cross_correlation(IntensitySeries.from_intensity(x, dt),
                            IntensitySeries.from_intensity(y, dt), 0.01e-6)
    _, g = read_csv(out / "g2_curve.csv")
    assert np.array_equal(g[:, 1], ref.values)
    assert np.array_equal(g[:, 0], ref.lags)


def test_phase_lock_outputs(tmp_path):
    cfg = tmp_path / "lock.toml"
    cfg.write_text("[phase_lock]\na = 0.5\nb = 1.0\ndiffusion = 0.01\nn_steps = 50000\n")
    out = tmp_path / "o"
    assert main(["phase-lock", "--config", str(cfg), "--out", str(out), "--seed", "4"] + STAMP) == 0
    header, data = read_csv(out / "theta.csv")
    assert header == ["t_s", "theta_rad"] and data.shape == (50001, 2)
    res = _summary(out)["results"]
    assert res["locked"] and res["deterministic_threshold_locked"]


def test_bad_config_exit_1_without_outputs(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[atom]\ngamma_cb_mhz = -1.0\n[noise]\nlinewidth_mhz = -1.0\n")
    out = tmp_path / "never"
    assert main(["eit-sweep", "--config", str(bad), "--out", str(out)]) == 1
    err = capsys.readouterr().err
    assert "atom" in err and "noise" in err
    assert not out.exists()


def test_unknown_subcommand_and_bad_seed_exit_1():
    with pytest.raises(SystemExit) as exc:
        main(["sweep-everything"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["eit-sweep", "--seed", "-5"])
    assert exc.value.code == 1


def test_missing_input_exit_1(tmp_path):
    assert main(["analyze", "--out", str(tmp_path / "o")]) == 1
    assert main(["analyze", "--input", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "o")]) == 1
    assert not (tmp_path / "o" / "g2_curve.csv").exists()


def test_numerical_failure_exit_2_without_outputs(tmp_path):
    src = tmp_path / "flat.csv"
    src.write_text("I1,I2\n" + "\n".join("1.0,%r" % float(k) for k in range(200)) + "\n")
    cfg = tmp_path / "c.toml"
    cfg.write_text("[experiment]\nmax_lag_us = 0.002\n")
    out = tmp_path / "o"
    assert main(["analyze", "--config", str(cfg), "--input", str(src), "--out", str(out)] + STAMP) == 2
    assert not out.exists() or os.listdir(out) == []


def test_non_uniform_time_column_rejected(tmp_path):
    src = tmp_path / "t.csv"
    src.write_text("t_s,I1,I2\n0,1,2\n1,2,1\n3,1,2\n4,2,2\n")
    assert main(["analyze", "--input", str(src), "--out", str(tmp_path / "o")]) == 1


def test_every_subcommand_is_deterministic(tmp_path, small_toml):
    runs = []
    for rep in range(2):
        d = tmp_path / f"r{rep}"
        wf = None
        for sub in SUBCOMMANDS:
            extra = ["--input", str(wf)] if sub == "analyze" else []
            assert main([sub, "--config", small_toml, "--out", str(d / sub)] + extra + STAMP) == 0
            if sub == "waveforms":
                wf = d / sub / "waveforms.csv"
        runs.append(d)
    for sub in SUBCOMMANDS:
        for name in sorted(os.listdir(runs[0] / sub)):
            a = (runs[0] / sub / name).read_text().replace(str(runs[0]), "<out>")
            b = (runs[1] / sub / name).read_text().replace(str(runs[1]), "<out>")
            assert a == b, (sub, name)


def test_module_entry_point_and_console_script(tmp_path, small_toml):
    for cmd in ([sys.executable, "-m", "eitcorr"], ["eitcorr"]):
        out = tmp_path / cmd[-1].replace("-", "")
        r = subprocess.run(cmd + ["eit-sweep", "--config", small_toml, "--out", str(out)],
                           capture_output=True, text=True)
        assert r.returncode == 0, r.stderr
        assert (out / "eit_sweep.csv").exists()
    v = subprocess.run([sys.executable, "-m", "eitcorr", "--version"], capture_output=True, text=True)
    assert v.returncode == 0 and v.stdout.startswith("eitcorr ")


@pytest.mark.slow
def test_default_correlate_sweep_matches_library(tmp_path, default_sweep):
    out = tmp_path / "o"
    assert main(["correlate-sweep", "--out", str(out), "--threads", "4"] + STAMP) == 0
    res, _ = default_sweep
    _, data = read_csv(out / "corr_sweep.csv")
    assert np.array_equal(data[:, 1], res.g2_zero)
    s = _summary(out)["results"]
    assert s["sign_flip"] and s["g2_zero_at_b0"] > 0.8 and s["g2_zero_min"] < -0.8
    assert s["corr_fwhm_gauss"] < s["eit_fwhm_gauss"]
