"""Command-line front end.

    eitcorr SUBCOMMAND [--config PATH] [--seed U64] [--out DIR] [--threads N]
                       [--input CSV] [--timestamp ISO8601]

Subcommands: ``eit-sweep``, ``waveforms``, ``correlate-sweep``, ``analyze``,
``phase-lock``.  Exit status is 0 on success, 1 for configuration or usage
errors and 2 for numerical failures.  Outputs are staged in a temporary
directory inside ``--out`` and moved into place only once every file has
been written; on failure nothing is left behind.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import io
import json
import math
import os
import shutil
import sys
import tempfile
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .config import RunConfig, emit_config, load_config
from .errors import ConfigError, NumericalError
from .phase_lock import integrate_theta, lock_diagnostics
from .scenarios import correlation_vs_field, eit_sweep, synthesize_waveforms
from .signal_analysis import IntensitySeries, cross_correlation, g2_zero, peak_stats

__all__ = ["RunManifest", "run", "main", "read_csv", "SUBCOMMANDS"]

SUBCOMMANDS = ("eit-sweep", "waveforms", "correlate-sweep", "analyze", "phase-lock")


@dataclass(frozen=True)
class RunManifest:
    config_path: Optional[str]
    subcommand: str
    seed: int
    output_dir: str
    tool_version: str
    timestamp: str

    def comment_block(self) -> str:
        return "\n".join(f"# {k}: {v}" for k, v in asdict(self).items())


def _csv_text(manifest: RunManifest, columns: Sequence[str], *arrays) -> str:
    buf = io.StringIO()
    data = np.column_stack([np.asarray(a, dtype=np.float64) for a in arrays])
    np.savetxt(buf, data, fmt="%.17g", delimiter=",",
               header=manifest.comment_block() + "\n" + ",".join(columns), comments="")
    return buf.getvalue()


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Column names and data of a CSV written by this tool (or any plain CSV).

    Lines starting with ``#`` are skipped; the first remaining line is the
    header.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValueError(f"{path}: no header line")
    header = [c.strip() for c in lines[0].split(",")]
    body = "".join(lines[1:])
    data = np.loadtxt(io.StringIO(body), delimiter=",", ndmin=2) if body else np.empty((0, len(header)))
    if data.shape[1] != len(header):
        raise ValueError(f"{path}: {data.shape[1]} columns but {len(header)} header names")
    return header, data


def _json_safe(v):
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _summary_text(manifest: RunManifest, cfg: RunConfig, stats: dict) -> str:
    doc = {"manifest": asdict(manifest), "results": stats, "config_toml": emit_config(cfg)}
    return json.dumps(_json_safe(doc), indent=2, sort_keys=True) + "\n"


def _sign_changes(b, g):
    neg = b < 0
    pos = b > 0
    left = bool(np.any(g[neg] < 0) and np.any(g[neg] > 0)) if neg.any() else False
    right = bool(np.any(g[pos] < 0) and np.any(g[pos] > 0)) if pos.any() else False
    return left, right


def _curve_stats(curve) -> dict:
    try:
        ps = peak_stats(curve)
    except NumericalError as exc:
        return {"peak_stats_error": str(exc)}
    return {"peak_value": ps.peak_value, "peak_lag_s": ps.peak_lag, "peak_fwhm_s": ps.fwhm,
            "background": ps.background}


def _do_eit_sweep(cfg: RunConfig, manifest, opts):
    res = eit_sweep(cfg.experiment)
    i = int(np.argmax(res.transmission1))
    stats = {
        "eit_fwhm_gauss": res.widths.get("eit_fwhm"),
        "eit_fwhm_beam2_gauss": res.widths.get("eit_fwhm_beam2"),
        "peak_transmission1": float(res.transmission1[i]),
        "peak_b_gauss": float(res.b_values[i]),
        "power_mw": cfg.experiment.power_label_mw,
    }
    files = {"eit_sweep.csv": _csv_text(manifest, ("b_gauss", "transmission1", "transmission2"),
                                         res.b_values, res.transmission1, res.transmission2)}
    return files, stats


def _correlation_outputs(manifest, s1, s2, max_lag):
    curve = cross_correlation(s1, s2, max_lag)
    stats = {"g2_zero": g2_zero(s1, s2)}
    stats.update(_curve_stats(curve))
    return _csv_text(manifest, ("tau_s", "g2"), curve.lags, curve.values), stats


def _do_waveforms(cfg: RunConfig, manifest, opts):
    exp = cfg.experiment
    s1, s2 = synthesize_waveforms(exp, exp.waveform_b)
    t = exp.sample_dt * np.arange(s1.fluctuations.shape[0])
    g2_csv, stats = _correlation_outputs(manifest, s1, s2, exp.max_lag)
    stats.update({"b_gauss": exp.waveform_b, "mean_intensity1": s1.mean,
                  "mean_intensity2": s2.mean})
    files = {
        "waveforms.csv": _csv_text(manifest, ("t_s", "dI1", "dI2"), t, s1.fluctuations,
                                   s2.fluctuations),
        "g2_curve.csv": g2_csv,
    }
    return files, stats


def _do_correlate_sweep(cfg: RunConfig, manifest, opts):
    exp = cfg.experiment
    res = correlation_vs_field(exp, threads=opts.threads)
    b, g = res.b_values, res.g2_zero
    left, right = _sign_changes(b, g)
    zero = np.flatnonzero(b == 0)
    imin = int(np.argmin(g))
    stats = {
        "g2_zero_at_b0": float(g[zero[0]]) if zero.size else None,
        "g2_zero_min": float(g[imin]),
        "b_at_min_gauss": float(b[imin]),
        "sign_change_negative_b": left,
        "sign_change_positive_b": right,
        "sign_flip": left and right,
        "eit_fwhm_gauss": res.widths.get("eit_fwhm"),
        "corr_fwhm_gauss": res.widths.get("corr_fwhm"),
        "eit_to_corr_ratio": res.widths.get("eit_to_corr_ratio"),
        "power_mw": exp.power_label_mw,
    }
    files = {
        "corr_sweep.csv": _csv_text(manifest, ("b_gauss", "g2_zero"), b, g),
        "eit_sweep.csv": _csv_text(manifest, ("b_gauss", "transmission1", "transmission2"),
                                   b, res.transmission1, res.transmission2),
    }
    return files, stats


def analysis_series(header, data, default_dt):
    """Two IntensitySeries from CSV columns.

    With a leading ``t_s`` column the sample interval comes from it; otherwise
    the first two columns are the intensities sampled at ``default_dt``.
    Columns named ``dI...`` are already fluctuations and are used verbatim,
    so re-analysing a ``waveforms.csv`` reproduces its ``g2_curve.csv`` bit for
    bit.
    """
    if header and header[0] == "t_s":
        if data.shape[1] < 3:
            raise ValueError("need t_s plus two intensity columns")
        t = data[:, 0]
        if t.shape[0] < 2:
            raise ValueError("need at least two samples")
        dt = float(t[1] - t[0])
        if not dt > 0 or not np.allclose(np.diff(t), dt, rtol=1e-9, atol=0):
            raise ValueError("t_s must be uniformly increasing")
        x, y = data[:, 1], data[:, 2]
        names = header[1:3]
    else:
        if data.shape[1] < 2:
            raise ValueError("need two intensity columns")
        dt = default_dt
        x, y = data[:, 0], data[:, 1]
        names = header[0:2]
    out = []
    for name, col in zip(names, (x, y)):
        if name.startswith("dI"):
            out.append(IntensitySeries(dt, 0.0, np.ascontiguousarray(col)))
        else:
            out.append(IntensitySeries.from_intensity(col, dt))
    return out[0], out[1]


def _do_analyze(cfg: RunConfig, manifest, opts):
    if not opts.input:
        raise ConfigError([("--input", "analyze needs an input CSV")])
    try:
        header, data = read_csv(opts.input)
    except OSError as exc:
        raise ConfigError([("--input", str(exc))]) from exc
    s1, s2 = analysis_series(header, data, cfg.experiment.sample_dt)
    g2_csv, stats = _correlation_outputs(manifest, s1, s2, cfg.experiment.max_lag)
    stats.update({"input": opts.input, "n_samples": int(data.shape[0]), "dt_s": s1.dt})
    return {"g2_curve.csv": g2_csv}, stats


def _do_phase_lock(cfg: RunConfig, manifest, opts):
    p = cfg.phase_lock
    traj = integrate_theta(p)
    d = lock_diagnostics(traj, p)
    stats = {
        "locked": d.locked,
        "mean_drift_rate": d.mean_drift_rate,
        "circular_spread": d.circular_spread,
        "deterministic_threshold_locked": abs(p.a) < p.b,
        "running_velocity_prediction": math.copysign(math.sqrt(p.a * p.a - p.b * p.b), p.a)
        if abs(p.a) > p.b else 0.0,
    }
    files = {"theta.csv": _csv_text(manifest, ("t_s", "theta_rad"), traj.t, traj.theta)}
    return files, stats


_HANDLERS = {
    "eit-sweep": _do_eit_sweep,
    "waveforms": _do_waveforms,
    "correlate-sweep": _do_correlate_sweep,
    "analyze": _do_analyze,
    "phase-lock": _do_phase_lock,
}


def _write_atomically(out_dir: str, files: dict[str, str]) -> None:
    os.makedirs(out_dir, exist_ok=True)
    staging = tempfile.mkdtemp(prefix=".staging-", dir=out_dir)
    moved = []
    try:
        for name, text in files.items():
            with open(os.path.join(staging, name), "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        for name in files:
            dest = os.path.join(out_dir, name)
            os.replace(os.path.join(staging, name), dest)
            moved.append(dest)
    except BaseException:
        for dest in moved:
            try:
                os.remove(dest)
            except OSError:
                pass
        raise
    finally:
        shutil.rmtree(staging, ignore_errors=True)


class _Options:
    def __init__(self, input=None, threads=1):
        self.input = input
        self.threads = threads


def run(subcommand: str, config: RunConfig, seed: Optional[int], output_dir: str, *,
        config_path: Optional[str] = None, threads: int = 1, input_path: Optional[str] = None,
        timestamp: Optional[str] = None, stderr=None) -> int:
    """Run one subcommand and write its outputs; returns the exit status."""
    stderr = sys.stderr if stderr is None else stderr
    if subcommand not in _HANDLERS:
        print(f"error: unknown subcommand {subcommand!r}", file=stderr)
        return 1
    try:
        cfg = config.with_seed(seed)
    except ValueError as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    used_seed = cfg.phase_lock.seed if subcommand == "phase-lock" else cfg.experiment.noise.seed
    if timestamp is None:
        timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    manifest = RunManifest(config_path, subcommand, int(used_seed), str(output_dir),
                           __version__, timestamp)
    try:
        files, stats = _HANDLERS[subcommand](cfg, manifest, _Options(input_path, threads))
        files["summary.json"] = _summary_text(manifest, cfg, stats)
        _write_atomically(output_dir, files)
    except ConfigError as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="eitcorr", description="EIT intensity-correlation simulator.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", metavar="PATH", help="TOML configuration (defaults if omitted)")
    p.add_argument("--seed", type=_u64, metavar="U64", help="override every noise seed")
    p.add_argument("--out", metavar="DIR", default=".", help="output directory (default: .)")
    p.add_argument("--threads", type=_positive_int, default=1, metavar="N",
                   help="worker threads for sweeps; results do not depend on N")
    p.add_argument("--input", metavar="CSV", help="waveform CSV for 'analyze'")
    p.add_argument("--timestamp", metavar="ISO8601",
                   help="timestamp recorded in the manifest (default: now, UTC)")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    return run(args.subcommand, cfg, args.seed, args.out, config_path=args.config,
               threads=args.threads, input_path=args.input, timestamp=args.timestamp)


if __name__ == "__main__":
    sys.exit(main())
