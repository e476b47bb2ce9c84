"""Configuration files, CSV persistence, run manifests, and figure data.

Config file schema (JSON object; unknown keys are rejected):

    {
      "lambda": 0.0,            // required, inelasticity in [0, 1]
      "delta_amp": 1.0,         // required, kick amplitude >= 0
      "t_end": 60.0,            // required, horizon > 0
      "init": {                 // required
        "type": "uniform",
        "ranges": [[0.8, 1.0, 0.5], [-1.0, -0.8, 0.5]]
      },                        //   or {"type": "equilibrium", "chi": 2.0, "mbar": 0.0}
      "a_rate": 1.0,            // optional (exchange rate; 1 everywhere)
      "b_rate": 0.0,            // optional (party drift rate)
      "m_party": 0.0,           // optional, |.| < 1
      "n_particles": 100000,    // optional
      "dt": null,               // optional; default keeps a_rate*dt <= 0.1
      "seed": 20240801,         // optional 64-bit integer
      "output_every": null,     // optional steps between records
      "collision_kernel": "moller"   // or "moller_over_energies"
    }

run_scenario writes, per run directory:

    timeseries.csv            t,n,mbar,chi,theta,Pi,q1,Pi11,phi,c_param
    histogram_t*.csv          m,f,f_mj     (snapshots + final time)
    histogram_converged.csv   m,f,f_mj     (tail-window average)
    manifest.json             resolved config, seed, preset, versions,
                              wall times, outputs, telemetry, converged stats

Numeric CSV fields use repr-precision so a re-run reproduces the files
byte-for-byte (single-threaded mode).
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .diagnostics import FlowState, HistogramPair
from .dsmc import EquilibriumInitial, SimConfig, UniformRanges, is_stationary, run, tail_mean
from .presets import PRESET_NAMES, RunGroup, TabulationJob, build_preset
from .theory import chi_limit, CoolingCurve, find_psi1_peak, tabulate_psi1, tabulate_psi2

__all__ = [
    "load_config",
    "config_to_dict",
    "config_from_dict",
    "run_scenario",
    "run_preset",
    "emit_plotdata",
    "FIGURES",
]

_REQUIRED = ("lambda", "delta_amp", "t_end", "init")
_OPTIONAL = {
    "a_rate": 1.0,
    "b_rate": 0.0,
    "m_party": 0.0,
    "n_particles": 100_000,
    "dt": None,
    "seed": 20240801,
    "output_every": None,
    "collision_kernel": "moller",
}


class ConfigError(ValueError):
    """Invalid or incomplete run configuration file."""


def _parse_init(node) -> UniformRanges | EquilibriumInitial:
    if not isinstance(node, dict) or "type" not in node:
        raise ConfigError('init must be an object with a "type" field')
    kind = node["type"]
    if kind == "uniform":
        extra = set(node) - {"type", "ranges"}
        if extra:
            raise ConfigError(f"unknown init keys: {sorted(extra)}")
        ranges = node.get("ranges")
        if not ranges:
            raise ConfigError("uniform init requires a non-empty ranges list")
        return UniformRanges(tuple(tuple(float(x) for x in r) for r in ranges))
    if kind == "equilibrium":
        extra = set(node) - {"type", "chi", "mbar"}
        if extra:
            raise ConfigError(f"unknown init keys: {sorted(extra)}")
        if "chi" not in node:
            raise ConfigError("equilibrium init requires chi")
        return EquilibriumInitial(chi=float(node["chi"]), mbar=float(node.get("mbar", 0.0)))
    raise ConfigError(f'init type must be "uniform" or "equilibrium", got {kind!r}')


def config_from_dict(payload: dict) -> SimConfig:
    if not isinstance(payload, dict):
        raise ConfigError("configuration must be a JSON object")
    missing = [k for k in _REQUIRED if k not in payload]
    if missing:
        raise ConfigError(f"missing required field(s): {missing}; required: {list(_REQUIRED)}")
    unknown = set(payload) - set(_REQUIRED) - set(_OPTIONAL)
    if unknown:
        raise ConfigError(f"unknown field(s): {sorted(unknown)}")
    merged = dict(_OPTIONAL)
    merged.update(payload)
    try:
        return SimConfig(
            lambda_=float(merged["lambda"]),
            delta_amp=float(merged["delta_amp"]),
            t_end=float(merged["t_end"]),
            init=_parse_init(merged["init"]),
            a_rate=float(merged["a_rate"]),
            b_rate=float(merged["b_rate"]),
            m_party=float(merged["m_party"]),
            n_particles=int(merged["n_particles"]),
            dt=None if merged["dt"] is None else float(merged["dt"]),
            seed=int(merged["seed"]),
            output_every=None if merged["output_every"] is None else int(merged["output_every"]),
            collision_kernel=str(merged["collision_kernel"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> SimConfig:
    """Read and fully validate a JSON run configuration."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return config_from_dict(payload)


def config_to_dict(config: SimConfig) -> dict:
    if isinstance(config.init, UniformRanges):
        init = {"type": "uniform", "ranges": [list(r) for r in config.init.ranges]}
    else:
        init = {"type": "equilibrium", "chi": config.init.chi, "mbar": config.init.mbar}
    return {
        "lambda": config.lambda_,
        "delta_amp": config.delta_amp,
        "t_end": config.t_end,
        "init": init,
        "a_rate": config.a_rate,
        "b_rate": config.b_rate,
        "m_party": config.m_party,
        "n_particles": config.n_particles,
        "dt": config.dt,
        "seed": config.seed,
        "output_every": config.output_every,
        "collision_kernel": config.collision_kernel,
    }


# ---------------------------------------------------------------------------
# CSV writers (repr precision -> byte-stable reruns)
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x))


def write_timeseries(path, records: list[FlowState]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(FlowState.CSV_COLUMNS) + "\n")
        for r in records:
            fh.write(",".join(_fmt(v) for v in r.csv_row()) + "\n")


def write_histogram(path, hist: HistogramPair) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("m,f,f_mj\n")
        for m, f, fmj in zip(hist.centers, hist.f, hist.f_mj):
            fh.write(f"{_fmt(m)},{_fmt(f)},{_fmt(fmj)}\n")


def read_timeseries(path) -> np.ndarray:
    return np.genfromtxt(path, delimiter=",", names=True)


# ---------------------------------------------------------------------------
# scenarios and manifests
# ---------------------------------------------------------------------------

def _snapshot_times(config: SimConfig, count: int = 4) -> list[float]:
    return [round(config.t_end * k / count, 10) for k in range(1, count)]


def run_scenario(config_or_preset, out_dir, preset: str | None = None,
                 overrides: dict | None = None, histogram_bins: int = 80) -> dict:
    """Run one scenario and persist its outputs; returns the manifest dict.

    `config_or_preset` is a SimConfig or a plain-preset name; overrides
    apply when a preset name is given.
    """
    if isinstance(config_or_preset, SimConfig):
        config = config_or_preset
    else:
        preset = config_or_preset
        built = build_preset(preset, **(overrides or {}))
        if not isinstance(built, SimConfig):
            raise ValueError(f"preset {preset!r} is a group/tabulation; use run_preset")
        config = built

    os.makedirs(out_dir, exist_ok=True)
    started = time.time()
    failure = None
    outputs = []
    try:
        summary = run(config, histogram_bins=histogram_bins,
                      snapshot_times=_snapshot_times(config))
    except Exception as exc:  # persist a failure record before re-raising
        manifest = {
            "artifact": "opiniongas",
            "version": __version__,
            "preset": preset,
            "config": config_to_dict(config),
            "seed": config.seed,
            "started_unix": started,
            "finished_unix": time.time(),
            "outputs": [],
            "failure": f"{type(exc).__name__}: {exc}",
        }
        with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
        raise

    ts_path = os.path.join(out_dir, "timeseries.csv")
    write_timeseries(ts_path, summary.flow_states)
    outputs.append("timeseries.csv")

    for t_snap, hist in sorted(summary.snapshots.items()):
        name = f"histogram_t{t_snap:09.3f}.csv"
        write_histogram(os.path.join(out_dir, name), hist)
        outputs.append(name)
    final_name = f"histogram_t{config.t_end:09.3f}.csv"
    write_histogram(os.path.join(out_dir, final_name), summary.final_histogram)
    outputs.append(final_name)
    if summary.tail_histogram is not None:
        write_histogram(os.path.join(out_dir, "histogram_converged.csv"), summary.tail_histogram)
        outputs.append("histogram_converged.csv")

    tail = tail_mean(summary.flow_states, 0.2, config.t_end)
    manifest = {
        "artifact": "opiniongas",
        "version": __version__,
        "preset": preset,
        "config": config_to_dict(config),
        "seed": config.seed,
        "started_unix": started,
        "finished_unix": time.time(),
        "outputs": outputs,
        "telemetry": {
            "collisions": summary.collision_count,
            "candidates": summary.candidate_count,
            "acceptance": (summary.collision_count / summary.candidate_count
                           if summary.candidate_count else 0.0),
        },
        "converged": {
            "window_start": summary.tail_window_start,
            "chi": tail.chi,
            "theta": tail.theta,
            "mbar": tail.mbar,
            "phi": tail.phi,
            "n": tail.n,
            "stationary": is_stationary(summary.flow_states),
        },
        "failure": failure,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest


def _run_tabulation(job: TabulationJob, out_dir, preset: str) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    outputs = []
    if job.kind == "psi1":
        rows = tabulate_psi1(job.chis, job.seconds)
        chi_pk, val_pk = find_psi1_peak()
        rows = np.vstack([rows, [chi_pk, 0.0, val_pk]])
        path = os.path.join(out_dir, "psi1_grid.csv")
        header = "chi,c,psi1"
    else:
        rows = tabulate_psi2(job.chis, job.seconds)
        path = os.path.join(out_dir, "psi2_grid.csv")
        header = "chi,p_drive,psi2"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    outputs.append(os.path.basename(path))
    manifest = {
        "artifact": "opiniongas",
        "version": __version__,
        "preset": preset,
        "tabulation": asdict(job),
        "outputs": outputs,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest


def run_preset(name: str, out_dir, overrides: dict | None = None,
               mode: str = "deterministic") -> dict:
    """Run any preset (plain, tabulation, or group) into out_dir."""
    if mode not in ("deterministic", "parallel"):
        raise ValueError('mode must be "deterministic" or "parallel"')
    built = build_preset(name, **(overrides or {}))
    if isinstance(built, SimConfig):
        return run_scenario(built, out_dir, preset=name)
    if isinstance(built, TabulationJob):
        return _run_tabulation(built, out_dir, name)

    group: RunGroup = built
    members = list(group.members)
    if mode == "parallel" and len(members) > 1:
        # each member run stays internally deterministic (own seed), so the
        # results are identical to sequential execution
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=min(len(members), os.cpu_count() or 1)) as pool:
            futures = [
                pool.submit(run_scenario, cfg, os.path.join(out_dir, tag),
                            tag if tag in PRESET_NAMES else name)
                for tag, cfg in members
            ]
            sub = [f.result() for f in futures]
    else:
        sub = [run_scenario(cfg, os.path.join(out_dir, tag),
                            preset=tag if tag in PRESET_NAMES else name)
               for tag, cfg in members]

    manifest = {
        "artifact": "opiniongas",
        "version": __version__,
        "preset": name,
        "members": {tag: os.path.join(tag, "manifest.json") for tag, _ in members},
        "runs": sub,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
    for fig in group.figures:
        try:
            emit_plotdata(out_dir, fig, out_dir)
        except FileNotFoundError:
            pass
    return manifest


# ---------------------------------------------------------------------------
# figure data
# ---------------------------------------------------------------------------

def _find_runs(runs_dir) -> list[dict]:
    found = []
    for root, _dirs, files in os.walk(runs_dir):
        if "manifest.json" in files:
            with open(os.path.join(root, "manifest.json"), "r", encoding="utf-8") as fh:
                man = json.load(fh)
            if "config" in man:
                man["_dir"] = root
                found.append(man)
    return found


def _match(runs, preset=None, **config_filters):
    out = []
    for man in runs:
        if preset is not None and man.get("preset") != preset:
            continue
        cfg = man["config"]
        if all(np.isclose(cfg.get(k, np.nan), v) for k, v in config_filters.items()):
            out.append(man)
    return out


def _require(runs, what, preset, **filters):
    got = _match(runs, preset=preset, **filters)
    if not got:
        detail = ", ".join(f"{k}={v}" for k, v in filters.items())
        raise FileNotFoundError(
            f"figure {what} needs a completed run of preset {preset!r} ({detail}); none found"
        )
    return got[0]


def _write_columns(path, header: list[str], columns: list[np.ndarray]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _series(man, *names):
    data = read_timeseries(os.path.join(man["_dir"], "timeseries.csv"))
    return [np.atleast_1d(data[n]) for n in names]


def _fig_chi_overlay(runs, out_dir, which):
    """chi(t) of one run with the two limiting cooling laws overlaid."""
    if which == "fig7-left":
        man = _require(runs, which, "a1")
        rate, small_regime, large_regime = man["config"]["a_rate"], "small_chi_collision", "large_chi_collision"
        anchor_late = 15.0
    else:
        man = _require(runs, which, "a3")
        rate, small_regime, large_regime = man["config"]["b_rate"], "small_chi_vlasov", "large_chi_vlasov"
        anchor_late = 40.0
    t, chi = _series(man, "t", "chi")
    if t[-1] < anchor_late:
        anchor_late = 0.75 * t[-1]
    i0 = int(np.searchsorted(t, anchor_late))
    i0 = min(i0, t.size - 1)
    small = chi_limit(CoolingCurve(chi[0], rate, small_regime), t)
    large = np.full_like(t, np.nan)
    large[i0:] = chi_limit(CoolingCurve(chi[i0], rate, large_regime), t[i0:] - t[i0])
    path = os.path.join(out_dir, which.replace("-", "_") + ".csv")
    _write_columns(path, ["t", "chi_dsmc", "chi_law_small", "chi_law_large"],
                   [t, chi, small, large])
    return [path]


def _fig_series_per_run(runs, out_dir, which, preset_list, column):
    paths = []
    for preset in preset_list:
        man = _require(runs, which, preset)
        t, y = _series(man, "t", column)
        path = os.path.join(out_dir, f"{which.replace('-', '_')}_{preset}.csv")
        _write_columns(path, ["t", column], [t, y])
        paths.append(path)
    return paths


def _fig_family(runs, out_dir, which, preset, key, values, columns):
    paths = []
    for column in columns:
        cols, header = [], ["t"]
        tref = None
        for v in values:
            man = _require(runs, which, preset, **{key: v})
            t, y = _series(man, "t", column)
            if tref is None:
                tref = t
                cols.append(t)
            header.append(f"{column}_{key}{v:g}".replace(".", "p"))
            cols.append(y)
        path = os.path.join(out_dir, f"{which.replace('-', '_')}_{column}.csv")
        _write_columns(path, header, cols)
        paths.append(path)
    return paths


def _fig_dgrid_hist(runs, out_dir, which, delta_amp, b_rate):
    cols, header = [], ["m"]
    mref = None
    for m_party in (0.0, 0.5, 0.8):
        man = _require(runs, which, "d-grid", delta_amp=delta_amp, b_rate=b_rate, m_party=m_party)
        hist = np.genfromtxt(os.path.join(man["_dir"], "histogram_converged.csv"),
                             delimiter=",", names=True)
        if mref is None:
            mref = hist["m"]
            cols.append(mref)
        tag = f"mp{m_party:g}".replace(".", "p")
        header += [f"f_{tag}", f"fmj_{tag}"]
        cols += [hist["f"], hist["f_mj"]]
    path = os.path.join(out_dir, which.replace("-", "_") + ".csv")
    _write_columns(path, header, cols)
    return [path]


def _fig_dgrid_series(runs, out_dir, which):
    paths = []
    for delta_amp, b_rate in ((1.0, 0.1), (11.5, 1.0)):
        for m_party in (0.0, 0.5, 0.8):
            man = _require(runs, which, "d-grid", delta_amp=delta_amp, b_rate=b_rate,
                           m_party=m_party)
            t, chi, phi = _series(man, "t", "chi", "phi")
            tag = f"mp{m_party:g}_da{delta_amp:g}".replace(".", "p")
            path = os.path.join(out_dir, f"fig19_{tag}.csv")
            _write_columns(path, ["t", "chi", "phi"], [t, chi, phi])
            paths.append(path)
    return paths


FIGURES = {
    "fig3": lambda r, o: _fig_series_per_run(r, o, "fig3", ["a1", "a2"], "chi"),
    "fig5": lambda r, o: _fig_series_per_run(r, o, "fig5", ["a3", "a4"], "chi"),
    "fig7-left": lambda r, o: _fig_chi_overlay(r, o, "fig7-left"),
    "fig7-right": lambda r, o: _fig_chi_overlay(r, o, "fig7-right"),
    "fig8-left": lambda r, o: _fig_series_per_run(r, o, "fig8-left", ["a1", "a2"], "mbar"),
    "fig8-right": lambda r, o: _fig_series_per_run(r, o, "fig8-right", ["a3", "a4"], "mbar"),
    "fig10-left": lambda r, o: _fig_family(r, o, "fig10-left", "b1", "delta_amp", (1.0, 5.0), ["chi"]),
    "fig10-right": lambda r, o: _fig_family(r, o, "fig10-right", "b2", "delta_amp", (1.0, 5.0), ["chi"]),
    "fig14": lambda r, o: _fig_family(r, o, "fig14", "c1", "delta_amp", (1.0, 5.0, 11.5, 25.0), ["chi", "phi"]),
    "fig16": lambda r, o: _fig_c2(r, o),
    "fig18-left": lambda r, o: _fig_dgrid_hist(r, o, "fig18-left", 1.0, 0.1),
    "fig18-right": lambda r, o: _fig_dgrid_hist(r, o, "fig18-right", 11.5, 1.0),
    "fig19": lambda r, o: _fig_dgrid_series(r, o, "fig19"),
}


def _fig_c2(runs, out_dir):
    paths = []
    for da in (1.0, 11.5):
        man = _require(runs, "fig16", "c2", delta_amp=da)
        t, chi, mbar, phi = _series(man, "t", "chi", "mbar", "phi")
        tag = f"da{da:g}".replace(".", "p")
        path = os.path.join(out_dir, f"fig16_{tag}.csv")
        _write_columns(path, ["t", "chi", "mbar", "phi"], [t, chi, mbar, phi])
        paths.append(path)
    return paths


def emit_plotdata(runs_dir, figure_id: str, out_dir=None) -> list[str]:
    """Write the merged/derived columns a published figure needs.

    Scans runs_dir recursively for run manifests; raises FileNotFoundError
    naming the missing preset when required runs are absent, KeyError for
    an unknown figure id.
    """
    if figure_id not in FIGURES:
        raise KeyError(f"unknown figure id {figure_id!r}; known: {sorted(FIGURES)}")
    out_dir = runs_dir if out_dir is None else out_dir
    os.makedirs(out_dir, exist_ok=True)
    runs = _find_runs(runs_dir)
    return FIGURES[figure_id](runs, out_dir)
