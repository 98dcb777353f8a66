"""End-to-end experiment runners writing CSV tables and a JSON manifest.

Each runner expands an :class:`~mbqrc.config.ExperimentConfig` into
independent ``(cell, realization)`` tasks, maps them over a process pool
(or serially) and reduces the results in task order, so outputs do not
depend on the worker count.  All randomness is drawn from named streams of
the master seed:

* disorder:       ``(seed, "disorder", realization)``
* inputs:         ``(seed, "inputs")``, shared by every cell and realization
* readout noise:  ``(seed, "readout", cell label, realization)``
* IPC surrogates: ``(seed, "surrogate", target)``
"""

from __future__ import annotations

import csv
import hashlib
import json
import platform
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .config import ExperimentConfig
from .correlations import MEASURES, all_measures, l1_coherence, write_sweep_csv
from .ipc import IPCSettings, total_ipc
from .noise import NoiseSpec
from .reservoir import (
    ObservableSet,
    RunConfig,
    add_readout_noise,
    draw_inputs,
    observable_labels,
    run_reservoir,
    stationary_observable_stats,
    trajectory,
)
from .spin_model import ModelParams, phase_scan, write_phase_csv

IPC_COLUMNS = [
    "I_1", "I_2", "I_3", "I_4", "I_5", "I_6", "I_tot", "normalized", "raw_total", "overshoot",
    "odd_capacity", "odd_threshold", "even_capacity", "even_threshold",
]


# --- plumbing ----------------------------------------------------------------


@dataclass
class ResultBundle:
    out_dir: Path
    files: list[str] = field(default_factory=list)
    timings: list[dict] = field(default_factory=list)
    tables: dict = field(default_factory=dict)  # in-memory copies for callers
    manifest_path: Path | None = None


def run_tasks(fn: Callable, tasks: Sequence, workers: int = 1) -> list:
    """``[fn(t) for t in tasks]``, optionally on a process pool, in task order."""
    if workers > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(fn, tasks))
    return [fn(t) for t in tasks]


class _timed:
    """Picklable wrapper returning ``(fn(task), seconds)``."""

    def __init__(self, fn):
        self.fn = fn

    def __call__(self, task):
        t0 = time.perf_counter()
        out = self.fn(task)
        return out, time.perf_counter() - t0


def _file_sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(bundle: ResultBundle, cfg: ExperimentConfig, wall: float) -> Path:
    from . import __version__

    import numpy
    import scipy

    out = bundle.out_dir
    manifest = {
        "kind": cfg.kind,
        "config": cfg.tree,
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "version": __version__,
        "python": platform.python_version(),
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "files": {f: _file_sha(out / f) for f in bundle.files},
        "tasks": bundle.timings,
        "wall_seconds": wall,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str), encoding="utf-8")
    bundle.manifest_path = path
    return path


def _write_rows(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _stats(values) -> tuple[float, float, float]:
    v = np.asarray(values, dtype=float)
    std = float(v.std(ddof=1)) if len(v) > 1 else 0.0
    return float(v.mean()), std, std / np.sqrt(len(v))


# --- building blocks ---------------------------------------------------------


def noise_spec(axis: str, p_err: float, cfg: ExperimentConfig) -> NoiseSpec:
    """Noise at the run's ``eta`` with the physical rate of ``p_err`` quoted at ``reference_eta``."""
    eta = int(cfg["run"]["eta"])
    if axis == "none" or p_err == 0:
        return NoiseSpec("none", 0.0, eta)
    return NoiseSpec(axis, float(p_err), int(cfg["noise"]["reference_eta"])).with_eta(eta)


def noise_cells(cfg: ExperimentConfig, p_grid=None) -> list[tuple[str, float]]:
    """``(axis, p_err)`` cells; the noiseless point appears once as ``("none", 0.0)``."""
    grid = cfg["noise"]["p_grid"] if p_grid is None else p_grid
    cells = [("none", 0.0)] if any(float(p) == 0 for p in grid) else []
    cells += [(ax, float(p)) for ax in cfg["noise"]["axes"] for p in grid if float(p) > 0]
    return cells


def run_config(cfg: ExperimentConfig, W: float, encoding: str, obs: dict, axis: str, p_err: float, washout=None) -> RunConfig:
    m = cfg["model"]
    r = cfg["run"]
    return RunConfig(
        model=ModelParams(n_qubits=int(m["n_qubits"]), h=float(m["h"]), W=float(W), eps=float(m["eps"]), seed=cfg.seed),
        delta_t=float(r["delta_t"]),
        washout=int(r["washout"] if washout is None else washout),
        length=2 * cfg.length,
        encoding=encoding,
        noise=noise_spec(axis, p_err, cfg),
        observables=ObservableSet(obs["name"], int(obs.get("multiplex", 1))),
        readout_sigma=float(r["readout_sigma"]),
        input_seed=cfg.seed,
        readout_seed=cfg.seed,
    )


def ipc_settings(cfg: ExperimentConfig) -> IPCSettings:
    s = cfg["ipc"]
    return IPCSettings(
        d_max=int(s["d_max"]),
        max_delay={int(k): int(v) for k, v in s["max_delay"].items()},
        stop_after=int(s["stop_after"]),
        n_surrogates=int(s["n_surrogates"]),
        min_shift=int(s["min_shift"]),
        n_sigma=float(s["n_sigma"]),
        seed=cfg.seed,
    )


def cell_label(W, encoding, obs, axis, p_err) -> str:
    return f"W={float(W)!r}|{encoding}|{obs['name']}/{int(obs.get('multiplex', 1))}|{axis}|{float(p_err)!r}"


def ipc_task(task) -> dict:
    """One readout matrix and its capacity report summary."""
    run_cfg, settings, label, realization = task
    inputs = draw_inputs(run_cfg.washout + run_cfg.length, run_cfg.input_seed)
    X = run_reservoir(run_cfg, inputs, realization).readout
    X = add_readout_noise(X, run_cfg.readout_sigma, run_cfg.readout_seed, ("readout", label, realization))
    rep = total_ipc(X, inputs, settings)
    row = rep.summary()
    row["realization"] = realization
    return row


def _ipc_cells(cfg: ExperimentConfig, regimes=None, encodings=None, observables=None, p_grid=None):
    cells = []
    for W in regimes if regimes is not None else cfg["regimes"]:
        for enc in encodings if encodings is not None else cfg["encodings"]:
            for obs in observables if observables is not None else cfg["observables"]:
                for axis, p in noise_cells(cfg, p_grid):
                    cells.append((float(W), enc, obs, axis, p))
    return cells


def _ipc_sweep(cfg: ExperimentConfig, cells, workers: int):
    settings = ipc_settings(cfg)
    R = int(cfg["n_realizations"])
    tasks = [
        (run_config(cfg, W, enc, obs, axis, p), settings, cell_label(W, enc, obs, axis, p), r)
        for (W, enc, obs, axis, p) in cells
        for r in range(R)
    ]
    results = run_tasks(_timed(ipc_task), tasks, workers)
    per_cell = []
    timings = []
    for i, cell in enumerate(cells):
        rows = [res for res, _ in results[i * R : (i + 1) * R]]
        timings += [{"task": f"ipc {cell_label(*cell)} r={r}", "seconds": dt} for r, (_, dt) in enumerate(results[i * R : (i + 1) * R])]
        per_cell.append((cell, rows))
    return per_cell, timings


def _ipc_tables(per_cell):
    summary, realizations = [], []
    for (W, enc, obs, axis, p), rows in per_cell:
        key = [W, enc, obs["name"], int(obs.get("multiplex", 1)), axis, p]
        for q in IPC_COLUMNS:
            if q in rows[0]:
                mean, std, se = _stats([r[q] for r in rows])
                summary.append(key + [q, mean, std, se, len(rows)])
        for r in rows:
            realizations.append(key + [r["realization"], r["M"]] + [r.get(q, 0.0) for q in IPC_COLUMNS])
    return summary, realizations


SUMMARY_HEADER = ["W", "encoding", "observables", "multiplex", "axis", "p_err", "quantity", "mean", "std", "stderr", "n_realizations"]
REALIZATION_HEADER = ["W", "encoding", "observables", "multiplex", "axis", "p_err", "realization", "M"] + IPC_COLUMNS


def _start(cfg: ExperimentConfig, out_dir) -> ResultBundle:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return ResultBundle(out)


# --- experiments ---------------------------------------------------------------


def run_ipc_experiment(cfg: ExperimentConfig, out_dir, workers: int = 1) -> ResultBundle:
    """Degree-resolved IPC per (regime, encoding, observable set, noise cell)."""
    t0 = time.perf_counter()
    b = _start(cfg, out_dir)
    per_cell, b.timings = _ipc_sweep(cfg, _ipc_cells(cfg), workers)
    summary, reals = _ipc_tables(per_cell)
    _write_rows(b.out_dir / "ipc_summary.csv", SUMMARY_HEADER, summary)
    _write_rows(b.out_dir / "ipc_realizations.csv", REALIZATION_HEADER, reals)
    b.files += ["ipc_summary.csv", "ipc_realizations.csv"]
    b.tables["ipc"] = per_cell
    write_manifest(b, cfg, time.perf_counter() - t0)
    return b


def _corr_task(task):
    run_cfg, realization, window = task
    inputs = draw_inputs(run_cfg.washout + window, run_cfg.input_seed)
    res = run_reservoir(run_cfg, inputs, realization, record_states=range(window))
    rows = [all_measures(res.states[j]) for j in range(window)]
    return np.mean([[row[m] for m in MEASURES] for row in rows], axis=0)


def _correlation_sweep(cfg: ExperimentConfig, W: float, workers: int, encoding=None):
    """``{(axis, p): (per-realization array, ...)}`` of stationary window means."""
    c = cfg["correlations"]
    enc = encoding or cfg["encodings"][0]
    R = int(cfg["n_realizations"])
    cells = noise_cells(cfg)
    obs = {"name": "Z", "multiplex": 1}
    tasks = [
        (run_config(cfg, W, enc, obs, axis, p, washout=int(c["washout"])), r, int(c["window"]))
        for axis, p in cells
        for r in range(R)
    ]
    results = run_tasks(_timed(_corr_task), tasks, workers)
    out = {}
    timings = []
    for i, cell in enumerate(cells):
        chunk = results[i * R : (i + 1) * R]
        out[cell] = np.array([res for res, _ in chunk])
        timings += [{"task": f"correlations W={W} {cell} r={r}", "seconds": dt} for r, (_, dt) in enumerate(chunk)]
    return out, timings


def _corr_report_rows(per: dict, cfg: ExperimentConfig):
    """Sweep rows ``(axis, p, report)``, the noiseless cell listed under each axis."""
    from .correlations import _report_from_rows

    window = int(cfg["correlations"]["window"])
    rows = []
    for axis in cfg["noise"]["axes"]:
        for p in cfg["noise"]["p_grid"]:
            key = ("none", 0.0) if float(p) == 0 else (axis, float(p))
            rows.append((axis, float(p), _report_from_rows(per[key], window)))
    return rows


def run_correlation_sweep(cfg: ExperimentConfig, out_dir, workers: int = 1) -> ResultBundle:
    """Stationary coherence and correlation measures on the noise grid, per regime."""
    t0 = time.perf_counter()
    b = _start(cfg, out_dir)
    for W in cfg["regimes"]:
        per, timings = _correlation_sweep(cfg, float(W), workers)
        b.timings += timings
        rows = _corr_report_rows(per, cfg)
        name = f"correlations_W{float(W):g}.csv"
        write_sweep_csv(rows, b.out_dir / name, cfg.seed)
        b.files.append(name)
        b.tables[float(W)] = rows
    write_manifest(b, cfg, time.perf_counter() - t0)
    return b


def _coherence_task(task):
    run_cfg, realization, window = task
    inputs = draw_inputs(run_cfg.washout + window, run_cfg.input_seed)
    res = run_reservoir(run_cfg, inputs, realization, record_states=range(window), method="density")
    return float(np.mean([l1_coherence(res.states[j], normalized=True) for j in range(window)]))


def run_phase_diagram(cfg: ExperimentConfig, out_dir, workers: int = 1) -> ResultBundle:
    """Gap-ratio and stationary-coherence maps over the ``(h, W)`` grid."""
    t0 = time.perf_counter()
    b = _start(cfg, out_dir)
    pd = cfg["phase_diagram"]
    n = int(cfg["model"]["n_qubits"])
    ts = time.perf_counter()
    cells = phase_scan(pd["h"], pd["W"], int(pd["realizations"]), cfg.seed, n, float(pd["edge_fraction"]), workers)
    b.timings.append({"task": "gap ratios", "seconds": time.perf_counter() - ts})
    write_phase_csv(cells, b.out_dir / "phase_r.csv")

    R = int(pd["coherence_realizations"])
    grid = [(float(h), float(W)) for h in pd["h"] for W in pd["W"]]
    obs = {"name": "Z", "multiplex": 1}
    tasks = []
    for h, W in grid:
        rc = run_config(cfg, W, cfg["encodings"][0], obs, "none", 0.0, washout=int(pd["washout"]))
        rc = replace(rc, model=replace(rc.model, h=h))
        tasks += [(rc, r, int(pd["window"])) for r in range(R)]
    results = run_tasks(_timed(_coherence_task), tasks, workers) if R > 0 else []
    rows = []
    for i, (h, W) in enumerate(grid):
        chunk = results[i * R : (i + 1) * R]
        mean, std, se = _stats([v for v, _ in chunk]) if R else (float("nan"),) * 3
        rows.append([h, W, mean, se, std, R, cfg.seed])
        b.timings += [{"task": f"coherence h={h} W={W} r={r}", "seconds": dt} for r, (_, dt) in enumerate(chunk)]
    _write_rows(b.out_dir / "phase_coherence.csv", ["h", "W", "mean_C_l1_norm", "stderr", "std", "n_realizations", "seed"], rows)
    b.files += ["phase_r.csv", "phase_coherence.csv"]
    b.tables["r"] = cells
    b.tables["coherence"] = rows
    write_manifest(b, cfg, time.perf_counter() - t0)
    return b


def _trajectory_task(task):
    run_cfg, realization, window, labels = task
    inputs = draw_inputs(run_cfg.washout + window, run_cfg.input_seed)
    return trajectory(run_cfg, inputs, window, realization, labels)


def run_trajectory_dump(cfg: ExperimentConfig, out_dir, workers: int = 1) -> ResultBundle:
    """Sub-step resolved local ``Z`` traces over the last injections of a run."""
    t0 = time.perf_counter()
    b = _start(cfg, out_dir)
    tr = cfg["trajectories"]
    window = int(tr["window"])
    if window < 1:
        raise ValueError("trajectory window must be >= 1")
    n = int(cfg["model"]["n_qubits"])
    labels = observable_labels("Z", n)
    obs = {"name": "Z", "multiplex": 1}
    cells = [(float(c["W"]), c["axis"], float(c["p_err"])) for c in tr["cells"]]
    tasks = [
        (run_config(cfg, W, cfg["encodings"][0], obs, axis, p), int(tr["realization"]), window, labels)
        for W, axis, p in cells
    ]
    results = run_tasks(_timed(_trajectory_task), tasks, workers)
    rows = []
    for (W, axis, p), (recs, dt) in zip(cells, results):
        rows += [[W, axis, p, step, t, lab, v] for step, t, lab, v in recs]
        b.timings.append({"task": f"trajectory W={W} {axis} {p}", "seconds": dt})
    _write_rows(b.out_dir / "trajectories.csv", ["W", "axis", "p_err", "step", "substep_time", "observable", "value"], rows)
    b.files.append("trajectories.csv")
    b.tables["trajectories"] = rows
    write_manifest(b, cfg, time.perf_counter() - t0)
    return b


def _obs_stats_task(task):
    run_cfg, realization, steps = task
    inputs = draw_inputs(run_cfg.washout + steps, run_cfg.input_seed)
    return stationary_observable_stats(run_cfg, inputs, [realization])


def run_stationary_stats(cfg: ExperimentConfig, out_dir, workers: int = 1) -> ResultBundle:
    """Mean ``|<O>|`` of local observables and IPC robustness, per input encoding."""
    t0 = time.perf_counter()
    b = _start(cfg, out_dir)
    st = cfg["stationary_stats"]
    steps = int(st["steps"])
    R = int(cfg["n_realizations"])
    obs = {"name": "Z", "multiplex": 1}
    cells = [
        (float(W), enc, axis, p)
        for W in cfg["regimes"]
        for enc in cfg["encodings"]
        for axis, p in noise_cells(cfg, st["p_grid"])
    ]
    tasks = [(run_config(cfg, W, enc, obs, axis, p), r, steps) for W, enc, axis, p in cells for r in range(R)]
    results = run_tasks(_timed(_obs_stats_task), tasks, workers)
    rows = []
    for i, (W, enc, axis, p) in enumerate(cells):
        chunk = results[i * R : (i + 1) * R]
        labels = list(chunk[0][0])
        for lab in labels:
            mean, std, se = _stats([res[lab] for res, _ in chunk])
            rows.append([W, enc, axis, p, lab, mean, se, R])
        b.timings += [{"task": f"observables W={W} {enc} {axis} {p} r={r}", "seconds": dt} for r, (_, dt) in enumerate(chunk)]
    _write_rows(b.out_dir / "observable_stats.csv", ["W", "encoding", "axis", "p_err", "observable", "mean_abs", "stderr", "n_realizations"], rows)
    b.files.append("observable_stats.csv")
    b.tables["observables"] = rows

    if st["ipc_p_grid"]:
        per_cell, timings = _ipc_sweep(cfg, _ipc_cells(cfg, p_grid=st["ipc_p_grid"]), workers)
        b.timings += timings
        summary, reals = _ipc_tables(per_cell)
        _write_rows(b.out_dir / "encoding_ipc_summary.csv", SUMMARY_HEADER, summary)
        _write_rows(b.out_dir / "encoding_ipc_realizations.csv", REALIZATION_HEADER, reals)
        b.files += ["encoding_ipc_summary.csv", "encoding_ipc_realizations.csv"]
        b.tables["ipc"] = per_cell
    write_manifest(b, cfg, time.perf_counter() - t0)
    return b


def rank_summary(joined: list[dict]) -> dict:
    """Spearman correlation of each measure with ``I_tot`` over the pooled grid."""
    from scipy.stats import spearmanr

    ipc = [r["I_tot"] for r in joined]
    out = {}
    for m in ("C_l1", "C_rel", "M_hookup", "K", "N_neg", "T"):
        vals = [r[m] for r in joined]
        rho = spearmanr(vals, ipc).statistic if len(set(vals)) > 1 and len(set(ipc)) > 1 else float("nan")
        out[m] = float(rho)
    return out


def negativity_decoupling(joined: list[dict], axis: str = "x") -> list[dict]:
    """Per noisy grid point of ``axis``: negativity and ``I_tot`` relative to noiseless."""
    base = next(r for r in joined if r["p_err"] == 0.0)
    out = []
    for r in joined:
        if r["axis"] == axis and r["p_err"] > 0:
            out.append(
                {
                    "p_err": r["p_err"],
                    "neg_ratio": r["N_neg"] / base["N_neg"] if base["N_neg"] > 0 else float("nan"),
                    "ipc_ratio": r["I_tot"] / base["I_tot"] if base["I_tot"] > 0 else float("nan"),
                }
            )
    return out


def run_ipc_vs_correlations(cfg: ExperimentConfig, out_dir, workers: int = 1) -> ResultBundle:
    """Joined IPC and correlation table on a shared noise grid, with rank statistics.

    Uses the first encoding and observable set of the config.  ``I_tot`` is
    the normalized capacity averaged over realizations.
    """
    t0 = time.perf_counter()
    b = _start(cfg, out_dir)
    enc = cfg["encodings"][0]
    obs = cfg["observables"][0]
    joined_all, ranks = [], []
    for W in cfg["regimes"]:
        W = float(W)
        per_cell, timings = _ipc_sweep(cfg, _ipc_cells(cfg, [W], [enc], [obs]), workers)
        b.timings += timings
        corr, timings = _correlation_sweep(cfg, W, workers, enc)
        b.timings += timings
        ipc_by = {(c[3], c[4]): rows for c, rows in per_cell}
        joined = []
        for axis in cfg["noise"]["axes"]:
            for p in cfg["noise"]["p_grid"]:
                key = ("none", 0.0) if float(p) == 0 else (axis, float(p))
                rows = ipc_by[key]
                mean_ipc, _, se_ipc = _stats([r["normalized"] for r in rows])
                cm = corr[key].mean(axis=0)
                rec = {"W": W, "axis": axis, "p_err": float(p), "I_tot": mean_ipc, "I_tot_stderr": se_ipc}
                rec.update({m: float(v) for m, v in zip(MEASURES, cm)})
                joined.append(rec)
        rs = rank_summary(joined)
        ranks += [[W, m, v, len(joined)] for m, v in rs.items()]
        for axis in cfg["noise"]["axes"]:
            for d in negativity_decoupling(joined, axis):
                ranks.append([W, f"neg_ratio[{axis},{d['p_err']!r}]", d["neg_ratio"], 1])
                ranks.append([W, f"ipc_ratio[{axis},{d['p_err']!r}]", d["ipc_ratio"], 1])
        joined_all += joined
        b.tables[W] = {"joined": joined, "ipc": per_cell, "spearman": rs}
    cols = ["W", "axis", "p_err", "I_tot", "I_tot_stderr"] + list(MEASURES)
    _write_rows(b.out_dir / "ipc_vs_correlations.csv", cols, [[r[c] for c in cols] for r in joined_all])
    _write_rows(b.out_dir / "rank_summary.csv", ["W", "statistic", "value", "n_points"], ranks)
    b.files += ["ipc_vs_correlations.csv", "rank_summary.csv"]
    write_manifest(b, cfg, time.perf_counter() - t0)
    return b


RUNNERS = {
    "phase-diagram": run_phase_diagram,
    "correlations": run_correlation_sweep,
    "trajectories": run_trajectory_dump,
    "ipc": run_ipc_experiment,
    "ipc-vs-correlations": run_ipc_vs_correlations,
    "stationary-stats": run_stationary_stats,
}


def run_experiment(cfg: ExperimentConfig, out_dir, workers: int = 1) -> ResultBundle:
    return RUNNERS[cfg.kind](cfg, out_dir, workers)
