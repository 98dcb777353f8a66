"""Coherence, correlation and entanglement diagnostics of multi-qubit states.

All entropies are in bits and the reference basis is the computational one.
Writing ``Delta`` for full dephasing and ``pi`` for the product of single-qubit
marginals, the quantities are

* ``C_rel = S(Delta rho) - S(rho)``         relative-entropy coherence
* ``T     = sum_i S(rho_i) - S(rho)``       mutual information
* ``C_L   = sum_i [H(diag rho_i) - S(rho_i)]``  local coherence
* ``K     = T(Delta rho)``                  totally classical correlations
* ``M     = S(Delta pi rho) - S(rho)``      quantum hookup

and ``M = T + C_L = C_rel + K`` hold term by term.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .linalg import entropy_of_spectrum, hermitize, n_qubits_of, partial_transpose, reduced_state, von_neumann_entropy

MEASURES = ("C_l1", "C_l1_norm", "C_rel", "T", "M_hookup", "K", "C_L", "N_neg")
NEG_FLOOR = -1e-9


def l1_coherence(rho: np.ndarray, normalized: bool = False) -> float:
    """Sum of absolute off-diagonal entries; optionally divided by ``2**N - 1``."""
    rho = np.asarray(rho)
    c = float(np.abs(rho).sum() - np.abs(np.diag(rho)).sum())
    if normalized:
        c /= rho.shape[0] - 1
    return c


def _diag_entropy(rho: np.ndarray) -> float:
    return entropy_of_spectrum(np.clip(np.diag(rho).real, 0.0, None))


def _marginal_diagonals(rho: np.ndarray) -> list[np.ndarray]:
    """Populations of each single-qubit marginal, read off ``diag(rho)``."""
    n = n_qubits_of(rho)
    p = np.clip(np.diag(rho).real, 0.0, None).reshape((2,) * n)
    return [p.sum(axis=tuple(a for a in range(n) if a != q)) for q in range(n)]


def relative_entropy_coherence(rho: np.ndarray) -> float:
    """``S(Delta rho) - S(rho)``."""
    return _diag_entropy(rho) - von_neumann_entropy(rho)


def mutual_information(rho: np.ndarray) -> float:
    """``sum_i S(rho_i) - S(rho)`` over single-qubit marginals."""
    n = n_qubits_of(rho)
    return sum(von_neumann_entropy(reduced_state(rho, q)) for q in range(n)) - von_neumann_entropy(rho)


def local_coherence(rho: np.ndarray) -> float:
    """Sum of the single-qubit relative-entropy coherences."""
    n = n_qubits_of(rho)
    return sum(relative_entropy_coherence(reduced_state(rho, q)) for q in range(n))


def quantum_hookup(rho: np.ndarray) -> float:
    """Relative entropy to the dephased product of marginals.

    ``Delta pi rho`` is diagonal with the product of marginal populations, so
    its entropy is the sum of the marginal population entropies.
    """
    return sum(entropy_of_spectrum(p) for p in _marginal_diagonals(rho)) - von_neumann_entropy(rho)


def classical_correlations(rho: np.ndarray) -> float:
    """Mutual information of the fully dephased state."""
    return sum(entropy_of_spectrum(p) for p in _marginal_diagonals(rho)) - _diag_entropy(rho)


def bipartitions(n: int) -> list[tuple[int, ...]]:
    """One side of every unordered nontrivial bipartition of ``n`` qubits.

    The listed side never contains the last qubit, which picks one member of
    each complementary pair.
    """
    if n < 2:
        raise ValueError("bipartitions need at least 2 qubits")
    out = []
    for k in range(1, n):
        out.extend(c for c in combinations(range(n - 1), k))
    return out


def negativity(rho: np.ndarray, subset: Iterable[int]) -> float:
    """``(||rho^{T_A}||_1 - 1) / 2`` for the partial transpose on ``subset``."""
    ev = np.linalg.eigvalsh(hermitize(partial_transpose(rho, subset)))
    val = (np.abs(ev).sum() - 1.0) / 2.0
    return max(val, 0.0) if val > NEG_FLOOR else val


def mean_negativity(rho: np.ndarray) -> float:
    """Negativity averaged over all ``2**(N-1) - 1`` bipartitions."""
    n = n_qubits_of(rho)
    pts = np.stack([partial_transpose(rho, A) for A in bipartitions(n)])
    ev = np.linalg.eigvalsh(0.5 * (pts + pts.conj().transpose(0, 2, 1)))
    vals = (np.abs(ev).sum(axis=1) - 1.0) / 2.0
    vals = np.where(vals > NEG_FLOOR, np.maximum(vals, 0.0), vals)
    return float(vals.mean())


def all_measures(rho: np.ndarray) -> dict[str, float]:
    """Every diagnostic of one state, sharing the entropies between them."""
    rho = hermitize(np.asarray(rho, dtype=complex))
    n = n_qubits_of(rho)
    S = von_neumann_entropy(rho)
    S_diag = _diag_entropy(rho)
    marg = [reduced_state(rho, q) for q in range(n)]
    S_marg = sum(von_neumann_entropy(r) for r in marg)
    H_marg = sum(entropy_of_spectrum(p) for p in _marginal_diagonals(rho))
    c_l1 = l1_coherence(rho)
    return {
        "C_l1": c_l1,
        "C_l1_norm": c_l1 / (2**n - 1),
        "C_rel": S_diag - S,
        "T": S_marg - S,
        "M_hookup": H_marg - S,
        "K": H_marg - S_diag,
        "C_L": H_marg - S_marg,
        "N_neg": mean_negativity(rho),
    }


@dataclass
class CorrelationReport:
    """Window- and realization-averaged diagnostics.

    ``mean`` and ``stderr`` are over realizations of per-realization window
    means; ``std`` is the plain standard deviation across realizations.
    """

    mean: dict[str, float]
    stderr: dict[str, float]
    std: dict[str, float]
    n_realizations: int
    window: int
    per_realization: np.ndarray = field(repr=False, default=None)  # (R, len(MEASURES))

    def __getattr__(self, name):
        if name in MEASURES:
            return self.mean[name]
        raise AttributeError(name)

    @classmethod
    def from_windows(cls, windows: Sequence[Sequence[np.ndarray]]) -> "CorrelationReport":
        """Build from one list of density matrices per realization."""
        if not windows or any(len(w) == 0 for w in windows):
            raise ValueError("need at least one state per realization")
        per = np.array([_window_mean(w) for w in windows])
        return _report_from_rows(per, len(windows[0]))


def _window_mean(states) -> np.ndarray:
    rows = [all_measures(r) for r in states]
    return np.mean([[row[m] for m in MEASURES] for row in rows], axis=0)


def stationary_states(config, inputs, realization, window: int) -> list[np.ndarray]:
    """Reservoir states after each of the first ``window`` post-washout steps."""
    from .reservoir import run_reservoir

    n_in = config.washout + window
    if len(inputs) < n_in:
        raise ValueError("input sequence shorter than washout + window")
    res = run_reservoir(config, np.asarray(inputs)[:n_in], realization, record_states=range(window))
    return [res.states[j] for j in range(window)]


def stationary_report(config, inputs, realizations: Sequence[int], window: int = 100) -> CorrelationReport:
    return CorrelationReport.from_windows([stationary_states(config, inputs, r, window) for r in realizations])


def _sweep_task(args):
    config, inputs, realization, window = args
    return _window_mean(stationary_states(config, inputs, realization, window))


def stationary_correlation_sweep(
    config,
    p_grid: Sequence[float],
    axes: Sequence[str] = ("x", "z"),
    n_realizations: int = 10,
    window: int = 100,
    inputs: np.ndarray | None = None,
    workers: int = 1,
) -> list[tuple[str, float, CorrelationReport]]:
    """Stationary diagnostics on a noise grid, one row per ``(axis, p_err)``.

    The same input sequence and realizations are used in every cell.  The
    noiseless point is computed once and reported under each axis.
    """
    from dataclasses import replace

    from .noise import NoiseSpec
    from .reservoir import draw_inputs

    if inputs is None:
        inputs = draw_inputs(config.washout + window, config.input_seed)
    cells = []
    for axis in axes:
        for p in p_grid:
            cells.append((axis, float(p)))
    keys = sorted({("none", 0.0) if p == 0 else (a, p) for a, p in cells})
    tasks = []
    for a, p in keys:
        cfg = replace(config, noise=NoiseSpec(a, p, config.noise.eta))
        tasks.extend((cfg, inputs, r, window) for r in range(n_realizations))
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as ex:
            rows = list(ex.map(_sweep_task, tasks))
    else:
        rows = [_sweep_task(t) for t in tasks]
    reports = {}
    for i, key in enumerate(keys):
        per = np.array(rows[i * n_realizations : (i + 1) * n_realizations])
        reports[key] = _report_from_rows(per, window)
    return [(a, p, reports[("none", 0.0) if p == 0 else (a, p)]) for a, p in cells]


def _report_from_rows(per: np.ndarray, window: int) -> CorrelationReport:
    R = len(per)
    mean = per.mean(axis=0)
    std = per.std(axis=0, ddof=1) if R > 1 else np.zeros(per.shape[1])
    return CorrelationReport(
        dict(zip(MEASURES, mean)), dict(zip(MEASURES, std / np.sqrt(R))), dict(zip(MEASURES, std)), R, window, per
    )


def write_sweep_csv(rows, path: str | Path, seed: int) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["axis", "p_err", "measure", "mean", "stderr", "n_realizations", "window", "seed"])
        for axis, p, rep in rows:
            for m in MEASURES:
                w.writerow([axis, repr(float(p)), m, repr(float(rep.mean[m])), repr(float(rep.stderr[m])), rep.n_realizations, rep.window, seed])
