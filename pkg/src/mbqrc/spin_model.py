"""Disordered transverse-field Ising Hamiltonians and level statistics.

The reservoir Hamiltonian on ``N`` fully connected qubits is

    H = sum_{i>j} J_ij X_i X_j + sum_i h_i Z_i + eps * sum_i X_i

with ``J_ij ~ U[0, 1]`` and ``h_i = h + w_i``, ``w_i ~ U[-W, W]``.  The last
term (``eps``) breaks the ``Z``-parity symmetry and is zero by default.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .linalg import hermitian_eigendecomposition, local_pauli, unitary_from_spectrum
from .streams import substream

DEGENERATE_GAP = 1e-12


@dataclass(frozen=True)
class ModelParams:
    n_qubits: int = 5
    h: float = 1.0
    W: float = 0.0
    eps: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ValueError("need at least 2 qubits")
        if self.W < 0:
            raise ValueError("disorder width W must be non-negative")


@dataclass(frozen=True, eq=False)
class HamiltonianRealization:
    """One disorder sample: couplings, fields, matrix and its spectrum."""

    params: ModelParams
    couplings: np.ndarray  # (N, N), J[i, j] for i > j, zero elsewhere
    fields: np.ndarray  # (N,)
    matrix: np.ndarray = field(repr=False)
    _cache: dict = field(default_factory=dict, repr=False, init=False)

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        return hermitian_eigendecomposition(self.matrix)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectrum[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        return self.spectrum[1]

    @property
    def n_qubits(self) -> int:
        return self.params.n_qubits

    def propagator(self, t: float) -> np.ndarray:
        """``exp(-i H t)`` from the cached eigendecomposition."""
        return unitary_from_spectrum(*self.spectrum, t)

    def transfer_matrix(self, t: float) -> np.ndarray:
        """Pauli transfer matrix of ``exp(-i H t)``, cached per ``t``."""
        from .transfer import unitary_ptm

        key = ("ptm", float(t))
        if key not in self._cache:
            self._cache[key] = unitary_ptm(self.propagator(t))
        return self._cache[key]


def build_hamiltonian(couplings: np.ndarray, fields: np.ndarray, eps: float = 0.0) -> np.ndarray:
    n = len(fields)
    H = np.zeros((2**n, 2**n), dtype=complex)
    xs = [local_pauli("X", i, n) for i in range(n)]
    for i in range(n):
        H += fields[i] * local_pauli("Z", i, n)
        if eps:
            H += eps * xs[i]
        for j in range(i):
            if couplings[i, j]:
                H += couplings[i, j] * (xs[i] @ xs[j])
    return H


def sample_hamiltonian(params: ModelParams, realization: int = 0) -> HamiltonianRealization:
    """Draw disorder realization number ``realization`` for ``params``.

    Each realization index has its own random stream under ``params.seed``,
    so realizations can be generated independently and in any order.
    """
    n = params.n_qubits
    rng = substream(params.seed, "disorder", realization)
    J = np.zeros((n, n))
    rows, cols = np.tril_indices(n, k=-1)
    J[rows, cols] = rng.uniform(0.0, 1.0, size=len(rows))
    w = rng.uniform(-params.W, params.W, size=n) if params.W > 0 else np.zeros(n)
    fields = params.h + w
    return HamiltonianRealization(params, J, fields, build_hamiltonian(J, fields, params.eps))


def parity_operator_diagonal(n: int) -> np.ndarray:
    """Diagonal of ``prod_i Z_i`` (+1 for even number of ones)."""
    idx = np.arange(2**n)
    ones = np.array([bin(i).count("1") for i in idx])
    return np.where(ones % 2 == 0, 1.0, -1.0)


def gap_ratios(eigenvalues: Sequence[float]) -> np.ndarray:
    """Adjacent-gap ratios ``min(w_n, w_{n+1}) / max(w_n, w_{n+1})``.

    Pairs where both gaps are degenerate (below 1e-12) are skipped; if only
    one is degenerate the ratio is 0.
    """
    E = np.sort(np.asarray(eigenvalues, dtype=float))
    if len(E) < 3:
        raise ValueError("need at least 3 eigenvalues")
    gaps = np.diff(E)
    a, b = gaps[:-1], gaps[1:]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    both = hi < DEGENERATE_GAP
    lo = np.where(lo < DEGENERATE_GAP, 0.0, lo)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(both, np.nan, lo / np.where(both, 1.0, hi))
    return r[~both]


def gap_ratio_statistic(eigenvalues: Sequence[float]) -> float:
    """Mean adjacent-gap ratio <r> of a spectrum."""
    r = gap_ratios(eigenvalues)
    if r.size == 0:
        raise ValueError("all adjacent gaps are degenerate")
    return float(np.mean(r))


def level_statistic(real: HamiltonianRealization, edge_fraction: float = 0.1) -> float:
    """<r> of one realization, resolved by symmetry sector.

    Without the symmetry-breaking term the Hamiltonian commutes with the
    parity ``prod_i Z_i``; the two sectors are diagonalized separately and
    their <r> averaged, since interleaving independent sectors makes the
    full spectrum look uncorrelated.  In each sector a fraction
    ``edge_fraction`` of ratios is dropped at both spectrum edges.
    """
    n = real.n_qubits
    if real.params.eps == 0.0:
        par = parity_operator_diagonal(n)
        blocks = [np.where(par == s)[0] for s in (1.0, -1.0)]
    else:
        blocks = [np.arange(2**n)]
    out = []
    for idx in blocks:
        E = np.linalg.eigvalsh(real.matrix[np.ix_(idx, idx)])
        r = gap_ratios(E)
        cut = int(edge_fraction * len(r))
        if cut and len(r) - 2 * cut >= 1:
            r = r[cut : len(r) - cut]
        out.append(np.mean(r))
    return float(np.mean(out))


@dataclass
class PhaseCell:
    h: float
    W: float
    mean_r: float
    stderr_r: float
    n_realizations: int
    seed: int
    values: np.ndarray = field(repr=False, default=None)


def phase_scan_cell(
    h: float, W: float, n_realizations: int, seed: int, n_qubits: int = 5, edge_fraction: float = 0.1
) -> PhaseCell:
    params = ModelParams(n_qubits=n_qubits, h=h, W=W, seed=seed)
    vals = np.array(
        [level_statistic(sample_hamiltonian(params, k), edge_fraction) for k in range(n_realizations)]
    )
    se = float(np.std(vals, ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return PhaseCell(h, W, float(vals.mean()), se, n_realizations, seed, vals)


def default_grid() -> tuple[np.ndarray, np.ndarray]:
    hs = np.round(np.arange(1, 21) * 0.1, 10)
    Ws = np.round(np.arange(0, 21) * 0.5, 10)
    return hs, Ws


def phase_scan(
    hs: Sequence[float],
    Ws: Sequence[float],
    n_realizations: int,
    seed: int,
    n_qubits: int = 5,
    edge_fraction: float = 0.1,
    workers: int = 1,
) -> list[PhaseCell]:
    """Mean <r> over disorder realizations on an ``(h, W)`` grid.

    Cells are returned in row-major ``(h, W)`` order whatever the worker
    count.  Every cell uses the same master seed, so realization ``k`` shares
    its couplings across cells.
    """
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    tasks = [(float(h), float(W)) for h in hs for W in Ws]
    args = [(h, W, n_realizations, seed, n_qubits, edge_fraction) for h, W in tasks]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(_cell_star, args))
    return [phase_scan_cell(*a) for a in args]


def _cell_star(a):
    return phase_scan_cell(*a)


def write_phase_csv(cells: Sequence[PhaseCell], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["h", "W", "mean_r", "stderr_r", "n_realizations", "seed"])
        for c in cells:
            w.writerow([repr(c.h), repr(c.W), repr(c.mean_r), repr(c.stderr_r), c.n_realizations, c.seed])
