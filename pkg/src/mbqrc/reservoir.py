"""Erase-and-write quantum reservoir driven by a scalar input sequence.

One step of the map: replace qubit 0 by the encoded input ``rho_1(s_k)``,
keep the partial trace of the rest, evolve for ``Delta t`` under the
(possibly noisy) Hamiltonian, then read out Pauli expectation values.  The
readout row of step ``k`` is therefore measured right before injection
``k + 1``.

Two interchangeable engines are provided.  ``method="transfer"`` keeps the
state as real Pauli coefficients and applies a precomposed interval map
(one matrix-vector product per step); ``method="density"`` applies the
injection, the Trotterized noise and the measurement to the density matrix
explicitly.  They agree to round-off and the second serves as a reference.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from itertools import combinations
from pathlib import Path
from typing import Sequence

import numpy as np

from .linalg import hermitize, maximally_mixed, partial_trace, pauli_label, pauli_operator
from .noise import NoiseSpec, apply_dissipation
from .spin_model import HamiltonianRealization, ModelParams, sample_hamiltonian
from .streams import substream
from .transfer import from_pauli, interval_maps, pauli_index, to_pauli

ENCODINGS = ("mixed_z", "pure_z", "mixed_x", "pure_x")


def input_bloch(s: float, kind: str = "mixed_z") -> np.ndarray:
    """Pauli coefficients ``(1, <X>, <Y>, <Z>)`` of the encoded input qubit."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"input {s} outside [0, 1]")
    if kind == "mixed_z":
        return np.array([1.0, 0.0, 0.0, 1.0 - 2.0 * s])
    if kind == "pure_z":
        return np.array([1.0, np.sin(np.pi * s), 0.0, np.cos(np.pi * s)])
    if kind == "mixed_x":
        return np.array([1.0, 2.0 * s - 1.0, 0.0, 0.0])
    if kind == "pure_x":
        return np.array([1.0, -np.cos(np.pi * s), 0.0, np.sin(np.pi * s)])
    raise ValueError(f"unknown encoding {kind!r}; expected one of {ENCODINGS}")


def input_bloch_array(inputs: np.ndarray, kind: str = "mixed_z") -> np.ndarray:
    """Vectorized :func:`input_bloch`, shape ``(len(inputs), 4)``."""
    s = np.asarray(inputs, dtype=float)
    if np.any((s < 0) | (s > 1)):
        raise ValueError("inputs must lie in [0, 1]")
    out = np.zeros((len(s), 4))
    out[:, 0] = 1.0
    if kind == "mixed_z":
        out[:, 3] = 1.0 - 2.0 * s
    elif kind == "pure_z":
        out[:, 1], out[:, 3] = np.sin(np.pi * s), np.cos(np.pi * s)
    elif kind == "mixed_x":
        out[:, 1] = 2.0 * s - 1.0
    elif kind == "pure_x":
        out[:, 1], out[:, 3] = -np.cos(np.pi * s), np.sin(np.pi * s)
    else:
        raise ValueError(f"unknown encoding {kind!r}; expected one of {ENCODINGS}")
    return out


# Bloch components that can be nonzero for each encoding
_ACTIVE = {"mixed_z": [0, 3], "pure_z": [0, 1, 3], "mixed_x": [0, 1], "pure_x": [0, 1, 3]}


def encode_input(s: float, kind: str = "mixed_z") -> np.ndarray:
    """Single-qubit density matrix carrying input ``s`` in [0, 1].

    ``mixed_z`` is ``diag(1 - s, s)``; ``pure_z`` is the pure state
    ``cos(pi s/2)|0> + sin(pi s/2)|1>``; the ``_x`` variants are the same
    constructions in the ``|->, |+>`` basis.
    """
    _, x, y, z = input_bloch(s, kind)
    return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]], dtype=complex)


def inject_input(rho: np.ndarray, rho1: np.ndarray) -> np.ndarray:
    """``rho1 (x) Tr_0[rho]``: overwrite qubit 0, keep the rest."""
    if rho1.shape != (2, 2) or rho.shape[0] < 4:
        raise ValueError("need a single-qubit input and a state of at least 2 qubits")
    return np.kron(rho1, partial_trace(rho, 0))


# --- observable sets -------------------------------------------------------


def _pairs(n):
    return list(combinations(range(n), 2))


def _zz_zx_pairs(n):
    pairs = [(i, i + 1) for i in range(n - 1)]
    if n >= 3:
        pairs.append((0, 2))
    return pairs


def observable_labels(name: str, n: int) -> list[str]:
    """Pauli strings of a named observable set on ``n`` qubits."""
    key = name.upper().replace(" ", "")
    if key == "Z":
        return [pauli_label({i: "Z"}, n) for i in range(n)]
    if key == "ZZ":
        return [pauli_label({i: "Z", j: "Z"}, n) for i, j in _pairs(n)]
    if key == "Z+ZZ":
        return observable_labels("Z", n) + observable_labels("ZZ", n)
    if key in ("XXXYYXYY", "XX+XY+YX+YY"):
        return [pauli_label({i: a, j: b}, n) for a, b in ("XX", "XY", "YX", "YY") for i, j in _pairs(n)]
    if key == "ZZ+ZX":
        pairs = _zz_zx_pairs(n)
        return [pauli_label({i: "Z", j: "Z"}, n) for i, j in pairs] + [
            pauli_label({i: "Z", j: "X"}, n) for i, j in pairs
        ]
    if key in ("LOCAL2", "1+2-LOCAL"):
        singles = [pauli_label({i: a}, n) for a in "XYZ" for i in range(n)]
        doubles = [pauli_label({i: a, j: b}, n) for i, j in _pairs(n) for a in "XYZ" for b in "XYZ"]
        return singles + doubles
    raise ValueError(f"unknown observable set {name!r}")


@dataclass(frozen=True)
class ObservableSet:
    """Named (or custom) list of Pauli strings sampled ``multiplex`` times per step."""

    name: str = "ZZ"
    multiplex: int = 1
    custom: tuple[str, ...] = ()

    def __post_init__(self):
        if self.multiplex < 1:
            raise ValueError("multiplex factor must be >= 1")

    def labels(self, n: int) -> list[str]:
        if self.custom:
            labels = [c.upper() for c in self.custom]
            for lab in labels:
                if len(lab) != n or set(lab) - set("IXYZ") or set(lab) == {"I"}:
                    raise ValueError(f"invalid observable {lab!r} for {n} qubits")
            return labels
        return observable_labels(self.name, n)

    def column_names(self, n: int) -> list[str]:
        labels = self.labels(n)
        if self.multiplex == 1:
            return labels
        return [f"{lab}@{j}/{self.multiplex}" for j in range(1, self.multiplex + 1) for lab in labels]

    def size(self, n: int) -> int:
        return len(self.labels(n)) * self.multiplex


def measure_observables(rho: np.ndarray, labels: Sequence[str]) -> np.ndarray:
    """``Tr[O rho]`` for each Pauli string in ``labels``."""
    vals = np.array([np.trace(pauli_operator(lab) @ rho) for lab in labels])
    return vals.real


# --- run configuration -----------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = field(default_factory=ModelParams)
    delta_t: float = 10.0
    washout: int = 1000
    length: int = 10_000
    encoding: str = "mixed_z"
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    observables: ObservableSet = field(default_factory=ObservableSet)
    readout_sigma: float = 0.001
    input_seed: int = 0
    readout_seed: int = 0

    def __post_init__(self):
        if self.length < 1 or self.washout < 0 or self.delta_t <= 0 or self.readout_sigma < 0:
            raise ValueError("invalid run configuration")
        if self.encoding not in ENCODINGS:
            raise ValueError(f"unknown encoding {self.encoding!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=list).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def draw_inputs(n: int, seed: int) -> np.ndarray:
    """Uniform inputs in [0, 1] from the named input stream of ``seed``."""
    return substream(seed, "inputs").uniform(0.0, 1.0, size=n)


@dataclass
class RunResult:
    readout: np.ndarray  # (L, M * V), noiseless expectation values
    final_state: np.ndarray
    columns: list[str]
    states: dict[int, np.ndarray] = field(default_factory=dict)


class ReservoirEngine:
    """Precomputed interval maps for one realization, noise model and readout."""

    def __init__(self, realization: HamiltonianRealization, config: RunConfig):
        self.realization = realization
        self.config = config
        self.n = realization.n_qubits
        self.labels = config.observables.labels(self.n)
        self.columns = config.observables.column_names(self.n)
        V = config.observables.multiplex
        maps = interval_maps(realization, config.delta_t, config.noise, V)
        self.full_map = maps[-1]
        obs_idx = [pauli_index(lab) for lab in self.labels]
        self.n_reduced = 4 ** (self.n - 1)
        # rows: next reduced state, then observables at each sampling time
        gather = np.vstack([self.full_map[: self.n_reduced]] + [m[obs_idx] for m in maps])
        self.active = _ACTIVE[config.encoding]
        blocks = gather.reshape(len(gather), 4, self.n_reduced)[:, self.active]
        self.gather = np.ascontiguousarray(blocks.reshape(len(gather), -1))

    def step(self, reduced: np.ndarray, bloch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Advance one input given its Bloch vector (see :func:`input_bloch`).

        Returns the next reduced coefficients and the readout row.
        """
        out = self.gather @ np.kron(bloch[self.active], reduced)
        return out[: self.n_reduced], out[self.n_reduced :]

    def full_state(self, reduced_before: np.ndarray, bloch: np.ndarray) -> np.ndarray:
        """Density matrix after the step that injects ``bloch``."""
        v = np.kron(bloch, reduced_before)
        return hermitize(from_pauli(self.full_map @ v))


def _as_realization(config: RunConfig, realization) -> HamiltonianRealization:
    if realization is None:
        return sample_hamiltonian(config.model, 0)
    if isinstance(realization, (int, np.integer)):
        return sample_hamiltonian(config.model, int(realization))
    return realization


def run_reservoir(
    config: RunConfig,
    inputs: Sequence[float],
    realization: HamiltonianRealization | int | None = None,
    initial_state: np.ndarray | None = None,
    record_states: Sequence[int] | range | None = None,
    method: str = "transfer",
) -> RunResult:
    """Drive the reservoir over ``inputs`` (washout followed by ``L`` steps).

    Parameters
    ----------
    inputs
        Values in [0, 1]; the first ``config.washout`` are discarded from the
        readout.  The readout has one row per remaining input.
    realization
        A sampled Hamiltonian, a realization index, or ``None`` for index 0.
    initial_state
        Defaults to the maximally mixed state.
    record_states
        Post-washout step indices whose full density matrix is returned.
    """
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 1 or len(inputs) <= config.washout:
        raise ValueError("need more inputs than washout steps")
    if np.any((inputs < 0) | (inputs > 1)):
        raise ValueError("inputs must lie in [0, 1]")
    real = _as_realization(config, realization)
    n = real.n_qubits
    rho0 = maximally_mixed(n) if initial_state is None else np.asarray(initial_state, dtype=complex)
    record = set(record_states or ())
    if method == "transfer":
        return _run_transfer(config, inputs, real, rho0, record)
    if method == "density":
        return _run_density(config, inputs, real, rho0, record)
    raise ValueError(f"unknown method {method!r}")


def _run_transfer(config, inputs, real, rho0, record) -> RunResult:
    eng = ReservoirEngine(real, config)
    reduced = to_pauli(partial_trace(rho0, 0))
    L = len(inputs) - config.washout
    X = np.empty((L, len(eng.columns)))
    states = {}
    blochs = input_bloch_array(inputs, config.encoding)
    for k, b in enumerate(blochs):
        j = k - config.washout
        if j in record:
            states[j] = eng.full_state(reduced, b)
        last = reduced
        reduced, row = eng.step(reduced, b)
        if j >= 0:
            X[j] = row
    final = eng.full_state(last, blochs[-1])
    return RunResult(X, final, eng.columns, states)


def _sub_intervals(config: RunConfig) -> tuple[int, float, NoiseSpec]:
    V = config.observables.multiplex
    noise = config.noise
    if noise.active and noise.eta % V:
        raise ValueError(f"multiplex factor {V} does not divide eta={noise.eta}")
    sub_noise = replace(noise, eta=noise.eta // V if noise.active else noise.eta)
    return V, config.delta_t / V, sub_noise


def _run_density(config, inputs, real, rho0, record) -> RunResult:
    from .noise import noisy_interval

    V, dt_sub, sub_noise = _sub_intervals(config)
    labels = config.observables.labels(real.n_qubits)
    columns = config.observables.column_names(real.n_qubits)
    L = len(inputs) - config.washout
    X = np.empty((L, len(columns)))
    states = {}
    rho = rho0
    for k, s in enumerate(inputs):
        j = k - config.washout
        rho = inject_input(rho, encode_input(s, config.encoding))
        row = []
        for _ in range(V):
            rho = noisy_interval(rho, real, dt_sub, sub_noise)
            row.append(measure_observables(rho, labels))
        if j >= 0:
            X[j] = np.concatenate(row)
            if j in record:
                states[j] = rho
    return RunResult(X, rho, columns, states)


def multiplex_readout(config: RunConfig, inputs, V: int, realization=None, method: str = "transfer") -> np.ndarray:
    """Readout with each observable sampled ``V`` times per input interval.

    Columns are grouped by sampling time: block ``j`` (``j = 1..V``) holds the
    set measured ``j * Delta t / V`` after the injection.
    """
    cfg = replace(config, observables=replace(config.observables, multiplex=V))
    return run_reservoir(cfg, inputs, realization, method=method).readout


def add_readout_noise(X: np.ndarray, sigma: float, seed: int, stream="readout") -> np.ndarray:
    """Add i.i.d. Gaussian shot noise of standard deviation ``sigma``.

    ``stream`` is a name or a tuple path under ``seed`` (see :func:`substream`).
    """
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return np.array(X, dtype=float, copy=True)
    path = stream if isinstance(stream, tuple) else (stream,)
    return X + substream(seed, *path).normal(0.0, sigma, size=np.shape(X))


def stationary_observable_stats(
    config: RunConfig,
    inputs: Sequence[float],
    realizations: Sequence[int] = (0,),
    labels: Sequence[str] | None = None,
) -> dict[str, float]:
    """Mean ``|<O>|`` over post-washout steps and realizations.

    By default ``O`` runs over every 1- and 2-local Pauli string.
    """
    n = config.model.n_qubits
    labels = list(labels) if labels is not None else observable_labels("local2", n)
    cfg = replace(config, observables=ObservableSet(custom=tuple(labels)))
    acc = np.zeros(len(labels))
    for r in realizations:
        acc += np.abs(run_reservoir(cfg, inputs, r).readout).mean(axis=0)
    return dict(zip(labels, acc / len(realizations)))


def trajectory(
    config: RunConfig,
    inputs: Sequence[float],
    window: int = 4,
    realization=None,
    labels: Sequence[str] | None = None,
) -> list[tuple[int, float, str, float]]:
    """Sub-step resolved expectation values over the last ``window`` inputs.

    Returns ``(step, time_since_injection, observable, value)`` records; the
    ``time = 0`` sample is taken right after the injection.
    """
    real = _as_realization(config, realization)
    n = real.n_qubits
    labels = list(labels) if labels is not None else observable_labels("Z", n)
    inputs = np.asarray(inputs, dtype=float)
    head, tail = inputs[:-window], inputs[-window:]
    if len(head):
        warm = replace(config, washout=len(head) - 1, observables=ObservableSet("Z"))
        rho = run_reservoir(warm, head, real).final_state
    else:
        rho = maximally_mixed(n)
    eta = config.noise.eta
    dt = config.delta_t / eta
    U = real.propagator(dt)
    Ud = U.conj().T
    records = []
    for w, s in enumerate(tail):
        step = len(head) + w
        rho = inject_input(rho, encode_input(s, config.encoding))
        for lab, v in zip(labels, measure_observables(rho, labels)):
            records.append((step, 0.0, lab, float(v)))
        for j in range(1, eta + 1):
            rho = U @ rho @ Ud
            if config.noise.active:
                rho = apply_dissipation(rho, config.noise.axis, config.noise.p_err)
            for lab, v in zip(labels, measure_observables(rho, labels)):
                records.append((step, j * dt, lab, float(v)))
    return records


def write_trajectory_csv(records, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "substep_time", "observable", "value"])
        for step, t, lab, v in records:
            w.writerow([step, repr(t), lab, repr(v)])


def save_readout(path: str | Path, X: np.ndarray, columns: Sequence[str], meta: dict | None = None) -> None:
    """Write a readout matrix as CSV (``#`` provenance lines, then a header) or ``.npz``."""
    path = Path(path)
    meta = meta or {}
    if path.suffix == ".npz":
        np.savez(path, readout=X, columns=np.array(columns), meta=json.dumps(meta, sort_keys=True))
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for k in sorted(meta):
            fh.write(f"# {k}={meta[k]}\n")
        w = csv.writer(fh)
        w.writerow(columns)
        for row in X:
            w.writerow([repr(float(v)) for v in row])


def load_readout(path: str | Path) -> tuple[np.ndarray, list[str], dict]:
    path = Path(path)
    if path.suffix == ".npz":
        with np.load(path) as z:
            return z["readout"], list(z["columns"]), json.loads(str(z["meta"]))
    meta, rows, header = {}, [], None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k] = v
            elif header is None:
                header = next(csv.reader([line]))
            elif line.strip():
                rows.append([float(v) for v in line.split(",")])
    return np.array(rows), header, meta
