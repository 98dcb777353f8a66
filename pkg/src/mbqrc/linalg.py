"""Dense linear algebra for multi-qubit operators.

Conventions
-----------
Matrices are plain complex ``numpy`` arrays in C (row-major) order.  Qubit 0
is the leftmost tensor factor, so for ``N`` qubits the computational basis
index of ``|b_0 b_1 ... b_{N-1}>`` is ``sum_i b_i 2**(N-1-i)``.  Qubit 0 is
the qubit that receives the input in the reservoir map.

Entropies are measured in bits.
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable

import numpy as np

MAX_QUBITS = 10
EIG_CLAMP = 1e-12
HERMITIAN_TOL = 1e-9

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def n_qubits_of(m: np.ndarray) -> int:
    """Number of qubits of a square ``2**N`` matrix."""
    dim = m.shape[0]
    if m.ndim != 2 or m.shape[1] != dim or dim < 1 or dim & (dim - 1):
        raise ValueError(f"expected a square 2**N matrix, got shape {m.shape}")
    return dim.bit_length() - 1


def _check_n(n: int) -> None:
    if n < 1 or n > MAX_QUBITS:
        raise ValueError(f"qubit count {n} outside supported range 1..{MAX_QUBITS}")


def pauli_operator(string: str) -> np.ndarray:
    """Matrix of a Pauli string such as ``"ZIX"``.

    The first letter acts on qubit 0 (leftmost factor).
    """
    string = string.upper()
    _check_n(len(string))
    try:
        factors = [PAULI[c] for c in string]
    except KeyError as err:
        raise ValueError(f"invalid Pauli letter in {string!r}") from err
    return reduce(np.kron, factors)


def local_pauli(letter: str, qubit: int, n: int) -> np.ndarray:
    """``sigma^letter`` acting on ``qubit`` of an ``n``-qubit register."""
    if not 0 <= qubit < n:
        raise ValueError(f"qubit {qubit} out of range for {n} qubits")
    return pauli_operator("I" * qubit + letter + "I" * (n - qubit - 1))


def pauli_label(letters: dict[int, str], n: int) -> str:
    """Build a Pauli string from a ``{qubit: letter}`` map."""
    chars = ["I"] * n
    for q, c in letters.items():
        chars[q] = c
    return "".join(chars)


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def hermitize(m: np.ndarray) -> np.ndarray:
    """Return ``(m + m^dagger) / 2``."""
    return 0.5 * (m + m.conj().T)


def _as_qubit_list(qubits, n: int) -> list[int]:
    if isinstance(qubits, (int, np.integer)):
        qubits = [int(qubits)]
    qubits = sorted(set(int(q) for q in qubits))
    for q in qubits:
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range for {n} qubits")
    return qubits


def partial_trace(rho: np.ndarray, qubits: int | Iterable[int]) -> np.ndarray:
    """Trace out ``qubits`` (a single index or an iterable of indices)."""
    n = n_qubits_of(rho)
    traced = _as_qubit_list(qubits, n)
    if len(traced) == n:
        return np.array([[np.trace(rho)]])
    keep = [q for q in range(n) if q not in traced]
    t = rho.reshape((2,) * (2 * n))
    # bring traced axes to the end: ket axes 0..n-1, bra axes n..2n-1
    perm = keep + [k + n for k in keep] + traced + [q + n for q in traced]
    t = t.transpose(perm)
    dk, dt = 2 ** len(keep), 2 ** len(traced)
    t = t.reshape(dk, dk, dt, dt)
    return np.trace(t, axis1=2, axis2=3)


def reduced_state(rho: np.ndarray, keep: int | Iterable[int]) -> np.ndarray:
    """Marginal on ``keep`` (kept in ascending qubit order)."""
    n = n_qubits_of(rho)
    keep = _as_qubit_list(keep, n)
    return partial_trace(rho, [q for q in range(n) if q not in keep])


def partial_transpose(rho: np.ndarray, subset: int | Iterable[int]) -> np.ndarray:
    """Transpose the tensor indices of the qubits in ``subset``."""
    n = n_qubits_of(rho)
    sub = _as_qubit_list(subset, n)
    if not sub or len(sub) == n:
        raise ValueError("partial transpose needs a nonempty proper subset of qubits")
    t = rho.reshape((2,) * (2 * n))
    axes = list(range(2 * n))
    for q in sub:
        axes[q], axes[q + n] = axes[q + n], axes[q]
    return t.transpose(axes).reshape(rho.shape)


def hermitian_eigendecomposition(m: np.ndarray, tol: float = HERMITIAN_TOL):
    """Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.

    Raises
    ------
    ValueError
        If ``m`` deviates from Hermiticity by more than ``tol`` (max element).
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    return np.linalg.eigh(hermitize(m))


def entropy_of_spectrum(p: np.ndarray) -> float:
    """Shannon entropy in bits; entries below ``EIG_CLAMP`` contribute 0."""
    p = np.asarray(p, dtype=float)
    p = p[p > EIG_CLAMP]
    return float(-np.sum(p * np.log2(p)))


def von_neumann_entropy(rho: np.ndarray) -> float:
    """``-Tr[rho log2 rho]`` in bits."""
    evals = np.linalg.eigvalsh(hermitize(rho))
    return max(entropy_of_spectrum(evals), 0.0)


def unitary_from_spectrum(evals: np.ndarray, evecs: np.ndarray, t: float) -> np.ndarray:
    """``V exp(-i Lambda t) V^dagger`` from a precomputed eigendecomposition."""
    return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T


def unitary_from_hamiltonian(H: np.ndarray, t: float) -> np.ndarray:
    """Propagator ``exp(-i H t)`` via eigendecomposition."""
    evals, evecs = hermitian_eigendecomposition(H)
    return unitary_from_spectrum(evals, evecs, t)


def ket(bits: str) -> np.ndarray:
    """Computational basis ket for a bit string like ``"0101"``."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def maximally_mixed(n: int) -> np.ndarray:
    _check_n(n)
    return np.eye(2**n, dtype=complex) / 2**n


def check_density_matrix(
    rho: np.ndarray,
    herm_tol: float = 1e-10,
    trace_tol: float = 1e-10,
    pos_tol: float = 1e-9,
) -> None:
    """Raise ``ValueError`` unless ``rho`` is a valid density matrix."""
    n_qubits_of(rho)
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > herm_tol:
        raise ValueError(f"not Hermitian (max deviation {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1) > trace_tol:
        raise ValueError(f"trace {tr:.12f} differs from 1")
    lo = np.linalg.eigvalsh(hermitize(rho))[0]
    if lo < -pos_tol:
        raise ValueError(f"negative eigenvalue {lo:.3e}")


def random_density_matrix(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random ``n``-qubit state from a Ginibre ensemble of the given rank."""
    dim = 2**n
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return hermitize(a)
