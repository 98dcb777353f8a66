"""Pauli transfer matrices for the per-interval reservoir map.

A state is stored as its real Pauli coefficients ``c_P = Tr[P rho]`` with
Pauli strings indexed in base 4 (``I, X, Y, Z`` -> ``0..3``, qubit 0 most
significant).  In this basis the input qubit's ``I`` block is the first
``4**(N-1)`` entries, the erase-and-write injection is a Kronecker product
of the input Bloch vector with the reduced coefficients, and every Pauli
expectation value is a single entry of the vector.

The noisy interval map is linear and fixed for a realization, so it is
composed once (``eta`` sub-steps by repeated squaring) and each reservoir
step costs one real matrix-vector product.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .linalg import PAULI
from .noise import NoiseSpec

LETTERS = "IXYZ"


@lru_cache(maxsize=None)
def pauli_basis(n: int) -> np.ndarray:
    """All ``4**n`` Pauli strings as an array of shape ``(4**n, 2**n, 2**n)``."""
    mats = np.stack([PAULI[c] for c in LETTERS])
    basis = np.ones((1, 1, 1), dtype=complex)
    for _ in range(n):
        basis = np.einsum("aij,bkl->abikjl", basis, mats)
        a, b, i, k, j, l = basis.shape
        basis = basis.reshape(a * b, i * k, j * l)
    basis.setflags(write=False)
    return basis


def pauli_index(label: str) -> int:
    idx = 0
    for c in label.upper():
        idx = 4 * idx + LETTERS.index(c)
    return idx


def pauli_label_of(index: int, n: int) -> str:
    chars = []
    for _ in range(n):
        index, d = divmod(index, 4)
        chars.append(LETTERS[d])
    return "".join(reversed(chars))


def to_pauli(rho: np.ndarray) -> np.ndarray:
    """Real Pauli coefficients ``Tr[P rho]`` of a state."""
    n = rho.shape[0].bit_length() - 1
    B = pauli_basis(n).reshape(4**n, -1)
    return (B.conj() @ rho.reshape(-1)).real


def from_pauli(c: np.ndarray) -> np.ndarray:
    """Density matrix ``sum_P c_P P / 2**n``."""
    n = (len(c).bit_length() - 1) // 2
    B = pauli_basis(n).reshape(4**n, -1)
    return (np.asarray(c, dtype=complex) @ B).reshape(2**n, 2**n) / 2**n


@lru_cache(maxsize=None)
def _pauli_support(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Flat indices ``j(i) * d + i`` and values ``P[i, j(i)]`` of each Pauli string.

    Every Pauli string has exactly one nonzero per row, at column
    ``j(i) = i XOR xmask``.
    """
    d = 2**n
    P = pauli_basis(n)
    rows = np.arange(d)
    cols = np.argmax(np.abs(P) > 0.5, axis=2)  # (4**n, d)
    vals = P[np.arange(4**n)[:, None], rows[None, :], cols]
    return cols * d + rows[None, :], vals


def unitary_ptm(U: np.ndarray, chunk: int = 128) -> np.ndarray:
    """Transfer matrix ``R[a, b] = Tr[P_a U P_b U^dagger] / 2**n``."""
    n = U.shape[0].bit_length() - 1
    d, m = 2**n, 4**n
    P = pauli_basis(n)
    flat_idx, vals = _pauli_support(n)
    R = np.empty((m, m))
    Ud = U.conj().T
    for start in range(0, m, chunk):
        conj = (U[None] @ P[start : start + chunk] @ Ud[None]).reshape(-1, d * d)
        # Tr[P_a M] = sum_i P_a[i, j(i)] M[j(i), i]
        gathered = conj[:, flat_idx]  # (chunk, m, d)
        R[:, start : start + chunk] = np.einsum("ai,bai->ab", vals, gathered).real
    return R / d


def flip_diagonal(n: int, axis: str, p: float) -> np.ndarray:
    """Diagonal transfer matrix of the flip channel on every qubit.

    A Pauli string is damped by ``1 - 2p`` for every qubit whose letter
    anticommutes with the flip operator.
    """
    if axis == "none" or p == 0.0:
        return np.ones(4**n)
    damped = {"x": (2, 3), "z": (1, 2)}[axis]
    digits = np.array([[int(d) for d in np.base_repr(i, 4).zfill(n)] for i in range(4**n)])
    k = np.isin(digits, damped).sum(axis=1)
    return (1.0 - 2.0 * p) ** k


def _ptm(realization, t: float) -> np.ndarray:
    if hasattr(realization, "transfer_matrix"):
        return realization.transfer_matrix(t)
    return unitary_ptm(realization.propagator(t))


def interval_maps(realization, delta_t: float, noise: NoiseSpec, n_samples: int = 1) -> list[np.ndarray]:
    """Transfer matrices after ``j * delta_t / n_samples`` for ``j = 1..n_samples``.

    The last entry is the full interval map.  ``noise.eta`` must be a
    multiple of ``n_samples`` when noise is active.
    """
    n = realization.n_qubits
    if noise.active:
        if noise.eta % n_samples:
            raise ValueError(f"multiplex factor {n_samples} does not divide eta={noise.eta}")
        step = flip_diagonal(n, noise.axis, noise.p_err)[:, None] * _ptm(realization, delta_t / noise.eta)
        sub = np.linalg.matrix_power(step, noise.eta // n_samples)
    else:
        sub = _ptm(realization, delta_t / n_samples)
    maps = [sub]
    for _ in range(n_samples - 1):
        maps.append(sub @ maps[-1])
    return maps
