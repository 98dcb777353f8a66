"""Bit-flip and phase-flip decoherence between input injections.

The Lindblad dynamics ``d rho/dt = -i[H, rho] + gamma sum_i (S_i rho S_i - rho)``
(``S = X`` for bit flip, ``S = Z`` for phase flip) is integrated by
alternating ``eta`` unitary steps of length ``dt = Delta t / eta`` with a
flip channel of probability ``p = (1 - exp(-2 gamma dt)) / 2`` on every qubit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import hermitize, n_qubits_of

AXES = ("x", "z", "none")


@dataclass(frozen=True)
class NoiseSpec:
    axis: str = "none"
    p_err: float = 0.0
    eta: int = 50

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"noise axis must be one of {AXES}, got {self.axis!r}")
        if not 0.0 <= self.p_err <= 0.5:
            raise ValueError(f"p_err must lie in [0, 0.5], got {self.p_err}")
        if self.eta < 1:
            raise ValueError("eta must be >= 1")

    @property
    def active(self) -> bool:
        return self.axis != "none" and self.p_err > 0.0

    def with_eta(self, eta: int) -> "NoiseSpec":
        """Same physical rate ``gamma`` with ``eta`` sub-steps per interval.

        ``p_err`` depends on the sub-step length, so refining the Trotter
        grid at fixed ``gamma`` lowers the per-step flip probability.
        """
        if not self.active or eta == self.eta:
            return NoiseSpec(self.axis, self.p_err, eta)
        gamma_dt = gamma_from_perr(self.p_err, 1.0)  # gamma * old sub-step
        return NoiseSpec(self.axis, perr_from_gamma(gamma_dt * self.eta / eta, 1.0), eta)


def perr_from_gamma(gamma: float, delta_t: float) -> float:
    """Flip probability of one sub-step of length ``delta_t`` at rate ``gamma``."""
    if gamma < 0 or delta_t <= 0:
        raise ValueError("need gamma >= 0 and delta_t > 0")
    return -0.5 * math.expm1(-2.0 * gamma * delta_t)


def gamma_from_perr(p: float, delta_t: float) -> float:
    """Inverse of :func:`perr_from_gamma`."""
    if not 0.0 <= p < 0.5:
        raise ValueError("p must lie in [0, 0.5)")
    if delta_t <= 0:
        raise ValueError("delta_t must be positive")
    return -math.log1p(-2.0 * p) / (2.0 * delta_t)


def _bit_mask(n: int, qubit: int) -> int:
    return 1 << (n - 1 - qubit)


def flip_conjugate(rho: np.ndarray, axis: str, qubit: int) -> np.ndarray:
    """``S_q rho S_q`` for ``S`` the Pauli ``axis`` on ``qubit``."""
    n = n_qubits_of(rho)
    if not 0 <= qubit < n:
        raise ValueError(f"qubit {qubit} out of range for {n} qubits")
    idx = np.arange(2**n)
    mask = _bit_mask(n, qubit)
    if axis == "z":
        s = np.where(idx & mask, -1.0, 1.0)
        return rho * np.outer(s, s)
    if axis == "x":
        perm = idx ^ mask
        return rho[np.ix_(perm, perm)]
    raise ValueError(f"unsupported flip axis {axis!r}")


def apply_flip_channel(rho: np.ndarray, axis: str, p: float, qubit: int) -> np.ndarray:
    """``(1 - p) rho + p S_q rho S_q``."""
    if not 0.0 <= p <= 0.5:
        raise ValueError("p must lie in [0, 0.5]")
    if axis == "none" or p == 0.0:
        n = n_qubits_of(rho)
        if not 0 <= qubit < n:
            raise ValueError(f"qubit {qubit} out of range for {n} qubits")
        return rho.copy()
    return (1.0 - p) * rho + p * flip_conjugate(rho, axis, qubit)


def apply_dissipation(rho: np.ndarray, axis: str, p: float, order=None) -> np.ndarray:
    """Independent flip channel on every qubit.

    The single-qubit channels commute, so the sequential product equals the
    full ``2**N``-term expansion of the multi-qubit map.
    """
    n = n_qubits_of(rho)
    for q in order if order is not None else range(n):
        rho = apply_flip_channel(rho, axis, p, q)
    return rho


def noisy_interval(rho: np.ndarray, realization, delta_T: float, noise: NoiseSpec) -> np.ndarray:
    """Evolve ``rho`` for ``delta_T`` under the Hamiltonian plus flip noise.

    Each of the ``noise.eta`` sub-steps applies the unitary for
    ``delta_T / eta`` first and the per-qubit flip channel second.
    """
    if not noise.active:
        U = realization.propagator(delta_T)
        return hermitize(U @ rho @ U.conj().T)
    U = realization.propagator(delta_T / noise.eta)
    Ud = U.conj().T
    for _ in range(noise.eta):
        rho = U @ rho @ Ud
        rho = apply_dissipation(rho, noise.axis, noise.p_err)
    return hermitize(rho)
