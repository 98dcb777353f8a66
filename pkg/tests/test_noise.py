import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mbqrc.linalg import (
    check_density_matrix,
    ket,
    local_pauli,
    maximally_mixed,
    projector,
    random_density_matrix,
)
from mbqrc.noise import (
    NoiseSpec,
    apply_dissipation,
    apply_flip_channel,
    gamma_from_perr,
    noisy_interval,
    perr_from_gamma,
)
from mbqrc.spin_model import ModelParams, sample_hamiltonian
from oracles import apply_superop, flip_liouvillian, lindblad_rk4_propagator, max_element_map_error

PLUS = projector((ket("0") + ket("1")) / np.sqrt(2))


def test_perr_gamma_examples():
    assert perr_from_gamma(0.0, 1.0) == 0.0
    assert abs(perr_from_gamma(math.log(2) / 2, 1.0) - 0.25) < 1e-15
    assert abs(perr_from_gamma(1e3, 1.0) - 0.5) < 1e-15
    assert gamma_from_perr(0.0, 1.0) == 0.0
    assert abs(gamma_from_perr(0.25, 1.0) - math.log(2) / 2) < 1e-15
    for p in np.linspace(0, 0.49, 50):
        assert abs(perr_from_gamma(gamma_from_perr(p, 0.2), 0.2) - p) < 1e-12
    with pytest.raises(ValueError):
        gamma_from_perr(0.5, 1.0)
    with pytest.raises(ValueError):
        perr_from_gamma(-1.0, 1.0)


def test_noise_spec_validation_and_eta_rescaling():
    with pytest.raises(ValueError):
        NoiseSpec("y", 0.1)
    with pytest.raises(ValueError):
        NoiseSpec("x", 0.6)
    with pytest.raises(ValueError):
        NoiseSpec("x", 0.1, eta=0)
    a = NoiseSpec("x", 0.05, 50)
    b = a.with_eta(100)
    assert b.eta == 100 and b.p_err < a.p_err
    assert abs(gamma_from_perr(a.p_err, 10 / 50) - gamma_from_perr(b.p_err, 10 / 100)) < 1e-12
    assert not NoiseSpec("z", 0.0).active and not NoiseSpec("none", 0.1).active


def test_flip_channel_examples():
    rho = random_density_matrix(2, np.random.default_rng(0))
    assert np.array_equal(apply_flip_channel(rho, "x", 0.0, 1), rho)
    assert np.abs(apply_flip_channel(PLUS, "z", 0.5, 0) - np.eye(2) / 2).max() < 1e-15
    d = np.diag([0.3, 0.7]).astype(complex)
    assert np.abs(apply_flip_channel(d, "x", 0.5, 0) - np.eye(2) / 2).max() < 1e-15
    with pytest.raises(ValueError):
        apply_flip_channel(rho, "x", 0.1, 2)


def test_dissipation_equals_full_expansion():
    # (1-p)^N rho + (1-p)^{N-1} p sum_i S_i rho S_i + ... over all subsets
    n, p = 3, 0.13
    rho = random_density_matrix(n, np.random.default_rng(1))
    for axis in "xz":
        S = [local_pauli(axis.upper(), q, n) for q in range(n)]
        full = np.zeros_like(rho)
        for mask in range(2**n):
            op = np.eye(2**n, dtype=complex)
            k = 0
            for q in range(n):
                if mask >> q & 1:
                    op = op @ S[q]
                    k += 1
            full += (1 - p) ** (n - k) * p**k * op @ rho @ op
        assert np.abs(apply_dissipation(rho, axis, p) - full).max() < 1e-15
        assert np.abs(apply_dissipation(rho, axis, p, order=[2, 0, 1]) - full).max() < 1e-15


def test_noiseless_interval_is_unitary_evolution():
    real = sample_hamiltonian(ModelParams(W=1.0, seed=2))
    rho = random_density_matrix(5, np.random.default_rng(2))
    U = real.propagator(10.0)
    ref = U @ rho @ U.conj().T
    for noise in (NoiseSpec(), NoiseSpec("x", 0.0), NoiseSpec("none", 0.3)):
        assert np.abs(noisy_interval(rho, real, 10.0, noise) - ref).max() < 1e-10


@pytest.mark.parametrize("axis", ["x", "z"])
def test_trotter_matches_dense_lindblad(axis):
    real = sample_hamiltonian(ModelParams(n_qubits=2, W=1.0, seed=7))
    rho0 = random_density_matrix(2, np.random.default_rng(7))
    T = 10.0
    gamma = gamma_from_perr(0.05, T / 50)
    exact = lindblad_rk4_propagator(real.matrix, gamma, axis, T)
    state_err = np.abs(noisy_interval(rho0, real, T, NoiseSpec(axis, 0.05, 50)) - apply_superop(exact, rho0)).max()
    assert state_err < 1e-2
    errs = []
    for eta in (25, 50, 100, 200):
        noise = NoiseSpec(axis, perr_from_gamma(gamma, T / eta), eta)
        errs.append(max_element_map_error(lambda P: noisy_interval(P, real, T, noise), exact, 2))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    # first order: each doubling at least about halves the error, tending to exactly 2
    assert np.all(ratios > 1.8), ratios
    assert abs(ratios[-1] - 2) < 0.25, ratios


def test_rk4_oracle_against_expm():
    from scipy.linalg import expm

    real = sample_hamiltonian(ModelParams(n_qubits=2, W=3.0, seed=1))
    L = flip_liouvillian(real.matrix, 0.1, "z")
    assert np.abs(lindblad_rk4_propagator(real.matrix, 0.1, "z", 10.0) - expm(10.0 * L)).max() < 1e-9


def test_strong_bit_flip_approaches_maximally_mixed():
    real = sample_hamiltonian(ModelParams(seed=3))
    rho = projector(ket("00000"))
    noise = NoiseSpec("x", 0.05)
    dists = []
    for _ in range(5):
        rho = noisy_interval(rho, real, 10.0, noise)
        dists.append(np.abs(rho - maximally_mixed(5)).max())
    assert np.all(np.diff(dists) < 0)
    assert dists[-1] < 1e-3


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    axis=st.sampled_from(["x", "z"]),
    p=st.floats(0.0, 0.5),
    eta=st.integers(1, 8),
)
def test_noisy_interval_stays_physical(seed, axis, p, eta):
    rng = np.random.default_rng(seed)
    real = sample_hamiltonian(ModelParams(n_qubits=3, W=2.0, seed=seed % 1000))
    rho = random_density_matrix(3, rng, rank=int(rng.integers(1, 9)))
    out = noisy_interval(rho, real, 10.0, NoiseSpec(axis, p, eta))
    assert abs(np.trace(out) - 1) < 1e-12
    check_density_matrix(out, herm_tol=1e-10, pos_tol=1e-9)
