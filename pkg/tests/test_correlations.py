import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mbqrc.correlations import (
    MEASURES,
    CorrelationReport,
    all_measures,
    bipartitions,
    classical_correlations,
    l1_coherence,
    local_coherence,
    mean_negativity,
    mutual_information,
    negativity,
    quantum_hookup,
    relative_entropy_coherence,
    stationary_correlation_sweep,
    write_sweep_csv,
)
from mbqrc.linalg import ket, maximally_mixed, projector, random_density_matrix
from mbqrc.noise import NoiseSpec
from mbqrc.reservoir import RunConfig, draw_inputs
from mbqrc.spin_model import ModelParams
from oracles import negativity_bruteforce

BELL = projector((ket("00") + ket("11")) / np.sqrt(2))
GHZ3 = projector((ket("000") + ket("111")) / np.sqrt(2))
PLUS3 = projector(np.ones(8) / np.sqrt(8))


def test_bell_state_values():
    m = all_measures(BELL)
    assert abs(m["C_l1"] - 1) < 1e-12
    assert abs(m["C_rel"] - 1) < 1e-12
    assert abs(m["T"] - 2) < 1e-12
    assert abs(m["K"] - 1) < 1e-12
    assert abs(m["M_hookup"] - 2) < 1e-12
    assert abs(m["C_L"]) < 1e-12
    assert abs(m["N_neg"] - 0.5) < 1e-12


def test_ghz_and_product_values():
    m = all_measures(GHZ3)
    assert abs(m["C_rel"] - 1) < 1e-12 and abs(m["T"] - 3) < 1e-12 and abs(m["K"] - 2) < 1e-12
    assert abs(m["N_neg"] - 0.5) < 1e-12
    p = all_measures(PLUS3)
    assert abs(p["C_l1"] - 7) < 1e-12 and abs(p["C_l1_norm"] - 1) < 1e-12
    assert abs(p["C_rel"] - 3) < 1e-12 and abs(p["C_L"] - 3) < 1e-12
    assert abs(p["T"]) < 1e-12 and abs(p["K"]) < 1e-12 and abs(p["N_neg"]) < 1e-12
    z = all_measures(maximally_mixed(3))
    assert max(abs(v) for v in z.values()) < 1e-12


def test_single_measure_functions_agree_with_all_measures():
    rho = random_density_matrix(3, np.random.default_rng(0))
    m = all_measures(rho)
    assert abs(l1_coherence(rho) - m["C_l1"]) < 1e-12
    assert abs(l1_coherence(rho, normalized=True) - m["C_l1_norm"]) < 1e-12
    assert abs(relative_entropy_coherence(rho) - m["C_rel"]) < 1e-12
    assert abs(mutual_information(rho) - m["T"]) < 1e-12
    assert abs(local_coherence(rho) - m["C_L"]) < 1e-12
    assert abs(quantum_hookup(rho) - m["M_hookup"]) < 1e-12
    assert abs(classical_correlations(rho) - m["K"]) < 1e-12
    assert abs(np.mean([negativity(rho, A) for A in bipartitions(3)]) - m["N_neg"]) < 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 4), rank=st.integers(1, 4))
def test_decomposition_identities(seed, n, rank):
    rho = random_density_matrix(n, np.random.default_rng(seed), rank=rank)
    m = all_measures(rho)
    assert abs(m["M_hookup"] - (m["T"] + m["C_L"])) < 1e-9
    assert abs(m["M_hookup"] - (m["C_rel"] + m["K"])) < 1e-9
    for key in ("C_rel", "T", "K", "C_L", "M_hookup", "N_neg"):
        assert m[key] > -1e-9


def test_bipartitions_count_and_complements():
    for n in range(2, 7):
        parts = bipartitions(n)
        assert len(parts) == 2 ** (n - 1) - 1
        assert all(n - 1 not in A for A in parts)
    with pytest.raises(ValueError):
        bipartitions(1)


def test_negativity_matches_bruteforce_and_is_complement_symmetric():
    rng = np.random.default_rng(1)
    for rank in (1, 2, 8):
        rho = random_density_matrix(4, rng, rank=rank)
        for A in bipartitions(4):
            B = [q for q in range(4) if q not in A]
            v = negativity(rho, A)
            assert abs(v - negativity_bruteforce(rho, A)) < 1e-10
            assert abs(v - negativity(rho, B)) < 1e-10


def test_report_statistics():
    rng = np.random.default_rng(2)
    windows = [[random_density_matrix(2, rng) for _ in range(3)] for _ in range(4)]
    rep = CorrelationReport.from_windows(windows)
    per = np.array([[np.mean([all_measures(r)[m] for r in w]) for m in MEASURES] for w in windows])
    assert np.abs(per - rep.per_realization).max() < 1e-12
    assert abs(rep.K - per[:, MEASURES.index("K")].mean()) < 1e-12
    assert abs(rep.stderr["T"] - per[:, 3].std(ddof=1) / 2) < 1e-12
    with pytest.raises(AttributeError):
        rep.nonexistent
    with pytest.raises(ValueError):
        CorrelationReport.from_windows([[]])


def test_sweep_shares_noiseless_cell_and_is_deterministic(tmp_path):
    cfg = RunConfig(model=ModelParams(W=0.0, seed=4), washout=30, input_seed=4)
    rows = stationary_correlation_sweep(cfg, [0.0, 0.05], axes=("x", "z"), n_realizations=2, window=3)
    assert [(a, p) for a, p, _ in rows] == [("x", 0.0), ("x", 0.05), ("z", 0.0), ("z", 0.05)]
    assert rows[0][2] is rows[2][2]
    # strong bit flip decoheres far more than the noiseless reservoir
    assert rows[1][2].C_l1 < 0.1 * rows[0][2].C_l1
    again = stationary_correlation_sweep(cfg, [0.0, 0.05], axes=("x", "z"), n_realizations=2, window=3)
    write_sweep_csv(rows, tmp_path / "a.csv", 4)
    write_sweep_csv(again, tmp_path / "b.csv", 4)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert len((tmp_path / "a.csv").read_text().splitlines()) == 1 + 4 * len(MEASURES)


def test_sweep_input_length_checked():
    from mbqrc.correlations import stationary_states

    cfg = RunConfig(washout=10)
    with pytest.raises(ValueError):
        stationary_states(cfg, draw_inputs(5, 0), 0, window=3)
