import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import legendre as npleg

from mbqrc.ipc import (
    CapacityEstimator,
    CapacityRecord,
    IPCSettings,
    TargetSpec,
    build_target,
    capacity,
    legendre,
    level_alive,
    level_specs,
    partitions,
    total_ipc,
    train_readout,
    with_bias,
)


def delay_oracle(n_rows, delays, seed=0, washout=300):
    """Readout whose columns are exactly the centered inputs at the given delays."""
    s = np.random.default_rng(seed).uniform(size=washout + n_rows)
    st_ = 2 * s - 1
    k = np.arange(washout, washout + n_rows)
    X = np.stack([st_[k + 1 - d] for d in delays], axis=1)
    return X, s


def test_legendre_examples():
    assert legendre(0, 0.3) == 1.0
    assert legendre(1, 0.3) == 0.3
    assert abs(legendre(2, 0.5) - (-0.125)) < 1e-15
    assert abs(legendre(3, 0.5) - (-0.4375)) < 1e-15
    x = np.linspace(-1, 1, 41)
    for d in range(8):
        ref = npleg.legval(x, [0] * d + [1])
        assert np.abs(legendre(d, x) - ref).max() < 1e-13
        assert abs(legendre(d, 1.0) - 1.0) < 1e-13
    with pytest.raises(ValueError):
        legendre(-1, 0.0)


def test_legendre_orthogonality_under_uniform_inputs():
    x = np.random.default_rng(1).uniform(-1, 1, 400_000)
    for a in range(4):
        for b in range(4):
            m = np.mean(legendre(a, x) * legendre(b, x))
            ref = 1.0 / (2 * a + 1) if a == b else 0.0
            assert abs(m - ref) < 0.01


def test_target_spec_parse_label_and_validation():
    t = TargetSpec(((3, 1), (1, 2)))
    assert t.factors == ((1, 2), (3, 1))
    assert t.degree == 3 and t.max_delay == 3
    assert TargetSpec.parse(t.label) == t
    for bad in [(), ((1, 1), (1, 2)), ((0, 1),), ((1, 0),)]:
        with pytest.raises(ValueError):
            TargetSpec(bad)


def test_build_target_examples():
    s = np.array([0.0, 0.5, 1.0, 0.25])
    y = build_target(TargetSpec(((1, 1),)), s)
    assert np.array_equal(y, [-1.0, 0.0, 1.0, -0.5])
    y = build_target(TargetSpec(((1, 1), (2, 1))), s)
    assert np.array_equal(y, [0.0, 0.0, -0.5])
    y = build_target(TargetSpec(((2, 2),)), s)
    assert np.abs(y - legendre(2, np.array([-1.0, 0.0, 1.0]))).max() < 1e-15
    s = np.random.default_rng(2).uniform(size=20_000)
    assert abs(build_target(TargetSpec(((1, 1),)), s).mean()) < 0.02
    assert abs(build_target(TargetSpec(((1, 2), (4, 1))), s).mean()) < 0.02


def test_capacity_examples():
    y = np.random.default_rng(3).normal(size=500)
    assert capacity(y, y) == 1.0
    assert capacity(np.zeros(500), y) == 0.0
    assert capacity(-y, y) == 0.0
    assert capacity(-y, y, clip=False) == -3.0
    assert abs(capacity(0.5 * y, y) - 0.75) < 1e-12
    with pytest.raises(ValueError):
        capacity(y, np.zeros(500))
    with pytest.raises(ValueError):
        capacity(y[:3], y)


def test_train_readout_recovers_realizable_target():
    rng = np.random.default_rng(4)
    X = with_bias(rng.normal(size=(300, 5)))
    w = rng.normal(size=6)
    assert np.abs(train_readout(X, X @ w) - w).max() < 1e-10
    # duplicated column: minimum-norm solution still reproduces the target
    Xd = np.hstack([X, X[:, :1]])
    wd = train_readout(Xd, X @ w)
    assert np.abs(Xd @ wd - X @ w).max() < 1e-10
    with pytest.raises(ValueError):
        train_readout(X[:3], X[:3, 0])
    with pytest.raises(ValueError):
        train_readout(X, np.zeros(300))


def test_partitions_and_levels():
    assert list(partitions(4)) == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]
    assert [sum(1 for _ in partitions(d)) for d in range(1, 7)] == [1, 2, 3, 5, 7, 11]
    lv = level_specs((2, 1), 3)
    assert {t.label for t in lv} == {"1:2|3:1", "1:1|3:2", "2:2|3:1", "2:1|3:2"}
    assert level_specs((1, 1, 1), 2) == []
    assert all(t.max_delay == 5 and t.degree == 3 for t in level_specs((1, 1, 1), 5))
    # levels of a family partition its targets without repeats
    seen = [t for T in range(2, 9) for t in level_specs((2, 1, 1), T)]
    assert len(seen) == len(set(seen))


@given(parts=st.sampled_from([p for d in range(1, 6) for p in partitions(d)]), T=st.integers(1, 9))
def test_level_sizes_match_counting(parts, T):
    from math import comb, factorial
    from collections import Counter

    k = len(parts)
    perms = factorial(k)
    for c in Counter(parts).values():
        perms //= factorial(c)
    expected = comb(T - 1, k - 1) * perms if T >= k else 0
    assert len(level_specs(parts, T)) == expected


def test_estimator_targets_match_build_target():
    X, s = delay_oracle(2000, [1, 2], seed=5)
    est = CapacityEstimator(X, s, IPCSettings(d_max=3), history=10)
    specs = [TargetSpec(((1, 1),)), TargetSpec(((2, 2), (5, 1))), TargetSpec(((1, 1), (3, 1), (7, 1)))]
    Y = est.targets(specs)
    for spec, y in zip(specs, Y):
        full = build_target(spec, s)
        # row j of the used block ends at input index est.base + j
        ref = full[est.base - spec.max_delay + 1 :][: Y.shape[1]]
        assert np.abs(y - ref).max() < 1e-14


def test_fast_score_equals_explicit_regression():
    rng = np.random.default_rng(6)
    X, s = delay_oracle(1200, [1, 3], seed=6)
    X = X + 0.3 * rng.normal(size=X.shape)
    est = CapacityEstimator(X, s, IPCSettings(d_max=2), history=5)
    spec = TargetSpec(((1, 1), (2, 1)))
    y = est.targets([spec])[0]
    n = est.n_half
    Xb = with_bias(X[est.base - (len(s) - X.shape[0]) :][: 2 * n])
    w = train_readout(Xb[:n], y[:n])
    ref = capacity(Xb[n:] @ w, y[n:], clip=False)
    assert abs(est.capacities(y[None])[0] - ref) < 1e-10


def test_delay_oracle_saturates_linear_capacity():
    X, s = delay_oracle(6000, range(1, 11), seed=7)
    rep = total_ipc(X, s, IPCSettings(d_max=3, seed=7))
    by = rep.by_degree()
    assert abs(by[1] - 10) < 0.01
    assert by[2] < 0.05 and by[3] < 0.05
    assert 0 <= rep.total <= rep.n_outputs
    assert rep.residual >= 0


def test_noise_readout_has_no_capacity():
    rng = np.random.default_rng(8)
    s = rng.uniform(size=6300)
    X = rng.normal(size=(6000, 10))
    rep = total_ipc(X, s, IPCSettings(d_max=3, seed=8))
    assert rep.total < 0.05


def test_duplicate_column_does_not_change_capacity():
    rng = np.random.default_rng(9)
    X, s = delay_oracle(4000, [1, 2, 4], seed=9)
    X = np.tanh(X @ rng.normal(size=(3, 4))) + 0.01 * rng.normal(size=(4000, 4))
    a = total_ipc(X, s, IPCSettings(d_max=2, seed=1))
    b = total_ipc(np.hstack([X, X[:, :1]]), s, IPCSettings(d_max=2, seed=1))
    assert abs(a.raw_total - b.raw_total) < 1e-6


def test_report_determinism_and_csv(tmp_path):
    X, s = delay_oracle(3000, [1, 2], seed=10)
    X = X + 0.1 * np.random.default_rng(10).normal(size=X.shape)
    a = total_ipc(X, s, IPCSettings(d_max=2, seed=3))
    b = total_ipc(X, s, IPCSettings(d_max=2, seed=3))
    assert a.summary() == b.summary()
    a.write_csv(tmp_path / "t.csv")
    a.write_summary_csv(tmp_path / "s.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "target,degree,capacity,threshold,retained"
    assert len(lines) == len(a.records) + 1
    assert "np." not in (tmp_path / "s.csv").read_text()


def test_level_alive_rule():
    spec = TargetSpec(((1, 1),))
    assert not level_alive([CapacityRecord(spec, -0.1, float("nan"), False)])
    assert not level_alive([CapacityRecord(spec, 0.011, 0.01, True)])
    assert level_alive([CapacityRecord(spec, 0.5, 0.01, True)])


def test_settings_validation_and_insufficient_rows():
    with pytest.raises(ValueError):
        IPCSettings(d_max=0)
    with pytest.raises(ValueError):
        IPCSettings(n_surrogates=1)
    X, s = delay_oracle(300, [1], seed=11)
    with pytest.raises(ValueError):
        CapacityEstimator(X, s, IPCSettings(), history=10)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 1000), scale=st.floats(0.0, 2.0))
def test_capacity_bounded_by_outputs(seed, scale):
    rng = np.random.default_rng(seed)
    X, s = delay_oracle(1500, [1, 2, 3], seed=seed)
    X = X + scale * rng.normal(size=X.shape)
    rep = total_ipc(X, s, IPCSettings(d_max=2, seed=seed, max_delay={1: 20, 2: 10}))
    assert 0.0 <= rep.total <= rep.n_outputs
    assert all(r.contribution <= 1.0 for r in rep.records)
