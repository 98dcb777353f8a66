import json

import pytest

from mbqrc.cli import main
from mbqrc.config import DEFAULTS, KINDS, ConfigError, load_config, make_config
from mbqrc.experiments import noise_spec, run_experiment

TINY = {
    "seed": 3,
    "n_realizations": 2,
    "regimes": [0.0, 10.0],
    "run": {"length": 700, "washout": 100},
    "noise": {"p_grid": [0.0, 0.01]},
    "ipc": {"d_max": 2, "max_delay": {"1": 30, "2": 10}},
    "correlations": {"washout": 50, "window": 4},
    "phase_diagram": {"h": [1.0], "W": [0.0, 10.0], "realizations": 3, "coherence_realizations": 2, "washout": 50, "window": 4},
    "stationary_stats": {"steps": 150, "ipc_p_grid": [0.0]},
    "trajectories": {"cells": [{"W": 0.0, "axis": "x", "p_err": 0.05}]},
}


def tiny(kind, **kw):
    tree = json.loads(json.dumps(TINY))
    tree["kind"] = kind
    tree.update(kw)
    return make_config(tree)


def test_defaults_and_overrides():
    cfg = make_config({"kind": "ipc"}, seed=5)
    assert cfg.seed == 5 and cfg.length == 10_000
    assert make_config({"kind": "ipc", "scale": "paper"}, seed=5).length == 100_000
    assert cfg["noise"]["p_grid"] == DEFAULTS["noise"]["p_grid"]
    assert cfg.config_hash() == make_config({"kind": "ipc", "seed": 5}).config_hash()
    assert cfg.config_hash() != make_config({"kind": "ipc", "seed": 6}).config_hash()


@pytest.mark.parametrize(
    "tree",
    [
        {"kind": "ipc"},
        {"kind": "ipc", "seed": 1, "bogus": 2},
        {"kind": "ipc", "seed": 1, "run": {"lenght": 5}},
        {"kind": "nope", "seed": 1},
        {"kind": "ipc", "seed": -1},
        {"kind": "ipc", "seed": 1, "encodings": ["mixed_y"]},
        {"kind": "ipc", "seed": 1, "noise": {"axes": ["y"]}},
        {"kind": "ipc", "seed": 1, "noise": {"p_grid": [0.7]}},
        {"kind": "ipc", "seed": 1, "scale": "huge"},
        {"kind": "ipc", "seed": 1, "model": 3},
    ],
)
def test_invalid_configs_rejected(tree):
    with pytest.raises(ConfigError):
        make_config(tree)


def test_load_yaml_and_json(tmp_path):
    (tmp_path / "a.yaml").write_text("kind: ipc\nseed: 4\nrun: {length: 2000}\n")
    (tmp_path / "a.json").write_text(json.dumps({"kind": "ipc", "seed": 4, "run": {"length": 2000}}))
    a = load_config(tmp_path / "a.yaml")
    b = load_config(tmp_path / "a.json")
    assert a.tree == b.tree and a.length == 2000
    assert load_config(tmp_path / "a.yaml", seed=9).seed == 9


def test_noise_rescaled_to_run_eta():
    cfg = make_config({"kind": "ipc", "seed": 1, "run": {"eta": 100}})
    n = noise_spec("x", 0.05, cfg)
    assert n.eta == 100 and 0.02 < n.p_err < 0.05
    assert noise_spec("x", 0.05, make_config({"kind": "ipc", "seed": 1})).p_err == 0.05


@pytest.mark.parametrize("kind", KINDS)
def test_every_kind_runs_and_writes_manifest(kind, tmp_path):
    bundle = run_experiment(tiny(kind), tmp_path)
    assert bundle.files
    man = json.loads(bundle.manifest_path.read_text())
    assert man["seed"] == 3 and man["kind"] == kind
    assert man["config_hash"] == tiny(kind).config_hash()
    for f in bundle.files:
        text = (tmp_path / f).read_text()
        assert len(text.splitlines()) > 1
        assert "np.float" not in text


@pytest.mark.parametrize("kind", ["ipc", "correlations"])
def test_output_independent_of_worker_count(kind, tmp_path):
    a = run_experiment(tiny(kind), tmp_path / "a", workers=1)
    b = run_experiment(tiny(kind), tmp_path / "b", workers=2)
    for f in a.files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_cli_return_codes(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(dict(TINY, kind="trajectories")))
    assert main(["trajectories", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "trajectories.csv").exists()
    assert "manifest.json" in capsys.readouterr().out
    assert main(["ipc", "--out", str(tmp_path / "x")]) == 2
    assert main(["ipc", "--config", str(cfg)]) == 2
    assert main(["ipc", "--config", str(tmp_path / "missing.yaml"), "--seed", "1"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "ipc", "seed": 1, "bogus": 1}))
    assert main(["ipc", "--config", str(bad)]) == 2
    with pytest.raises(SystemExit):
        main(["not-a-kind"])


def test_encoding_robustness_at_mild_noise(tmp_path):
    tree = {
        "kind": "stationary-stats",
        "seed": 20261017,
        "n_realizations": 2,
        "regimes": [0.0],
        "encodings": ["mixed_z", "pure_z", "mixed_x", "pure_x"],
        "run": {"length": 5000},
        "ipc": {"d_max": 4},
        "stationary_stats": {"steps": 300, "p_grid": [0.0], "ipc_p_grid": [0.0, 0.005]},
    }
    per_cell = run_experiment(make_config(tree), tmp_path).tables["ipc"]
    mean = {(enc, axis): sum(r["normalized"] for r in rows) / len(rows) for (_, enc, _, axis, _), rows in per_cell}
    for axis in ("x", "z"):
        loss = {enc: mean[(enc, "none")] - mean[(enc, axis)] for enc in tree["encodings"]}
        assert loss["mixed_z"] < loss["mixed_x"] and loss["pure_z"] < loss["mixed_x"]
        assert abs(mean[("pure_x", axis)] - mean[("mixed_z", axis)]) < 0.1
