"""Degree-resolved information processing capacity of one reservoir.

Drives a five-spin reservoir with uniform inputs, reads out the ten ZZ
correlators and measures how much of the readout's capacity bound M = 10 is
spent on each polynomial degree, in the ergodic (W=0) and localized (W=10)
regimes, with and without noise.

    python3 demos/02_capacity_by_regime.py        (about a minute)
"""

from mbqrc.ipc import IPCSettings, total_ipc
from mbqrc.noise import NoiseSpec
from mbqrc.reservoir import ObservableSet, RunConfig, add_readout_noise, draw_inputs, run_reservoir
from mbqrc.spin_model import ModelParams

SEED = 5
L = 5000  # rows per train and per test half

inputs = draw_inputs(1000 + 2 * L, SEED)
settings = IPCSettings(d_max=4, seed=SEED)

print("   W  noise       I_1    I_2    I_3    I_4   I_tot/M")
for W in (0.0, 10.0):
    for noise in (NoiseSpec(), NoiseSpec("x", 0.01), NoiseSpec("z", 0.01)):
        cfg = RunConfig(model=ModelParams(W=W, seed=SEED), length=2 * L, noise=noise, observables=ObservableSet("ZZ"))
        X = run_reservoir(cfg, inputs, realization=0).readout
        X = add_readout_noise(X, cfg.readout_sigma, SEED, ("demo", W, noise.axis))
        rep = total_ipc(X, inputs, settings)
        by = rep.by_degree()
        tag = f"{noise.axis} {noise.p_err:g}" if noise.active else "none"
        print(f"{W:4.0f}  {tag:8s}" + "".join(f"{by[d]:7.3f}" for d in range(1, 5)) + f"{rep.normalized:9.3f}")
