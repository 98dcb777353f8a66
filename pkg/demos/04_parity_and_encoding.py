"""Parity symmetry and the x-basis input encoding.

With eps = 0 the Hamiltonian commutes with the global Z parity.  An input
written along x then only reaches ZZ correlators through even functions of
the inputs, so odd-degree capacity vanishes.  A small transverse field, or
adding ZX correlators to the readout, breaks this and odd degrees return.

    python3 demos/04_parity_and_encoding.py       (about a minute)
"""

from mbqrc.ipc import IPCSettings, total_ipc
from mbqrc.reservoir import ObservableSet, RunConfig, add_readout_noise, draw_inputs, run_reservoir
from mbqrc.spin_model import ModelParams

SEED = 9
L = 5000

inputs = draw_inputs(1000 + 2 * L, SEED)
settings = IPCSettings(d_max=3, seed=SEED)
cases = [("ZZ, eps=0", 0.0, "ZZ"), ("ZZ, eps=0.05", 0.05, "ZZ"), ("ZZ+ZX, eps=0", 0.0, "ZZ+ZX")]

print("case            odd capacity  odd thresholds  even capacity")
for name, eps, obs in cases:
    cfg = RunConfig(model=ModelParams(W=0.0, eps=eps, seed=SEED), length=2 * L, encoding="mixed_x", observables=ObservableSet(obs))
    X = add_readout_noise(run_reservoir(cfg, inputs, 0).readout, 0.001, SEED, ("demo", name))
    oe = total_ipc(X, inputs, settings).odd_even()
    print(f"{name:14s}  {oe['odd_capacity']:12.4f}  {oe['odd_threshold']:14.4f}  {oe['even_capacity']:13.4f}")
