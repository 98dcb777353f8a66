"""How bit-flip and phase-flip noise erode coherence, correlations and entanglement.

Reports the stationary l1-coherence, relative-entropy coherence, classical
correlations K and mean negativity of the reservoir state in the ergodic
regime for a few error probabilities.

    python3 demos/03_noise_and_correlations.py    (about a minute)
"""

from mbqrc.correlations import stationary_correlation_sweep
from mbqrc.reservoir import RunConfig
from mbqrc.spin_model import ModelParams

SEED = 7

cfg = RunConfig(model=ModelParams(W=0.0, seed=SEED), washout=500, input_seed=SEED)
rows = stationary_correlation_sweep(cfg, [0.0, 0.001, 0.01, 0.05], axes=("x", "z"), n_realizations=3, window=20)

print("axis  p_err    C_l1     C_rel      K      N_neg")
for axis, p, rep in rows:
    print(f"  {axis}  {p:6.3f}  {rep.C_l1:7.4f}  {rep.C_rel:7.4f}  {rep.K:7.4f}  {rep.N_neg:.2e}")
