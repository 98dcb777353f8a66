"""Level statistics of the disordered spin network across the disorder width.

Ergodic spectra repel (mean gap ratio near 0.53) while localized spectra have
Poisson-like gaps (near 0.39).  For five spins the crossover is broad.

    python3 demos/01_spectral_statistics.py
"""

from mbqrc.spin_model import phase_scan

SEED = 11

cells = phase_scan(hs=[1.0], Ws=[0.0, 1.0, 2.0, 4.0, 6.0, 10.0], n_realizations=40, seed=SEED)
print(" W      <r>     stderr")
for c in cells:
    print(f"{c.W:4.1f}  {c.mean_r:.4f}  {c.stderr_r:.4f}")
