"""Noisy many-body quantum reservoir computing: spin model, erase-and-write
reservoir, flip noise, information processing capacity and correlation
diagnostics."""

__version__ = "0.1.0"

from .correlations import (
    CorrelationReport,
    all_measures,
    classical_correlations,
    l1_coherence,
    local_coherence,
    mean_negativity,
    mutual_information,
    quantum_hookup,
    relative_entropy_coherence,
    stationary_correlation_sweep,
)
from .ipc import CapacityReport, IPCSettings, TargetSpec, capacity, legendre, total_ipc, train_readout
from .noise import NoiseSpec, apply_dissipation, apply_flip_channel, noisy_interval, perr_from_gamma
from .reservoir import (
    ObservableSet,
    RunConfig,
    add_readout_noise,
    draw_inputs,
    encode_input,
    inject_input,
    run_reservoir,
)
from .spin_model import ModelParams, gap_ratio_statistic, level_statistic, phase_scan, sample_hamiltonian
