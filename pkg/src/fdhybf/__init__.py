"""Hybrid beamforming simulator for a full-duplex mmWave cell.

Weighted-sum-rate maximization with analog/digital beamforming stages,
hardware-distortion (limited dynamic range) noise, per-antenna and sum power
constraints, and Monte-Carlo experiment sweeps.
"""

__version__ = "0.1.0"

from .config import SystemConfig, desk_profile, paper_profile
from .channel import ChannelSet, generate_channels
from .optimizer import ConvergenceTrace, SolverOptions, run_algorithm1
from .baselines import SCHEMES, gain_table, ldr_saturation, run_scheme
from .sweep import SweepSpec, emit_csv, load_config, read_csv, run_sweep

__all__ = [
    "SystemConfig", "desk_profile", "paper_profile",
    "ChannelSet", "generate_channels",
    "ConvergenceTrace", "SolverOptions", "run_algorithm1",
    "SCHEMES", "gain_table", "ldr_saturation", "run_scheme",
    "SweepSpec", "emit_csv", "load_config", "read_csv", "run_sweep",
]
