"""Robust distributed beamforming for amplify-and-forward relay networks.

Submodules
----------
spectral   Hermitian eigen-analysis kernels
channel    geometry, fading and channel mismatch
signals    two-hop signal chain, moments and output SINR
estimator  low-rank cross-correlation robust beamformer and baselines
analysis   MSE bounds and the MMSE/SINR relation
harness    experiment configs, Monte Carlo drivers and the CLI
"""

from . import analysis, channel, estimator, signals, spectral

__version__ = "0.1.0"

__all__ = ["analysis", "channel", "estimator", "signals", "spectral", "__version__"]
