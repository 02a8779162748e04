"""Spectral stability of 2D Klein-Gordon kinks under a localized damping term."""
from ._kernels import BACKEND
from .asymptotics import SpectralPrediction, compute_K1, compute_K2, predict
from .birman_schwinger import BSRoot, ReducedResolvent, eps_sweep, solve_k
from .config import RunConfig, parse_config
from .corrector import ChannelBasis, assemble_corrector
from .errors import KinkSpectraError
from .gamma import GammaSpec, Parity, gauss_family
from .models import FieldModel, phi4, potential_well, sine_gordon
from .operator1d import Grid1D, discrete_modes, h0_spectrum

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BSRoot", "ChannelBasis", "FieldModel", "GammaSpec", "Grid1D", "KinkSpectraError", "Parity",
    "ReducedResolvent", "RunConfig", "SpectralPrediction", "assemble_corrector", "compute_K1", "compute_K2",
    "discrete_modes", "eps_sweep", "gauss_family", "h0_spectrum", "parse_config", "phi4", "potential_well",
    "predict", "sine_gordon", "solve_k",
]
