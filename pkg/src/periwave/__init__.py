"""Linear peridynamic wave propagation on a periodic box.

Dispersion relation and its asymptotes, a lattice discretization of the
nonlocal operator, exact spectral propagators, norms and energies, and a
sweep harness comparing peridynamics against the classical wave equation.
"""
from .errors import (ConfigurationError, DomainError, InvariantError, NumericalError,
                     PeriwaveError)
from .experiments import ExperimentConfig, ExperimentReport, __version__
from .grid import (EvolutionState, GridSpec, SpectralField, band_limited_random, dft_forward,
                   dft_inverse, dilate_spectrum)
from .kernel import (Cutoff, DispersionProfile, ModelParams, build_dispersion_profile,
                     dispersion_gap, gamma_constant, lambda_constant, omega_delta)
from .norms import EnergyKind, energy, h_s_norm, solution_gap, w_delta_seminorm
from .propagator import (ClassicalWave, Peridynamics, SymbolChoice, evolve, leapfrog_evolve,
                         trajectory)
from .stencil import (StencilKernel, apply_K_delta, build_stencil, discrete_symbol,
                      nonlocal_energy_direct)

__all__ = [
    "ClassicalWave", "ConfigurationError", "Cutoff", "DispersionProfile", "DomainError",
    "EnergyKind", "EvolutionState", "ExperimentConfig", "ExperimentReport", "GridSpec",
    "InvariantError", "ModelParams", "NumericalError", "Peridynamics", "PeriwaveError",
    "SpectralField", "StencilKernel", "SymbolChoice", "__version__", "apply_K_delta",
    "band_limited_random", "build_dispersion_profile", "build_stencil", "dft_forward",
    "dft_inverse", "dilate_spectrum", "discrete_symbol", "dispersion_gap", "energy",
    "evolve", "gamma_constant", "h_s_norm", "lambda_constant", "leapfrog_evolve",
    "nonlocal_energy_direct", "omega_delta", "solution_gap", "trajectory",
    "w_delta_seminorm",
]
