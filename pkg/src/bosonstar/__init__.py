"""Pseudospectral simulator and verification harness for the
semi-relativistic Hartree (boson star) equation."""

from .grids import (
    GridSpec,
    MultiplierSymbol,
    SpectralField,
    apply_multiplier,
    apply_velocity_function,
    free_propagate,
    to_frequency,
    to_physical,
    velocity_component,
)
from .potentials import (
    ConvolutionKernel,
    Delta,
    Gaussian,
    PowerLaw,
    Sum,
    Yukawa,
    build_kernel,
    hartree_potential,
    zero_kernel,
)
from .dynamics import SolverConfig, Trajectory, evolve, picard_solve, strang_step
from .scattering import (
    ScatteringConfig,
    ScatteringResult,
    build_min_velocity_state,
    inverse_wave,
    roundtrip,
    wave_operator,
)

__version__ = "0.1.0"

__all__ = [
    "GridSpec", "MultiplierSymbol", "SpectralField", "apply_multiplier",
    "apply_velocity_function", "free_propagate", "to_frequency", "to_physical",
    "velocity_component", "ConvolutionKernel", "Delta", "Gaussian", "PowerLaw",
    "Sum", "Yukawa", "build_kernel", "hartree_potential", "zero_kernel",
    "SolverConfig", "Trajectory", "evolve", "picard_solve", "strang_step",
    "ScatteringConfig", "ScatteringResult", "build_min_velocity_state",
    "inverse_wave", "roundtrip", "wave_operator", "__version__",
]
