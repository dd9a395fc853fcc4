"""Photon wave functions as rank-two bi-spinor fields on periodic grids.

Submodules: ``clifford`` (gamma algebra and Lorentz group), ``field`` (the
wave function and its constructors), ``dynamics`` (exact spectral evolution),
``currents`` (stress tensors and conserved currents), ``bohm`` (guiding
trajectories), ``snapshot`` (binary files) and ``cli``.
"""

from .bohm import Ensemble, FieldSeries, Trajectory, equivariance_stat, integrate, sample_rho, velocity_at
from .currents import (
    conserved_set, dominant_energy_check, killing_X, noether_stresses, pi_vector,
    probability_current, riesz_tensor,
)
from .dynamics import EvolutionPlan, equation_residual, evolve, mode_hamiltonian, propagator
from .errors import (
    ConfigError, ConstraintError, NodeRegionError, NullTotalCurrent, PhotonWaveError,
    PreconditionError, SnapshotError, ValidationError,
)
from .field import (
    ComponentFields, GridSpec, PhotonField, PhysicsConfig, assemble, disassemble, gauge_generator,
    gauge_transform, plane_wave_state, potential_state, random_field, validate,
)

__version__ = "0.1.0"

__all__ = [
    "ComponentFields", "ConfigError", "ConstraintError", "Ensemble", "EvolutionPlan", "FieldSeries",
    "GridSpec", "NodeRegionError", "NullTotalCurrent", "PhotonField", "PhotonWaveError",
    "PhysicsConfig", "PreconditionError", "SnapshotError", "Trajectory", "ValidationError",
    "assemble", "conserved_set", "disassemble", "dominant_energy_check", "equation_residual",
    "equivariance_stat", "evolve", "gauge_generator", "gauge_transform", "integrate", "killing_X",
    "mode_hamiltonian", "noether_stresses", "pi_vector", "plane_wave_state", "potential_state",
    "probability_current", "propagator", "random_field", "riesz_tensor", "sample_rho", "validate",
    "velocity_at",
]
