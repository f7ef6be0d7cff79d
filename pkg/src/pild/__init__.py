"""Path-integral Lindblad dynamics.

Open-system propagation that combines influence-functional path integrals
over harmonic baths with Lindblad jump operators and time-dependent system
Hamiltonians.
"""

__version__ = "0.1.0"

from .bath import BathSpec, EtaTable, SpectralDensity, bath_correlation, eta_table, influence_weight
from .exceptions import BudgetError, NumericalError, PILDError, ValidationError
from .liouville import (Constant, Cosine, Generator, JumpOperator, SystemHamiltonian, build_L0,
                        build_lindbladian, choi_matrix, dissipator, min_choi_eigenvalue, unvectorize,
                        vectorize)
from .models import DimerSpec, Model, build_dimer, build_spin_boson, evaluate_observables
from .path_integral import DynamicalMapSeries, brute_force_pi, direct_pild, dynamical_maps, iterative_pi
from .propagator import PropagatorRequest, propagator_series, propagator_static, propagator_timedep
from .ttm import (TransferTensorSet, extract_transfer_tensors, load_transfer_tensors, memory_kernel_view,
                  propagate_ttm_lindblad, reconstruct_maps, save_transfer_tensors)

__all__ = [
    "BathSpec", "EtaTable", "SpectralDensity", "bath_correlation", "eta_table", "influence_weight",
    "BudgetError", "NumericalError", "PILDError", "ValidationError",
    "Constant", "Cosine", "Generator", "JumpOperator", "SystemHamiltonian", "build_L0",
    "build_lindbladian", "choi_matrix", "dissipator", "min_choi_eigenvalue", "unvectorize", "vectorize",
    "DimerSpec", "Model", "build_dimer", "build_spin_boson", "evaluate_observables",
    "DynamicalMapSeries", "brute_force_pi", "direct_pild", "dynamical_maps", "iterative_pi",
    "PropagatorRequest", "propagator_series", "propagator_static", "propagator_timedep",
    "TransferTensorSet", "extract_transfer_tensors", "load_transfer_tensors", "memory_kernel_view",
    "propagate_ttm_lindblad", "reconstruct_maps", "save_transfer_tensors",
]
