"""Lattice fractional Laplacian on boxes and cylinders, with dimension-reduction experiments."""

from .forms import KINDS, NonlocalForm, apply, energy, scaled_energy, slice_energy_sum, stretched_grid
from .harness import ConfigError, ExperimentConfig, ExperimentReport, run_experiment
from .lattice import (BoxDomain, GridFunction, GridMismatchError, LatticeGrid, interval, interval_grid, l2_inner,
                      l2_norm, product_grid)
from .oracles import (bump, fourier_energy, gagliardo_constant, gaussian, local_baseline_lambda,
                      montecarlo_gagliardo, tail_kappa)
from .reduction import (LoadSpec, average_rho, breve_rescale, cutoff_profile, functional_I, recovery_sequence,
                        reduction_error, solve_dirichlet_cylinder, solve_dirichlet_section, unbreve)
from .solvers import ConvergenceError, EigenPair, cg_solve, smallest_eigenpair, tensor_min_eigenvalue
from .weights import (DomainError, FractionalOrder, PrecisionError, WeightStencil, closed_form_weights_1d,
                      compute_weights)

__version__ = "0.1.0"

__all__ = [
    "BoxDomain", "GridFunction", "GridMismatchError", "LatticeGrid", "interval", "interval_grid", "l2_inner",
    "l2_norm", "product_grid",
    "DomainError", "FractionalOrder", "PrecisionError", "WeightStencil", "closed_form_weights_1d",
    "compute_weights",
    "KINDS", "NonlocalForm", "apply", "energy", "scaled_energy", "slice_energy_sum", "stretched_grid",
    "ConvergenceError", "EigenPair", "cg_solve", "smallest_eigenpair", "tensor_min_eigenvalue",
    "LoadSpec", "average_rho", "breve_rescale", "cutoff_profile", "functional_I", "recovery_sequence",
    "reduction_error", "solve_dirichlet_cylinder", "solve_dirichlet_section", "unbreve",
    "bump", "fourier_energy", "gagliardo_constant", "gaussian", "local_baseline_lambda", "montecarlo_gagliardo",
    "tail_kappa",
    "ConfigError", "ExperimentConfig", "ExperimentReport", "run_experiment",
]
