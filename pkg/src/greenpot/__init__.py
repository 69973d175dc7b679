"""Discrete potential theory on finite point clouds.

Riesz and Green kernels, energies, capacities, balayage, equilibrium
measures, and the weighted minimum-energy problem with an external field,
all realized as finite quadratic programs with checkable optimality
conditions.
"""

from .balayage import (BalayageResult, SweepResiduals, dirac_sweep_matrix,
                       harmonic_measure_at_infinity, sweep,
                       thinness_partial_sums)
from .core import (DiscreteMeasure, DomainConfig, InvariantError, PointSet,
                   SolverError, ValidationError, nearest_neighbor_distances,
                   restrict, validate_field_separation)
from .gauss import (ExternalField, GaussSolution, dual_check,
                    exhaustion_mass_probe, explicit_solution, external_field,
                    field_decay_probe, gauss_functional,
                    lambda_class_characterizations, solve_gauss,
                    support_descriptor, truncation_sweep)
from .green import (GreenSystem, build_green, check_maximum_principles,
                    green_equilibrium, green_potential, green_sweep,
                    mass_equality_probe)
from .riesz import (KernelMatrix, assemble_riesz, capacity,
                    equilibrium_measure, energy_norm, make_kernel,
                    mutual_energy, potential, weight_form, weight_norm)
from .solvers import KKTRecord, nonneg_qp, simplex_qp

__version__ = "1.0.0"

__all__ = [
    "BalayageResult", "DiscreteMeasure", "DomainConfig", "ExternalField",
    "GaussSolution", "GreenSystem", "InvariantError", "KKTRecord",
    "KernelMatrix", "PointSet", "SolverError", "SweepResiduals",
    "ValidationError", "assemble_riesz", "build_green", "capacity",
    "check_maximum_principles", "dirac_sweep_matrix", "dual_check",
    "energy_norm", "equilibrium_measure", "exhaustion_mass_probe",
    "explicit_solution", "external_field", "field_decay_probe",
    "gauss_functional", "green_equilibrium", "green_potential", "green_sweep",
    "harmonic_measure_at_infinity", "lambda_class_characterizations",
    "make_kernel", "mass_equality_probe", "mutual_energy",
    "nearest_neighbor_distances", "nonneg_qp", "potential", "restrict",
    "simplex_qp", "solve_gauss", "support_descriptor", "sweep",
    "thinness_partial_sums", "truncation_sweep", "validate_field_separation",
    "weight_form", "weight_norm", "__version__",
]
