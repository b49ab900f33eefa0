"""Gross-Pitaevskii ground states of trapped dilute Bose gases.

Units: hbar = 2m = 1, so the kinetic operator is -grad^2 and the unit
harmonic trap V = r^2 has ground energy 3.  The package computes

* zero-energy scattering lengths with two-sided certificates,
* GP minimizers on radial and cartesian grids via a preconditioned
  projected gradient flow on the exact discrete functional,
* the Thomas-Fermi limit in closed form for power-law traps,
* a correlated-trial upper bound and an assembled-cell lower bound
  that sandwich the dilute many-body ground energy,

and exposes a config-driven command line (``gptrap``) for batch runs.
"""

from .bounds import (
    DysonBound,
    DysonF,
    EstarResult,
    assemble_box_lower_bound,
    build_dyson_f,
    check_soft_core_condition,
    dyson_ingredients,
    dyson_upper_bound,
    estar_minimize,
    homogeneous_lower_bound,
    sandwich_report,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    GptrapError,
    NormalizationError,
    PreconditionError,
    ScatteringRegimeError,
    TruncationToleranceError,
)
from .gp import (
    GpSolution,
    WaveField,
    check_scaling,
    chemical_potential,
    energy_gradient,
    evaluate_energy,
    minimize,
    solve_neumann_box,
    structural_assertions,
    virial_residual,
)
from .grids import Grid
from .potentials import (
    InteractionPotential,
    TrapPotential,
    scale_interaction,
    tail_integral,
)
from .scattering import (
    ScatteringResult,
    integrate_zero_energy,
    scattering_length,
    spruch_rosenberg,
    truncate_with_certificate,
    truncation_defect_lower_bound,
)
from .tf import (
    TfSolution,
    gp_tf_convergence,
    tf_minimize,
    tf_scaling_checks,
    tf_upper_trial,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "DysonBound",
    "DysonF",
    "EstarResult",
    "GpSolution",
    "GptrapError",
    "Grid",
    "InteractionPotential",
    "NormalizationError",
    "PreconditionError",
    "ScatteringRegimeError",
    "ScatteringResult",
    "TfSolution",
    "TrapPotential",
    "TruncationToleranceError",
    "WaveField",
    "assemble_box_lower_bound",
    "build_dyson_f",
    "check_scaling",
    "check_soft_core_condition",
    "chemical_potential",
    "dyson_ingredients",
    "dyson_upper_bound",
    "energy_gradient",
    "estar_minimize",
    "evaluate_energy",
    "gp_tf_convergence",
    "homogeneous_lower_bound",
    "integrate_zero_energy",
    "minimize",
    "sandwich_report",
    "scale_interaction",
    "scattering_length",
    "solve_neumann_box",
    "spruch_rosenberg",
    "structural_assertions",
    "tail_integral",
    "tf_minimize",
    "tf_scaling_checks",
    "tf_upper_trial",
    "truncate_with_certificate",
    "truncation_defect_lower_bound",
    "virial_residual",
]
