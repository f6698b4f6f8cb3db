"""Nonlinear stability toolkit for the spinning bottom-heavy vehicle model.

The package splits into layers:

- :mod:`uvstab.dynamics` -- the six-dimensional impulse equations, their
  conserved quantities, and the spin equilibrium family.
- :mod:`uvstab.blowup` -- the unit-sphere inflation of the zero-impulse
  leaf, the induced field and two-form, and the circle symmetry.
- :mod:`uvstab.normalform` -- closed-form constants at the equilibria,
  canonical tangent bases, the rigid-body chart, and the predicted
  return map with its twist condition.
- :mod:`uvstab.integrate` / :mod:`uvstab.poincare` -- adaptive
  integration with dense output, section-crossing detection, and the
  measured return map / twist experiment.
- :mod:`uvstab.config` / :mod:`uvstab.cli` -- JSON run configurations,
  full-precision CSV, and the command-line drivers.
- :mod:`uvstab.verify` -- the runnable invariant suite.
"""

from .blowup import (
    BlownUpState,
    TangentPair,
    blow_down,
    blow_up,
    blown_hamiltonian,
    blown_relative_equilibrium,
    blown_vector_field,
    reduced_leaf_form,
    so2_act,
    so2_generator,
    so2_momentum,
    symplectic_form,
)
from .config import RunConfig, load_config, parse_config, read_csv, save_config, write_csv
from .dynamics import (
    EquilibriumFamily,
    PoissonState,
    VehicleParams,
    casimirs,
    equilibrium,
    hamiltonian,
    vector_field,
)
from .integrate import IntegratorConfig, Trajectory, find_crossings, integrate
from .normalform import (
    NormalFormCoeffs,
    action_angle_from_chart,
    canonical_basis,
    chart_from_action_angle,
    coefficients,
    equilibrium_basis,
    linearization,
    momentum_differential,
    predicted_poincare,
    rigid_chart,
    twist_condition,
    twist_slope,
)
from .poincare import (
    FigureRow,
    PoincareSample,
    SectionSpec,
    TwistFit,
    figure_experiment,
    fit_twist,
    measure_action_angle,
    poincare_map,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # dynamics
    "VehicleParams",
    "PoissonState",
    "EquilibriumFamily",
    "vector_field",
    "hamiltonian",
    "casimirs",
    "equilibrium",
    # blowup
    "BlownUpState",
    "TangentPair",
    "blow_up",
    "blow_down",
    "blown_vector_field",
    "blown_hamiltonian",
    "blown_relative_equilibrium",
    "symplectic_form",
    "reduced_leaf_form",
    "so2_momentum",
    "so2_act",
    "so2_generator",
    # normal form
    "NormalFormCoeffs",
    "coefficients",
    "twist_condition",
    "twist_slope",
    "predicted_poincare",
    "canonical_basis",
    "equilibrium_basis",
    "linearization",
    "momentum_differential",
    "rigid_chart",
    "chart_from_action_angle",
    "action_angle_from_chart",
    # integration / return map
    "IntegratorConfig",
    "Trajectory",
    "integrate",
    "find_crossings",
    "SectionSpec",
    "PoincareSample",
    "TwistFit",
    "FigureRow",
    "poincare_map",
    "fit_twist",
    "measure_action_angle",
    "figure_experiment",
    # configuration
    "RunConfig",
    "load_config",
    "parse_config",
    "save_config",
    "write_csv",
    "read_csv",
]
