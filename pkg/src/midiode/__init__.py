"""Solver library for the magnetically insulated vacuum diode model.

Layers:

* :mod:`midiode.cubic` -- closed-form analysis of the deflection cubic.
* :mod:`midiode.potential` -- the singular effective-potential initial
  value problem and its regime classification.
* :mod:`midiode.bvp` -- the two-potential system, shooting solver and
  insulation checks.
* :mod:`midiode.bifurcation` -- parameter sweeps and branch assembly.
* :mod:`midiode.cli` -- command-line front end.

Numerical hot loops live in :mod:`midiode._kernels`, which picks a compiled
extension when available and an equivalent pure-Python implementation
otherwise; ``backend_name()`` reports which one is active.
"""

from ._kernels import backend_name
from .bifurcation import (
    Branch,
    ScanResult,
    assemble_branches,
    find_bifurcation_points,
    scan_1d,
    scan_surface,
)
from .bvp import (
    child_langmuir_check,
    effective_gamma,
    find_x_star,
    integrate_uv,
    series_startup_uv,
    shoot,
)
from .cubic import (
    discriminant,
    solve_closed_form,
    solve_numeric_oracle,
    theta_candidates,
    theta_residual,
    triple_root_locus,
)
from .model import (
    ComplexValue,
    DiodeParams,
    ReducedParams,
    Regime,
    RegimeReport,
    RootClass,
    RootSet,
    ShootResult,
    ThetaCandidates,
    Trajectory,
    reduce_params,
    to_json,
)
from .potential import (
    classify_regime,
    deflection_point,
    effective_potential,
    first_integral_residual,
    integrate_D,
    regime_report,
    series_startup_D,
    turning_point,
)

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "ComplexValue",
    "DiodeParams",
    "ReducedParams",
    "Regime",
    "RegimeReport",
    "RootClass",
    "RootSet",
    "ScanResult",
    "ShootResult",
    "ThetaCandidates",
    "Trajectory",
    "__version__",
    "assemble_branches",
    "backend_name",
    "child_langmuir_check",
    "classify_regime",
    "deflection_point",
    "discriminant",
    "effective_gamma",
    "effective_potential",
    "find_bifurcation_points",
    "find_x_star",
    "first_integral_residual",
    "integrate_D",
    "integrate_uv",
    "reduce_params",
    "regime_report",
    "scan_1d",
    "scan_surface",
    "series_startup_D",
    "series_startup_uv",
    "shoot",
    "solve_closed_form",
    "solve_numeric_oracle",
    "theta_candidates",
    "theta_residual",
    "triple_root_locus",
    "to_json",
]
