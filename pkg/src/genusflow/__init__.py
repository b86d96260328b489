"""Flows on genus-p surfaces presented as a rectangle with glued edges.

Submodules:
  expressions  -- small symbolic language (parse, diff, eval)
  geometry     -- Moebius maps, fundamental rectangle, side pairings
  fields       -- curve-carrying field synthesis, cusp vanishing, matching
  dynamics     -- RK4/RK45 integration with deck-transition wrapping
  poincare     -- return maps, periodic orbits, multipliers, classification
  topology     -- attractor estimates, components, indices, dissipativity
  presets      -- ready-made scenario fields
  cli          -- genusflow command line tool
"""

__version__ = "0.1.0"

from .expressions import parse_expr, diff, eval_expr, expr_to_str
from .geometry import (
    Mobius,
    RectDomain,
    chart_to_rectangle,
    standard_domain,
    shear_torus_domain,
    reduce_to_domain,
)
from .fields import (
    CurveSpec,
    VectorField,
    synthesize,
    apply_cusp_vanishing,
    builtin_forced_oscillator,
    check_matching,
)
from .dynamics import (
    IntegratorConfig,
    State,
    Trajectory,
    integrate,
    step_dense,
)

__all__ = [
    "parse_expr",
    "diff",
    "eval_expr",
    "expr_to_str",
    "Mobius",
    "RectDomain",
    "chart_to_rectangle",
    "standard_domain",
    "shear_torus_domain",
    "reduce_to_domain",
    "CurveSpec",
    "VectorField",
    "synthesize",
    "apply_cusp_vanishing",
    "builtin_forced_oscillator",
    "check_matching",
    "IntegratorConfig",
    "State",
    "Trajectory",
    "integrate",
    "step_dense",
]
