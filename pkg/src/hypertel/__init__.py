"""Creative telescoping for proper hypergeometric terms.

Given a bivariate proper hypergeometric term h(n, k), the package searches
for a recurrence operator L = sum_i l_i(n) S_n^i and a certificate C with
L(h) = S_k(C h) - C h, entirely in exact rational arithmetic.  It exposes
the structural parameters that control feasibility, the trade-off curve
between the operator's order and its coefficient degree, solvers for both
the general and the purely rational input classes, independent verifiers,
and a cost model for picking the cheapest order.

Modules
-------
exactmath   exact rationals, bivariate polynomials, fraction-free kernels
hyperterm   terms, shift quotients, structural parameters
telescope   solvers over Q and over Q(n), verification, region scans
ratcase     rational inputs: decomposition, residue solver, operator lifting
curves      order-degree bounds, guaranteed points, cost model
termio      plain-text and CSV formats
cli         command-line frontend (``hypertel``)
"""

__version__ = "0.1.0"

from .curves import (
    CostModel,
    CurveSpec,
    bound_nonrational,
    bound_rational,
    corollary_nonrational,
    corollary_rational,
    cost,
    cost_model_nonrational,
    cost_model_rational,
    dmin,
    nonrational_curve,
    rational_curve,
    suggest_order,
)
from .errors import (
    ExactDivisionError,
    HypertelError,
    NotShiftReducedError,
    ParseError,
    PreconditionError,
    StructuralError,
)
from .hyperterm import (
    GammaArg,
    ProperTerm,
    StructuralParams,
    detect_splittable,
    structural_params,
)
from .ratcase import (
    DecomposedInput,
    RationalSummand,
    RecOperator,
    decompose,
    lift,
    right_remainder,
    solve_rational,
    verify_rational,
)
from .telescope import (
    Certificate,
    Telescoper,
    region_scan,
    solve_structured,
    solve_zeilberger,
    spot_check_pair,
    verify_pair,
)

__all__ = [
    "__version__",
    "CostModel",
    "CurveSpec",
    "bound_nonrational",
    "bound_rational",
    "corollary_nonrational",
    "corollary_rational",
    "cost",
    "cost_model_nonrational",
    "cost_model_rational",
    "dmin",
    "nonrational_curve",
    "rational_curve",
    "suggest_order",
    "ExactDivisionError",
    "HypertelError",
    "NotShiftReducedError",
    "ParseError",
    "PreconditionError",
    "StructuralError",
    "GammaArg",
    "ProperTerm",
    "StructuralParams",
    "detect_splittable",
    "structural_params",
    "DecomposedInput",
    "RationalSummand",
    "RecOperator",
    "decompose",
    "lift",
    "right_remainder",
    "solve_rational",
    "verify_rational",
    "Certificate",
    "Telescoper",
    "region_scan",
    "solve_structured",
    "solve_zeilberger",
    "spot_check_pair",
    "verify_pair",
]
