"""Order-degree trade-off curves, guaranteed points, and cost-based order
selection.

Existence of a telescoper at order r is guaranteed for every degree strictly
above a hyperbola in r; this module evaluates those hyperbolas exactly, turns
them into minimal admissible degrees, exposes the closed-form guaranteed
points, and minimizes an abstract cost model over an order window to suggest
where to run the solver.  Everything here is arithmetic over Q: no linear
systems are touched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from gmpy2 import mpq

from .errors import PreconditionError, StructuralError
from .exactmath import Rat, is_rat
from .hyperterm import StructuralParams
from .ratcase import DecomposedInput

__all__ = [
    "CurveSpec",
    "CostModel",
    "bound_nonrational",
    "bound_rational",
    "nonrational_curve",
    "rational_curve",
    "rational_curve_from_params",
    "dmin",
    "corollary_nonrational",
    "corollary_rational",
    "cost",
    "cost_model_nonrational",
    "cost_model_rational",
    "suggest_order",
]


def _ceil(value: Rat) -> int:
    return int(math.ceil(value))


def _floor(value: Rat) -> int:
    return int(math.floor(value))


# -- curves --------------------------------------------------------------------


@dataclass(frozen=True)
class CurveSpec:
    """Degree bound (num1*r + num0)/(den1*r + den0) + offset, valid for
    r >= rmin, with the denominator positive on that range."""

    case: str
    num: tuple[Rat, Rat]  # constant and linear coefficient of the numerator
    den: tuple[Rat, Rat]
    offset: Rat
    rmin: int

    def __post_init__(self):
        if self.case not in ("nonrational", "rational"):
            raise StructuralError(f"unknown curve case {self.case!r}")
        num = (mpq(self.num[0]), mpq(self.num[1]))
        den = (mpq(self.den[0]), mpq(self.den[1]))
        if den[0] + den[1] * self.rmin <= 0:
            raise StructuralError("curve denominator must be positive from rmin on")
        if den[1] < 0:
            raise StructuralError("curve denominator may not decrease in r")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "offset", mpq(self.offset))

    def bound(self, r: int) -> Rat:
        """Exact degree bound at order r: telescopers of any degree > bound
        are guaranteed to exist."""
        if r < self.rmin:
            raise PreconditionError(f"order {r} is below the curve threshold {self.rmin}")
        num = self.num[0] + self.num[1] * r
        den = self.den[0] + self.den[1] * r
        return num / den + self.offset


def nonrational_curve(sp: StructuralParams) -> CurveSpec:
    """Guarantee curve for a structured summand: degree beyond
    ((theta*nu - 1) r + nu(2 delta + |mu| + 3 - (1+|mu|) nu)/2 - 1) / (r - nu + 1)
    always admits an order-r telescoper."""
    amu = abs(sp.mu)
    n1 = mpq(sp.theta * sp.nu - 1)
    n0 = mpq(sp.nu * (2 * sp.delta + amu + 3 - (1 + amu) * sp.nu), 2) - 1
    return CurveSpec(
        case="nonrational",
        num=(n0, n1),
        den=(mpq(1 - sp.nu), mpq(1)),
        offset=mpq(0),
        rmin=sp.nu,
    )


def bound_nonrational(sp: StructuralParams, r: int) -> Rat:
    return nonrational_curve(sp).bound(r)


def _rational_params(inp: DecomposedInput) -> tuple[list[int], list[int], int]:
    aps = [f.ap for _, f in inp.parts]
    deltas = [v.degree for v, _ in inp.parts]
    deg_u = inp.u.degree_n() or 0
    return aps, deltas, deg_u


def rational_curve_from_params(
    aps: list[int], deltas: list[int], deg_u: int
) -> CurveSpec:
    """Guarantee curve for a decomposed rational summand with the given part
    k-coefficients a_i', part operator degrees delta_i, and common denominator
    degree: degree beyond (-r - 1 + sum a_i' delta_i)/(r + 1 - sum a_i') + deg u
    always admits an order-r telescoper."""
    if len(aps) != len(deltas):
        raise PreconditionError("one degree per part is required")
    if not aps:
        raise PreconditionError("at least one part is required")
    if any(a <= 0 for a in aps):
        raise PreconditionError("part k-coefficients must be positive")
    if any(d < 0 for d in deltas):
        raise PreconditionError("part degrees must be nonnegative")
    s_ap = sum(aps)
    s_apd = sum(a * d for a, d in zip(aps, deltas))
    return CurveSpec(
        case="rational",
        num=(mpq(s_apd - 1), mpq(-1)),
        den=(mpq(1 - s_ap), mpq(1)),
        offset=mpq(deg_u),
        rmin=s_ap,
    )


def rational_curve(inp: DecomposedInput) -> CurveSpec:
    return rational_curve_from_params(*_rational_params(inp))


def bound_rational(inp: DecomposedInput, r: int) -> Rat:
    return rational_curve(inp).bound(r)


def dmin(curve: CurveSpec, r: int) -> int:
    """Smallest nonnegative degree strictly above the bound at order r."""
    return max(0, _floor(curve.bound(r)) + 1)


# -- guaranteed points -----------------------------------------------------------


def _validated(curve: CurveSpec, point: tuple[int, int], label: str) -> tuple[int, int]:
    r, d = point
    if r < curve.rmin or not d > curve.bound(r):
        raise StructuralError(
            f"{label} point (r={r}, d={d}) does not satisfy the guarantee curve"
        )
    return point


def corollary_nonrational(sp: StructuralParams) -> tuple[tuple[int, int], tuple[int, int]]:
    """Two closed-form points on or above the guarantee curve: the minimal
    order nu with its matching degree, and the minimal attainable degree
    theta*nu with its matching order."""
    amu = abs(sp.mu)
    p1 = (sp.nu, _ceil(mpq(sp.nu * (2 * sp.delta + 2 * sp.nu * sp.theta + amu - sp.nu * amu), 2)))
    p2 = (
        _ceil(mpq(sp.nu * (1 + 2 * sp.delta + 2 * (sp.nu - 1) * (sp.theta - amu)), 2)),
        sp.theta * sp.nu,
    )
    curve = nonrational_curve(sp)
    return (
        _validated(curve, p1, "minimal-order"),
        _validated(curve, p2, "minimal-degree"),
    )


def corollary_rational(
    inp: DecomposedInput, *, weights: str = "ap"
) -> tuple[tuple[int, int], tuple[int, int]]:
    """Two closed-form points for the rational case: the minimal order
    sum(a_i') with degree deg u + sum((delta_i - 1) a_i'), and a low-degree
    point at degree deg u.

    The order of the second point weights the part degrees by a_i'
    (weights="ap") or by a_i (weights="a"); both variants are validated
    against the guarantee curve before being returned.
    """
    aps, deltas, deg_u = _rational_params(inp)
    p1 = (sum(aps), deg_u + sum((d - 1) * a for a, d in zip(aps, deltas)))
    if weights == "ap":
        r2 = sum(a * d for a, d in zip(aps, deltas))
    elif weights == "a":
        r2 = sum(abs(f.a) * v.degree for v, f in inp.parts)
    else:
        raise PreconditionError(f"unknown weighting {weights!r}")
    p2 = (r2, deg_u)
    curve = rational_curve(inp)
    return (
        _validated(curve, p1, "minimal-order"),
        _validated(curve, p2, "low-degree"),
    )


# -- cost models -----------------------------------------------------------------


@dataclass(frozen=True)
class CostModel:
    """Abstract operation-count model for solving at a given (order, degree).

    The nonrational model prices the structured linear system,
    kappa * ((theta+1) r + delta + 2)^3 * (delta + theta r + d - (|mu|+1) nu + 1);
    the rational model prices the class-sum system, kappa * r^3 * max(d, 1).
    """

    case: str
    kappa: Rat = field(default_factory=lambda: mpq(1))
    delta: int = 0
    theta: int = 0
    mu: int = 0
    nu: int = 0
    deg_u: int = 0

    def __post_init__(self):
        if self.case not in ("nonrational", "rational"):
            raise StructuralError(f"unknown cost case {self.case!r}")
        if not is_rat(self.kappa) or mpq(self.kappa) <= 0:
            raise StructuralError("kappa must be a positive rational")
        object.__setattr__(self, "kappa", mpq(self.kappa))


def cost_model_nonrational(sp: StructuralParams, kappa: Rat = 1) -> CostModel:
    return CostModel(
        case="nonrational",
        kappa=kappa,
        delta=sp.delta,
        theta=sp.theta,
        mu=sp.mu,
        nu=sp.nu,
    )


def cost_model_rational(inp: DecomposedInput, kappa: Rat = 1) -> CostModel:
    _, _, deg_u = _rational_params(inp)
    return CostModel(case="rational", kappa=kappa, deg_u=deg_u)


def cost(model: CostModel, r: int, d: int) -> Rat:
    """Exact model cost of solving at (r, d); positive for every admissible
    point."""
    if r < 0 or d < 0:
        raise PreconditionError("cost wants nonnegative order and degree")
    if model.case == "nonrational":
        amu = abs(model.mu)
        m = (model.theta + 1) * r + model.delta + 2
        t = model.delta + model.theta * r + d - (amu + 1) * model.nu + 1
        return model.kappa * m**3 * t
    return model.kappa * r**3 * max(d, 1)


def suggest_order(model: CostModel, curve: CurveSpec, rmax: int) -> tuple[int, int, Rat]:
    """Scan orders rmin..rmax and return (r, dmin(r), cost) minimizing the
    model cost along the guarantee curve, preferring smaller orders on ties."""
    if model.case != curve.case:
        raise PreconditionError(
            f"cost model case {model.case!r} does not match curve case {curve.case!r}"
        )
    if rmax < curve.rmin:
        raise PreconditionError(f"rmax {rmax} is below the curve threshold {curve.rmin}")
    best: tuple[int, int, Rat] | None = None
    for r in range(curve.rmin, rmax + 1):
        d = dmin(curve, r)
        c = cost(model, r, d)
        if best is None or c < best[2]:
            best = (r, d, c)
    assert best is not None
    return best
