"""Proper hypergeometric terms and their structural data.

A term is a polynomial part p(n, k), geometric parts x^n and y^k, and a bag of
Gamma factors with integer-linear arguments, each factor sitting in one of
four families:

    A  numerator,   argument  cn*n + ck*k + c0
    B  numerator,   argument  cn*n - ck*k + c0
    U  denominator, argument  cn*n + ck*k + c0
    V  denominator, argument  cn*n - ck*k + c0

with cn, ck nonnegative integers and c0 rational.  The family encodes the sign
of the k coefficient, so ck is stored as an absolute value.  Factors are an
unordered list; nothing requires the families to have equal lengths.

From this syntactic data the module computes the two shift quotients
S_n(h)/h and S_k(h)/h as explicit rational functions (no Gamma evaluation
anywhere), the five structural integers that drive all order/degree bounds,
and a syntactic splittability test used to route terms between the two
solving pipelines.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from gmpy2 import mpq

from .errors import StructuralError
from .exactmath import PolyNK, Rat, RatFuncNK, rat, rising_factorial

FAMILIES = ("A", "B", "U", "V")
_NUMERATOR = {"A": True, "B": True, "U": False, "V": False}
_K_SIGN = {"A": 1, "B": -1, "U": 1, "V": -1}


@dataclass(frozen=True)
class GammaArg:
    """One Gamma factor: family plus the coefficient triple of its argument."""

    cn: int
    ck: int
    c0: Rat
    family: str

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise StructuralError(f"unknown factor family {self.family!r}")
        if not isinstance(self.cn, int) or self.cn < 0:
            raise StructuralError(
                f"n-coefficient must be a nonnegative integer, got {self.cn!r}")
        if not isinstance(self.ck, int) or self.ck < 0:
            raise StructuralError(
                f"k-coefficient magnitude must be a nonnegative integer, got {self.ck!r}")
        object.__setattr__(self, "c0", rat(self.c0))

    @property
    def in_numerator(self) -> bool:
        return _NUMERATOR[self.family]

    @property
    def k_sign(self) -> int:
        return _K_SIGN[self.family]

    def argument(self) -> PolyNK:
        """The linear argument cn*n +/- ck*k + c0 as a polynomial."""
        return PolyNK.linear(self.cn, self.k_sign * self.ck, self.c0)

    def signed_ck(self) -> int:
        return self.k_sign * self.ck


@dataclass(frozen=True)
class ProperTerm:
    """Syntactic proper hypergeometric term p * x^n * y^k * (Gamma factors)."""

    p: PolyNK
    x: Rat
    y: Rat
    factors: tuple[GammaArg, ...] = ()

    def __post_init__(self):
        if not isinstance(self.p, PolyNK):
            raise StructuralError("polynomial part must be a PolyNK")
        if self.p.is_zero:
            raise StructuralError("polynomial part must be nonzero")
        x, y = rat(self.x), rat(self.y)
        if not x or not y:
            raise StructuralError("geometric bases x and y must be nonzero")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "factors", tuple(self.factors))

    def family(self, name: str) -> list[GammaArg]:
        return [f for f in self.factors if f.family == name]


@dataclass(frozen=True)
class StructuralParams:
    """The five integers controlling every bound in the pipeline.

    delta  total degree of the polynomial part
    theta  max of the two family-wise n-coefficient sums
    lam    n-coefficient sum over the denominator families
    mu     numerator sum minus denominator sum (any sign)
    nu     max of the two mixed k-coefficient sums
    """

    delta: int
    theta: int
    lam: int
    mu: int
    nu: int

    def __post_init__(self):
        if self.lam + self.mu < 0:
            raise StructuralError("family sums violate lam + mu >= 0")
        if self.theta != self.lam + max(self.mu, 0):
            raise StructuralError("theta must equal lam + max(mu, 0)")
        if min(self.delta, self.theta, self.lam, self.nu) < 0:
            raise StructuralError("delta, theta, lam, nu must be nonnegative")

    @property
    def abs_mu(self) -> int:
        return abs(self.mu)

    def __str__(self) -> str:
        return (f"delta={self.delta} theta={self.theta} lambda={self.lam} "
                f"mu={self.mu} nu={self.nu}")


def sigma_n(h: ProperTerm) -> RatFuncNK:
    """The shift quotient S_n(h)/h as a normalized rational function."""
    num = h.p.shift(1, 0) * h.x
    den = h.p
    for f in h.factors:
        rf = rising_factorial(f.argument(), f.cn)
        if f.in_numerator:
            num = num * rf
        else:
            den = den * rf
    return RatFuncNK(num, den)


def sigma_k(h: ProperTerm) -> RatFuncNK:
    """The shift quotient S_k(h)/h as a normalized rational function.

    Numerator families with +k advance by ck; -k factors in the denominator
    retreat, contributing rf(arg - ck, ck) upstairs, and symmetrically for the
    other two families.
    """
    num = h.p.shift(0, 1) * h.y
    den = h.p
    for f in h.factors:
        arg = f.argument()
        if f.family == "A":
            num = num * rising_factorial(arg, f.ck)
        elif f.family == "V":
            num = num * rising_factorial(arg - f.ck, f.ck)
        elif f.family == "U":
            den = den * rising_factorial(arg, f.ck)
        else:  # B
            den = den * rising_factorial(arg - f.ck, f.ck)
    return RatFuncNK(num, den)


def structural_params(h: ProperTerm) -> StructuralParams:
    num_n = sum(f.cn for f in h.factors if f.in_numerator)
    den_n = sum(f.cn for f in h.factors if not f.in_numerator)
    plus_mix = sum(f.ck for f in h.factors if f.family in ("A", "V"))
    minus_mix = sum(f.ck for f in h.factors if f.family in ("U", "B"))
    delta = h.p.total_degree()
    assert delta is not None  # ProperTerm guarantees p != 0
    return StructuralParams(
        delta=delta,
        theta=max(num_n, den_n),
        lam=den_n,
        mu=num_n - den_n,
        nu=max(plus_mix, minus_mix),
    )


def _pair_key(f: GammaArg) -> tuple[int, int, Rat]:
    c0 = f.c0
    return (f.cn, f.ck, c0 - (c0.numerator // c0.denominator))


def detect_splittable(h: ProperTerm) -> bool:
    """Syntactic test for h = (rational function) * (k-free term).

    True requires y = 1 and every k-involving Gamma factor to cancel against
    a partner across the fraction bar: A against U, B against V, with the same
    linear coefficients and constants differing by an integer (then the
    quotient of the two Gamma factors is a rational function).  Factors free
    of k impose nothing, they belong to the k-free cofactor.  A False result
    is inconclusive; this test is sound only for True.
    """
    if h.y != 1:
        return False
    for up, down in (("A", "U"), ("B", "V")):
        ups = sorted(_pair_key(f) for f in h.family(up) if f.ck > 0)
        downs = sorted(_pair_key(f) for f in h.family(down) if f.ck > 0)
        if ups != downs:
            return False
    return True
