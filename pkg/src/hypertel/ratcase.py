"""Telescoper search for proper rational summands.

A rational function f(n, k) whose denominator splits into integer-linear
factors can be telescoped without the full structured machinery: after a
partial-fraction decomposition in k, each pole orbit contributes a block
``(1/u(n)) * V_i(S_n)`` applied to a power of a single linear form, and an
operator L = l_0 + l_1 S_n + ... + l_r S_n^r telescopes f exactly when, for
every block, the skew product L * (1/u) * V_i lies in the right ideal
generated by S_n^{a_i'} - 1.  That membership test is linear in the unknown
coefficients of L, so existence at a prescribed (order, degree) reduces to a
nullspace computation over Q.

The module provides the operator algebra (`RecOperator`, `right_remainder`,
`apply_operator`), the decomposition (`decompose` into `DecomposedInput`),
the solver (`solve_rational`), the checker (`verify_rational`), and the
change-of-basis helper `lift` that transports a telescoper of f to one of
any g with g(n+1, k)/g(n, k) = a(n)/b(n) times f's ratio.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import factorial

import gmpy2
import sympy
from gmpy2 import mpq, mpz

from .errors import (
    NotShiftReducedError,
    PreconditionError,
    StructuralError,
)
from .exactmath import (
    MatrixQ,
    PolyNK,
    Rat,
    RatFuncNK,
    is_rat,
    kernel_basis_exact,
    lcm_poly,
)
from .telescope import Telescoper

__all__ = [
    "RecOperator",
    "RationalSummand",
    "DecomposedInput",
    "right_remainder",
    "apply_operator",
    "decompose",
    "solve_rational",
    "verify_rational",
    "lift",
]


# -- recurrence operators over Q(n) -------------------------------------------


def _coerce_ratfunc(value: object) -> RatFuncNK:
    if isinstance(value, RatFuncNK):
        return value
    if isinstance(value, PolyNK):
        return RatFuncNK.from_poly(value)
    if is_rat(value):
        return RatFuncNK.from_rat(value)
    raise StructuralError(f"cannot use {value!r} as an operator coefficient")


@dataclass(frozen=True)
class RecOperator:
    """Skew operator c_0(n) + c_1(n) S_n + ... + c_m(n) S_n^m.

    Coefficients live in Q(n) (k-free rational functions); the commutation
    rule is S_n * c(n) = c(n+1) * S_n.  The zero operator has an empty
    coefficient tuple; otherwise the trailing coefficient is nonzero.
    """

    coeffs: tuple[RatFuncNK, ...]

    def __post_init__(self):
        coeffs = [_coerce_ratfunc(c) for c in self.coeffs]
        for c in coeffs:
            if not (c.num.k_free and c.den.k_free):
                raise StructuralError("operator coefficients must be k-free")
        while coeffs and coeffs[-1].is_zero:
            coeffs.pop()
        object.__setattr__(self, "coeffs", tuple(coeffs))

    # construction helpers

    @classmethod
    def zero(cls) -> "RecOperator":
        return cls(())

    @classmethod
    def one(cls) -> "RecOperator":
        return cls((RatFuncNK.one(),))

    @classmethod
    def monomial(cls, coeff: object, power: int) -> "RecOperator":
        """coeff * S_n^power."""
        if power < 0:
            raise PreconditionError("operator powers must be nonnegative")
        return cls((RatFuncNK.zero(),) * power + (_coerce_ratfunc(coeff),))

    @classmethod
    def s_n(cls, power: int = 1) -> "RecOperator":
        return cls.monomial(1, power)

    # structure

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def order(self) -> int:
        """Highest power of S_n with nonzero coefficient; -1 for zero."""
        return len(self.coeffs) - 1

    @property
    def is_polynomial(self) -> bool:
        return all(c.den.is_one() for c in self.coeffs)

    @property
    def degree(self) -> int:
        """Max degree of the (polynomial) coefficients; -1 for zero."""
        if not self.is_polynomial:
            raise StructuralError("degree of an operator with non-polynomial coefficients")
        degs = [c.num.degree_n() for c in self.coeffs if not c.is_zero]
        return max((d for d in degs if d is not None), default=-1)

    def coeff(self, power: int) -> RatFuncNK:
        if 0 <= power < len(self.coeffs):
            return self.coeffs[power]
        return RatFuncNK.zero()

    def polynomial_coeffs(self) -> tuple[PolyNK, ...]:
        if not self.is_polynomial:
            raise StructuralError("operator has non-polynomial coefficients")
        return tuple(c.num for c in self.coeffs)

    def normalized(self) -> "RecOperator":
        """Clear denominators and joint content; make the leading coefficient
        of the first nonzero entry positive.  The result generates the same
        left multiples over Q(n)."""
        if self.is_zero:
            return self
        den = PolyNK.one()
        for c in self.coeffs:
            den = lcm_poly(den, c.den)
        polys = [c.num * den.exact_div(c.den) if not c.is_zero else PolyNK.zero()
                 for c in self.coeffs]
        num_g = mpz(0)
        den_l = mpz(1)
        for p in polys:
            c = p.content()
            if c:
                num_g = gmpy2.gcd(num_g, c.numerator)
                den_l = gmpy2.lcm(den_l, c.denominator)
        scale = mpq(den_l, num_g)
        for p in polys:
            if not p.is_zero:
                if p.leading_coeff_glex() < 0:
                    scale = -scale
                break
        return RecOperator(tuple(RatFuncNK.from_poly(p * scale) for p in polys))

    # arithmetic

    def __neg__(self) -> "RecOperator":
        return RecOperator(tuple(-c for c in self.coeffs))

    def __add__(self, other: "RecOperator") -> "RecOperator":
        if not isinstance(other, RecOperator):
            return NotImplemented
        n = max(len(self.coeffs), len(other.coeffs))
        return RecOperator(tuple(self.coeff(i) + other.coeff(i) for i in range(n)))

    def __sub__(self, other: "RecOperator") -> "RecOperator":
        if not isinstance(other, RecOperator):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other: object) -> "RecOperator":
        if isinstance(other, RecOperator):
            if self.is_zero or other.is_zero:
                return RecOperator.zero()
            out = [RatFuncNK.zero()] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                if a.is_zero:
                    continue
                for j, b in enumerate(other.coeffs):
                    if b.is_zero:
                        continue
                    out[i + j] = out[i + j] + a * b.shift(i, 0)
            return RecOperator(tuple(out))
        try:
            c = _coerce_ratfunc(other)
        except StructuralError:
            return NotImplemented
        return RecOperator(tuple(a * c for a in self.coeffs))

    def __rmul__(self, other: object) -> "RecOperator":
        # scalars commute with nothing but themselves; left multiplication by
        # c(n) scales every coefficient in place
        try:
            c = _coerce_ratfunc(other)
        except StructuralError:
            return NotImplemented
        return RecOperator(tuple(c * a for a in self.coeffs))


def right_remainder(a: RecOperator, b: RecOperator) -> RecOperator:
    """Remainder R of a = T*b + R with order(R) < order(b), dividing on the
    right in the skew ring over Q(n)."""
    if b.is_zero:
        raise PreconditionError("right division by the zero operator")
    rem = a
    blead = b.coeffs[-1]
    while not rem.is_zero and rem.order >= b.order:
        t = rem.order - b.order
        c = rem.coeffs[-1] / blead.shift(t, 0)
        rem = rem - RecOperator.monomial(c, t) * b
    return rem


# -- rational summands ---------------------------------------------------------


@dataclass(frozen=True)
class RationalSummand:
    """The basis function 1 / (a*n + ap*k + app)^e with integer a, positive
    integer ap coprime to a, rational app, and positive integer exponent e."""

    a: int
    ap: int
    app: Rat
    e: int

    def __post_init__(self):
        if not isinstance(self.a, int) or not isinstance(self.ap, int):
            raise StructuralError("linear-form coefficients must be integers")
        if self.ap <= 0:
            raise StructuralError("the k-coefficient of a summand must be positive")
        if gmpy2.gcd(abs(self.a), self.ap) != 1:
            raise StructuralError("summand coefficients (a, ap) must be coprime")
        if not isinstance(self.e, int) or self.e <= 0:
            raise StructuralError("summand exponent must be a positive integer")
        if not is_rat(self.app):
            raise StructuralError("summand constant term must be rational")
        object.__setattr__(self, "app", mpq(self.app))

    @property
    def linear_form(self) -> PolyNK:
        return PolyNK.linear(self.a, self.ap, self.app)

    def value(self) -> RatFuncNK:
        return RatFuncNK(PolyNK.one(), self.linear_form ** self.e)


@dataclass(frozen=True)
class DecomposedInput:
    """A rational function presented as (1/u(n)) * sum_i V_i(S_n) f_i where
    each f_i is a `RationalSummand` and each V_i has k-free polynomial
    coefficients.

    Distinct parts with equal exponents must have pole orbits that never
    meet: (a_i/ap_i - a_j/ap_j) n + (app_i/ap_i - app_j/ap_j) may not be an
    integer constant.
    """

    u: PolyNK
    parts: tuple[tuple[RecOperator, RationalSummand], ...]

    def __post_init__(self):
        if not isinstance(self.u, PolyNK) or self.u.is_zero or not self.u.k_free:
            raise StructuralError("common denominator u must be a nonzero polynomial in n")
        parts = tuple((v, f) for v, f in self.parts)
        for v, f in parts:
            if not isinstance(v, RecOperator) or v.is_zero:
                raise StructuralError("each part needs a nonzero operator")
            if not v.is_polynomial:
                raise StructuralError("part operators must have polynomial coefficients")
            if not isinstance(f, RationalSummand):
                raise StructuralError("each part needs a RationalSummand")
        for (_, fi), (_, fj) in itertools.combinations(parts, 2):
            if fi.e != fj.e:
                continue
            if mpq(fi.a, fi.ap) != mpq(fj.a, fj.ap):
                continue
            gap = mpq(fi.app, fi.ap) - mpq(fj.app, fj.ap)
            if gap.denominator == 1:
                raise StructuralError(
                    "parts with equal exponent have k-shift-overlapping poles: "
                    f"{fi.linear_form!r} vs {fj.linear_form!r}"
                )
        object.__setattr__(self, "parts", parts)

    def value(self) -> RatFuncNK:
        """The rational function the decomposition denotes."""
        total = RatFuncNK.zero()
        for v, f in self.parts:
            total = total + apply_operator(v, f)
        return total / RatFuncNK.from_poly(self.u)


def apply_operator(v: RecOperator, f: RationalSummand) -> RatFuncNK:
    """Evaluate V(S_n) applied to the summand: sum_t V_t(n) * f(n+t, k)."""
    total = RatFuncNK.zero()
    for t, coeff in enumerate(v.coeffs):
        if coeff.is_zero:
            continue
        form = PolyNK.linear(f.a, f.ap, f.app + t * f.a)
        total = total + coeff * RatFuncNK(PolyNK.one(), form ** f.e)
    return total


# -- decomposition -------------------------------------------------------------

_SYM_N, _SYM_K = sympy.symbols("n k")


def _poly_to_sympy(p: PolyNK):
    terms = []
    for (i, j), c in p.terms_glex():
        terms.append(
            sympy.Rational(int(c.numerator), int(c.denominator))
            * _SYM_N**i
            * _SYM_K**j
        )
    return sympy.Add(*terms) if terms else sympy.Integer(0)


def _sympy_to_poly(expr) -> PolyNK:
    poly = sympy.Poly(expr, _SYM_N, _SYM_K)
    coeffs: dict[tuple[int, int], Rat] = {}
    for (i, j), c in poly.terms():
        c = sympy.Rational(c)
        coeffs[(int(i), int(j))] = mpq(int(c.p), int(c.q))
    return PolyNK(coeffs)


def _diff_k(p: PolyNK) -> PolyNK:
    cs = p.k_coeff_list()
    return PolyNK.from_k_coeff_list([c * (j + 1) for j, c in enumerate(cs[1:])])


@dataclass(frozen=True)
class _LinearFactor:
    a: int
    ap: int  # 0 for k-free factors
    app: Rat
    mult: int
    raw: PolyNK  # the factor exactly as factored (any k-free factor verbatim)


def _classify_factor(factor: PolyNK, mult: int) -> _LinearFactor:
    dk = factor.degree_k()
    if dk in (None, 0):
        return _LinearFactor(0, 0, mpq(0), mult, factor)
    monoms = {m for m, _ in factor.terms_glex()}
    if not monoms <= {(0, 0), (1, 0), (0, 1)}:
        raise StructuralError(
            f"denominator factor is not integer-linear in (n, k): {factor!r}"
        )
    cn = factor.eval_at(1, 0) - factor.eval_at(0, 0)
    ck = factor.eval_at(0, 1) - factor.eval_at(0, 0)
    c0 = factor.eval_at(0, 0)
    ratio = mpq(cn) / mpq(ck)
    a, ap = int(ratio.numerator), int(ratio.denominator)
    if a == 0:
        ap = 1
    scale = mpq(ck, ap)
    return _LinearFactor(a, ap, mpq(c0) / scale, mult, factor)


def _check_shift_reduced(factors: list[_LinearFactor]) -> None:
    """Reject pairs of pole lines equivalent under k-shifts alone: those make
    the summand reducible by Abramov reduction before any telescoping."""
    for fi, fj in itertools.combinations(factors, 2):
        if (fi.a, fi.ap) != (fj.a, fj.ap):
            continue
        gap = fi.app - fj.app
        if gap == 0:
            continue
        if (gap / fi.ap).denominator != 1:
            continue  # not a k-shift
        if fi.a != 0 and (gap / fi.a).denominator == 1:
            continue  # also an n-shift: absorbed into one S_n orbit
        raise NotShiftReducedError(
            "denominator has k-shift-equivalent factors (input is not "
            f"Abramov-reduced): {fi.raw!r} vs {fj.raw!r}"
        )


def _poly_substitute_k(p: PolyNK, kval: RatFuncNK) -> RatFuncNK:
    """Evaluate p(n, k) at k = kval(n) by Horner's rule over Q(n)."""
    total = RatFuncNK.zero()
    for c in reversed(p.k_coeff_list()):
        total = total * kval + RatFuncNK.from_poly(c)
    return total


def decompose(p: PolyNK, q: PolyNK) -> DecomposedInput:
    """Split p/q (proper in k, with integer-linear poles) into S_n pole
    orbits.

    Partial fractions in k produce one term per (pole line, exponent); terms
    whose lines differ by a shift n -> n+t of the same normalized form are
    collected into a single part as the S_n^t coefficient of its operator.
    The common denominator u picks up every k-free factor and the
    denominators the coefficients acquire along the way.
    """
    if not isinstance(p, PolyNK) or not isinstance(q, PolyNK):
        raise PreconditionError("decompose expects polynomial numerator and denominator")
    if q.is_zero:
        raise PreconditionError("denominator must be nonzero")
    dk_p = p.degree_k()
    dk_q = q.degree_k()
    if not p.is_zero and (dk_q is None or (dk_p or 0) >= dk_q):
        raise PreconditionError("input must be proper in k: deg_k(num) < deg_k(den)")

    _, factor_pairs = sympy.factor_list(_poly_to_sympy(q), _SYM_N, _SYM_K)
    factors = [
        _classify_factor(_sympy_to_poly(f), int(m)) for f, m in factor_pairs
    ]
    k_factors = [f for f in factors if f.ap > 0]
    _check_shift_reduced(k_factors)

    # one partial-fraction term per (pole line, exponent): p/q near the line
    # F = 0 expands as sum_{m < e} T_m F^{m-e} with T_m the m-th Taylor
    # coefficient of p/(q/F^e) in F, and d/dF = (1/ap) d/dk on the line
    summands: list[tuple[int, int, Rat, int, RatFuncNK]] = []
    for fac in k_factors:
        form = PolyNK.linear(fac.a, fac.ap, fac.app)
        scale = fac.raw.exact_div(form)  # k-free constant polynomial
        cofactor = q
        for _ in range(fac.mult):
            cofactor = cofactor.exact_div(fac.raw)
        kval = RatFuncNK(
            PolyNK.linear(-fac.a, 0, -fac.app), PolyNK.const(fac.ap)
        )
        num, den = p, cofactor
        for m in range(fac.mult):
            e = fac.mult - m
            value = _poly_substitute_k(num, kval) / _poly_substitute_k(den, kval)
            coeff = value / (
                mpq(factorial(m)) * mpq(fac.ap) ** m * scale.eval_at(0, 0) ** fac.mult
            )
            if not coeff.is_zero:
                summands.append((fac.a, fac.ap, fac.app, e, coeff))
            if e > 1:
                # quotient-rule step: (num/den)' with both parts polynomial
                num, den = (
                    _diff_k(num) * den - num * _diff_k(den),
                    den * den,
                )
        del num, den

    # collect summands whose lines are S_n shifts of each other
    orbits: list[tuple[int, int, int, list[tuple[Rat, RatFuncNK]]]] = []
    for a, ap, app, e, coeff in summands:
        for oa, oap, oe, members in orbits:
            if (oa, oap, oe) != (a, ap, e):
                continue
            gap = app - members[0][0]
            if a == 0:
                if gap != 0:
                    continue
            elif (gap / a).denominator != 1:
                continue
            members.append((app, coeff))
            break
        else:
            orbits.append((a, ap, e, [(app, coeff)]))

    common = PolyNK.one()
    prepared = []
    for a, ap, e, members in orbits:
        if a > 0:
            base = min(m[0] for m in members)
        elif a < 0:
            base = max(m[0] for m in members)
        else:
            base = members[0][0]
        coeffs_by_t: dict[int, RatFuncNK] = {}
        for app, coeff in members:
            t = 0 if a == 0 else int((app - base) / a)
            coeffs_by_t[t] = coeffs_by_t.get(t, RatFuncNK.zero()) + coeff
            common = lcm_poly(common, coeffs_by_t[t].den)
        prepared.append((a, ap, base, e, coeffs_by_t))

    u = common.primitive()[1]
    cleared = []
    numeric_den = mpz(1)
    for a, ap, base, e, coeffs_by_t in prepared:
        top = max(coeffs_by_t)
        coeffs = []
        for t in range(top + 1):
            c = coeffs_by_t.get(t, RatFuncNK.zero())
            poly = c.num * u.exact_div(c.den) if not c.is_zero else PolyNK.zero()
            if not poly.is_zero:
                numeric_den = gmpy2.lcm(numeric_den, poly.content().denominator)
            coeffs.append(poly)
        cleared.append((a, ap, base, e, coeffs))
    # the common denominator also carries any numeric denominators left in
    # the coefficients, so the part operators end up integral
    u = u * numeric_den
    parts = []
    for a, ap, base, e, coeffs in cleared:
        ops = tuple(RatFuncNK.from_poly(c * numeric_den) for c in coeffs)
        parts.append((RecOperator(ops), RationalSummand(a, ap, base, e)))
    parts.sort(key=lambda vf: (
        vf[1].e, vf[1].ap, vf[1].a,
        int(vf[1].app.numerator), int(vf[1].app.denominator),
    ))
    return DecomposedInput(u, tuple(parts))


# -- solving -------------------------------------------------------------------


def _structural_params(inp: DecomposedInput) -> tuple[int, int]:
    sum_ap = sum(f.ap for _, f in inp.parts)
    deg_u = inp.u.degree_n() or 0
    return sum_ap, deg_u


def solve_rational(inp: DecomposedInput, r: int, d: int) -> Telescoper | None:
    """Find L = l_0 + ... + l_r S_n^r with deg l_j <= d telescoping the
    decomposed input, or None when only L = 0 satisfies the constraints.

    Writing L = Ltilde * u confines the search to Ltilde of degree at most
    d - deg u; L telescopes the input exactly when, for every part, the skew
    product Ltilde * V_i has zero right remainder by S_n^{a_i'} - 1, i.e.
    when each residue-class sum of its coefficients vanishes identically.
    """
    sum_ap, deg_u = _structural_params(inp)
    if r < sum_ap:
        raise PreconditionError(
            f"order {r} is below the sum of k-coefficients {sum_ap}"
        )
    if d < deg_u:
        raise PreconditionError(
            f"degree {d} is below deg u = {deg_u}"
        )
    dt = d - deg_u
    ncols = (r + 1) * (dt + 1)

    rows: list[list[Rat]] = []
    for v, f in inp.parts:
        vpolys = v.polynomial_coeffs()
        for residue in range(f.ap):
            # sum over j of ltilde_j(n) * w_j(n) = 0, with w_j collecting the
            # V coefficients landing in this residue class of S_n powers
            wj: list[PolyNK] = []
            for j in range(r + 1):
                acc = PolyNK.zero()
                for t, vt in enumerate(vpolys):
                    if (j + t) % f.ap == residue:
                        acc = acc + vt.shift(j, 0)
                wj.append(acc)
            top = max(((w.degree_n() or 0) for w in wj if not w.is_zero), default=-1)
            if top < 0:
                continue
            coeff_rows: list[list[Rat]] = [
                [mpq(0)] * ncols for _ in range(top + dt + 1)
            ]
            for j, w in enumerate(wj):
                if w.is_zero:
                    continue
                dense = [mpq(0)] * ((w.degree_n() or 0) + 1)
                for (i, _), c in w.terms_glex():
                    dense[i] = c
                for s in range(dt + 1):
                    col = j * (dt + 1) + s
                    for i, c in enumerate(dense):
                        if c:
                            coeff_rows[i + s][col] = coeff_rows[i + s][col] + c
            rows.extend(coeff_rows)

    if not rows:
        # every class sum vanished identically: any nonzero Ltilde works
        ltilde = [PolyNK.zero()] * (r + 1)
        ltilde[0] = PolyNK.one()
    else:
        basis = kernel_basis_exact(MatrixQ(rows, ncols=ncols))
        if not basis:
            return None
        vec = basis[0]
        ltilde = []
        for j in range(r + 1):
            chunk = vec[j * (dt + 1): (j + 1) * (dt + 1)]
            ltilde.append(
                PolyNK({(s, 0): c for s, c in enumerate(chunk) if c})
            )

    ell = [lt * inp.u.shift(j, 0) for j, lt in enumerate(ltilde)]
    op = RecOperator(tuple(RatFuncNK.from_poly(c) for c in ell)).normalized()
    tele = Telescoper(op.polynomial_coeffs() + (PolyNK.zero(),) * (r - op.order))
    if not verify_rational(inp, tele):
        raise StructuralError("internal error: candidate operator failed verification")
    return tele


def verify_rational(inp: DecomposedInput, op: Telescoper | RecOperator) -> bool:
    """Check that op * (1/u) * V_i has zero right remainder by
    S_n^{a_i'} - 1 for every part, which is exactly the statement that op
    telescopes the decomposed input."""
    if isinstance(op, Telescoper):
        coeffs: tuple = op.coeffs
    elif isinstance(op, RecOperator):
        coeffs = op.coeffs
    else:
        raise PreconditionError("verify_rational expects an operator")
    over_u = RecOperator(tuple(
        _coerce_ratfunc(c) / RatFuncNK.from_poly(inp.u.shift(j, 0))
        for j, c in enumerate(coeffs)
    ))
    if over_u.is_zero:
        return False
    for v, f in inp.parts:
        divisor = RecOperator.s_n(f.ap) - RecOperator.one()
        if not right_remainder(over_u * v, divisor).is_zero:
            return False
    return True


def lift(op: Telescoper, a: PolyNK, b: PolyNK) -> Telescoper:
    """Transport a telescoper across a rational change of the n-direction
    ratio: if g(n+1, k) = (a(n)/b(n)) * (f(n+1, k)/f(n, k)) * g(n, k), then
    sum_i l_i * prod_{t<i} (b/a)(n+t) * S_n^i telescopes g whenever op
    telescopes f.  Denominators are cleared with the complementary products
    of a, so the result has polynomial coefficients of degree at most
    deg op + order * max(deg a, deg b)."""
    if not isinstance(a, PolyNK) or not isinstance(b, PolyNK):
        raise PreconditionError("lift expects polynomial ratio parts")
    if a.is_zero or b.is_zero:
        raise PreconditionError("ratio parts must be nonzero")
    if not (a.k_free and b.k_free):
        raise PreconditionError("ratio parts must be k-free")
    r = op.order
    out = []
    for i, c in enumerate(op.coeffs):
        scaled = c
        for t in range(i):
            scaled = scaled * b.shift(t, 0)
        for t in range(i, r):
            scaled = scaled * a.shift(t, 0)
        out.append(scaled)
    return Telescoper(tuple(out))
