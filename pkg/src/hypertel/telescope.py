"""Telescoper search for proper hypergeometric terms.

The pipeline: from a term h and a target order r, build the polynomial data
(P_0..P_r, Q, R) of the equation

    P = Q * S_k(Y) - R * Y,        P = l_0 P_0 + ... + l_r P_r,

choose degree caps for the unknown operator coefficients l_i (polynomials in
n) and for the unknown polynomial Y (in n and k), compare coefficients of
every monomial n^a k^b, and look for a kernel vector of the resulting exact
linear system whose l-block is nonzero.  Any such vector yields the operator
L = sum l_i S_n^i together with a certificate C with L(h) = S_k(Ch) - Ch.

Two solvers are provided: `solve_structured` compares coefficients in both
variables and works over Q with a fixed degree budget (this is the one whose
solvable (r, d) cells the region scanner maps), while `solve_zeilberger`
compares coefficients in k only and solves over the rational-function field
in n, leaving the coefficient degrees unconstrained.

The certificate is C = R*Y / (p * prod rf(U, r*u) rf(V, r*v)): writing
L(h) = P*H for the hypergeometric factor H common to all shifts, the Gosper
relation turns L(h) into S_k(R*Y*H) - R*Y*H, and R*Y*H/h is exactly that
quotient.  `verify_pair` re-derives the identity independently from the shift
quotients of h, entirely in Q(n, k).
"""

from __future__ import annotations

import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import gmpy2
from gmpy2 import mpq, mpz

from .errors import PreconditionError, StructuralError
from .exactmath import (
    MatrixQ,
    PolyNK,
    Rat,
    RatFuncNK,
    kernel_basis_exact,
    nullspace_over_ratfunc,
    proves_full_column_rank,
    rising_factorial,
)
from .hyperterm import ProperTerm, StructuralParams, detect_splittable, sigma_k, sigma_n, structural_params

ExpPair = tuple[int, int]

WORKERS_ENV = "HYPERTEL_WORKERS"


# -- operator and certificate ------------------------------------------------


@dataclass(frozen=True)
class Telescoper:
    """Operator l_0 + l_1 S_n + ... + l_r S_n^r with k-free polynomial
    coefficients.  The tuple length fixes the nominal order; trailing zero
    coefficients are allowed (a padded operator is still the same operator),
    but not all coefficients may vanish."""

    coeffs: tuple[PolyNK, ...]

    def __post_init__(self):
        coeffs = tuple(self.coeffs)
        if not coeffs:
            raise StructuralError("telescoper needs at least one coefficient")
        for c in coeffs:
            if not isinstance(c, PolyNK) or not c.k_free:
                raise StructuralError("telescoper coefficients must be k-free polynomials")
        if all(c.is_zero for c in coeffs):
            raise StructuralError("telescoper must be nonzero")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def degree(self) -> int:
        return max(c.degree_n() or 0 for c in self.coeffs if not c.is_zero)

    def padded(self, order: int) -> "Telescoper":
        if order < self.order:
            raise StructuralError("cannot pad to a smaller order")
        extra = (PolyNK.zero(),) * (order - self.order)
        return Telescoper(self.coeffs + extra)

    def scaled(self, factor: Rat | PolyNK) -> "Telescoper":
        return Telescoper(tuple(c * factor for c in self.coeffs))


@dataclass(frozen=True)
class Certificate:
    value: RatFuncNK


def _normalize_solution(
    ell: Sequence[PolyNK], y: PolyNK
) -> tuple[tuple[PolyNK, ...], PolyNK]:
    """Scale (l_i, Y) jointly so the l_i get integer coefficients with joint
    content 1 and a positive leading coefficient on the first nonzero l_i."""
    num_g = mpz(0)
    den_l = mpz(1)
    for p in ell:
        c = p.content()
        if c:
            num_g = gmpy2.gcd(num_g, c.numerator)
            den_l = gmpy2.lcm(den_l, c.denominator)
    if not num_g:
        return tuple(ell), y
    scale = mpq(den_l, num_g)
    for p in ell:
        if not p.is_zero:
            if p.leading_coeff_glex() < 0:
                scale = -scale
            break
    return tuple(p * scale for p in ell), y * scale


# -- Gosper data -------------------------------------------------------------


@dataclass(frozen=True)
class GosperTriple:
    """The polynomials entering the Gosper equation at a fixed order.

    pparts[i] holds P_i = x^i * S_n^i(p) * (rising-factorial products), so the
    full P is the l-weighted sum of the parts; q and r are the k-shift
    numerator and denominator polynomials.  `order` is the operator order the
    triple was built for (q, r, and the parts all depend on it).
    """

    pparts: tuple[PolyNK, ...]
    q: PolyNK
    r: PolyNK
    order: int


def gosper_triple(h: ProperTerm, order: int) -> GosperTriple:
    if order < 0:
        raise PreconditionError("order must be nonnegative")
    pparts = []
    for i in range(order + 1):
        part = h.p.shift(i, 0) * h.x**i
        for f in h.factors:
            arg = f.argument()
            if f.in_numerator:
                part = part * rising_factorial(arg, i * f.cn)
            else:
                part = part * rising_factorial(arg + i * f.cn, (order - i) * f.cn)
        pparts.append(part)
    q = PolyNK.const(h.y)
    r = PolyNK.one()
    for f in h.factors:
        arg = f.argument()
        if f.family == "A":
            q = q * rising_factorial(arg, f.ck)
        elif f.family == "V":
            q = q * rising_factorial(arg + order * f.cn - f.ck, f.ck)
        elif f.family == "U":
            r = r * rising_factorial(arg + order * f.cn - f.ck, f.ck)
        else:  # B
            r = r * rising_factorial(arg, f.ck)
    return GosperTriple(tuple(pparts), q, r, order)


def certificate_denominator(h: ProperTerm, order: int) -> PolyNK:
    """p times the rising factorials that relate h to the common
    hypergeometric factor of L(h); the certificate is R*Y over this."""
    den = h.p
    for f in h.factors:
        if not f.in_numerator:
            den = den * rising_factorial(f.argument(), order * f.cn)
    return den


# -- degree plans ------------------------------------------------------------


@dataclass(frozen=True)
class DegreePlan:
    """Degree budget for one (r, d) attempt: per-coefficient caps d_i for the
    l_i, and the k-degree / total-degree caps s1, s2 for Y."""

    r: int
    d: int
    di: tuple[int, ...]
    s1: int
    s2: int
    trapezoidal: bool = True

    def ell_support(self) -> list[ExpPair]:
        return [(i, j) for i in range(self.r + 1) for j in range(self.di[i] + 1)]

    def y_support(self) -> list[ExpPair]:
        if self.s1 < 0 or self.s2 < 0:
            return []
        return [(i, j)
                for i in range(min(self.s1, self.s2) + 1)
                for j in range(self.s2 - i + 1)]

    @property
    def ell_count(self) -> int:
        return sum(di + 1 for di in self.di)

    @property
    def y_count(self) -> int:
        return len(self.y_support())


def degree_plan(sp: StructuralParams, r: int, d: int) -> DegreePlan:
    """The trapezoidal ansatz: d_i shrinks by |mu| per step across the last
    (or first) nu indices, and Y gets the no-new-equations caps."""
    amu = sp.abs_mu
    if r < sp.nu:
        raise PreconditionError(f"order {r} is below the minimal order {sp.nu}")
    if d < amu * sp.nu:
        raise PreconditionError(
            f"degree {d} is below {amu * sp.nu}, the trapezoid correction depth")
    if sp.mu >= 0:
        di = tuple(d - max(sp.nu + i - r, 0) * amu for i in range(r + 1))
    else:
        di = tuple(d - max(sp.nu - i, 0) * amu for i in range(r + 1))
    base = sp.delta + sp.theta * r
    return DegreePlan(
        r=r, d=d, di=di,
        s1=base - sp.nu,
        s2=base + d - sp.nu * amu - sp.nu,
        trapezoidal=True,
    )


def forced_plan(sp: StructuralParams, r: int, d: int, slack: int = 0) -> DegreePlan:
    """Uniform caps d_i = d for experiments outside the trapezoid's domain;
    Y caps fall back to the raw degree bounds when the trapezoid values are
    not defined, and a slack widens Y either way."""
    base = sp.delta + sp.theta * r
    if r >= sp.nu and d >= sp.abs_mu * sp.nu:
        s1 = base - sp.nu
        s2 = base + d - sp.nu * sp.abs_mu - sp.nu
    else:
        s1 = base
        s2 = base + d
    return DegreePlan(
        r=r, d=d, di=(d,) * (r + 1),
        s1=s1 + slack, s2=s2 + slack,
        trapezoidal=False,
    )


# -- system assembly ---------------------------------------------------------


@dataclass
class AssembledSystem:
    """Exact coefficient-comparison system for one degree plan.

    Columns: first one per l_{i,j} (operator coefficient monomial n^j S_n^i),
    then one per y_{i,j} (Y monomial k^i n^j), both blocks in (i, j)
    lexicographic order.  Rows: one per monomial n^a k^b actually occurring in
    any column polynomial, sorted by graded-lex key.
    """

    matrix: MatrixQ
    ell_cols: list[ExpPair]
    y_cols: list[ExpPair]
    row_monomials: list[ExpPair]
    plan: DegreePlan
    triple: GosperTriple

    @property
    def ncols(self) -> int:
        return len(self.ell_cols) + len(self.y_cols)

    @property
    def nrows(self) -> int:
        return len(self.row_monomials)

    @property
    def column_names(self) -> list[str]:
        return ([f"l[{i},{j}]" for i, j in self.ell_cols]
                + [f"y[{i},{j}]" for i, j in self.y_cols])


def assemble_system(h: ProperTerm, plan: DegreePlan) -> AssembledSystem:
    triple = gosper_triple(h, plan.r)
    ell_cols = plan.ell_support()
    y_cols = plan.y_support()

    # one polynomial per column: n^j P_i for the l-block,
    # n^j (R k^i - Q (k+1)^i) for the Y-block
    col_polys: list[PolyNK] = []
    for i, j in ell_cols:
        col_polys.append(triple.pparts[i].times_monomial(j, 0))
    if y_cols:
        kplus1 = PolyNK.k() + 1
        gi_cache: dict[int, PolyNK] = {}
        for i, j in y_cols:
            gi = gi_cache.get(i)
            if gi is None:
                gi = triple.r.times_monomial(0, i) - triple.q * kplus1**i
                gi_cache[i] = gi
            col_polys.append(gi.times_monomial(j, 0))

    support: set[ExpPair] = set()
    for poly in col_polys:
        support.update(poly.support())
    row_monomials = sorted(support, key=lambda e: (e[0] + e[1], e[0]))
    row_index = {mono: idx for idx, mono in enumerate(row_monomials)}

    rows: list[list[Rat]] = [[mpq(0)] * len(col_polys) for _ in row_monomials]
    for cidx, poly in enumerate(col_polys):
        for mono, coeff in poly._c.items():
            rows[row_index[mono]][cidx] = coeff
    return AssembledSystem(
        matrix=MatrixQ(rows, ncols=len(col_polys)),
        ell_cols=ell_cols,
        y_cols=y_cols,
        row_monomials=row_monomials,
        plan=plan,
        triple=triple,
    )


# -- solving over Q ----------------------------------------------------------


@dataclass
class StructuredSolve:
    """Outcome of one structured attempt: the verified pair when found, plus
    a status distinguishing an empty kernel from a kernel that contained only
    Y-directions, and the system dimensions for diagnostics."""

    pair: Optional[tuple[Telescoper, Certificate]]
    status: str  # "found" | "trivial-kernel" | "y-only-kernel"
    ncols: int
    nrows: int


def _check_gosper(triple: GosperTriple, ell: Sequence[PolyNK], y: PolyNK) -> bool:
    total = PolyNK.zero()
    for li, pi in zip(ell, triple.pparts):
        if not li.is_zero:
            total = total + li * pi
    rhs = triple.q * y.shift(0, 1) - triple.r * y
    return total == rhs


def _pair_from_vector(
    h: ProperTerm,
    system: AssembledSystem,
    vec: Sequence[Rat],
) -> tuple[Telescoper, Certificate]:
    plan = system.plan
    n_ell = len(system.ell_cols)
    ell_raw: list[dict[ExpPair, Rat]] = [{} for _ in range(plan.r + 1)]
    for (i, j), c in zip(system.ell_cols, vec[:n_ell]):
        if c:
            ell_raw[i][(j, 0)] = c
    ell = [PolyNK(d) for d in ell_raw]
    y = PolyNK({(j, i): c for (i, j), c in zip(system.y_cols, vec[n_ell:]) if c})
    ell_n, y_n = _normalize_solution(ell, y)
    if not _check_gosper(system.triple, ell_n, y_n):
        raise StructuralError("internal: kernel vector does not satisfy the Gosper equation")
    cert = RatFuncNK(system.triple.r * y_n, certificate_denominator(h, plan.r))
    return Telescoper(ell_n), Certificate(cert)


def solve_structured_info(
    h: ProperTerm,
    r: int,
    d: int,
    *,
    plan: Optional[DegreePlan] = None,
    force: bool = False,
    verify: bool = True,
) -> StructuredSolve:
    if not force and detect_splittable(h):
        raise PreconditionError(
            "term splits into a rational function times a k-free term; "
            "use the rational pipeline, or force the structured solver")
    if plan is None:
        sp = structural_params(h)
        try:
            plan = degree_plan(sp, r, d)
        except PreconditionError:
            plan = forced_plan(sp, r, d)
    system = assemble_system(h, plan)
    dims = (system.ncols, system.nrows)

    if proves_full_column_rank(system.matrix):
        return StructuredSolve(None, "trivial-kernel", *dims)
    n_ell = len(system.ell_cols)
    saw_vector = False
    for vec in kernel_basis_exact(system.matrix):
        saw_vector = True
        if any(vec[:n_ell]):
            pair = _pair_from_vector(h, system, vec)
            if verify and not verify_pair(h, pair[0], pair[1]):
                raise StructuralError("internal: solution failed exact verification")
            return StructuredSolve(pair, "found", *dims)
    return StructuredSolve(
        None, "y-only-kernel" if saw_vector else "trivial-kernel", *dims)


def solve_structured(
    h: ProperTerm,
    r: int,
    d: int,
    *,
    plan: Optional[DegreePlan] = None,
    force: bool = False,
    verify: bool = True,
) -> Optional[tuple[Telescoper, Certificate]]:
    """Search for a telescoper of order r and coefficient degree at most d by
    exact coefficient comparison over Q.  None means the ansatz has no
    solution with a nonzero operator part (larger certificates may exist)."""
    return solve_structured_info(h, r, d, plan=plan, force=force, verify=verify).pair


# -- solving over Q(n) -------------------------------------------------------


def _solve_ratfunc_order(
    h: ProperTerm,
    sp: StructuralParams,
    r: int,
    slack: int,
    verify: bool,
) -> Optional[tuple[Telescoper, Certificate]]:
    triple = gosper_triple(h, r)
    base = sp.delta + sp.theta * r
    s1 = (base - sp.nu if r >= sp.nu else base) + slack
    col_polys: list[PolyNK] = list(triple.pparts)
    if s1 >= 0:
        kplus1 = PolyNK.k() + 1
        for i in range(s1 + 1):
            col_polys.append(triple.r.times_monomial(0, i) - triple.q * kplus1**i)
    n_ell = r + 1

    coeff_lists = [poly.k_coeff_list() for poly in col_polys]
    depth = max(len(cl) for cl in coeff_lists)
    rows = [
        [cl[j] if j < len(cl) else PolyNK.zero() for cl in coeff_lists]
        for j in range(depth)
    ]
    for vec in nullspace_over_ratfunc(rows):
        if all(p.is_zero for p in vec[:n_ell]):
            continue
        y = PolyNK.zero()
        for i, p in enumerate(vec[n_ell:]):
            y = y + p.times_monomial(0, i)
        ell, y = _normalize_solution(vec[:n_ell], y)
        if not _check_gosper(triple, ell, y):
            raise StructuralError("internal: kernel vector does not satisfy the Gosper equation")
        cert = RatFuncNK(triple.r * y, certificate_denominator(h, r))
        pair = (Telescoper(ell), Certificate(cert))
        if verify and not verify_pair(h, pair[0], pair[1]):
            raise StructuralError("internal: solution failed exact verification")
        return pair
    return None


def solve_zeilberger(
    h: ProperTerm,
    rmax: int,
    *,
    slack: int = 2,
    force: bool = False,
    verify: bool = True,
) -> Optional[tuple[Telescoper, Certificate]]:
    """Classic order scan: compare coefficients of powers of k only and solve
    over the rational functions in n, trying r = 0, 1, ..., rmax and returning
    a denominator-cleared pair at the first order that admits one."""
    if not force and detect_splittable(h):
        raise PreconditionError(
            "term splits into a rational function times a k-free term; "
            "use the rational pipeline, or force the structured solver")
    sp = structural_params(h)
    for r in range(rmax + 1):
        pair = _solve_ratfunc_order(h, sp, r, slack, verify)
        if pair is not None:
            return pair
    return None


# -- verification ------------------------------------------------------------


def verify_pair(h: ProperTerm, tele: Telescoper, cert: Certificate) -> bool:
    """Exact check of L(h) = S_k(Ch) - Ch, performed on the identity divided
    by h, so everything happens in Q(n, k):

        sum_i l_i * prod_{t<i} sigma_n(n+t, k)
            = C(n, k+1) * sigma_k(n, k) - C(n, k).

    The two sides are compared by cross-multiplication over explicit common
    denominators; no gcd normalization happens on the way."""
    sn = sigma_n(h)
    sk = sigma_k(h)
    r = tele.order

    # prod_{t<i} sigma_n(n+t, k) = (a_0...a_{i-1}) / (b_0...b_{i-1});
    # use B = b_0...b_{r-1} as the common denominator for the whole sum
    a_sh = [sn.num.shift(t, 0) for t in range(r)]
    b_sh = [sn.den.shift(t, 0) for t in range(r)]
    suffix = [PolyNK.one()] * (r + 1)
    for t in range(r - 1, -1, -1):
        suffix[t] = suffix[t + 1] * b_sh[t]
    lhs_num = PolyNK.zero()
    prefix = PolyNK.one()
    for i, li in enumerate(tele.coeffs):
        if not li.is_zero:
            lhs_num = lhs_num + li * prefix * suffix[i]
        if i < r:
            prefix = prefix * a_sh[i]
    lhs_den = suffix[0]

    c_num, c_den = cert.value.num, cert.value.den
    cs_num, cs_den = c_num.shift(0, 1), c_den.shift(0, 1)
    rhs_num = cs_num * sk.num * c_den - c_num * cs_den * sk.den
    rhs_den = cs_den * sk.den * c_den

    return lhs_num * rhs_den == rhs_num * lhs_den


def spot_check_pair(
    h: ProperTerm,
    tele: Telescoper,
    cert: Certificate,
    count: int = 20,
    seed: int = 7,
    span: int = 80,
) -> bool:
    """Evaluate the telescoping identity at `count` random integer points
    (skipping poles).  The left side multiplies shift-quotient values step by
    step, so this exercises a different code path than the symbolic check."""
    rng = random.Random(seed)
    sn = sigma_n(h)
    sk = sigma_k(h)
    cval = cert.value
    done = 0
    for _ in range(200 * count):
        if done >= count:
            break
        n0 = rng.randint(1, span)
        k0 = rng.randint(1, span)
        lhs = mpq(0)
        fac = mpq(1)
        ok = True
        for i, li in enumerate(tele.coeffs):
            if i > 0:
                step = sn.eval_at(n0 + i - 1, k0)
                if step is None:
                    ok = False
                    break
                fac *= step
            if not li.is_zero:
                lhs += li.eval_at(n0, k0) * fac
        if not ok:
            continue
        skv = sk.eval_at(n0, k0)
        c0 = cval.eval_at(n0, k0)
        c1 = cval.eval_at(n0, k0 + 1)
        if skv is None or c0 is None or c1 is None:
            continue
        if lhs != c1 * skv - c0:
            return False
        done += 1
    return done == count


# -- region scanning ---------------------------------------------------------


def _scan_cell(args) -> tuple[int, int, Optional[tuple[Telescoper, Certificate]]]:
    h, r, d, slack, force = args
    sp = structural_params(h)
    plan = forced_plan(sp, r, d, slack)
    info = solve_structured_info(h, r, d, plan=plan, force=force)
    return (r, d, info.pair)


def _resolve_workers(workers: Optional[int]) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def region_scan(
    h: ProperTerm,
    rmax: int,
    dmax: int,
    *,
    slack: int = 2,
    force: bool = False,
    workers: Optional[int] = None,
    progress: Optional[Callable[[int, list[int]], None]] = None,
) -> dict[tuple[int, int], tuple[Telescoper, Certificate]]:
    """Map the cells of [0..rmax] x [0..dmax] admitting a telescoper.

    A telescoper of order r and degree d is also one of order r+1 and of
    degree d+1, so the solvable set is upward closed and only its lower
    frontier needs direct solves: within each row, cells to the right of a
    solved cell inherit its pair, and a row inherits from the row below.
    Direct attempts use uniform degree caps plus the given slack; the scan is
    one-sided (a cell left unmarked may still admit a telescoper whose
    certificate exceeds the caps).

    Returns marked cell -> verified (operator, certificate) pair.
    """
    if rmax < 0 or dmax < 0:
        raise PreconditionError("window bounds must be nonnegative")
    nworkers = _resolve_workers(workers)
    marked: dict[tuple[int, int], tuple[Telescoper, Certificate]] = {}
    pool = ProcessPoolExecutor(max_workers=nworkers) if nworkers > 1 else None
    try:
        inherit_from = dmax + 1  # first marked d in the previous row
        for r in range(rmax + 1):
            todo = [(h, r, d, slack, force) for d in range(min(inherit_from, dmax + 1))]
            if pool is not None and len(todo) > 1:
                outcomes = list(pool.map(_scan_cell, todo))
            else:
                outcomes = [_scan_cell(args) for args in todo]
            direct = {d: pair for _, d, pair in outcomes if pair is not None}
            start = min(direct) if direct else inherit_from
            for d in range(start, dmax + 1):
                if d in direct:
                    marked[(r, d)] = direct[d]
                elif (r, d - 1) in marked:
                    marked[(r, d)] = marked[(r, d - 1)]
                else:
                    marked[(r, d)] = marked[(r - 1, d)]
            inherit_from = start
            if progress is not None:
                progress(r, sorted(d for rr, d in marked if rr == r))
    finally:
        if pool is not None:
            pool.shutdown()
    return marked
