"""Exact arithmetic substrate: rationals, bivariate polynomials, rational
functions, and fraction-free linear algebra.

Everything in this module is exact.  Rational scalars are GMP rationals
(``gmpy2.mpq``), which keep gcd(numerator, denominator) = 1 and
denominator > 0 by construction.  A polynomial in the two shift variables
n and k is a sparse map from exponent pairs ``(i, j)`` (the monomial
``n^i * k^j``) to nonzero rational coefficients.  Rational functions store a
normalized numerator/denominator pair: the gcd is removed and the denominator
has leading coefficient 1 under graded lexicographic order with n > k.

The nullspace routines run Bareiss fraction-free elimination.  Pivots are
chosen to minimize growth (smallest bit size for integer matrices, smallest
degree for polynomial matrices) with a deterministic tie-break on lowest
column index, then lowest row index, so identical inputs always produce
identical output vectors.

The zero polynomial has no degree; degree queries return ``None`` for it
rather than a numeric sentinel, and callers are expected to branch on that.
"""

from __future__ import annotations

from typing import Callable, Iterable, Iterator, Sequence

import gmpy2
from gmpy2 import mpq, mpz
from sympy.polys.densebasic import dmp_from_dict, dmp_to_dict
from sympy.polys.domains import ZZ
from sympy.polys.euclidtools import dmp_inner_gcd, dup_inner_gcd

from .errors import ExactDivisionError, StructuralError

Rat = mpq
ExpPair = tuple[int, int]

_MPQ_TYPE = type(mpq())
_MPZ_TYPE = type(mpz())


def rat(value: int | str | Rat, den: int | None = None) -> Rat:
    """Build an exact rational.  Floats are rejected, they have no place in
    any solve path here."""
    if isinstance(value, float) or isinstance(den, float):
        raise StructuralError("floating-point values are not accepted")
    if den is not None:
        return mpq(value, den)
    if isinstance(value, str):
        return mpq(value)
    return mpq(value)


def is_rat(value: object) -> bool:
    return isinstance(value, (_MPQ_TYPE, _MPZ_TYPE, int))


def _as_rat(value: object) -> Rat:
    if isinstance(value, _MPQ_TYPE):
        return value
    if isinstance(value, (int, _MPZ_TYPE)):
        return mpq(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def _glex_key(e: ExpPair) -> tuple[int, int]:
    # graded lexicographic with n > k: compare total degree, then n-exponent
    return (e[0] + e[1], e[0])


class PolyNK:
    """Sparse exact polynomial in Q[n, k].

    Instances are immutable; all arithmetic returns new objects.  The
    internal map never stores zero coefficients, so ``p.is_zero`` is just a
    length check and structural equality of the maps is semantic equality.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: dict[ExpPair, Rat] | None = None):
        cleaned: dict[ExpPair, Rat] = {}
        if coeffs:
            for (i, j), c in coeffs.items():
                if not (isinstance(i, int) and isinstance(j, int)) or i < 0 or j < 0:
                    raise StructuralError(f"bad exponent pair {(i, j)!r}")
                q = _as_rat(c)
                if q:
                    cleaned[(i, j)] = q
        self._c = cleaned

    @classmethod
    def _raw(cls, coeffs: dict[ExpPair, Rat]) -> "PolyNK":
        # trusted constructor: caller guarantees no zeros, valid exponents
        obj = cls.__new__(cls)
        obj._c = coeffs
        return obj

    # -- builders ---------------------------------------------------------

    @classmethod
    def zero(cls) -> "PolyNK":
        return cls._raw({})

    @classmethod
    def one(cls) -> "PolyNK":
        return cls._raw({(0, 0): mpq(1)})

    @classmethod
    def const(cls, c: int | Rat) -> "PolyNK":
        q = _as_rat(c)
        return cls._raw({(0, 0): q} if q else {})

    @classmethod
    def n(cls) -> "PolyNK":
        return cls._raw({(1, 0): mpq(1)})

    @classmethod
    def k(cls) -> "PolyNK":
        return cls._raw({(0, 1): mpq(1)})

    @classmethod
    def linear(cls, cn: int | Rat, ck: int | Rat, c0: int | Rat) -> "PolyNK":
        """cn*n + ck*k + c0."""
        d: dict[ExpPair, Rat] = {}
        for e, c in (((1, 0), cn), ((0, 1), ck), ((0, 0), c0)):
            q = _as_rat(c)
            if q:
                d[e] = q
        return cls._raw(d)

    @classmethod
    def monomial(cls, i: int, j: int, c: int | Rat = 1) -> "PolyNK":
        q = _as_rat(c)
        return cls._raw({(i, j): q} if q else {})

    # -- queries ----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self._c

    @property
    def k_free(self) -> bool:
        return all(j == 0 for _, j in self._c)

    @property
    def n_free(self) -> bool:
        return all(i == 0 for i, _ in self._c)

    def total_degree(self) -> int | None:
        if not self._c:
            return None
        return max(i + j for i, j in self._c)

    def degree_n(self) -> int | None:
        if not self._c:
            return None
        return max(i for i, _ in self._c)

    def degree_k(self) -> int | None:
        if not self._c:
            return None
        return max(j for _, j in self._c)

    def coeff(self, i: int, j: int) -> Rat:
        return self._c.get((i, j), mpq(0))

    def terms_glex(self) -> list[tuple[ExpPair, Rat]]:
        """Terms sorted descending under graded lex with n > k."""
        return sorted(self._c.items(), key=lambda t: _glex_key(t[0]), reverse=True)

    def leading_coeff_glex(self) -> Rat:
        if not self._c:
            return mpq(0)
        e = max(self._c, key=_glex_key)
        return self._c[e]

    def monomial_count(self) -> int:
        return len(self._c)

    def support(self) -> set[ExpPair]:
        return set(self._c)

    def is_one(self) -> bool:
        return self._c == {(0, 0): mpq(1)}

    def as_constant(self) -> Rat | None:
        """The value of a constant polynomial, None when degree > 0."""
        if not self._c:
            return mpq(0)
        if len(self._c) == 1 and (0, 0) in self._c:
            return self._c[(0, 0)]
        return None

    # -- arithmetic -------------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self._c)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, PolyNK):
            return self._c == other._c
        if is_rat(other):
            return self._c == PolyNK.const(_as_rat(other))._c
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._c.items()))

    def __neg__(self) -> "PolyNK":
        return PolyNK._raw({e: -c for e, c in self._c.items()})

    def __add__(self, other: "PolyNK | int | Rat") -> "PolyNK":
        if not isinstance(other, PolyNK):
            if not is_rat(other):
                return NotImplemented
            other = PolyNK.const(_as_rat(other))
        out = dict(self._c)
        for e, c in other._c.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return PolyNK._raw(out)

    __radd__ = __add__

    def __sub__(self, other: "PolyNK | int | Rat") -> "PolyNK":
        if not isinstance(other, PolyNK):
            if not is_rat(other):
                return NotImplemented
            other = PolyNK.const(_as_rat(other))
        return self + (-other)

    def __rsub__(self, other: "PolyNK | int | Rat") -> "PolyNK":
        return (-self) + other

    def __mul__(self, other: "PolyNK | int | Rat") -> "PolyNK":
        if not isinstance(other, PolyNK):
            if not is_rat(other):
                return NotImplemented
            q = _as_rat(other)
            if not q:
                return PolyNK.zero()
            return PolyNK._raw({e: c * q for e, c in self._c.items()})
        if not self._c or not other._c:
            return PolyNK.zero()
        # iterate over the smaller operand
        a, b = (self._c, other._c) if len(self._c) <= len(other._c) else (other._c, self._c)
        out: dict[ExpPair, Rat] = {}
        for (i1, j1), c1 in a.items():
            for (i2, j2), c2 in b.items():
                e = (i1 + i2, j1 + j2)
                s = out.get(e)
                if s is None:
                    out[e] = c1 * c2
                else:
                    s = s + c1 * c2
                    if s:
                        out[e] = s
                    else:
                        del out[e]
        return PolyNK._raw(out)

    __rmul__ = __mul__

    def __pow__(self, exp: int) -> "PolyNK":
        if not isinstance(exp, int) or exp < 0:
            raise StructuralError("polynomial powers must be nonnegative integers")
        result = PolyNK.one()
        base = self
        e = exp
        while e:
            if e & 1:
                result = result * base
            base = base * base if e > 1 else base
            e >>= 1
        return result

    # -- structure --------------------------------------------------------

    def eval_at(self, nv: int | Rat, kv: int | Rat) -> Rat:
        nq, kq = _as_rat(nv), _as_rat(kv)
        total = mpq(0)
        npow: dict[int, Rat] = {0: mpq(1)}
        kpow: dict[int, Rat] = {0: mpq(1)}

        def power(cache: dict[int, Rat], base: Rat, e: int) -> Rat:
            v = cache.get(e)
            if v is None:
                v = power(cache, base, e - 1) * base
                cache[e] = v
            return v

        for (i, j), c in self._c.items():
            total += c * power(npow, nq, i) * power(kpow, kq, j)
        return total

    def shift(self, dn: int, dk: int) -> "PolyNK":
        """p(n + dn, k + dk) for integer offsets."""
        if not (isinstance(dn, int) and isinstance(dk, int)):
            raise StructuralError("shift offsets must be integers")
        if (dn == 0 and dk == 0) or not self._c:
            return self
        out: dict[ExpPair, Rat] = {}
        bin_cache: dict[tuple[int, int, int], list[Rat]] = {}

        def expansion(e: int, d: int) -> list[Rat]:
            # coefficients of (x + d)^e by ascending power of x
            key = (e, d, 0)
            row = bin_cache.get(key)
            if row is None:
                row = [mpq(gmpy2.bincoef(e, t)) * mpq(d) ** (e - t) for t in range(e + 1)]
                bin_cache[key] = row
            return row

        for (i, j), c in self._c.items():
            nrow = expansion(i, dn) if dn else None
            krow = expansion(j, dk) if dk else None
            if nrow is None:
                assert krow is not None
                for t2, b2 in enumerate(krow):
                    if not b2:
                        continue
                    e = (i, t2)
                    s = out.get(e, mpq(0)) + c * b2
                    if s:
                        out[e] = s
                    elif e in out:
                        del out[e]
            elif krow is None:
                for t1, b1 in enumerate(nrow):
                    if not b1:
                        continue
                    e = (t1, j)
                    s = out.get(e, mpq(0)) + c * b1
                    if s:
                        out[e] = s
                    elif e in out:
                        del out[e]
            else:
                for t1, b1 in enumerate(nrow):
                    if not b1:
                        continue
                    cb1 = c * b1
                    for t2, b2 in enumerate(krow):
                        if not b2:
                            continue
                        e = (t1, t2)
                        s = out.get(e, mpq(0)) + cb1 * b2
                        if s:
                            out[e] = s
                        elif e in out:
                            del out[e]
        return PolyNK._raw(out)

    def times_monomial(self, di: int, dj: int) -> "PolyNK":
        """Multiply by n^di * k^dj (exponent translation, no coefficient work)."""
        if di < 0 or dj < 0:
            raise StructuralError("monomial exponents must be nonnegative")
        if (di == 0 and dj == 0) or not self._c:
            return self
        return PolyNK._raw({(i + di, j + dj): c for (i, j), c in self._c.items()})

    def subst_k(self, replacement: "PolyNK") -> "PolyNK":
        """Substitute the variable k by an arbitrary polynomial (Horner in k)."""
        coeffs = self.k_coeff_list()
        result = PolyNK.zero()
        for c in reversed(coeffs):
            result = result * replacement + c
        return result

    def k_coeff_list(self) -> list["PolyNK"]:
        """Coefficients with respect to k, ascending, each free of k.
        The zero polynomial yields [0]."""
        if not self._c:
            return [PolyNK.zero()]
        dk = self.degree_k()
        assert dk is not None
        rows: list[dict[ExpPair, Rat]] = [{} for _ in range(dk + 1)]
        for (i, j), c in self._c.items():
            rows[j][(i, 0)] = c
        return [PolyNK._raw(r) for r in rows]

    @classmethod
    def from_k_coeff_list(cls, coeffs: Sequence["PolyNK"]) -> "PolyNK":
        out: dict[ExpPair, Rat] = {}
        for j, p in enumerate(coeffs):
            for (i, zero_j), c in p._c.items():
                if zero_j != 0:
                    raise StructuralError("k-coefficients must be free of k")
                out[(i, j)] = c
        return cls._raw(out)

    def n_dense(self) -> list[Rat]:
        """Dense coefficient list in n for a k-free polynomial, ascending."""
        if not self.k_free:
            raise StructuralError("polynomial is not free of k")
        if not self._c:
            return []
        d = self.degree_n()
        assert d is not None
        out = [mpq(0)] * (d + 1)
        for (i, _), c in self._c.items():
            out[i] = c
        return out

    @classmethod
    def from_n_dense(cls, coeffs: Sequence[int | Rat]) -> "PolyNK":
        return cls._raw({(i, 0): _as_rat(c) for i, c in enumerate(coeffs) if c})

    def content(self) -> Rat:
        """Rational content: gcd of numerators over lcm of denominators,
        nonnegative.  Zero polynomial has content 0."""
        if not self._c:
            return mpq(0)
        num_g = mpz(0)
        den_l = mpz(1)
        for c in self._c.values():
            num_g = gmpy2.gcd(num_g, c.numerator)
            den_l = gmpy2.lcm(den_l, c.denominator)
        return mpq(num_g, den_l)

    def primitive(self) -> tuple[Rat, "PolyNK"]:
        """Split into (content-with-sign, primitive part).  The primitive part
        has integer coefficients, content 1, and positive leading coefficient
        under graded lex."""
        if not self._c:
            return mpq(0), self
        c = self.content()
        if self.leading_coeff_glex() < 0:
            c = -c
        return c, self * (1 / c)

    def exact_div(self, divisor: "PolyNK") -> "PolyNK":
        """Exact polynomial division, raising ExactDivisionError when the
        divisor does not divide self."""
        if divisor.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        if self.is_zero:
            return self
        const = divisor.as_constant()
        if const is not None:
            return self * (1 / const)
        rem = dict(self._c)
        out: dict[ExpPair, Rat] = {}
        div_terms = divisor.terms_glex()
        (de_i, de_j), dc = div_terms[0]
        while rem:
            e = max(rem, key=_glex_key)
            i, j = e
            if i < de_i or j < de_j:
                raise ExactDivisionError("division left a nonzero remainder")
            q = rem[e] / dc
            qe = (i - de_i, j - de_j)
            out[qe] = q
            for (ti, tj), tc in div_terms:
                t = (ti + qe[0], tj + qe[1])
                s = rem.get(t, mpq(0)) - q * tc
                if s:
                    rem[t] = s
                elif t in rem:
                    del rem[t]
        return PolyNK._raw(out)

    def divides(self, other: "PolyNK") -> bool:
        try:
            other.exact_div(self)
            return True
        except (ExactDivisionError, ZeroDivisionError):
            return False

    def __repr__(self) -> str:
        if not self._c:
            return "PolyNK(0)"
        bits = []
        for (i, j), c in self.terms_glex():
            mono = "".join(
                (f"n^{i}" if i > 1 else "n" if i == 1 else "",
                 f"k^{j}" if j > 1 else "k" if j == 1 else ""))
            bits.append(f"{c}*{mono}" if mono else f"{c}")
        return "PolyNK(" + " + ".join(bits) + ")"


def shift(p: PolyNK, dn: int, dk: int) -> PolyNK:
    """p(n + dn, k + dk)."""
    return p.shift(dn, dk)


def rising_factorial(p: PolyNK, m: int) -> PolyNK:
    """p (p+1) ... (p+m-1); the empty product for m = 0."""
    if not isinstance(m, int) or m < 0:
        raise StructuralError("rising factorial length must be a nonnegative integer")
    out = PolyNK.one()
    for j in range(m):
        out = out * (p + j)
    return out


# -- gcd machinery ---------------------------------------------------------


def _prim_pos(v: list[mpz]) -> list[mpz]:
    """Divide out the integer content and flip the sign so the leading
    (last) coefficient is positive."""
    g = mpz(0)
    for c in v:
        g = gmpy2.gcd(g, c)
        if g == 1:
            break
    if g > 1:
        v = [gmpy2.divexact(c, g) for c in v]
    if v and v[-1] < 0:
        v = [-c for c in v]
    return v


def _gcd_int_lists(a: list[mpz], b: list[mpz]) -> list[mpz]:
    """Gcd over Z of dense ascending coefficient lists, primitive with
    positive leading coefficient.  Certificate normalization feeds this
    polynomials whose coefficients run to thousands of bits, where a
    remainder sequence stalls; sympy's heuristic gcd (evaluate at a large
    point, take the integer gcd, reconstruct) stays fast there and falls
    back to a subresultant sequence on the rare failure."""
    a = [c for c in a]
    b = [c for c in b]
    while a and not a[-1]:
        a.pop()
    while b and not b[-1]:
        b.pop()
    if not a:
        return _prim_pos(b)
    if not b:
        return _prim_pos(a)
    fa = [ZZ(int(c)) for c in reversed(a)]
    fb = [ZZ(int(c)) for c in reversed(b)]
    g, _, _ = dup_inner_gcd(fa, fb, ZZ)
    return _prim_pos([mpz(int(c)) for c in reversed(g)])


_GCD_PRIME = 2_147_483_647


def _gcd_mod_p(a: list[int], b: list[int], p: int) -> list[int]:
    """Euclidean gcd of dense univariate polynomials over F_p (ascending
    coefficients, not necessarily normalized)."""

    def strip(v: list[int]) -> list[int]:
        while v and not v[-1]:
            v.pop()
        return v

    a, b = strip(list(a)), strip(list(b))
    while b:
        inv = pow(b[-1], p - 2, p)
        r = list(a)
        while len(r) >= len(b):
            lead = r[-1] * inv % p
            offs = len(r) - len(b)
            for t, bc in enumerate(b):
                r[offs + t] = (r[offs + t] - lead * bc) % p
            strip(r)
        a, b = b, r
    return a


def _certified_coprime(a: list[mpz], b: list[mpz]) -> bool:
    """True only when gcd(a, b) over Q is provably constant: if the leading
    coefficient of either input survives reduction mod p, the image of the
    (primitive) gcd keeps its degree, so a constant image gcd certifies a
    constant rational gcd.  Inputs are dense integer coefficient lists with
    nonzero leads; False just means the shortcut could not conclude."""
    p = _GCD_PRIME
    am = [int(c % p) for c in a]
    bm = [int(c % p) for c in b]
    if not am[-1] and not bm[-1]:
        return False
    return len(_gcd_mod_p(am, bm, p)) <= 1


def _gcd_n(p: PolyNK, q: PolyNK) -> PolyNK:
    """Gcd of two k-free polynomials, primitive with positive lead."""
    if p.is_zero:
        return q.primitive()[1] if not q.is_zero else PolyNK.zero()
    if q.is_zero:
        return p.primitive()[1]
    _, pp = p.primitive()
    _, qq = q.primitive()
    a = [mpz(c) for c in pp.n_dense()]
    b = [mpz(c) for c in qq.n_dense()]
    if len(a) > 1 and len(b) > 1 and _certified_coprime(a, b):
        return PolyNK.one()
    g = _gcd_int_lists(a, b)
    return PolyNK.from_n_dense(g)


def _content_k(p: PolyNK) -> PolyNK:
    """Gcd over the k-coefficients of p, a k-free polynomial."""
    cont = PolyNK.zero()
    for c in p.k_coeff_list():
        cont = _gcd_n(cont, c)
        if cont.as_constant() is not None and not cont.is_zero:
            return PolyNK.one()
    return cont


def _certified_coprime_k(pp: PolyNK, qq: PolyNK) -> bool:
    """True only when the gcd of pp and qq (both with k-content 1) is
    provably constant.  Specializes n to a fixed point modulo a prime: when
    the leading k-coefficient of either input survives the specialization,
    the image of the gcd keeps its k-degree, so a constant univariate image
    gcd certifies that the rational gcd is k-free, hence divides the trivial
    k-contents.  False just means the shortcut could not conclude."""
    p = _GCD_PRIME
    ip = pp.primitive()[1]
    iq = qq.primitive()[1]
    dp_, dq_ = ip.degree_k(), iq.degree_k()
    assert dp_ is not None and dq_ is not None

    def k_dense(poly: PolyNK, dk: int, n0: int) -> list[int]:
        out = [0] * (dk + 1)
        npow: dict[int, int] = {0: 1}
        for (i, j), c in poly._c.items():
            if i not in npow:
                npow[i] = pow(n0, i, p)
            out[j] = (out[j] + int(c.numerator % p) * npow[i]) % p
        return out

    for n0 in (3, 64007, 1048573, 8675309):
        a = k_dense(ip, dp_, n0)
        b = k_dense(iq, dq_, n0)
        if not a[-1] and not b[-1]:
            continue
        return len(_gcd_mod_p(a, b, p)) <= 1
    return False


def _gcd_bivariate(p: PolyNK, q: PolyNK) -> PolyNK:
    """Gcd of two bivariate polynomials, primitive with positive leading
    coefficient under graded lex.  Same delegation story as
    ``_gcd_int_lists``: the heuristic gcd absorbs the coefficient growth
    that makes a pseudo-remainder sequence in k unusable here."""
    _, ip = p.primitive()
    _, iq = q.primitive()
    fa = dmp_from_dict({e: ZZ(int(c)) for e, c in ip._c.items()}, 1, ZZ)
    fb = dmp_from_dict({e: ZZ(int(c)) for e, c in iq._c.items()}, 1, ZZ)
    g, _, _ = dmp_inner_gcd(fa, fb, 1, ZZ)
    out = PolyNK({e: mpq(int(c)) for e, c in dmp_to_dict(g, 1).items()})
    return out.primitive()[1]


def gcd_poly(p: PolyNK, q: PolyNK) -> PolyNK:
    """Gcd in Q[n, k], normalized to integer coefficients, content 1, and
    positive leading coefficient under graded lex.  gcd(0, 0) = 0."""
    if p.is_zero:
        return q.primitive()[1] if not q.is_zero else PolyNK.zero()
    if q.is_zero:
        return p.primitive()[1]
    if p.k_free and q.k_free:
        return _gcd_n(p, q)
    # orient so both are treated in Q[n][k]
    cp = _content_k(p)
    cq = _content_k(q)
    gc = _gcd_n(cp, cq)
    pp = p.exact_div(cp)
    qq = q.exact_div(cq)
    dp, dq = pp.degree_k(), qq.degree_k()
    assert dp is not None and dq is not None
    if dp == 0 or dq == 0 or _certified_coprime_k(pp, qq):
        g = gc
    else:
        g = gc * _gcd_bivariate(pp, qq)
    return g.primitive()[1]


def lcm_poly(p: PolyNK, q: PolyNK) -> PolyNK:
    if p.is_zero or q.is_zero:
        return PolyNK.zero()
    g = gcd_poly(p, q)
    return (p * q).exact_div(g).primitive()[1]


# -- rational functions ----------------------------------------------------


class RatFuncNK:
    """Element of Q(n, k) as a normalized numerator/denominator pair.

    Normalization removes gcd(num, den) and scales so the denominator has
    leading coefficient 1 under graded lex with n > k; it is idempotent, so
    structural equality of normalized pairs decides equality of the rational
    functions.  Zero is stored as 0/1.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: PolyNK, den: PolyNK):
        if den.is_zero:
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero:
            self.num = PolyNK.zero()
            self.den = PolyNK.one()
            return
        g = gcd_poly(num, den)
        if not g.is_one():
            num = num.exact_div(g)
            den = den.exact_div(g)
        lead = den.leading_coeff_glex()
        if lead != 1:
            inv = 1 / lead
            num = num * inv
            den = den * inv
        self.num = num
        self.den = den

    @classmethod
    def _normalized(cls, num: PolyNK, den: PolyNK) -> "RatFuncNK":
        obj = cls.__new__(cls)
        obj.num = num
        obj.den = den
        return obj

    @classmethod
    def from_poly(cls, p: PolyNK) -> "RatFuncNK":
        return cls._normalized(p, PolyNK.one())

    @classmethod
    def from_rat(cls, c: int | Rat) -> "RatFuncNK":
        return cls.from_poly(PolyNK.const(c))

    @classmethod
    def zero(cls) -> "RatFuncNK":
        return cls._normalized(PolyNK.zero(), PolyNK.one())

    @classmethod
    def one(cls) -> "RatFuncNK":
        return cls._normalized(PolyNK.one(), PolyNK.one())

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def __bool__(self) -> bool:
        return not self.num.is_zero

    @staticmethod
    def _coerce(other: object) -> "RatFuncNK | None":
        if isinstance(other, RatFuncNK):
            return other
        if isinstance(other, PolyNK):
            return RatFuncNK.from_poly(other)
        if is_rat(other):
            return RatFuncNK.from_rat(_as_rat(other))
        return None

    def __eq__(self, other: object) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        # normalized form is canonical, but cross-multiplication keeps this
        # independent of any normalization subtleties
        return self.num * o.den == o.num * self.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __neg__(self) -> "RatFuncNK":
        return RatFuncNK._normalized(-self.num, self.den)

    def __add__(self, other: object) -> "RatFuncNK":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RatFuncNK(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __sub__(self, other: object) -> "RatFuncNK":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: object) -> "RatFuncNK":
        return (-self) + other

    def __mul__(self, other: object) -> "RatFuncNK":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.is_zero or o.is_zero:
            return RatFuncNK.zero()
        return RatFuncNK(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> "RatFuncNK":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero:
            raise ZeroDivisionError("division by the zero rational function")
        return RatFuncNK(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other: object) -> "RatFuncNK":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def shift(self, dn: int, dk: int) -> "RatFuncNK":
        if dn == 0 and dk == 0:
            return self
        # gcd and glex leading coefficient are invariant under integer shifts
        return RatFuncNK._normalized(self.num.shift(dn, dk), self.den.shift(dn, dk))

    def eval_at(self, nv: int | Rat, kv: int | Rat) -> Rat | None:
        """Value at a rational point, or None when the denominator vanishes."""
        d = self.den.eval_at(nv, kv)
        if not d:
            return None
        return self.num.eval_at(nv, kv) / d

    def __repr__(self) -> str:
        if self.den.is_one():
            return f"RatFuncNK({self.num!r})"
        return f"RatFuncNK({self.num!r} / {self.den!r})"


# -- linear algebra over Q -------------------------------------------------


class MatrixQ:
    """Dense matrix of exact rationals."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Sequence[Sequence[int | Rat]], ncols: int | None = None):
        self.rows = [[_as_rat(c) for c in row] for row in rows]
        self.nrows = len(self.rows)
        if self.nrows:
            widths = {len(r) for r in self.rows}
            if len(widths) != 1:
                raise StructuralError("ragged matrix rows")
            self.ncols = widths.pop()
            if ncols is not None and ncols != self.ncols:
                raise StructuralError("declared column count does not match rows")
        else:
            self.ncols = ncols or 0

    def mul_vec(self, v: Sequence[int | Rat]) -> list[Rat]:
        if len(v) != self.ncols:
            raise StructuralError("vector length does not match column count")
        vq = [_as_rat(c) for c in v]
        return [sum((c * x for c, x in zip(row, vq) if c and x), mpq(0)) for row in self.rows]


def _bareiss_forward(
    m: list[list[mpz]], ncols: int
) -> tuple[list[int], list[int]]:
    """In-place fraction-free forward elimination.

    Returns (pivot_rows, pivot_cols) in elimination order.  After the call,
    for every earlier pivot (pr, pc) all later-eliminated rows have a zero in
    column pc; retired pivot rows are left untouched from the step at which
    they retired.
    """
    nrows = len(m)
    active = list(range(nrows))
    avail = list(range(ncols))
    piv_rows: list[int] = []
    piv_cols: list[int] = []
    prev = mpz(1)
    while active and avail:
        best_key: tuple[int, int, int] | None = None
        best_rc: tuple[int, int] | None = None
        for c in avail:
            col_done = False
            for ri in active:
                v = m[ri][c]
                if v:
                    key = (v.bit_length(), c, ri)
                    if best_key is None or key < best_key:
                        best_key = key
                        best_rc = (ri, c)
                        if key[0] == 1:
                            # nothing beats a unit pivot; (c, r) scan order
                            # already realizes the tie-break
                            col_done = True
                            break
            if col_done:
                break
        if best_rc is None:
            break
        pr, pc = best_rc
        piv = m[pr][pc]
        active.remove(pr)
        avail.remove(pc)
        piv_rows.append(pr)
        piv_cols.append(pc)
        prow = m[pr]
        for ri in active:
            row = m[ri]
            f = row[pc]
            if f:
                for c in avail:
                    pv = prow[c]
                    rv = row[c]
                    if rv:
                        row[c] = gmpy2.divexact(piv * rv - f * pv, prev)
                    elif pv:
                        row[c] = gmpy2.divexact(-f * pv, prev)
                row[pc] = mpz(0)
            else:
                for c in avail:
                    rv = row[c]
                    if rv:
                        row[c] = gmpy2.divexact(piv * rv, prev)
        prev = piv
    return piv_rows, piv_cols


def _kernel_vector_for_free_col(
    m: list[list[mpz]],
    piv_rows: list[int],
    piv_cols: list[int],
    free_col: int,
    ncols: int,
) -> list[Rat]:
    """Back-substitute one kernel basis vector: 1 at free_col, 0 at the other
    free columns, pivots solved in reverse elimination order."""
    x: list[Rat] = [mpq(0)] * ncols
    x[free_col] = mpq(1)
    for step in range(len(piv_rows) - 1, -1, -1):
        row = m[piv_rows[step]]
        pc = piv_cols[step]
        s = mpq(0)
        # the pivot row retired at `step` still holds entries in its own
        # pivot column, later pivot columns, and free columns
        for c in piv_cols[step + 1:]:
            v = row[c]
            if v and x[c]:
                s += mpq(v) * x[c]
        v = row[free_col]
        if v:
            s += mpq(v)
        if s:
            x[pc] = -s / mpq(row[pc])
    return x


def _normalize_int_vector(x: list[Rat]) -> list[Rat]:
    """Scale to integer entries with content 1, first nonzero entry positive."""
    den = mpz(1)
    for c in x:
        if c:
            den = gmpy2.lcm(den, c.denominator)
    ints = [c * den for c in x]
    g = mpz(0)
    for c in ints:
        if c:
            g = gmpy2.gcd(g, c.numerator)
            if g == 1:
                break
    if g > 1:
        ints = [c / g for c in ints]
    for c in ints:
        if c:
            if c < 0:
                ints = [-v for v in ints]
            break
    return ints


def _integerize_rows(mat: MatrixQ) -> list[list[mpz]]:
    """Integer rows with the same kernel: denominators cleared and the integer
    content of every row stripped."""
    rows: list[list[mpz]] = []
    for row in mat.rows:
        den = mpz(1)
        for c in row:
            if c:
                den = gmpy2.lcm(den, c.denominator)
        ints = [mpz(c * den) for c in row]
        g = mpz(0)
        for c in ints:
            if c:
                g = gmpy2.gcd(g, c)
                if g == 1:
                    break
        if g > 1:
            ints = [gmpy2.divexact(c, g) for c in ints]
        rows.append(ints)
    return rows


_FILTER_PRIME = 2_147_483_647


def proves_full_column_rank(mat: MatrixQ) -> bool:
    """True only when the matrix provably has trivial kernel over Q.

    Works by exact Gaussian elimination modulo a fixed word-size prime: any
    nonzero rational kernel vector scales to a primitive integer vector, which
    stays nonzero modulo the prime, so full column rank mod p implies full
    column rank over Q.  False is inconclusive (the fraction-free elimination
    must decide).  This is a cheap rejection filter, never a source of kernel
    vectors.
    """
    if mat.nrows < mat.ncols or mat.ncols == 0:
        return False
    import numpy as np

    p = _FILTER_PRIME
    packed = []
    for row in mat.rows:
        den = mpz(1)
        for c in row:
            if c:
                den = gmpy2.lcm(den, c.denominator)
        packed.append([int(c * den) % p for c in row])
    a = np.array(packed, dtype=np.int64)
    nrows, ncols = a.shape
    top = 0
    for col in range(ncols):
        piv = None
        for i in range(top, nrows):
            if a[i, col]:
                piv = i
                break
        if piv is None:
            return False
        if piv != top:
            a[[top, piv]] = a[[piv, top]]
        inv = pow(int(a[top, col]), p - 2, p)
        a[top, col:] = (a[top, col:] * inv) % p
        f = a[top + 1:, col]
        if f.any():
            a[top + 1:, col:] = (a[top + 1:, col:] - f[:, None] * a[top, col:]) % p
        top += 1
    return True


class EliminatedSystem:
    """Forward-eliminated integer matrix from which kernel basis vectors can
    be drawn one free column at a time (lazily, in ascending column order)."""

    __slots__ = ("_m", "_piv_rows", "_piv_cols", "_free_cols", "ncols", "rank")

    def __init__(self, mat: MatrixQ):
        rows = _integerize_rows(mat)
        self.ncols = mat.ncols
        self._m = rows
        self._piv_rows, self._piv_cols = _bareiss_forward(rows, mat.ncols)
        self.rank = len(self._piv_rows)
        pivset = set(self._piv_cols)
        self._free_cols = [c for c in range(mat.ncols) if c not in pivset]

    @property
    def free_columns(self) -> list[int]:
        return list(self._free_cols)

    def kernel_vector(self, free_col: int) -> list[Rat]:
        if free_col not in self._free_cols:
            raise StructuralError(f"column {free_col} is not free")
        x = _kernel_vector_for_free_col(
            self._m, self._piv_rows, self._piv_cols, free_col, self.ncols)
        return _normalize_int_vector(x)

    def kernel_basis(self) -> Iterator[list[Rat]]:
        for c in self._free_cols:
            yield self.kernel_vector(c)


def _modular_primes() -> Iterator[int]:
    """Word-size prime moduli, largest first.  The first one is a hardcoded
    known prime; primality of the rest only affects speed, never correctness,
    because every modular result gets verified exactly before use."""
    yield _FILTER_PRIME
    c = mpz(_FILTER_PRIME - 2)
    while c > (1 << 30):
        if gmpy2.is_prime(c, 50):
            yield int(c)
        c -= 2


def _rational_reconstruct(u: mpz, m: mpz) -> Rat | None:
    """The rational a/b with a/b = u (mod m) and |a|, b <= sqrt(m/2), when one
    exists (half-extended Euclid); None when the modulus is still too small."""
    u = u % m
    if not u:
        return mpq(0)
    bound = gmpy2.isqrt((m - 1) // 2)
    r0, r1 = m, mpz(u)
    s0, s1 = mpz(0), mpz(1)
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    a, b = r1, s1
    if b < 0:
        a, b = -a, -b
    if not b or b > bound or gmpy2.gcd(a, b) != 1 or (a - b * u) % m:
        return None
    return mpq(a, b)


def _rref_kernel_mod_p(a, p: int):
    """Reduced row echelon form of an int64 numpy matrix modulo p (in place).

    Returns (pivot_cols, free_cols, kern) where kern[i][j] is the value at
    (pivot row i, free column j) of -RREF, i.e. exactly the pivot-position
    entry of the standard kernel basis vector belonging to free column j.
    """
    import numpy as np

    m, n = a.shape
    piv_cols: list[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        pr = r + int(nz[0])
        if pr != r:
            a[[r, pr]] = a[[pr, r]]
        inv = pow(int(a[r, c]), p - 2, p)
        a[r, :] = (a[r, :] * inv) % p
        col = a[:, c].copy()
        col[r] = 0
        other = np.nonzero(col)[0]
        if other.size:
            a[other, :] = (a[other, :] - np.outer(col[other], a[r, :])) % p
        piv_cols.append(c)
        r += 1
    pivset = set(piv_cols)
    free_cols = [c for c in range(n) if c not in pivset]
    kern = (-a[: len(piv_cols), :][:, free_cols]) % p
    return tuple(piv_cols), free_cols, kern


def _annihilates(rows: Sequence[Sequence[mpz]], vec: Sequence[Rat]) -> bool:
    den = mpz(1)
    for c in vec:
        if c:
            den = gmpy2.lcm(den, c.denominator)
    w = [mpz(c * den) for c in vec]
    nz = [i for i, c in enumerate(w) if c]
    for row in rows:
        if sum(row[i] * w[i] for i in nz):
            return False
    return True


def kernel_basis_exact(
    mat: MatrixQ, *, prime_budget: int | None = None
) -> list[list[Rat]]:
    """Complete right-kernel basis over Q, empty when the kernel is trivial.

    Strategy: reduced row echelon form modulo word-size primes (numpy),
    Chinese remaindering, and rational reconstruction of the standard kernel
    basis, with every reconstructed vector verified exactly against the
    original matrix -- exhibiting dim-many exact kernel vectors proves the
    basis is complete, because the kernel dimension modulo any modulus is an
    upper bound for the rational one.

    The default prime budget covers the Hadamard bound on the minors of the
    integerized matrix; standard-basis entries are quotients of such minors,
    so reconstruction is guaranteed to succeed within the budget and the
    fraction-free fallback only triggers on pathological pivot-structure
    disagreement between primes.  Pass a smaller budget to cap the modular
    effort explicitly.

    Vectors come scaled to integer entries with content 1 and first nonzero
    entry positive, ordered by their free column.
    """
    if mat.ncols == 0:
        return []
    rows = [r for r in _integerize_rows(mat) if any(r)]
    if not rows:
        return [
            [mpq(1 if i == f else 0) for i in range(mat.ncols)]
            for f in range(mat.ncols)
        ]
    if prime_budget is None:
        rank_cap = min(len(rows), mat.ncols)
        norm_bits = sorted(
            (max(abs(v) for v in row).bit_length() for row in rows),
            reverse=True,
        )[:rank_cap]
        # |r x r minor| <= prod ||row||_2 <= prod (sqrt(ncols) * max|entry|);
        # entries of the standard kernel basis are quotients of two such
        # minors, and reconstructing num/den needs modulus > 2*num*den.
        hadamard_bits = sum(norm_bits) + rank_cap * (
            mat.ncols.bit_length() // 2 + 1
        )
        prime_budget = (2 * hadamard_bits) // 30 + 8
    import numpy as np

    # state of the best pivot-structure group: primes agreeing on it,
    # accumulated CRT modulus, and residues of the kernel's pivot entries
    best_key: tuple[int, tuple[int, ...]] | None = None
    free_cols: list[int] = []
    piv_cols: tuple[int, ...] = ()
    modulus = mpz(1)
    residues: list[list[mpz]] = []
    count = 0
    checkpoint = 1

    for pidx, p in enumerate(_modular_primes()):
        if pidx >= prime_budget:
            break
        a = np.array([[int(v % p) for v in row] for row in rows], dtype=np.int64)
        pc, fc, kern = _rref_kernel_mod_p(a, p)
        if not fc:
            if p == _FILTER_PRIME:
                # full column rank modulo a known prime: trivial kernel, proven
                return []
            continue
        key = (-len(pc), pc)
        if best_key is None or key < best_key:
            best_key = key
            piv_cols, free_cols = pc, fc
            modulus = mpz(p)
            residues = [[mpz(int(kern[i, j])) for j in range(len(fc))]
                        for i in range(len(pc))]
            count = 1
            checkpoint = 1
        elif key == best_key:
            inv = gmpy2.invert(modulus, p)
            for i, row_res in enumerate(residues):
                for j in range(len(free_cols)):
                    delta = ((int(kern[i, j]) - row_res[j]) * inv) % p
                    row_res[j] = row_res[j] + modulus * delta
            modulus *= p
            count += 1
        else:
            continue

        if count < checkpoint:
            continue
        checkpoint *= 2
        rec: list[list[Rat]] | None = []
        for row_res in residues:
            out_row = []
            for v in row_res:
                q = _rational_reconstruct(v, modulus)
                if q is None:
                    rec = None
                    break
                out_row.append(q)
            if rec is None:
                break
            rec.append(out_row)
        if rec is None:
            continue
        basis = []
        for j, f in enumerate(free_cols):
            vec: list[Rat] = [mpq(0)] * mat.ncols
            vec[f] = mpq(1)
            for i, c in enumerate(piv_cols):
                vec[c] = rec[i][j]
            vec = _normalize_int_vector(vec)
            if not _annihilates(rows, vec):
                basis = None
                break
            basis.append(vec)
        if basis is not None:
            return basis

    elim = EliminatedSystem(mat)
    return [elim.kernel_vector(c) for c in elim.free_columns]


def nullspace_vector(mat: MatrixQ) -> list[Rat] | None:
    """Some nonzero rational vector v with M v = 0, scaled to integer entries
    with content 1 (first nonzero entry positive), or None when the kernel is
    trivial.  Deterministic: the vector belongs to the lowest-index free
    column of the kernel basis."""
    if mat.ncols == 0:
        return None
    if proves_full_column_rank(mat):
        return None
    basis = kernel_basis_exact(mat)
    return basis[0] if basis else None


# -- linear algebra over Q(n) ----------------------------------------------


def _poly_pivot_key(p: PolyNK) -> tuple[int, int]:
    d = p.degree_n()
    assert d is not None
    bits = max(
        max(c.numerator.bit_length() for c in p._c.values()),
        max(c.denominator.bit_length() for c in p._c.values()),
    )
    return (d, bits)


def nullspace_over_ratfunc(rows: Sequence[Sequence[PolyNK]]) -> list[list[PolyNK]]:
    """Right-kernel basis of a matrix of k-free polynomials, over Q(n).

    Each basis vector is cleared to polynomial entries, divided by the common
    polynomial gcd of its entries, and scaled to integer coefficients with
    content 1 (first nonzero entry gets a positive leading coefficient).
    Returns an empty list when the kernel is trivial.
    """
    work: list[list[PolyNK]] = []
    ncols = None
    for row in rows:
        r = list(row)
        if ncols is None:
            ncols = len(r)
        elif len(r) != ncols:
            raise StructuralError("ragged matrix rows")
        for p in r:
            if not p.k_free:
                raise StructuralError("matrix entries must be free of k")
        work.append(r)
    if ncols is None or ncols == 0:
        return []

    nrows = len(work)
    active = list(range(nrows))
    avail = list(range(ncols))
    piv_rows: list[int] = []
    piv_cols: list[int] = []
    prev = PolyNK.one()
    while active and avail:
        best_key = None
        best_rc = None
        for c in avail:
            for ri in active:
                v = work[ri][c]
                if not v.is_zero:
                    key = (*_poly_pivot_key(v), c, ri)
                    if best_key is None or key < best_key:
                        best_key = key
                        best_rc = (ri, c)
        if best_rc is None:
            break
        pr, pc = best_rc
        piv = work[pr][pc]
        active.remove(pr)
        avail.remove(pc)
        piv_rows.append(pr)
        piv_cols.append(pc)
        prow = work[pr]
        for ri in active:
            row = work[ri]
            f = row[pc]
            if not f.is_zero:
                for c in avail:
                    row[c] = (piv * row[c] - f * prow[c]).exact_div(prev)
                row[pc] = PolyNK.zero()
            else:
                for c in avail:
                    if not row[c].is_zero:
                        row[c] = (piv * row[c]).exact_div(prev)
        prev = piv

    pivset = set(piv_cols)
    free_cols = [c for c in range(ncols) if c not in pivset]
    basis: list[list[PolyNK]] = []
    for fc in free_cols:
        x: list[RatFuncNK] = [RatFuncNK.zero()] * ncols
        x[fc] = RatFuncNK.one()
        for step in range(len(piv_rows) - 1, -1, -1):
            row = work[piv_rows[step]]
            pc = piv_cols[step]
            s = RatFuncNK.zero()
            for c in piv_cols[step + 1:]:
                if not row[c].is_zero and x[c]:
                    s = s + RatFuncNK.from_poly(row[c]) * x[c]
            if not row[fc].is_zero:
                s = s + row[fc]
            if s:
                x[pc] = -s / row[pc]
        common_den = PolyNK.one()
        for entry in x:
            if entry:
                common_den = lcm_poly(common_den, entry.den)
        cleared = [entry.num * common_den.exact_div(entry.den) if entry else PolyNK.zero()
                   for entry in x]
        g = PolyNK.zero()
        for p in cleared:
            g = _gcd_n(g, p)
            if g.is_one():
                break
        if not g.is_zero and not g.is_one():
            cleared = [p.exact_div(g) for p in cleared]
        # joint scalar normalization across the vector
        num_g = mpz(0)
        den_l = mpz(1)
        for p in cleared:
            c = p.content()
            if c:
                num_g = gmpy2.gcd(num_g, c.numerator)
                den_l = gmpy2.lcm(den_l, c.denominator)
        if num_g:
            scale = mpq(den_l, num_g)
            cleared = [p * scale for p in cleared]
        for p in cleared:
            if not p.is_zero:
                if p.leading_coeff_glex() < 0:
                    cleared = [-q for q in cleared]
                break
        basis.append(cleared)
    return basis
