import gmpy2
import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from hypertel.errors import ExactDivisionError, StructuralError
from hypertel.exactmath import (
    EliminatedSystem,
    MatrixQ,
    PolyNK,
    RatFuncNK,
    gcd_poly,
    lcm_poly,
    nullspace_over_ratfunc,
    nullspace_vector,
    rat,
    rising_factorial,
    shift,
)

N = PolyNK.n()
K = PolyNK.k()


def small_rats():
    return st.builds(mpq, st.integers(-30, 30), st.integers(1, 12))


@st.composite
def polys(draw, max_terms=5, max_exp=4):
    n_terms = draw(st.integers(0, max_terms))
    coeffs = {}
    for _ in range(n_terms):
        e = (draw(st.integers(0, max_exp)), draw(st.integers(0, max_exp)))
        coeffs[e] = draw(small_rats())
    return PolyNK(coeffs)


class TestRat:
    def test_rejects_floats(self):
        with pytest.raises(StructuralError):
            rat(0.5)

    def test_string_fractions(self):
        assert rat("3/4") == mpq(3, 4)

    def test_two_arg(self):
        assert rat(6, 8) == mpq(3, 4)


class TestPolyBasics:
    def test_zero_degree_is_none(self):
        z = PolyNK.zero()
        assert z.total_degree() is None
        assert z.degree_n() is None
        assert z.degree_k() is None

    def test_zero_coeffs_dropped(self):
        p = PolyNK({(1, 0): mpq(0), (0, 1): mpq(2)})
        assert p.support() == {(0, 1)}

    def test_linear_builder(self):
        p = PolyNK.linear(2, -1, 3)
        assert p == 2 * N - K + 3

    def test_eval(self):
        p = N * N + 3 * K - 1
        assert p.eval_at(2, mpq(1, 3)) == mpq(4)

    def test_glex_ordering(self):
        p = N * K + N * N + K + 1
        exps = [e for e, _ in p.terms_glex()]
        assert exps == [(2, 0), (1, 1), (0, 1), (0, 0)]

    def test_k_coeff_roundtrip(self):
        p = (N + 1) * K**2 + N**3 + 5
        assert PolyNK.from_k_coeff_list(p.k_coeff_list()) == p

    def test_negative_exponent_rejected(self):
        with pytest.raises(StructuralError):
            PolyNK({(-1, 0): mpq(1)})


class TestPolyArithmetic:
    @given(polys(), polys(), polys())
    def test_mul_distributes(self, a, b, c):
        assert a * (b + c) == a * b + a * c

    @given(polys(), polys())
    def test_mul_commutes(self, a, b):
        assert a * b == b * a

    @given(polys())
    def test_sub_self_is_zero(self, a):
        assert (a - a).is_zero

    @given(polys(max_terms=3, max_exp=3), st.integers(0, 4))
    def test_pow_matches_repeated_mul(self, a, e):
        expected = PolyNK.one()
        for _ in range(e):
            expected = expected * a
        assert a**e == expected

    @given(polys(), st.integers(-4, 4), st.integers(-4, 4))
    def test_shift_matches_eval(self, p, dn, dk):
        q = shift(p, dn, dk)
        for nv, kv in [(0, 0), (1, 2), (-3, 5)]:
            assert q.eval_at(nv, kv) == p.eval_at(nv + dn, kv + dk)

    @given(polys(), st.integers(-3, 3), st.integers(-3, 3))
    def test_shift_inverts(self, p, dn, dk):
        assert shift(shift(p, dn, dk), -dn, -dk) == p

    @given(polys(max_terms=4, max_exp=3), polys(max_terms=3, max_exp=2))
    def test_exact_div_inverts_mul(self, a, b):
        if b.is_zero:
            return
        assert (a * b).exact_div(b) == a

    def test_exact_div_rejects_nondivisor(self):
        with pytest.raises(ExactDivisionError):
            (N * K + 1).exact_div(N + 1)

    def test_subst_k(self):
        p = K**2 + N * K + 1
        r = N + 3
        assert p.subst_k(r) == r * r + N * r + 1


class TestRisingFactorial:
    def test_empty_product(self):
        assert rising_factorial(N, 0).is_one()

    def test_known_value(self):
        # n(n+1)(n+2) at n=3 is 3*4*5
        assert rising_factorial(N, 3).eval_at(3, 0) == 60

    @given(polys(max_terms=3, max_exp=2), st.integers(0, 5))
    def test_splits_multiplicatively(self, p, m):
        if m < 2:
            return
        j = m // 2
        lhs = rising_factorial(p, m)
        rhs = rising_factorial(p, j) * rising_factorial(p + j, m - j)
        assert lhs == rhs


class TestGcd:
    def test_gcd_extracts_common_factor(self):
        g = N + K + 1
        a = g * (N - K)
        b = g * (2 * N + 3)
        assert gcd_poly(a, b) == g

    def test_coprime(self):
        assert gcd_poly(N + K, N - K + 1).is_one()

    def test_gcd_with_zero(self):
        p = 2 * N + 2 * K
        assert gcd_poly(p, PolyNK.zero()) == N + K

    def test_univariate(self):
        a = (N + 1) ** 2 * (N - 3)
        b = (N + 1) * (N + 5)
        assert gcd_poly(a, b) == N + 1

    @given(polys(max_terms=3, max_exp=2), polys(max_terms=3, max_exp=2),
           polys(max_terms=2, max_exp=2))
    @settings(max_examples=40, deadline=None)
    def test_common_factor_detected(self, a, b, g):
        if g.is_zero or a.is_zero or b.is_zero:
            return
        d = gcd_poly(a * g, b * g)
        assert g.divides(d)

    def test_lcm(self):
        a = (N + K) * (N + 1)
        b = (N + K) * (K + 2)
        l = lcm_poly(a, b)
        assert a.divides(l) and b.divides(l)
        assert l.total_degree() == 3

    def test_normalization(self):
        g = gcd_poly(mpq(4, 3) * (N + K), 2 * (N + K) * (N + 1))
        assert g == N + K


class TestRatFunc:
    def test_reduction(self):
        f = RatFuncNK((N + K) * (N - 1), (N + K) * (N + 2))
        assert f.num == N - 1
        assert f.den == N + 2

    def test_monic_denominator(self):
        f = RatFuncNK(PolyNK.one(), 3 * N + 6)
        assert f.den.leading_coeff_glex() == 1
        assert f.num.as_constant() == mpq(1, 3)

    def test_field_ops(self):
        f = RatFuncNK(PolyNK.one(), N)
        g = RatFuncNK(PolyNK.one(), N + 1)
        s = f - g
        assert s == RatFuncNK(PolyNK.one(), N * (N + 1))

    def test_shift(self):
        f = RatFuncNK(K, N)
        assert f.shift(1, -1) == RatFuncNK(K - 1, N + 1)

    def test_eval_pole(self):
        f = RatFuncNK(PolyNK.one(), N - 2)
        assert f.eval_at(2, 0) is None
        assert f.eval_at(3, 0) == 1

    @given(polys(max_terms=3, max_exp=2), polys(max_terms=3, max_exp=2),
           polys(max_terms=2, max_exp=2))
    @settings(max_examples=40, deadline=None)
    def test_equality_ignores_representation(self, a, b, c):
        if b.is_zero or c.is_zero:
            return
        assert RatFuncNK(a * c, b * c) == RatFuncNK(a, b)


class TestNullspaceQ:
    def test_trivial_kernel(self):
        m = MatrixQ([[1, 0], [0, 1]])
        assert nullspace_vector(m) is None

    def test_simple_kernel(self):
        m = MatrixQ([[1, 1, 0], [0, 1, 1]])
        v = nullspace_vector(m)
        assert v is not None
        assert all(x == 0 for x in m.mul_vec(v))

    def test_normalization(self):
        m = MatrixQ([[mpq(1, 2), mpq(1, 3)]])
        v = nullspace_vector(m)
        # scaled to integers, content 1, first nonzero positive
        assert v == [mpq(2), mpq(-3)]

    def test_zero_matrix(self):
        m = MatrixQ([[0, 0]], ncols=2)
        v = nullspace_vector(m)
        assert v == [mpq(1), mpq(0)]

    def test_deterministic(self):
        rows = [[3, 1, 4, 1], [5, 9, 2, 6], [8, 10, 6, 7]]
        v1 = nullspace_vector(MatrixQ(rows))
        v2 = nullspace_vector(MatrixQ(rows))
        assert v1 == v2

    def test_basis_spans_kernel(self):
        m = MatrixQ([[1, 2, 3, 4], [2, 4, 6, 8]])
        elim = EliminatedSystem(m)
        basis = list(elim.kernel_basis())
        assert len(basis) == 3
        for v in basis:
            assert all(x == 0 for x in m.mul_vec(v))

    @given(st.lists(st.lists(st.integers(-20, 20), min_size=4, max_size=4),
                    min_size=2, max_size=6))
    @settings(max_examples=60, deadline=None)
    def test_random_kernel_vectors_annihilate(self, rows):
        m = MatrixQ(rows)
        elim = EliminatedSystem(m)
        for v in elim.kernel_basis():
            assert any(v)
            assert all(x == 0 for x in m.mul_vec(v))
        assert elim.rank + len(elim.free_columns) == m.ncols


class TestNullspaceRatFunc:
    def test_k_entry_rejected(self):
        with pytest.raises(StructuralError):
            nullspace_over_ratfunc([[K]])

    def test_two_by_three(self):
        rows = [
            [N + 1, N, PolyNK.one()],
            [PolyNK.one(), N, N + 1],
        ]
        basis = nullspace_over_ratfunc(rows)
        assert len(basis) == 1
        v = basis[0]
        for row in rows:
            s = PolyNK.zero()
            for p, x in zip(row, v):
                s = s + p * x
            assert s.is_zero

    def test_entries_gcd_one(self):
        rows = [[N * (N + 1), -N * (N + 1)]]
        basis = nullspace_over_ratfunc(rows)
        assert basis == [[PolyNK.one(), PolyNK.one()]]

    def test_full_rank(self):
        rows = [[N, PolyNK.one()], [PolyNK.one(), N]]
        assert nullspace_over_ratfunc(rows) == []

    @given(st.integers(0, 3), st.integers(1, 4))
    @settings(max_examples=20, deadline=None)
    def test_scaled_columns(self, d, scale):
        # two proportional columns always leave a kernel vector
        col = [N**d + 1, N + scale]
        rows = [[col[0], col[0] * scale], [col[1], col[1] * scale]]
        basis = nullspace_over_ratfunc(rows)
        assert len(basis) == 1
        v = basis[0]
        for row in rows:
            s = row[0] * v[0] + row[1] * v[1]
            assert s.is_zero
