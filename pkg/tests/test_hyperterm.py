import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from hypertel.errors import StructuralError
from hypertel.exactmath import PolyNK, RatFuncNK, rising_factorial
from hypertel.hyperterm import (
    GammaArg,
    ProperTerm,
    StructuralParams,
    detect_splittable,
    sigma_k,
    sigma_n,
    structural_params,
)

N = PolyNK.n()
K = PolyNK.k()


def example1_term() -> ProperTerm:
    # (n^2 + k^2 + 1) * Gamma(2n+3k) / Gamma(2n-k)
    return ProperTerm(
        p=N**2 + K**2 + 1,
        x=mpq(1),
        y=mpq(1),
        factors=(GammaArg(2, 3, mpq(0), "A"), GammaArg(2, 1, mpq(0), "V")),
    )


def example2_term() -> ProperTerm:
    # Gamma(2n+k) Gamma(n-k+2) / (Gamma(2n-k) Gamma(n+2k))
    return ProperTerm(
        p=PolyNK.one(),
        x=mpq(1),
        y=mpq(1),
        factors=(
            GammaArg(2, 1, mpq(0), "A"),
            GammaArg(1, 1, mpq(2), "B"),
            GammaArg(2, 1, mpq(0), "V"),
            GammaArg(1, 2, mpq(0), "U"),
        ),
    )


def geometric_2k() -> ProperTerm:
    return ProperTerm(p=PolyNK.one(), x=mpq(1), y=mpq(2))


class TestConstruction:
    def test_zero_poly_rejected(self):
        with pytest.raises(StructuralError):
            ProperTerm(p=PolyNK.zero(), x=mpq(1), y=mpq(1))

    def test_zero_base_rejected(self):
        with pytest.raises(StructuralError):
            ProperTerm(p=PolyNK.one(), x=mpq(0), y=mpq(1))

    def test_negative_ncoeff_rejected(self):
        with pytest.raises(StructuralError):
            GammaArg(-1, 1, mpq(0), "A")

    def test_bad_family_rejected(self):
        with pytest.raises(StructuralError):
            GammaArg(1, 1, mpq(0), "X")

    def test_argument_sign(self):
        assert GammaArg(2, 3, mpq(1), "A").argument() == 2 * N + 3 * K + 1
        assert GammaArg(2, 3, mpq(1), "V").argument() == 2 * N - 3 * K + 1


class TestSigmaN:
    def test_single_B_factor(self):
        # S_n(Gamma(2n-k+1)) / Gamma(2n-k+1) = (2n-k+1)(2n-k+2)
        h = ProperTerm(PolyNK.one(), mpq(1), mpq(1), (GammaArg(2, 1, mpq(1), "B"),))
        arg = 2 * N - K + 1
        assert sigma_n(h) == RatFuncNK.from_poly(arg * (arg + 1))

    def test_bare_polynomial(self):
        p = N**2 + K + 3
        h = ProperTerm(p, mpq(1), mpq(1))
        assert sigma_n(h) == RatFuncNK(p.shift(1, 0), p)

    def test_example1(self):
        h = example1_term()
        p = h.p
        expect = RatFuncNK(
            p.shift(1, 0) * rising_factorial(2 * N + 3 * K, 2),
            p * rising_factorial(2 * N - K, 2),
        )
        assert sigma_n(h) == expect

    def test_x_scales(self):
        h = ProperTerm(PolyNK.one(), mpq(3), mpq(1))
        assert sigma_n(h) == RatFuncNK.from_rat(mpq(3))


class TestSigmaK:
    def test_single_B_factor(self):
        # S_k(Gamma(2n-k+1)) / Gamma(2n-k+1) = 1/(2n-k)
        h = ProperTerm(PolyNK.one(), mpq(1), mpq(1), (GammaArg(2, 1, mpq(1), "B"),))
        assert sigma_k(h) == RatFuncNK(PolyNK.one(), 2 * N - K)

    def test_geometric(self):
        assert sigma_k(geometric_2k()) == RatFuncNK.from_rat(mpq(2))

    def test_example1(self):
        h = example1_term()
        p = h.p
        expect = RatFuncNK(
            p.shift(0, 1) * rising_factorial(2 * N + 3 * K, 3) * (2 * N - K - 1),
            p,
        )
        assert sigma_k(h) == expect

    def test_U_factor_inverts(self):
        # 1/Gamma(k+1) is 1/k!; S_k quotient is 1/(k+1)
        h = ProperTerm(PolyNK.one(), mpq(1), mpq(1), (GammaArg(0, 1, mpq(1), "U"),))
        assert sigma_k(h) == RatFuncNK(PolyNK.one(), K + 1)


class TestStructuralParams:
    def test_example1(self):
        sp = structural_params(example1_term())
        assert (sp.delta, sp.theta, sp.mu, sp.nu) == (2, 2, 0, 4)
        assert sp.lam == 2

    def test_example2(self):
        sp = structural_params(example2_term())
        assert (sp.delta, sp.theta, sp.mu, sp.nu) == (0, 3, 0, 3)
        assert sp.lam == 3

    def test_bare_polynomial(self):
        sp = structural_params(ProperTerm(N * K + 1, mpq(1), mpq(1)))
        assert (sp.delta, sp.theta, sp.lam, sp.mu, sp.nu) == (2, 0, 0, 0, 0)

    def test_str_format(self):
        sp = structural_params(example1_term())
        assert str(sp) == "delta=2 theta=2 lambda=2 mu=0 nu=4"

    def test_invariant_enforced(self):
        with pytest.raises(StructuralError):
            StructuralParams(delta=0, theta=5, lam=1, mu=0, nu=0)


class TestSplittable:
    def test_gamma_quotient(self):
        h = ProperTerm(
            PolyNK.one(), mpq(1), mpq(1),
            (GammaArg(1, 1, mpq(2), "A"), GammaArg(1, 1, mpq(0), "U")),
        )
        assert detect_splittable(h)

    def test_geometric_not_split(self):
        assert not detect_splittable(geometric_2k())

    def test_example1_not_split(self):
        assert not detect_splittable(example1_term())

    def test_non_integer_offset(self):
        h = ProperTerm(
            PolyNK.one(), mpq(1), mpq(1),
            (GammaArg(1, 1, mpq(1, 2), "A"), GammaArg(1, 1, mpq(0), "U")),
        )
        assert not detect_splittable(h)

    def test_k_free_factors_ignored(self):
        h = ProperTerm(
            PolyNK.one(), mpq(1), mpq(1),
            (GammaArg(1, 0, mpq(1), "A"), GammaArg(3, 0, mpq(0), "U")),
        )
        assert detect_splittable(h)

    def test_family_cross_pairing_rejected(self):
        # A-factor with a V-partner only: signs differ, no cancellation
        h = ProperTerm(
            PolyNK.one(), mpq(1), mpq(1),
            (GammaArg(1, 1, mpq(0), "A"), GammaArg(1, 1, mpq(0), "V")),
        )
        assert not detect_splittable(h)


@st.composite
def proper_terms(draw):
    coeffs = {}
    for _ in range(draw(st.integers(1, 3))):
        e = (draw(st.integers(0, 2)), draw(st.integers(0, 2)))
        coeffs[e] = mpq(draw(st.integers(-5, 5)), draw(st.integers(1, 3)))
    p = PolyNK(coeffs)
    if p.is_zero:
        p = PolyNK.one()
    x = mpq(draw(st.integers(1, 4)), draw(st.integers(1, 3)))
    y = mpq(draw(st.integers(1, 4)), draw(st.integers(1, 3)))
    factors = []
    for _ in range(draw(st.integers(0, 3))):
        factors.append(GammaArg(
            draw(st.integers(0, 2)),
            draw(st.integers(0, 2)),
            mpq(draw(st.integers(0, 4))),
            draw(st.sampled_from("ABUV")),
        ))
    return ProperTerm(p, x, y, tuple(factors))


class TestProperties:
    @given(proper_terms())
    @settings(max_examples=60, deadline=None)
    def test_shift_quotient_compatibility(self, h):
        # S_k then S_n must agree with S_n then S_k:
        # sigma_n(n, k+1) * sigma_k(n, k) == sigma_k(n+1, k) * sigma_n(n, k)
        sn = sigma_n(h)
        sk = sigma_k(h)
        assert sn.shift(0, 1) * sk == sk.shift(1, 0) * sn

    @given(proper_terms())
    @settings(max_examples=60, deadline=None)
    def test_param_identities(self, h):
        sp = structural_params(h)
        assert sp.lam + sp.mu >= 0
        assert sp.theta == sp.lam + max(sp.mu, 0)
        assert sp.theta >= abs(sp.mu)

    @given(proper_terms(), st.integers(2, 40), st.integers(2, 40))
    @settings(max_examples=60, deadline=None)
    def test_sigma_k_numeric_spot_check(self, h, n0, k0):
        # evaluate the rf products numerically and compare with sigma_k
        val = sigma_k(h).eval_at(n0, k0)
        if val is None:
            return
        num = h.y * h.p.eval_at(n0, k0 + 1)
        den = h.p.eval_at(n0, k0)
        for f in h.factors:
            a0 = f.argument().eval_at(n0, k0)
            prod = mpq(1)
            if f.family in ("A", "U"):
                for t in range(f.ck):
                    prod *= a0 + t
            else:
                for t in range(1, f.ck + 1):
                    prod *= a0 - t
            if f.family == "A":
                num *= prod
            elif f.family == "U":
                den *= prod
            elif f.family == "V":
                num *= prod
            else:
                den *= prod
        if den == 0:
            return
        assert val == num / den
