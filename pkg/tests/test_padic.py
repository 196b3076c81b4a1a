from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qveneziano import DomainError, PrecisionError, PrecisionLossError
from qveneziano.padic import (
    PadicNumber,
    PadicQ,
    Prime,
    from_rational,
    integer_representative,
    padic,
    pow_int,
    q_power,
    rational_reconstruction,
    vp,
)

primes = st.sampled_from([2, 3, 5, 7, 11])
nonzero = st.integers(-10**6, 10**6).filter(lambda n: n != 0)


def oracle_vp(n: int, p: int) -> int:
    n, v = abs(n), 0
    while n % p == 0:
        n //= p
        v += 1
    return v


class TestPrime:
    def test_accepts_primes(self):
        assert Prime(7) == 7

    @pytest.mark.parametrize("bad", [0, 1, 4, 9, -3])
    def test_rejects_non_primes(self, bad):
        with pytest.raises(DomainError):
            Prime(bad)


class TestEmbedding:
    def test_integer_with_valuation(self):
        x = from_rational(50, 1, 5, 4)
        assert (x.valuation, x.unit, x.precision) == (2, 2, 4)

    def test_zero_is_zero_class(self):
        x = from_rational(0, 7, 3, 6)
        assert x.is_zero_class and x.valuation >= 6

    def test_inverse_matches_extended_euclid(self):
        # Independent modular inverse by the extended Euclidean algorithm.
        def inv(a, m):
            r0, r1, s0, s1 = m, a % m, 0, 1
            while r1:
                k = r0 // r1
                r0, r1, s0, s1 = r1, r0 - k * r1, s1, s0 - k * s1
            return s0 % m

        x = from_rational(1, 3, 5, 4)
        assert x.valuation == 0 and x.unit == inv(3, 625)

    def test_zero_denominator(self):
        with pytest.raises(DomainError):
            from_rational(1, 0, 5, 4)

    @given(a=nonzero, b=nonzero, p=primes, N=st.integers(1, 12))
    def test_valuation_and_unit(self, a, b, p, N):
        x = from_rational(a, b, p, N)
        assert x.valuation == oracle_vp(a, p) - oracle_vp(b, p)
        m = p**N
        a0, b0 = a // p ** oracle_vp(a, p), b // p ** oracle_vp(b, p)
        assert (x.unit * b0 - a0) % m == 0
        assert x.unit % p != 0 and 1 <= x.unit < m

    def test_coercion_helper(self):
        assert padic("3/4", 5, 6) == from_rational(3, 4, 5, 6)
        assert padic(Fraction(3, 4), 5, 6) == from_rational(3, 4, 5, 6)


class TestArithmetic:
    def test_small_products(self):
        assert padic(2, 7, 6) * padic(3, 7, 6) == padic(6, 7, 6)

    def test_additive_identity_keeps_precision(self):
        x = padic(Fraction(2, 3), 5, 6)
        y = x + PadicNumber.zero(5, 6)
        assert y == x and y.precision == x.precision

    @settings(max_examples=100)
    @given(a=nonzero, b=nonzero, c=nonzero, d=nonzero, p=primes)
    def test_valuation_multiplicative(self, a, b, c, d, p):
        x, y = from_rational(a, b, p, 10), from_rational(c, d, p, 10)
        assert (x * y).valuation == x.valuation + y.valuation
        assert (x * y) == padic(Fraction(a, b) * Fraction(c, d), p, 10)

    @given(a=nonzero, b=nonzero, p=primes)
    def test_ultrametric(self, a, b, p):
        x, y = from_rational(a, 1, p, 10), from_rational(b, 1, p, 10)
        s = x + y
        assert s.valuation >= min(x.valuation, y.valuation)
        if x.valuation != y.valuation:
            assert s.valuation == min(x.valuation, y.valuation)

    @given(a=nonzero, b=nonzero, c=nonzero, d=nonzero, p=primes)
    def test_field_ops_match_rationals(self, a, b, c, d, p):
        x, y = Fraction(a, b), Fraction(c, d)
        X, Y = padic(x, p, 12), padic(y, p, 12)
        assert X - Y == padic(x - y, p, 12) if x != y else (X - Y).is_zero_class
        assert X / Y == padic(x / y, p, 12)
        assert -X == padic(-x, p, 12)

    def test_cancellation_loses_relative_digits(self):
        x = padic(1, 5, 6)
        y = padic(1 + 5**3, 5, 6)
        d = y - x
        assert d.valuation == 3 and d.precision == 3

    def test_total_cancellation_is_zero_class(self):
        x = padic(Fraction(1, 3), 5, 6)
        assert (x - x).is_zero_class

    def test_division_by_zero_class(self):
        with pytest.raises(DomainError):
            padic(1, 5, 6) / PadicNumber.zero(5, 6)

    def test_with_precision_cannot_invent_digits(self):
        with pytest.raises(PrecisionLossError):
            padic(1, 5, 4).with_precision(6)

    @given(a=nonzero, p=primes, n=st.integers(-6, 6))
    def test_pow_int(self, a, p, n):
        x = from_rational(a, 1, p, 8)
        assert pow_int(x, n) == padic(Fraction(a) ** n, p, 8)

    def test_equality_at_precision(self):
        x = padic(1, 5, 8)
        y = padic(1 + 5**4, 5, 8)
        assert x.agrees_with(y, 4) and not x.agrees_with(y, 5)
        assert x.agreement_digits(y) == 4


class TestRepresentatives:
    def test_examples(self):
        assert integer_representative(from_rational(7, 1, 5, 2), 2) == 7
        assert integer_representative(from_rational(-1, 1, 5, 3), 3) == 124
        assert integer_representative(from_rational(1, 3, 5, 1), 1) == 2

    def test_negative_valuation(self):
        with pytest.raises(DomainError):
            integer_representative(from_rational(1, 5, 5, 4), 2)

    def test_more_digits_than_known(self):
        with pytest.raises(PrecisionLossError):
            integer_representative(padic(Fraction(1, 3), 5, 4), 6)

    @given(a=nonzero, b=nonzero, p=primes, k=st.integers(1, 8), k2=st.integers(1, 8))
    def test_consistent_across_k(self, a, b, p, k, k2):
        assume(b % p)
        x = from_rational(a, b, p, 10)
        assume(x.valuation >= 0)
        n1, n2 = integer_representative(x, k), integer_representative(x, k2)
        assert 0 <= n1 < p**k and (n1 - n2) % p ** min(k, k2) == 0
        assert (n1 * b - a) % p**k == 0


class TestRationalReconstruction:
    @given(a=st.integers(-1000, 1000), b=st.integers(1, 1000), p=primes)
    def test_round_trip(self, a, b, p):
        assume(b % p and a != 0)
        N = 8
        # Reconstruction bound sqrt(p^N / 2) must dominate |a|, |b|.
        while p**N < 2 * 1001**2:
            N += 1
        assert rational_reconstruction(from_rational(a, b, p, N)) == Fraction(a, b)

    def test_insufficient_digits(self):
        with pytest.raises(PrecisionError):
            rational_reconstruction(from_rational(1000, 999, 5, 3))


class TestText:
    def test_canonical_form(self):
        assert str(padic(50, 5, 4)) == "5^2 * (2 + 0*5 + 0*5^2 + 0*5^3) + O(5^6)"
        assert str(PadicNumber.zero(3, 6)) == "O(3^6)"

    @given(a=nonzero, b=nonzero, p=primes, N=st.integers(1, 10))
    def test_parse_round_trip(self, a, b, p, N):
        x = from_rational(a, b, p, N)
        y = PadicNumber.parse(str(x))
        assert (y.valuation, y.unit, y.precision) == (x.valuation, x.unit, x.precision)

    @given(a=nonzero, b=nonzero, p=primes, N=st.integers(1, 10))
    def test_json_round_trip(self, a, b, p, N):
        x = from_rational(a, b, p, N)
        data = x.to_json()
        assert set(data) == {"p", "valuation", "digits", "precision"}
        y = PadicNumber.from_json(data)
        assert (y.valuation, y.unit, y.precision) == (x.valuation, x.unit, x.precision)

    def test_digits_little_endian(self):
        assert padic(1 + 2 * 5 + 3 * 25, 5, 3).digits == [1, 2, 3]


class TestQPower:
    def test_domain(self):
        with pytest.raises(DomainError):
            PadicQ.from_rational(2, 5)
        with pytest.raises(DomainError):
            PadicQ.from_rational(1, 5)
        assert PadicQ.from_rational(6, 5).delta_valuation == 1

    @given(p=st.sampled_from([2, 3, 5, 7]), m=st.integers(1, 30), n=st.integers(-20, 20))
    def test_matches_repeated_multiplication(self, p, m, n):
        q = PadicQ.from_rational(1 + p * m, p)
        x = padic(n, p, 30)
        want = padic(Fraction(1 + p * m) ** n, p, 20)
        assert q_power(q, x, 20).agrees_with(want, 20)

    def test_zero_exponent(self):
        q = PadicQ.from_rational(8, 7)
        assert q_power(q, padic(0, 7, 10), 10) == 1

    @settings(max_examples=50)
    @given(p=st.sampled_from([3, 5, 7]), a=st.integers(1, 10**6), b=st.integers(1, 10**6))
    def test_exponent_law(self, p, a, b):
        q = PadicQ.from_rational(1 + p, p)
        x, y = from_rational(a, 7 if p != 7 else 3, p, 12), from_rational(b, 1, p, 12)
        lhs = q_power(q, x + y, 12)
        rhs = q_power(q, x, 12) * q_power(q, y, 12)
        assert lhs.agrees_with(rhs, 12)

    def test_precision_follows_exponent(self):
        q = PadicQ.from_rational(1 + 5, 5)
        r = q_power(q, padic(Fraction(1, 3), 5, 4))
        assert r.precision == 5  # absprec(x) + v_p(q - 1)

    def test_vp_of_fraction(self):
        assert vp(Fraction(50, 3), 5) == 2 and vp(Fraction(3, 25), 5) == -2
