"""Layered integers: exact arithmetic on astronomically large sums of
powers of two, with closed-form comparison and logarithms."""

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from creaturelab.layered import (EQ, GT, LT, L0, L1, LDiff, LInt,
                                 LayeredError, ladd, ladd_int, lcmp,
                                 ldiff_prod, ldiff_sum, lint, llog2_ceil,
                                 llog2_floor, lmax, lmin, lmul, lpow, lpow2,
                                 lprod, lsum, tower_bounds)

flats = st.integers(0, 10 ** 6)


def big(e: int, c: int = 1) -> LInt:
    """c * 2^(2^e) with a genuinely layered exponent."""
    return lmul(lint(c), lpow2(lpow2(lint(e))))


class TestFlat:
    @given(flats, flats)
    def test_add_mul_match_ints(self, a, b):
        assert ladd(lint(a), lint(b)).flat_value() == a + b
        assert lmul(lint(a), lint(b)).flat_value() == a * b

    @given(flats, flats)
    def test_cmp_matches_ints(self, a, b):
        want = LT if a < b else GT if a > b else EQ
        assert lcmp(lint(a), lint(b)) == want

    @given(st.integers(0, 1000))
    def test_pow2_small_is_flat(self, e):
        v = lpow2(lint(e))
        assert v.is_flat and v.flat_value() == 1 << e

    def test_pow2_large_is_layered(self):
        v = lpow2(lint(1 << 17))
        assert not v.is_flat
        with pytest.raises(LayeredError):
            v.flat_value()

    @given(st.integers(1, 10 ** 6))
    def test_log2_floor_matches(self, v):
        assert llog2_floor(lint(v)).flat_value() == v.bit_length() - 1

    @given(st.integers(1, 10 ** 6))
    def test_log2_ceil_matches(self, v):
        want = v.bit_length() - 1 if v & (v - 1) == 0 else v.bit_length()
        assert llog2_ceil(lint(v)).flat_value() == want


class TestLayered:
    def test_cmp_by_exponent(self):
        assert lcmp(big(20), big(21)) == LT
        assert lcmp(big(21), big(20)) == GT
        assert lcmp(big(20), big(20)) == EQ

    def test_cmp_by_coefficient(self):
        assert lcmp(big(20, 3), big(20, 5)) == LT
        assert lcmp(big(20, 5), big(20, 3)) == GT

    def test_layered_dominates_any_flat(self):
        assert lcmp(big(20), lint(10 ** 5)) == GT
        assert lcmp(lint(10 ** 5), big(20)) == LT

    def test_sum_of_smaller_layers_does_not_flip(self):
        # 2^2^21 > k * 2^2^20 for any modest k
        small = lmul(lint(10 ** 6), big(20))
        assert lcmp(big(21), small) == GT

    def test_add_commutes_and_canonicalises(self):
        a = ladd(big(20), big(21))
        b = ladd(big(21), big(20))
        assert a == b
        assert lcmp(a, b) == EQ

    def test_mul_adds_exponents(self):
        prod = lmul(big(20), big(20))
        # 2^2^20 * 2^2^20 == 2^(2^21)
        assert lcmp(prod, lpow2(lpow2(lint(21)))) == EQ

    def test_pow_repeated_squares(self):
        assert lcmp(lpow(big(20), 4),
                    lpow2(lmul(lint(4), lpow2(lint(20))))) == EQ
        assert lpow(big(20), 0) == L1

    def test_log2_floor_of_layered(self):
        v = lmul(lint(3), big(20))
        # floor log2 (3 * 2^2^20) = 2^20 + 1
        assert lcmp(llog2_floor(v), ladd_int(lpow2(lint(20)), 1)) == EQ

    def test_log2_ceil_pure_power(self):
        assert lcmp(llog2_ceil(big(20)), lpow2(lint(20))) == EQ

    def test_log_of_zero_raises(self):
        with pytest.raises(LayeredError):
            llog2_floor(L0)

    def test_sum_prod_helpers(self):
        assert lsum([lint(1), lint(2), big(20)]) == ladd(lint(3), big(20))
        assert lcmp(lprod([lint(2), big(20)]), big(20, 2)) == EQ

    def test_max_min(self):
        assert lmax(big(20), big(21)) == big(21)
        assert lmin(big(20), lint(7)) == lint(7)


class TestLDiff:
    def test_exact_collapse(self):
        d = LDiff(lint(10), lint(4))
        assert d.exact().flat_value() == 6

    def test_layered_difference_stays_formal(self):
        d = LDiff(big(20), lint(1))
        assert d.exact() is None
        assert d.is_nonneg()

    def test_cmp(self):
        a = LDiff(big(20), lint(5))
        b = LDiff(big(20), lint(3))
        assert a.cmp(b) == LT  # same positive part, larger debt
        assert b.cmp(a) == GT
        assert a.cmp(a) == EQ

    def test_cmp_lint(self):
        d = LDiff(lint(10), lint(4))
        assert d.cmp_lint(lint(6)) == EQ
        assert d.cmp_lint(lint(5)) == GT

    def test_product_expands(self):
        # (a - b)(c - d) compared through cross terms, no cancellation
        a = LDiff(big(20), lint(1))
        out = a.mul(a)
        # (x-1)^2 = x^2 - 2x + 1 >= 0 and below x^2
        assert out.is_nonneg()
        assert out.cmp(LDiff.of(lmul(big(20), big(20)))) == LT

    def test_sum_prod_helpers(self):
        items = [LDiff(lint(5), lint(2)), LDiff(lint(4), lint(1))]
        assert ldiff_sum(items).exact().flat_value() == 6
        assert ldiff_prod(items).exact().flat_value() == 9


class TestInterop:
    def test_tower_bounds_flat(self):
        lo, hi = tower_bounds(lint(1000))
        assert lo == (0, 1000) and hi == (0, 1000)

    def test_tower_bounds_layered_bracket(self):
        from creaturelab.hyper import t_cmp
        v = lmul(lint(3), big(18))
        lo, hi = tower_bounds(v)
        # 2^(2^18+1) <= 3*2^2^18 <= 2^(2^18+2)
        assert t_cmp(lo, hi) != GT


class TestJson:
    @given(flats)
    def test_flat_roundtrip(self, v):
        x = lint(v)
        assert LInt.from_json(json.loads(json.dumps(x.to_json()))) == x

    def test_layered_roundtrip(self):
        x = ladd(lmul(lint(5), big(20)), lint(12))
        assert LInt.from_json(json.loads(json.dumps(x.to_json()))) == x

    def test_ldiff_roundtrip(self):
        d = LDiff(big(20), lint(3))
        assert LDiff.from_json(json.loads(json.dumps(d.to_json()))) == d
        plain = LDiff.of(lint(9))
        assert LDiff.from_json(plain.to_json()) == plain
