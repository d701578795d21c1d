"""Certified tower arithmetic, bound integers, and symbolic norm values."""

import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from creaturelab.hyper import (EQ, GT, LT, UNKNOWN, BudgetExceeded, Cert,
                               DirectionMismatch, HyperError, HyperInt,
                               NormValue, ZERO_NORM, bound_hyper, cert_prod,
                               cert_sum, exact, hyper_compare, hyper_mul,
                               hyper_pow, make_norm, norm_cmp, norm_ge,
                               norm_min, norm_vs_norm, pow2_lower, pow2_upper,
                               t_add_lower, t_add_upper, t_cmp, t_log2_ceil,
                               t_log2_floor, t_max, t_min, t_mul_lower,
                               t_mul_upper, t_norm, t_pow_lower, t_pow_upper,
                               t_succ_upper, tower_hyper)


def t_value(t):
    """Exact integer value of a small tower, for oracle checks."""
    k, n = t
    for _ in range(k):
        n = 2 ** n
    return n


small_towers = st.tuples(st.integers(0, 2), st.integers(0, 6))


class TestTowers:
    def test_norm_collapses_small_tops(self):
        assert t_norm((1, 3)) == (0, 8)
        assert t_norm((2, 2)) == (0, 16)
        assert t_norm((3, 1)) == (0, 16)

    def test_norm_keeps_large_tops(self):
        assert t_norm((1, 100)) == (1, 100)
        assert t_norm((2, 65)) == (2, 65)

    @given(small_towers, small_towers)
    def test_cmp_matches_values(self, a, b):
        va, vb = t_value(a), t_value(b)
        want = LT if va < vb else GT if va > vb else EQ
        assert t_cmp(a, b) == want

    def test_cmp_beyond_any_flat(self):
        # 2^2^2^70 against any flat integer
        assert t_cmp((3, 70), (0, 10 ** 300)) == GT
        assert t_cmp((0, 10 ** 300), (3, 70)) == LT

    def test_cmp_peels_levels(self):
        assert t_cmp((2, 70), (2, 71)) == LT
        assert t_cmp((2, 71), (2, 71)) == EQ
        assert t_cmp((3, 70), (2, 70)) == GT

    @given(small_towers)
    def test_succ_upper_sound(self, t):
        assert t_value(t_succ_upper(t)) >= t_value(t) + 1

    @given(small_towers, small_towers)
    def test_add_brackets_value(self, a, b):
        total = t_value(a) + t_value(b)
        assert t_value(t_add_lower(a, b)) <= total
        assert t_value(t_add_upper(a, b)) >= total

    @given(small_towers, small_towers)
    def test_mul_brackets_value(self, a, b):
        prod = t_value(a) * t_value(b)
        assert t_value(t_mul_lower(a, b)) <= prod
        assert t_value(t_mul_upper(a, b)) >= prod

    @given(small_towers, st.tuples(st.integers(0, 1), st.integers(0, 4)))
    def test_pow_brackets_value(self, a, e):
        va, ve = t_value(a), t_value(e)
        if va < 1:
            return
        want = va ** ve
        assert t_value(t_pow_lower(a, e)) <= want
        assert t_value(t_pow_upper(a, e)) >= want

    @given(small_towers)
    def test_log2_brackets_value(self, t):
        v = t_value(t)
        if v <= 0:
            return
        assert t_value(t_log2_floor(t)) == math.floor(math.log2(v)) or \
            t_value(t_log2_floor(t)) <= math.log2(v)
        assert t_value(t_log2_ceil(t)) >= math.log2(v) - 1e-9

    def test_log2_rejects_nonpositive(self):
        with pytest.raises(HyperError):
            t_log2_floor((0, 0))

    def test_max_min(self):
        assert t_max((1, 100), (0, 5)) == (1, 100)
        assert t_min((1, 100), (0, 5)) == (0, 5)


class TestHyperInt:
    def test_exact_compare(self):
        assert hyper_compare(exact(3), exact(5)) == LT
        assert hyper_compare(exact(5), exact(5)) == EQ

    def test_bound_compare_decides_when_separated(self):
        big = pow2_lower(exact(1000))
        small = pow2_upper(exact(10))
        assert hyper_compare(small, big) == LT
        assert hyper_compare(big, small) == GT

    def test_bound_compare_unknown_when_overlapping(self):
        a = pow2_lower(exact(10))  # >= 1024, no upper bound
        b = pow2_lower(exact(10))
        assert hyper_compare(a, b) == UNKNOWN

    def test_mul_exact_within_budget(self):
        assert hyper_mul(exact(6), exact(7)).value == 42

    def test_mul_direction_mismatch(self):
        with pytest.raises(DirectionMismatch):
            hyper_mul(pow2_lower(exact(100)), pow2_upper(exact(100)))

    def test_mul_lower_bound_sound(self):
        out = hyper_mul(pow2_lower(exact(100)), pow2_lower(exact(50)),
                        "lower")
        # sound: the certified lower bound stays at or below 2^150 and
        # keeps at least the larger factor
        assert t_cmp(out.lower_tower(), (1, 150)) != GT
        assert t_cmp(out.lower_tower(), (1, 100)) != LT

    def test_pow_soundness_both_directions(self):
        lo = hyper_pow(exact(3), exact(5), "lower")
        hi = hyper_pow(exact(3), exact(5), "upper")
        assert hyper_compare(lo, exact(243)) != GT
        assert hyper_compare(exact(243), hi) != GT

    def test_pow_zero_exponent(self):
        assert hyper_pow(pow2_lower(exact(9)), exact(0)).value == 1

    def test_tower_roundtrip(self):
        h = tower_hyper((2, 70), "lower")
        assert h.lower_tower() == (2, 70)
        h = tower_hyper((2, 70), "upper")
        assert h.upper_tower() == (2, 70)

    def test_bound_hyper_flat_is_rounded(self):
        h = bound_hyper((0, 1000), "lower")
        assert h.form == "pow2lower"
        assert t_value(h.lower_tower()) <= 1000
        h = bound_hyper((0, 1000), "upper")
        assert t_value(h.upper_tower()) >= 1000

    @given(st.integers(0, 10 ** 9))
    def test_json_roundtrip_exact(self, v):
        h = exact(v)
        assert HyperInt.from_json(json.loads(json.dumps(h.to_json()))) == h

    def test_json_roundtrip_nested(self):
        h = pow2_upper(pow2_lower(exact(12)))
        assert HyperInt.from_json(h.to_json()) == h


class TestCert:
    def test_of_is_sharp(self):
        c = Cert.of(17)
        assert c.sharp and c.exact_value == 17

    def test_sum_and_prod_bracket(self):
        items = [Cert.of(3), Cert.of(4), Cert.tower(1, 100)]
        s = cert_sum(items)
        p = cert_prod(items)
        assert t_cmp(s.lo, (0, 7)) != LT
        assert t_cmp(p.lo, (0, 12)) != LT
        assert s.hi is not None and p.hi is not None

    def test_sharp_sum_of_flats(self):
        s = cert_sum([Cert.of(3), Cert.of(4)])
        assert s.exact_value == 7
        p = cert_prod([Cert.of(3), Cert.of(4)])
        assert p.exact_value == 12


class TestNormValue:
    def test_zero_norm(self):
        assert ZERO_NORM.value() == 0.0
        assert ZERO_NORM.to_fraction() == 0

    def test_make_norm_exact_value(self):
        v = Fraction(7, 3)
        assert make_norm(v).to_fraction() == v
        assert make_norm(Fraction(0)).to_fraction() == 0

    def test_make_norm_rejects_negative(self):
        with pytest.raises(HyperError):
            make_norm(Fraction(-1))

    def test_to_fraction_power_of_base(self):
        nv = NormValue(Fraction(1, 3), 2, Fraction(8))
        assert nv.to_fraction() == 1
        nv = NormValue(Fraction(1), 3, Fraction(9, 27))
        assert nv.to_fraction() == -1

    def test_to_fraction_none_otherwise(self):
        assert NormValue(Fraction(1), 2, Fraction(3)).to_fraction() is None

    @given(st.fractions(min_value=0, max_value=10, max_denominator=100))
    def test_norm_cmp_threshold(self, z):
        nv = NormValue(Fraction(1, 2), 2, Fraction(32))  # value 5/2
        want = LT if Fraction(5, 2) < z else GT if Fraction(5, 2) > z else EQ
        assert norm_cmp(nv, z) == want

    def test_norm_cmp_budget(self):
        nv = NormValue(Fraction(1, 10 ** 9), 2, Fraction(3))
        with pytest.raises(BudgetExceeded):
            norm_cmp(nv, Fraction(1, 10 ** 9 + 1), budget=100)

    def test_norm_ge_float_fallback(self):
        nv = NormValue(Fraction(1, 10 ** 9), 2, Fraction(3), exact=False)
        assert norm_ge(nv, Fraction(0))

    def test_norm_vs_norm_same_shape_exact(self):
        a = NormValue(Fraction(1, 3), 3, Fraction(5))
        b = NormValue(Fraction(1, 3), 3, Fraction(7))
        assert norm_vs_norm(a, b) == LT
        assert norm_vs_norm(b, a) == GT
        assert norm_vs_norm(a, a) == EQ

    def test_norm_vs_norm_cross_base(self):
        # log_2 4 == 2 and (1/2) log_3 81 == 2: exact via rational values
        a = NormValue(Fraction(1), 2, Fraction(4))
        b = NormValue(Fraction(1, 2), 3, Fraction(81))
        assert norm_vs_norm(a, b) == EQ

    def test_norm_vs_norm_mixed_exact_rational(self):
        # log_3 5 against the rational 3/2: 3^3 = 27 > 25 = 5^2, so LT
        a = NormValue(Fraction(1), 3, Fraction(5))
        b = make_norm(Fraction(3, 2))
        assert norm_vs_norm(a, b) == LT

    def test_norm_min(self):
        vals = [make_norm(Fraction(3)), make_norm(Fraction(1)),
                make_norm(Fraction(2))]
        assert norm_min(vals).to_fraction() == 1

    @given(st.fractions(min_value=Fraction(1, 100), max_value=100),
           st.integers(2, 5),
           st.fractions(min_value=Fraction(1, 1000), max_value=1000))
    def test_json_roundtrip(self, scale, base, arg):
        nv = NormValue(scale, base, arg)
        back = NormValue.from_json(json.loads(json.dumps(nv.to_json())))
        assert back == nv
