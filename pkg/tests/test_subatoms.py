"""Subatomic families: norms, covering numbers, and bigness thinning."""

import json
import math
from fractions import Fraction
from itertools import combinations
from random import Random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from creaturelab.hyper import EQ, GT, LT, norm_vs_norm
from creaturelab.params import FAIL, PASS
from creaturelab.subatoms import (BignessHypothesisViolated,
                                  FamilyDescriptor, LimitExceeded, P_KIND,
                                  S_KIND, Subatom, SubatomError, bigness_thin,
                                  cov_norm, full_subatom, subatom_norm,
                                  validate_subatom)


def cov_oracle(c, members):
    """Independent covering number: the largest k such that every k-subset
    of the ground set sits inside some member."""
    sets = [set(m) for m in members]
    best = 0
    for k in range(1, c + 1):
        if all(any(set(x) <= s for s in sets)
               for x in combinations(range(c), k)):
            best = k
        else:
            break
    return best


class TestFamilies:
    def test_full_p(self):
        fam = FamilyDescriptor(P_KIND, 3, T=7)
        assert full_subatom(fam).size == 7

    def test_full_s_counts_all_small_subsets(self):
        fam = FamilyDescriptor(S_KIND, 2, c=4, l=2)
        s = full_subatom(fam)
        assert s.size == 1 + 4 + 6  # sizes 0, 1, 2
        assert () in s.members  # the empty subset is a member

    def test_limits(self):
        with pytest.raises(LimitExceeded):
            full_subatom(FamilyDescriptor(S_KIND, 2, c=31, l=2))
        with pytest.raises(LimitExceeded):
            full_subatom(FamilyDescriptor(S_KIND, 2, c=5, l=6))

    def test_empty_members_rejected(self):
        with pytest.raises(SubatomError):
            Subatom(FamilyDescriptor(P_KIND, 3, T=10), [])


class TestNorms:
    def test_p_norm_frozen_value(self):
        fam = FamilyDescriptor(P_KIND, 3, T=100)
        s = Subatom(fam, range(81))
        assert subatom_norm(s).to_fraction() == Fraction(4, 3)

    def test_s_norm_frozen_value(self):
        fam = FamilyDescriptor(S_KIND, 2, c=3, l=1)
        s = Subatom(fam, [(0,), (1,), (2,)])
        assert cov_norm(s) == 1
        assert subatom_norm(s).to_fraction() == Fraction(1, 2)

    def test_cov_norm_frozen_values(self):
        fam = FamilyDescriptor(S_KIND, 2, c=2, l=2)
        assert cov_norm(Subatom(fam, [(0, 1)])) == 2
        fam = FamilyDescriptor(S_KIND, 2, c=3, l=1)
        assert cov_norm(Subatom(fam, [(0,), (1,)])) == 0  # {2} uncovered

    def test_singleton_norm_zero(self):
        s = Subatom(FamilyDescriptor(P_KIND, 4, T=9), [3])
        assert subatom_norm(s).to_fraction() == 0
        s = Subatom(FamilyDescriptor(S_KIND, 3, c=4, l=2), [()])
        assert subatom_norm(s).to_fraction() == 0

    @settings(max_examples=60)
    @given(st.integers(2, 6), st.integers(1, 4), st.data())
    def test_cov_norm_matches_brute_oracle(self, c, l, data):
        fam = FamilyDescriptor(S_KIND, 2, c=c, l=min(l, c))
        pool = full_subatom(fam).members
        size = data.draw(st.integers(1, len(pool)))
        members = data.draw(st.permutations(pool)).__getitem__(
            slice(0, size))
        s = Subatom(fam, members)
        assert cov_norm(s) == cov_oracle(c, members)

    @settings(max_examples=60)
    @given(st.integers(2, 6), st.integers(2, 400), st.data())
    def test_p_norm_threshold_law(self, m, T, data):
        fam = FamilyDescriptor(P_KIND, m, T=T)
        size = data.draw(st.integers(1, T))
        s = Subatom(fam, range(size))
        nv = subatom_norm(s)
        assert nv.value() == pytest.approx(math.log(size, m) / m)
        # the threshold reading: norm >= k iff size >= m^(m k)
        from creaturelab.hyper import norm_ge
        for k in (0, 1, 2):
            assert norm_ge(nv, Fraction(k)) == (size >= m ** (m * k))

    def test_monotone_under_subfamilies(self):
        rng = Random(11)
        for _ in range(200):
            m = rng.randint(2, 5)
            T = rng.randint(2, 200)
            big = rng.sample(range(T), rng.randint(2, T))
            small = rng.sample(big, rng.randint(1, len(big)))
            fam = FamilyDescriptor(P_KIND, m, T=T)
            a = subatom_norm(Subatom(fam, small))
            b = subatom_norm(Subatom(fam, big))
            assert norm_vs_norm(a, b) != GT


class TestBigness:
    def test_p_pigeonhole_frozen(self):
        # 27 members, surjective 3-labelling: the best class keeps >= 9
        fam = FamilyDescriptor(P_KIND, 3, T=27)
        s = Subatom(fam, range(27))
        labels = {x: x % 3 for x in range(27)}
        thin = bigness_thin(s, labels)
        assert len(thin.members) >= 9
        assert len({labels[x] for x in thin.members}) == 1
        drop = subatom_norm(s).to_fraction() - \
            subatom_norm(thin).to_fraction()
        assert drop <= Fraction(1, 3)

    def test_p_exact_loss_law(self):
        rng = Random(5)
        for _ in range(500):
            m = rng.randint(2, 6)
            T = rng.randint(m, 500)
            s = Subatom(FamilyDescriptor(P_KIND, m, T=T),
                        rng.sample(range(T), rng.randint(1, T)))
            labels = {x: rng.randrange(m) for x in s.members}
            thin = bigness_thin(s, labels)
            assert len({labels[x] for x in thin.members}) == 1
            assert m * len(thin.members) >= len(s.members)

    def test_s_full_family_any_labelling(self):
        fam = FamilyDescriptor(S_KIND, 2, c=4, l=2)
        s = full_subatom(fam)
        rng = Random(7)
        base_cov = cov_norm(s)
        for _ in range(50):
            labels = {mem: rng.randrange(2) for mem in s.members}
            thin = bigness_thin(s, labels)
            assert len({labels[m] for m in thin.members}) == 1
            # exact form of "norm drops by at most 1/2" with m = 2
            assert 2 * (cov_norm(thin) + 1) >= base_cov + 1

    def test_s_exact_loss_law(self):
        rng = Random(9)
        for _ in range(200):
            m = rng.randint(2, 5)
            c = rng.randint(2, 8)
            l = rng.randint(1, min(3, c))
            fam = FamilyDescriptor(S_KIND, m, c=c, l=l)
            pool = full_subatom(fam).members
            s = Subatom(fam, rng.sample(pool, rng.randint(1, len(pool))))
            labels = {mem: rng.randrange(m) for mem in s.members}
            thin = bigness_thin(s, labels)
            assert len({labels[mem] for mem in thin.members}) == 1
            assert m * (cov_norm(thin) + 1) >= cov_norm(s) + 1

    def test_constant_labelling_keeps_everything(self):
        fam = FamilyDescriptor(P_KIND, 3, T=20)
        s = Subatom(fam, range(15))
        thin = bigness_thin(s, {x: 1 for x in s.members})
        assert thin == s

    def test_iterated_thinning_drop_accumulates(self):
        fam = FamilyDescriptor(P_KIND, 3, T=81)
        s = Subatom(fam, range(81))
        t1 = bigness_thin(s, {x: x % 3 for x in s.members})
        t2 = bigness_thin(t1, {x: (x // 3) % 3 for x in t1.members})
        total = subatom_norm(s).to_fraction() - \
            subatom_norm(t2).to_fraction()
        assert total <= Fraction(2, 3)

    def test_label_out_of_range(self):
        fam = FamilyDescriptor(P_KIND, 3, T=9)
        s = Subatom(fam, range(9))
        with pytest.raises(BignessHypothesisViolated):
            bigness_thin(s, {x: 5 for x in s.members})

    def test_missing_label(self):
        fam = FamilyDescriptor(P_KIND, 3, T=9)
        s = Subatom(fam, range(9))
        with pytest.raises(BignessHypothesisViolated):
            bigness_thin(s, {0: 1})


class TestValidate:
    def test_full_subatom_green(self):
        for fam in (FamilyDescriptor(P_KIND, 3, T=12),
                    FamilyDescriptor(S_KIND, 2, c=4, l=2)):
            rep = validate_subatom(full_subatom(fam))
            assert all(e.status == PASS for e in rep.entries)

    def test_singleton_k4(self):
        rep = validate_subatom(Subatom(FamilyDescriptor(P_KIND, 3, T=5), [2]))
        assert all(e.status == PASS for e in rep.entries)


class TestSerialization:
    @settings(max_examples=50)
    @given(st.integers(2, 6), st.integers(2, 60), st.data())
    def test_p_roundtrip(self, m, T, data):
        fam = FamilyDescriptor(P_KIND, m, T=T)
        size = data.draw(st.integers(1, T))
        s = Subatom(fam, range(size))
        assert Subatom.from_json(json.loads(json.dumps(s.to_json()))) == s

    def test_s_roundtrip(self):
        fam = FamilyDescriptor(S_KIND, 2, c=4, l=2)
        s = full_subatom(fam)
        assert Subatom.from_json(json.loads(json.dumps(s.to_json()))) == s
