"""Parameter tables: generation, clause verification, heights, frames."""

import json
import math
from dataclasses import replace
from itertools import product
from random import Random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from creaturelab import compounds as cm
from creaturelab.params import (FAIL, FP_ONLY, PASS, SAMPLED, TOY, UNKNOWN,
                                VERIFY, WAIVED, DepthExceeded, Frame, Height,
                                ParameterTable, Q, Report, ReportEntry,
                                count_subsets_le,
                                frame_build, generate_table, m_s,
                                verify_table)


class TestGenerateVerify:
    def test_verify_depth1_spot_values(self):
        # least solutions of the two leading growth clauses with the
        # default seed 3: 3^1 * (2^(1*3) + 1) = 27 and 3^3 + 1 = 28
        t = generate_table(1, VERIFY)
        lv = t.level(0)
        assert lv.iota_pr.int_value == 27
        assert lv.pr[0].nP.int_value == 3
        assert lv.pr[0].nB.int_value == 28

    @pytest.mark.parametrize("depth", [1, 2])
    def test_verify_round_trip_clean(self, depth):
        rep = verify_table(generate_table(depth, VERIFY))
        counts = rep.counts()
        assert counts.get(FAIL, 0) == 0
        assert counts.get(UNKNOWN, 0) == 0
        assert rep.ok()
        # universal per-rank clauses are probe-checked, so some entries
        # must be graded SAMPLED rather than silently PASS
        assert counts.get(SAMPLED, 0) > 0

    def test_toy_values_exact_and_capped(self):
        t = generate_table(1, TOY)
        assert t.toy_cap == 10 ** 6
        lv = t.level(0)
        for ent in lv.lc.entries.values():
            for q in ent.q.values():
                assert q.int_value is not None
                assert q.int_value <= t.toy_cap
        assert set(t.manifest["waived"])  # the cap forces waivers

    def test_toy_waiver_manifest_matches_report(self):
        t = generate_table(1, TOY)
        rep = verify_table(t)
        waived_clauses = {e.clause for e in rep.entries
                          if e.status == WAIVED}
        assert waived_clauses <= set(t.manifest["waived"])
        assert not any(e.status == FAIL for e in rep.entries)

    def test_fp_only_clean(self):
        for depth in (1, 2, 3):
            rep = verify_table(generate_table(depth, FP_ONLY))
            counts = rep.counts()
            assert counts.get(FAIL, 0) == 0
            assert counts.get(UNKNOWN, 0) == 0

    def test_depth_bounds(self):
        with pytest.raises(DepthExceeded):
            generate_table(0)
        with pytest.raises(DepthExceeded):
            generate_table(9)

    def test_constructed_violations_fail(self):
        # a crafted toy table violates many growth clauses by design;
        # stripping its waiver manifest must surface them as FAIL
        t = replace(cm.wide_table(1), manifest={"waived": [], "relaxed": []})
        rep = verify_table(t)
        fails = {e.clause for e in rep.entries if e.status == FAIL}
        assert "F10" in fails  # d = 2 at the first lc column
        assert not rep.ok()

    def test_crafted_table_waivers_exact(self):
        # with its manifest intact the same table reports WAIVED, not FAIL
        t = cm.wide_table(1)
        rep = verify_table(t)
        assert not any(e.status == FAIL for e in rep.entries)
        waived = {e.clause for e in rep.entries if e.status == WAIVED}
        assert waived == set(t.manifest["waived"])


class TestHeights:
    def test_band_order(self):
        assert Height("pr", 0, 1).key < Height("lc", 0, 0).key
        assert Height("lc", 0, 1).key < Height("al", 0).key
        assert Height("al", 0).key < Height("pr", 1, 0).key

    def test_al_has_no_sublevels(self):
        with pytest.raises(Exception):
            Height("al", 0, 1)

    @given(st.lists(st.tuples(st.sampled_from(["pr", "lc", "al"]),
                              st.integers(0, 3), st.integers(0, 3)),
                    min_size=3, max_size=3))
    def test_total_order_trichotomy_transitivity(self, triples):
        hs = [Height(k, n, 0 if k == "al" else s) for k, n, s in triples]
        a, b, c = (h.key for h in hs)
        assert sum([a < b, b < a, a == b]) == 1
        if a < b and b < c:
            assert a < c


class TestFrame:
    def test_frame_build_shape(self):
        t = generate_table(1, TOY)
        fr = frame_build(t)
        assert fr.depth == 1
        assert set(fr.s_pr) == {"i0", "i1"}
        assert fr.i_star("i0.lc0") == "i0"
        assert fr.i_star("i0.al0") == "i0"
        assert fr.i_star("i0") == "i0"

    def test_frame_heights_ascend(self):
        t = generate_table(1, TOY)
        fr = frame_build(t)
        keys = [h.key for h in fr.heights(0)]
        assert keys == sorted(keys)

    def test_omega_excludes_pr(self):
        t = generate_table(1, TOY)
        fr = frame_build(t)
        assert all(h.kind != "pr" for h in fr.omega(0))

    def test_closed_sets(self):
        t = generate_table(1, TOY)
        fr = frame_build(t)
        assert fr.is_closed(("i0", "i0.lc0"))
        assert not fr.is_closed(("i0.lc0",))  # misses its pr index


class TestDerived:
    @given(st.integers(0, 12), st.integers(0, 12))
    def test_count_subsets_le_oracle(self, m, h):
        want = sum(math.comb(m, k) for k in range(0, min(m, h) + 1))
        assert count_subsets_le(m, h) == want

    def test_m_s_direct_product_oracle(self):
        t = generate_table(1, TOY)
        sched = t.level(0).lc
        tcount = sched.tcount.int_value
        lcount = sched.lcount.int_value

        def ns(tt, l):
            return sched.entries[(tt, l)].q["nS"].int_value

        for tt in range(tcount):
            for l in range(lcount):
                want = 1
                for j in range(l + 1):
                    want *= ns(tt, j)
                if tt > 0:
                    for j in range(l + 1, lcount):
                        want *= ns(tt - 1, j)
                assert m_s(t, 0, tt, l).int_value == want

    def test_fp6_fp7_identities_exact(self):
        # product identities of the starred quantities on toy tables
        t = generate_table(1, TOY)
        sched = t.level(0).lc
        for tt in range(sched.tcount.int_value):
            bs = [sched.entries[(tt, l)].q["b"].int_value
                  for l in range(sched.lcount.int_value)]
            hs = [sched.entries[(tt, l)].q["h"].int_value
                  for l in range(sched.lcount.int_value)]
            stat = sched.tstats[tt]
            bstar = math.prod(bs)
            assert stat.bstar.int_value == bstar
            assert stat.hstar.int_value == \
                bstar - math.prod(b - h for b, h in zip(bs, hs))


class TestSerialization:
    @pytest.mark.parametrize("regime", [VERIFY, TOY, FP_ONLY])
    def test_table_roundtrip(self, regime):
        t = generate_table(1, regime)
        blob = json.dumps(t.to_json(), sort_keys=True)
        back = ParameterTable.from_json(json.loads(blob))
        assert json.dumps(back.to_json(), sort_keys=True) == blob

    def test_schema_checked(self):
        t = generate_table(1, TOY)
        obj = t.to_json()
        obj["schema"] = "nonsense"
        with pytest.raises(Exception):
            ParameterTable.from_json(obj)

    @given(st.integers(0, 10 ** 40))
    def test_q_roundtrip(self, v):
        q = Q.of(v)
        assert Q.from_json(json.loads(json.dumps(q.to_json()))).int_value == v


class TestReport:
    def test_counts_ok_lines(self):
        rep = Report((ReportEntry("G1", "n0", PASS),
                      ReportEntry("G2", "n0", FAIL, detail="too small"),
                      ReportEntry("G3", "n0", UNKNOWN)))
        assert rep.counts() == {PASS: 1, FAIL: 1, UNKNOWN: 1}
        assert not rep.ok()
        lines = list(rep.lines())
        assert len(lines) == 3
        assert any("too small" in ln for ln in lines)

    def test_ok_requires_no_unknown(self):
        rep = Report((ReportEntry("G1", "n0", UNKNOWN),))
        assert not rep.ok()
        rep = Report((ReportEntry("G1", "n0", PASS),
                      ReportEntry("G2", "n0", WAIVED)))
        assert rep.ok()
