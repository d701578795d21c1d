"""Named randomized property suites with deterministic seeded reports.

Each suite is a generator of case outcomes over a seeded RNG; the runner
counts pass/fail/unknown/vacuous, stops at the case or time budget
(reporting the executed count), and keeps the first counterexample as a
JSON payload.  Identical seeds give identical reports.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from random import Random

from .hyper import EQ, GT, LT, make_norm, norm_vs_norm
from .params import (FAIL, FP_ONLY, PASS, Q, UNKNOWN, generate_table,
                     ParameterTable)
from .subatoms import (FamilyDescriptor, P_KIND, S_KIND, Subatom,
                       bigness_thin, cov_norm, full_subatom, subatom_norm)
from . import compounds as cm
from . import blocks as bl
from . import conditions as cd

VACUOUS = "VACUOUS"


class UnknownSuite(Exception):
    pass


@dataclass
class SuiteReport:
    suite: str
    cases: int
    passed: int
    failed: int
    unknown: int
    vacuous: int
    counterexample: dict | None
    duration_s: float | None
    seed: int

    def to_json(self, timings: bool = False):
        return {
            "suite": self.suite,
            "cases": self.cases,
            "passed": self.passed,
            "failed": self.failed,
            "unknown": self.unknown,
            "vacuous": self.vacuous,
            "counterexample": self.counterexample,
            # wall clock is volatile; omitted unless explicitly requested
            # so equal seeds give byte-identical reports
            "duration_s": self.duration_s if timings else None,
            "seed": self.seed,
        }


# ---------------------------------------------------------------------------
# Case generators: yield (status, payload-or-None)
# ---------------------------------------------------------------------------


def _suite_disjointify(rng: Random, cases: int):
    for k in range(cases):
        m = rng.randint(1, 5)
        count = rng.randint(1, m + 1)
        # log-uniform sizes so the full range up to 10**4 is exercised
        sets = [tuple(rng.sample(range(100000),
                                 int(10 ** (rng.random() * 4))))
                for _ in range(count)]
        try:
            out = cm.disjointify(sets, m)
        except cm.CompoundError as exc:
            yield FAIL, {"case": k, "error": str(exc)}
            continue
        ok = True
        seen = set()
        for a, b in zip(sets, out):
            if not set(b) <= set(a) or seen & set(b):
                ok = False
            seen |= set(b)
            # mu-drop <= 1 exactly: |B| * 3^(m+1) >= |A|
            if len(b) * 3 ** (m + 1) < len(a):
                ok = False
        yield (PASS if ok else FAIL,
               None if ok else {"case": k, "m": m,
                                "sizes": [len(a) for a in sets]})


def _suite_stacked(rng: Random, cases: int):
    for k in range(cases):
        m = rng.randint(0, 4)
        nj = rng.randint(1, 12)
        sizes = [rng.randint(1, 500) for _ in range(nj)]
        norms = [cm.mu(m, s) for s in sizes]
        best, wit = cm.stacked_norm(norms, m)
        # brute force over every non-empty subset: all norms here share the
        # base-3 scale 1/(m+1), so values compare by argument; a DP over
        # bitmasks carries the per-subset minimum argument
        minarg = [0] * (1 << nj)
        brute_arg = 0
        for mask in range(1, 1 << nj):
            low = mask & -mask
            rest = mask ^ low
            a = sizes[low.bit_length() - 1]
            minarg[mask] = a if not rest else min(minarg[rest], a)
            cand = min(mask.bit_count(), minarg[mask])
            if cand > brute_arg:
                brute_arg = cand
        brute = cm.mu(m, brute_arg)
        achieved = cm.mu(m, len(wit))
        for i in wit:
            if norm_vs_norm(norms[i], achieved) == LT:
                achieved = norms[i]
        ok = norm_vs_norm(best, brute) == EQ and \
            norm_vs_norm(achieved, best) == EQ
        yield (PASS if ok else FAIL,
               None if ok else {"case": k, "m": m,
                                "norms": [float(v.value()) for v in norms]})


def _suite_bigness_p(rng: Random, cases: int):
    for k in range(cases):
        m = rng.randint(2, 6)
        T = rng.randint(m, 1000)
        size = rng.randint(1, min(T, 400))
        fam = FamilyDescriptor(P_KIND, m, T=T)
        s = Subatom(fam, rng.sample(range(T), size))
        labels = {x: rng.randrange(m) for x in s.members}
        thin = bigness_thin(s, labels)
        consts = {labels[x] for x in thin.members}
        ok = len(consts) == 1 and m * len(thin.members) >= len(s.members)
        yield (PASS if ok else FAIL,
               None if ok else {"case": k, "m": m, "T": T, "size": size})


def _suite_bigness_s(rng: Random, cases: int):
    for k in range(cases):
        m = rng.randint(2, 5)
        c = rng.randint(2, 10)
        l = rng.randint(1, 3)
        fam = FamilyDescriptor(S_KIND, m, c=c, l=l)
        pool = full_subatom(fam).members
        size = rng.randint(1, len(pool))
        s = Subatom(fam, rng.sample(pool, size))
        labels = {x: rng.randrange(m) for x in s.members}
        try:
            thin = bigness_thin(s, labels)
        except Exception as exc:
            yield FAIL, {"case": k, "error": str(exc)}
            continue
        consts = {labels[x] for x in thin.members}
        ok = len(consts) == 1 and \
            m * (cov_norm(thin) + 1) >= cov_norm(s) + 1
        yield (PASS if ok else FAIL,
               None if ok else {"case": k, "m": m, "c": c, "l": l})


def _random_pr(rng: Random, table, dom=("i0", "i1"), supp=None, n=0,
               lo=2):
    """A pr-compound with random non-trivial cells at one level."""
    sc = cm.Scale(table)
    supp = supp or tuple(sorted(rng.sample(dom, rng.randint(1, len(dom)))))
    grid = {}
    for i in dom:
        for j in range(sc.iota_pr(n)):
            fam = sc.pr_family(n, j)
            if i in supp and j % len(supp) == supp.index(i):
                size = rng.randint(lo, fam.T)
                grid[(i, j)] = Subatom(fam, rng.sample(range(fam.T), size))
            else:
                grid[(i, j)] = cm.singleton_subatom(fam)
    return cm.PrCompound(n, tuple(dom), supp, grid)


_WIDE = None


def _wide():
    global _WIDE
    if _WIDE is None:
        _WIDE = cm.wide_table(1, cols=28, tstar=17)
    return _WIDE


def _suite_halving(rng: Random, cases: int):
    table = _wide()
    sc = cm.Scale(table)
    for k in range(cases):
        c = _random_pr(rng, table)
        nv = cm.compound_norm(c, table)
        if nv.argument <= 1:
            yield VACUOUS, None
            continue
        h = cm.halve(c, table)
        eps = Fraction(1, sc.nP_pr(0))
        ok = cm.norm_ge_minus(cm.compound_norm(h, table), nv, eps) \
            and cm.compound_leq(h, c)
        yield (PASS if ok else FAIL, None if ok else {"case": k})


_WIDE3 = None


def _wide3():
    global _WIDE3
    if _WIDE3 is None:
        _WIDE3 = cm.wide_table(3, cols=28, tstar=17)
    return _WIDE3


def _suite_amalgamate(rng: Random, cases: int):
    table = _wide3()
    for k in range(cases):
        if rng.random() < 0.5:
            # nested supports: the smaller compound is a face of the bigger
            big = _random_pr(rng, table, dom=("x0", "y0"),
                             supp=("x0", "y0"), n=2, lo=9)
            grid = {(i, j): s for (i, j), s in big.grid.items() if i == "x0"}
            small = cm.PrCompound(2, ("x0",), ("x0",), grid)
            c0, c1 = (big, small) if rng.random() < 0.5 else (small, big)
        else:
            c0 = _random_pr(rng, table, dom=("x0",), supp=("x0",), n=2, lo=9)
            c1 = _random_pr(rng, table, dom=("y0",), supp=("y0",), n=2, lo=9)
        try:
            r = cm.amalgamate(c0, c1, table)
        except cm.CompoundError as exc:
            yield UNKNOWN, {"case": k, "error": str(exc)}
            continue
        n0, n1 = cm.compound_norm(c0, table), cm.compound_norm(c1, table)
        low = n0 if norm_vs_norm(n0, n1) != GT else n1
        ok = cm.compound_leq(r, c0) and cm.compound_leq(r, c1) and \
            cm.norm_ge_minus(cm.compound_norm(r, table), low, Fraction(1))
        yield (PASS if ok else FAIL, None if ok else {"case": k})


_COND = None


def _cond():
    global _COND
    if _COND is None:
        t = cd.cond_table(1)
        from .params import frame_build
        fr = frame_build(t, s_pr=("i0", "i1"), lc_per=1, al_per=1)
        _COND = (t, fr)
    return _COND


def _random_fragment(rng: Random, t, fr):
    sp = tuple(sorted(rng.sample(("i0", "i1"), rng.randint(1, 2))))
    slc = tuple(a for a in ("i0.lc0", "i1.lc0")
                if a.split(".")[0] in sp and rng.random() < 0.6)
    sal = tuple(a for a in ("i0.al0", "i1.al0")
                if a.split(".")[0] in sp and rng.random() < 0.6)
    return cd.build_fragment(fr, t, 1, supp_pr=sp, supp_lc=slc,
                             supp_al=sal, full_al=rng.random() < 0.7)


def _suite_wedge(rng: Random, cases: int):
    t, fr = _cond()
    from .params import Height
    heights = [Height("lc", 0, 0), Height("al", 0), Height("pr", 1, 0)]
    for k in range(cases):
        p = _random_fragment(rng, t, fr)
        L = rng.choice(heights)
        pl = cd.poss_enum(p, L, t)
        eta = pl.items[rng.randrange(pl.count)]
        try:
            q = cd.wedge(p, eta, t)
        except cd.CondError as exc:
            yield FAIL, {"case": k, "error": str(exc)}
            continue
        rep = cd.validate_fragment(q, t)
        ok = all(e.status == PASS for e in rep.entries) and \
            cd.cond_leq(q, p, t)
        yield (PASS if ok else FAIL,
               None if ok else {"case": k, "upto": repr(L)})


def _suite_poss_count(rng: Random, cases: int):
    t, fr = _cond()
    from .params import Height
    for k in range(cases):
        sp = tuple(sorted(rng.sample(("i0", "i1"), rng.randint(1, 2))))
        slc = tuple(a for a in ("i0.lc0", "i1.lc0")
                    if a.split(".")[0] in sp and rng.random() < 0.6)
        sal = tuple(a for a in ("i0.al0", "i1.al0")
                    if a.split(".")[0] in sp and rng.random() < 0.6)
        p = cd.build_fragment(fr, t, 1, supp_pr=sp, supp_lc=slc,
                              supp_al=sal, full_al=True)
        p = cd.modestify(p, t) if p.supp_al else p
        pl = cd.poss_enum(p, Height("pr", 1, 0), t)
        ok = pl.bound_ok is True
        yield (PASS if ok else FAIL,
               None if ok else {"case": k, "count": pl.count,
                                "bound": pl.bound})


def _suite_tukey_cov(rng: Random, cases: int):
    for k in range(cases):
        N = rng.randint(1, 4)
        b, g, h, S = [], [], [], []
        for _ in range(N):
            gn = rng.randint(1, 3)
            hn = rng.randint(1, 3)
            bn = gn * hn + rng.randint(1, 6)
            b.append(bn)
            g.append(gn)
            h.append(hn)
            S.append(tuple(rng.sample(range(bn), rng.randint(0, hn))))
        sigma = ["".join(rng.choice("01") for _ in range(rng.randint(0, 12)))
                 for _ in range(sum(g))]
        fs = bl.tukey_cov29(S, sigma, b, g, h)["F"]
        # plant genuine prefix hits in some blocks' index windows
        lo, pos = 0, 0
        for n in range(N):
            width = max(1, (b[n] - 1).bit_length())
            pos += h[n] * width
            if g[n] and rng.random() < 0.6:
                sigma[lo + rng.randrange(g[n])] = \
                    fs[:rng.randint(pos, len(fs))]
            lo += g[n]
        out = bl.tukey_cov29(S, sigma, b, g, h)
        bad = [e for e in out["report"].entries if e.status == FAIL]
        if bad:
            yield FAIL, {"case": k, "detail": bad[0].detail}
        elif all(e.status == VACUOUS for e in out["report"].entries):
            yield VACUOUS, None
        else:
            yield PASS, None


def _suite_tukey_lc(rng: Random, cases: int):
    for k in range(cases):
        N = rng.randint(1, 6)
        b = [rng.randint(1, 6) for _ in range(N)]
        h = [rng.randint(1, b[l]) for l in range(N)]
        x = [rng.randrange(b[l]) for l in range(N)]
        phi = [frozenset(rng.sample(range(b[l]), rng.randint(0, h[l])))
               for l in range(N)]
        cuts = sorted(rng.sample(range(1, N), rng.randint(0, N - 1))) \
            if N > 1 else []
        part = [tuple(range(a, z))
                for a, z in zip([0] + cuts, cuts + [N])]
        inst = bl.ToyRelationInstance(N, b, h, x, phi, partition=part)
        x_star = [tuple(x[l] for l in blkk) for blkk in part]
        out = bl.tukey_lc214(inst, x_star=x_star)
        # the collapse must preserve the block relation at the point x
        agree = bl.rel_holds("in_Ibar", inst) == all(out["hits"])
        ok = out["iff"] and out["width_ok"] and agree
        yield (PASS if ok else FAIL,
               None if ok else {"case": k, "b": b, "h": h, "x": x,
                                "phi": [sorted(s) for s in phi],
                                "partition": [list(p) for p in part]})


def _suite_block_fp(rng: Random, cases: int):
    done = 0
    for depth in (1, 2, 3):
        if done >= cases:
            return
        table = generate_table(depth, FP_ONLY)
        rows = table.level(0).lc.tcount.int_value or 1
        for y in product(range(rows), repeat=depth):
            for kind in ("lc", "al"):
                if done >= cases:
                    return
                blk = bl.derive_block(table, y, kind)
                rep = bl.check_block(blk)
                bad = [e for e in rep.entries
                       if e.status in (FAIL, UNKNOWN)]
                done += 1
                yield (PASS if not bad else FAIL,
                       None if not bad else
                       {"depth": depth, "y": list(y), "kind": kind,
                        "clause": bad[0].clause, "status": bad[0].status})


def _suite_json_roundtrip(rng: Random, cases: int):
    t, fr = _cond()
    frag = cd.build_fragment(fr, t, 1, supp_pr=("i0",), supp_lc=("i0.lc0",),
                             supp_al=("i0.al0",))
    blk = bl.make_block([2, 4, 8], [3, 9, 27], [4, 16, 64], [100, 1000, 10000],
                        [10 ** 4, 10 ** 8, 10 ** 12])
    for k in range(cases):
        pick = k % 6
        try:
            if pick == 0:
                x = Q.of(rng.randint(0, 10 ** rng.randint(1, 30)))
                ok = Q.from_json(json.loads(json.dumps(x.to_json()))).int_value \
                    == x.int_value
            elif pick == 1:
                x = make_norm(Fraction(rng.randint(0, 50), rng.randint(1, 7)))
                from .hyper import NormValue
                y = NormValue.from_json(json.loads(json.dumps(x.to_json())))
                ok = norm_vs_norm(x, y) == EQ
            elif pick == 2:
                fam = FamilyDescriptor(P_KIND, rng.randint(2, 9),
                                       T=rng.randint(1, 100))
                x = Subatom(fam, rng.sample(range(fam.T),
                                            rng.randint(1, fam.T)))
                ok = Subatom.from_json(json.loads(json.dumps(x.to_json()))) == x
            elif pick == 3:
                ok = bl.Block.from_json(
                    json.loads(json.dumps(blk.to_json()))) == blk
            elif pick == 4:
                c = _random_pr(rng, _wide())
                ok = cm.PrCompound.from_json(
                    json.loads(json.dumps(c.to_json()))) == c
            else:
                ok = cd.ConditionFragment.from_json(
                    json.loads(json.dumps(frag.to_json()))) == frag
        except Exception as exc:
            yield FAIL, {"case": k, "error": str(exc)}
            continue
        yield (PASS if ok else FAIL, None if ok else {"case": k, "pick": pick})


def _suite_sep_support(rng: Random, cases: int):
    t = cd.sep_table(3)
    from .params import frame_build
    fr = frame_build(t, s_pr=("i0", "i1"), lc_per=1, al_per=1)
    for k in range(cases):
        supp = tuple(sorted(rng.sample(("i0", "i1"), rng.randint(1, 2))))
        p = cd.build_fragment(fr, t, 3, trl=2, supp_pr=supp, pr_split=True)
        try:
            q = cd.separate_support(p, t)
        except cd.InsufficientTail as exc:
            yield VACUOUS, {"case": k, "detail": str(exc)}
            continue
        ok = cd.is_separated_fragment(q, t) and cd.cond_leq(q, p, t)
        yield (PASS if ok else FAIL, None if ok else {"case": k})


SUITES = {
    "disjointify": (_suite_disjointify, 1000),
    "stacked-norm-oracle": (_suite_stacked, 1000),
    "bigness-p": (_suite_bigness_p, 500),
    "bigness-s": (_suite_bigness_s, 200),
    "halving": (_suite_halving, 500),
    "amalgamate": (_suite_amalgamate, 500),
    "wedge-order": (_suite_wedge, 200),
    "poss-count": (_suite_poss_count, 100),
    "tukey-cov": (_suite_tukey_cov, 500),
    "tukey-lc": (_suite_tukey_lc, 500),
    "block-fp": (_suite_block_fp, 28),
    "json-roundtrip": (_suite_json_roundtrip, 1000),
    "sep-support": (_suite_sep_support, 20),
}


def suite_run(name: str, seed: int = 0, budget_cases: int | None = None,
              budget_seconds: float | None = None) -> SuiteReport:
    if name not in SUITES:
        raise UnknownSuite(f"unknown suite {name!r}; see `suite list`")
    fn, default_cases = SUITES[name]
    cases = default_cases if budget_cases is None else \
        min(budget_cases, default_cases)
    rng = Random(seed)
    t0 = time.monotonic()
    passed = failed = unknown = vacuous = executed = 0
    counter = None
    for status, payload in fn(rng, cases):
        executed += 1
        if status == PASS:
            passed += 1
        elif status == FAIL:
            failed += 1
            if counter is None:
                counter = payload
        elif status == VACUOUS:
            vacuous += 1
        else:
            unknown += 1
        if budget_seconds is not None and \
                time.monotonic() - t0 > budget_seconds:
            break
    return SuiteReport(name, executed, passed, failed, unknown, vacuous,
                       counter, time.monotonic() - t0, seed)


def suite_run_all(seed: int = 0, budget_cases: int | None = None,
                  budget_seconds: float | None = None):
    return [suite_run(name, seed, budget_cases, budget_seconds)
            for name in sorted(SUITES)]
