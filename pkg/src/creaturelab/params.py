"""Height frames and growth-parameter tables.

The construction lives on a ladder of heights: for each level n there are
pr-sublevels (n,0) < ... < (n, iota_pr-1), then lc-sublevels (Llc,0) < ...
< (Llc, iota*-1), then a single al-height, then level n+1.  A parameter
table assigns to these heights the quantities n^P, n^B, T*, n^S, and the
per-(t, l) schedule values d, h, b, nS together with the per-t values g, a,
b*, h*.  The quantities must satisfy the growth clauses G1-G14 and the
feasibility clauses F1-F10 (documented in the README); the generator picks
least/slack-adjusted values in the canonical order, and the verifier grades
every clause at every applicable location.

Three regimes:
  VERIFY  - certified tower arithmetic; sublevel counts are astronomically
            large, schedules are represented by probe ranks plus a
            closed-form recurrence descriptor; verification decides every
            clause (PASS / SAMPLED / closed-form), never UNKNOWN.
  TOY     - every stored value is an exact natural <= a cap; clauses that
            the cap makes unsatisfiable are waived and recorded in the
            manifest, which is *computed* by running the verifier.
  FP_ONLY - satisfies exactly the feasibility clauses F1-F10 with exact
            layered-integer values; feeds the block module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .hyper import (
    Cert,
    DEFAULT_DIGIT_BUDGET,
    DEFAULT_DEPTH_CAP,
    EQ,
    GT,
    LT,
    UNKNOWN,
    t_cmp,
)
from .layered import (
    LDiff,
    LInt,
    L0,
    L1,
    ladd,
    ladd_int,
    lcmp,
    ldiff_sum,
    lint,
    llog2_ceil,
    llog2_floor,
    lmax,
    lmul,
    lpow,
    lpow2,
    lprod,
    lsum,
    tower_bounds,
)

SCHEMA_VERSION = 1

VERIFY = "VERIFY"
TOY = "TOY"
FP_ONLY = "FP_ONLY"

PASS = "PASS"
FAIL = "FAIL"
WAIVED = "WAIVED"
SAMPLED = "SAMPLED"
# UNKNOWN imported from hyper

GROWTH_CLAUSES = tuple(f"G{i}" for i in range(1, 15))
FEASIBILITY_CLAUSES = tuple(f"F{i}" for i in range(1, 11))
ALL_CLAUSES = GROWTH_CLAUSES + FEASIBILITY_CLAUSES


class ParamError(Exception):
    pass


class DepthExceeded(ParamError):
    pass


class InfeasibleKnobs(ParamError):
    pass


class RankOutOfRange(ParamError):
    pass


# ---------------------------------------------------------------------------
# Heights and order
# ---------------------------------------------------------------------------

_BAND = {"pr": 0, "lc": 1, "al": 2}


@dataclass(frozen=True)
class Height:
    kind: str  # "pr" | "lc" | "al"
    n: int
    sub: int = 0

    def __post_init__(self):
        if self.kind not in _BAND:
            raise ParamError(f"bad height kind {self.kind!r}")
        if self.kind == "al" and self.sub != 0:
            raise ParamError("al height has no sublevels")

    @property
    def key(self):
        return (self.n, _BAND[self.kind], self.sub)

    def __repr__(self):
        if self.kind == "pr":
            return f"({self.n},{self.sub})"
        if self.kind == "lc":
            return f"(L{self.n}^lc,{self.sub})"
        return f"L{self.n}^al"


def height_order(a: Height, b: Height) -> str:
    ka, kb = a.key, b.key
    return LT if ka < kb else GT if ka > kb else EQ


def n_star(h: Height) -> int:
    """The level a height belongs to."""
    return h.n


# ---------------------------------------------------------------------------
# Q: a chosen quantity = certificate pair + optional exact layered value +
# the clauses it satisfies by construction.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Q:
    cert: Cert
    defn: tuple = ()
    exact: LInt | None = None

    @staticmethod
    def of(v: int, defn=()) -> "Q":
        return Q(Cert.of(v), tuple(defn), lint(v))

    @staticmethod
    def from_exact(v: LInt, defn=()) -> "Q":
        lo, hi = tower_bounds(v)
        return Q(Cert(lo, hi), tuple(defn), v)

    def _bin(self, other, cert_op, exact_op):
        e = None
        if self.exact is not None and other.exact is not None:
            e = exact_op(self.exact, other.exact)
        return Q(cert_op(self.cert, other.cert), (), e)

    def add(self, o: "Q") -> "Q":
        return self._bin(o, lambda a, b: a.add(b), ladd)

    def mul(self, o: "Q") -> "Q":
        return self._bin(o, lambda a, b: a.mul(b), lmul)

    def pow(self, o: "Q") -> "Q":
        e = None
        if self.exact is not None and o.exact is not None:
            e = _lpow_general(self.exact, o.exact)
        return Q(self.cert.pow(o.cert), (), e)

    def pow2(self) -> "Q":
        e = lpow2(self.exact) if self.exact is not None else None
        return Q(self.cert.pow2(), (), e)

    def succ(self) -> "Q":
        e = ladd(self.exact, L1) if self.exact is not None else None
        return Q(self.cert.succ(), (), e)

    def log2_ceil(self) -> "Q":
        e = None
        if self.exact is not None:
            try:
                e = llog2_ceil(self.exact)
            except Exception:
                e = None
        return Q(self.cert.log2_ceil(), (), e)

    @property
    def int_value(self) -> int | None:
        if self.exact is not None and self.exact.is_flat:
            return self.exact.flat_value()
        return self.cert.exact_value

    def to_json(self):
        out = {"cert": self.cert.to_json()}
        if self.defn:
            out["defn"] = list(self.defn)
        if self.exact is not None:
            out["exact"] = self.exact.to_json()
        return out

    @staticmethod
    def from_json(obj) -> "Q":
        return Q(
            Cert.from_json(obj["cert"]),
            tuple(obj.get("defn", ())),
            LInt.from_json(obj["exact"]) if "exact" in obj else None,
        )


def _lpow_general(base: LInt, exp: LInt) -> LInt | None:
    """base**exp exactly when feasible: small exponent, or base a pure power."""
    pe = base.pure_exponent()
    if pe is not None:
        return lpow2(lmul(pe, exp))
    if exp.is_flat and exp.rest <= 1 << 20:
        if base.is_flat and base.rest.bit_length() * exp.rest > (1 << 20):
            return None  # exact power would blow the digit budget
        return lpow(base, exp.rest)
    return None


def qsum(items, defn=()) -> Q:
    total = Q.of(0)
    for it in items:
        total = total.add(it)
    return Q(total.cert, tuple(defn), total.exact)


def qprod(items, defn=()) -> Q:
    total = Q.of(1)
    for it in items:
        total = total.mul(it)
    return Q(total.cert, tuple(defn), total.exact)


# -- certified comparisons (tri-state) --------------------------------------


def cert_ge(a: Cert, b: Cert, budget=DEFAULT_DIGIT_BUDGET):
    if b.hi is not None and t_cmp(a.lo, b.hi, budget) in (GT, EQ):
        return True
    if a.hi is not None and t_cmp(a.hi, b.lo, budget) == LT:
        return False
    if a.sharp and b.sharp:
        c = t_cmp(a.lo, b.lo, budget)
        if c != UNKNOWN:
            return c != LT
    return None


def cert_gt(a: Cert, b: Cert, budget=DEFAULT_DIGIT_BUDGET):
    if b.hi is not None and t_cmp(a.lo, b.hi, budget) == GT:
        return True
    if a.hi is not None and t_cmp(a.hi, b.lo, budget) in (LT, EQ):
        return False
    if a.sharp and b.sharp:
        c = t_cmp(a.lo, b.lo, budget)
        if c != UNKNOWN:
            return c == GT
    return None


def q_ge(a: Q, b: Q):
    if a.exact is not None and b.exact is not None:
        return lcmp(a.exact, b.exact) != LT
    return cert_ge(a.cert, b.cert)


def q_gt(a: Q, b: Q):
    if a.exact is not None and b.exact is not None:
        return lcmp(a.exact, b.exact) == GT
    return cert_gt(a.cert, b.cert)


# ---------------------------------------------------------------------------
# Table structure
# ---------------------------------------------------------------------------

PROBE_LABELS = ("min", "min+1", "max-1", "max")


@dataclass(frozen=True)
class Entry:
    """Per-(t, l) schedule values; keys among d, h, b, nS (lc) or
    d, h, g, b, a, nS (al)."""

    q: dict

    def to_json(self):
        return {k: v.to_json() for k, v in self.q.items()}

    @staticmethod
    def from_json(obj) -> "Entry":
        return Entry({k: Q.from_json(v) for k, v in obj.items()})


@dataclass(frozen=True)
class TStat:
    """Per-t level-height values for an lc schedule: g, a, b*, h*."""

    g: Q
    a: Q
    bstar: Q
    hstar: Q  # certificate/flat view of h*
    hstar_diff: LDiff | None = None  # exact difference form when available

    def to_json(self):
        out = {
            "g": self.g.to_json(),
            "a": self.a.to_json(),
            "bstar": self.bstar.to_json(),
            "hstar": self.hstar.to_json(),
        }
        if self.hstar_diff is not None:
            out["hstar_diff"] = self.hstar_diff.to_json()
        return out

    @staticmethod
    def from_json(obj) -> "TStat":
        return TStat(
            Q.from_json(obj["g"]),
            Q.from_json(obj["a"]),
            Q.from_json(obj["bstar"]),
            Q.from_json(obj["hstar"]),
            LDiff.from_json(obj["hstar_diff"]) if "hstar_diff" in obj else None,
        )


@dataclass(frozen=True)
class Schedule:
    part: str  # "lc" | "al"
    kind: str  # "explicit" | "probed"
    tcount: Q
    lcount: Q
    # explicit: {(t, l): Entry}; probed: {label: Entry}
    entries: dict
    # explicit: {t: TStat}; probed: {label in (min, max): TStat}   (lc only)
    tstats: dict = field(default_factory=dict)
    ratio_base: int = 2
    # descriptor: quantity -> clauses its recurrence satisfies by construction
    rule: dict = field(default_factory=dict)

    def probe(self, label: str) -> Entry:
        return self.entries[label]

    def explicit_keys(self):
        return sorted(self.entries.keys())

    def to_json(self):
        ent = {
            (k if isinstance(k, str) else f"{k[0]},{k[1]}"): e.to_json()
            for k, e in self.entries.items()
        }
        ts = {str(k): v.to_json() for k, v in self.tstats.items()}
        return {
            "part": self.part,
            "kind": self.kind,
            "tcount": self.tcount.to_json(),
            "lcount": self.lcount.to_json(),
            "entries": ent,
            "tstats": ts,
            "ratio_base": self.ratio_base,
            "rule": self.rule,
        }

    @staticmethod
    def from_json(obj) -> "Schedule":
        entries = {}
        for k, v in obj["entries"].items():
            if obj["kind"] == "explicit":
                t, l = k.split(",")
                entries[(int(t), int(l))] = Entry.from_json(v)
            else:
                entries[k] = Entry.from_json(v)
        tstats = {}
        for k, v in obj["tstats"].items():
            key = int(k) if obj["kind"] == "explicit" else k
            tstats[key] = TStat.from_json(v)
        return Schedule(
            obj["part"],
            obj["kind"],
            Q.from_json(obj["tcount"]),
            Q.from_json(obj["lcount"]),
            entries,
            tstats,
            obj.get("ratio_base", 2),
            obj.get("rule", {}),
        )


@dataclass(frozen=True)
class PrSub:
    nP: Q
    nB: Q
    Tstar: Q

    def to_json(self):
        return {"nP": self.nP.to_json(), "nB": self.nB.to_json(), "Tstar": self.Tstar.to_json()}

    @staticmethod
    def from_json(obj) -> "PrSub":
        return PrSub(Q.from_json(obj["nP"]), Q.from_json(obj["nB"]), Q.from_json(obj["Tstar"]))


@dataclass(frozen=True)
class Level:
    n: int
    iota_pr: Q
    pr: tuple  # materialised PrSub prefix
    pr_complete: bool
    Tsize: Q
    nS_top: Q
    nP_lc: Q
    iota_star: Q
    nB_lc: Q
    lc: Schedule
    nS_Llc: Q
    nP_al: Q
    nB_al: Q
    al: Schedule
    nS_Lal: Q
    nP_next: Q

    def to_json(self):
        return {
            "n": self.n,
            "iota_pr": self.iota_pr.to_json(),
            "pr": [p.to_json() for p in self.pr],
            "pr_complete": self.pr_complete,
            "Tsize": self.Tsize.to_json(),
            "nS_top": self.nS_top.to_json(),
            "nP_lc": self.nP_lc.to_json(),
            "iota_star": self.iota_star.to_json(),
            "nB_lc": self.nB_lc.to_json(),
            "lc": self.lc.to_json(),
            "nS_Llc": self.nS_Llc.to_json(),
            "nP_al": self.nP_al.to_json(),
            "nB_al": self.nB_al.to_json(),
            "al": self.al.to_json(),
            "nS_Lal": self.nS_Lal.to_json(),
            "nP_next": self.nP_next.to_json(),
        }

    @staticmethod
    def from_json(obj) -> "Level":
        return Level(
            obj["n"],
            Q.from_json(obj["iota_pr"]),
            tuple(PrSub.from_json(p) for p in obj["pr"]),
            obj["pr_complete"],
            Q.from_json(obj["Tsize"]),
            Q.from_json(obj["nS_top"]),
            Q.from_json(obj["nP_lc"]),
            Q.from_json(obj["iota_star"]),
            Q.from_json(obj["nB_lc"]),
            Schedule.from_json(obj["lc"]),
            Q.from_json(obj["nS_Llc"]),
            Q.from_json(obj["nP_al"]),
            Q.from_json(obj["nB_al"]),
            Schedule.from_json(obj["al"]),
            Q.from_json(obj["nS_Lal"]),
            Q.from_json(obj["nP_next"]),
        )


@dataclass(frozen=True)
class ParameterTable:
    regime: str
    depth: int
    levels: tuple
    manifest: dict  # {"waived": [...], "relaxed": [...]}
    toy_cap: int
    slack: int
    digit_budget: int
    depth_cap: int
    knobs: dict = field(default_factory=dict)
    schema: int = SCHEMA_VERSION

    def level(self, n: int) -> Level:
        if not 0 <= n < self.depth:
            raise DepthExceeded(f"level {n} not materialised (depth {self.depth})")
        return self.levels[n]

    def to_json(self):
        return {
            "schema": self.schema,
            "regime": self.regime,
            "depth": self.depth,
            "manifest": self.manifest,
            "toy_cap": self.toy_cap,
            "slack": self.slack,
            "digit_budget": self.digit_budget,
            "depth_cap": self.depth_cap,
            "knobs": self.knobs,
            "levels": [l.to_json() for l in self.levels],
        }

    @staticmethod
    def from_json(obj) -> "ParameterTable":
        if obj.get("schema") != SCHEMA_VERSION:
            raise ParamError(f"unsupported schema {obj.get('schema')}")
        return ParameterTable(
            obj["regime"],
            obj["depth"],
            tuple(Level.from_json(l) for l in obj["levels"]),
            obj["manifest"],
            obj["toy_cap"],
            obj["slack"],
            obj["digit_budget"],
            obj["depth_cap"],
            obj.get("knobs", {}),
        )


# ---------------------------------------------------------------------------
# Shared clause-bound expressions (used by generator and verifier alike)
# ---------------------------------------------------------------------------


def bound_g1(n: int, nP0: Q) -> Q:
    # 3^(n+1) * (2^((n+1) * nP) + 1)
    return Q.of(3).pow(Q.of(n + 1)).mul(Q.of(n + 1).mul(nP0).pow2().succ())


def bound_g2(nP: Q) -> Q:
    return nP.pow(nP)


def bound_g3(n: int, nB: Q, nP0: Q) -> Q:
    return nB.pow(nB.mul(Q.of(n + 1).mul(nP0).pow2()))


def bound_g4(nP: Q, Tstar: Q) -> Q:
    return nP.mul(Tstar)


def bound_g6(n: int, Tsize: Q, nP_lc: Q) -> Q:
    return Q.of(3).pow(Q.of(n).mul(Tsize).succ()).mul(
        Q.of(n + 1).mul(nP_lc).pow2().succ()
    )


def bound_g7(n: int, d: Q, nP: Q) -> Q:
    return d.pow(d.mul(Q.of(n + 1).mul(nP).pow2()))


def bound_g8(m: Q, h: Q) -> Q:
    # |[m]^{<=h}| <= (m+1)^h; TOY additionally checks the exact count.
    return m.succ().pow(h)


def bound_f2(n: int, acc_d: Q, d: Q) -> Q:
    return acc_d.add(d).pow(Q.of(max(n, 1)))


def bound_f4(iota_star: Q, g: Q, h: Q) -> Q:
    return Q.of(2).mul(iota_star).mul(g).mul(h)


def count_subsets_le(m: int, h: int) -> int:
    return sum(math.comb(m, k) for k in range(min(h, m) + 1))


# ---------------------------------------------------------------------------
# Choice rule
# ---------------------------------------------------------------------------


def _choose(bounds, slack=1, floor=3) -> Q:
    """The least value dominating every bound (strict bounds add one),
    rounded up to a representable certificate, times the slack."""
    defn = []
    cands = []
    for clause, bq, strict in bounds:
        if bq is None:
            continue
        defn.append(clause)
        cands.append(bq.succ() if strict else bq)
    if floor is not None:
        cands.append(Q.of(floor))
    cur = cands[0]
    for c in cands[1:]:
        if q_ge(cur, c) is True:
            continue
        if q_ge(c, cur) is True:
            cur = c
            continue
        # combine certificates when order is undecided: lo = max of lo's
        lo = cur.cert.lo if t_cmp(cur.cert.lo, c.cert.lo) != LT else c.cert.lo
        cur = Q(Cert(lo, None))
    # round to a concrete representable value
    if cur.exact is not None:
        return Q(cur.cert if cur.cert.sharp else Cert(*tower_bounds(cur.exact)),
                 tuple(defn), cur.exact) if slack == 1 else Q.from_exact(
                     lmul(cur.exact, lint(slack)), tuple(defn))
    if cur.cert.hi is not None:
        c = cur.cert.round_up()
        if slack > 1:
            c = c.mul(Cert.of(slack)).round_up()
        return Q(c, tuple(defn))
    return Q(cur.cert, tuple(defn))


# ---------------------------------------------------------------------------
# Running accumulators shared by generator and verifier
# ---------------------------------------------------------------------------


def _entry_q(sched: Schedule, key, qty: str) -> Q:
    return sched.entries[key].q[qty]


def _lc_tstat(sched: Schedule, which: str) -> TStat:
    if sched.kind == "probed":
        return sched.tstats[which]
    ts = sorted(sched.tstats)
    return sched.tstats[ts[0] if which == "min" else ts[-1]]


def _al_key(sched: Schedule, which: str):
    if sched.kind == "probed":
        return which
    keys = sched.explicit_keys()
    return keys[0] if which == "min" else keys[-1]


def _lc_key(sched: Schedule, which: str):
    return _al_key(sched, which)


def omega_accumulators(table: ParameterTable, upto: int):
    """(acc_d, acc_h, acc_f9) summed over the lower-height members
    below level `upto`: worst-tuple d at each member, worst-tuple h,
    and the log-weighted h* terms of the norm-budget sum."""
    acc_d, acc_h, acc_f9 = Q.of(0), Q.of(0), Q.of(0)
    for j in range(upto):
        lvl = table.levels[j]
        d_lc = _entry_q(lvl.lc, _lc_key(lvl.lc, "max"), "d")
        h_lc = _entry_q(lvl.lc, _lc_key(lvl.lc, "max"), "h")
        d_al = _entry_q(lvl.al, _al_key(lvl.al, "max"), "d")
        h_al = _entry_q(lvl.al, _al_key(lvl.al, "max"), "h")
        b_al = _entry_q(lvl.al, _al_key(lvl.al, "max"), "b")
        ts = _lc_tstat(lvl.lc, "max")
        acc_d = acc_d.add(d_lc).add(d_al)
        acc_h = acc_h.add(h_lc).add(h_al)
        acc_f9 = acc_f9.add(ts.bstar.mul(ts.bstar.log2_ceil()))
        acc_f9 = acc_f9.add(h_al.mul(b_al.log2_ceil()))
    return acc_d, acc_h, acc_f9


def ht_members(table: ParameterTable):
    """Yield (height, nS-of-that-height) for Ht in order."""
    for lvl in table.levels:
        yield Height("pr", lvl.n, 0), lvl.nS_top
        yield Height("lc", lvl.n, 0), lvl.nS_Llc
        yield Height("al", lvl.n), lvl.nS_Lal


def ht_product_before(table: ParameterTable, h: Height) -> Q:
    prod = Q.of(1)
    for member, ns in ht_members(table):
        if height_order(member, h) != LT:
            break
        prod = prod.mul(ns)
    return prod


def m_s(table: ParameterTable, n: int, t: int, l: int) -> Q:
    """Possibility budget m^S at (t, l): the product of nS at columns up
    to l in row t and (for t past the minimum) the remaining columns of
    the previous row.  Explicit schedules only."""
    sched = table.level(n).lc
    if sched.kind != "explicit":
        raise ParamError("m^S requires an explicit schedule")
    lcount = sched.lcount.int_value
    factors = [sched.entries[(t, j)].q["nS"] for j in range(l + 1)]
    if t > 0:
        factors += [sched.entries[(t - 1, j)].q["nS"] for j in range(l + 1, lcount)]
    return qprod(factors)


# ---------------------------------------------------------------------------
# VERIFY generator
# ---------------------------------------------------------------------------

_LC_RULE = {"d": ["G9", "G10", "F10"], "h": ["G7", "F1"], "b": ["F4", "F5"],
            "nS": ["G8"], "g": ["F2"], "a": ["F9"]}
_AL_RULE = {"d": ["G12", "F10"], "h": ["G7", "F1"], "g": ["F3"],
            "b": ["F8", "F5"], "a": ["F9"], "nS": ["G8"]}


def _deep_entry(template: Entry, rule: dict) -> Entry:
    """A non-materialised probe: lower certificate only, tagged with the
    clauses whose bounds define the quantity at deep ranks."""
    out = {}
    for k, v in template.q.items():
        out[k] = Q(Cert(v.cert.lo, None), tuple(rule.get(k, ())))
    return Entry(out)


def _gen_verify(depth: int, knobs: dict) -> ParameterTable:
    slack = knobs.get("slack", 1)
    budget = knobs.get("digit_budget", DEFAULT_DIGIT_BUDGET)
    nP = Q.of(knobs.get("n_p0", 3))
    levels = []
    carry = None  # F10: 2^(a at the previous al height) bounds the next d
    table = ParameterTable(VERIFY, 0, (), {"waived": [], "relaxed": []},
                           0, slack, budget, knobs.get("depth_cap", 64), knobs)
    for n in range(depth):
        acc_d, acc_h, acc_f9 = omega_accumulators(table, n)
        nP0 = nP
        iota_pr = _choose([("G1", bound_g1(n, nP0), False)], slack)
        ipr = iota_pr.int_value
        mat = ipr if (ipr is not None and ipr <= 64) else 2
        pr = []
        for _u in range(mat):
            nB = _choose([("G2", bound_g2(nP), True)], slack)
            Tst = _choose([("G3", bound_g3(n, nB, nP0), False)], slack)
            pr.append(PrSub(nP, nB, Tst))
            nP = _choose([("G4", bound_g4(nP, Tst), True)], slack)
        pr_complete = mat == ipr
        tprod = qprod([p.Tstar for p in pr])
        Tsize = Q(Cert(tprod.cert.lo, tprod.cert.hi if pr_complete else None),
                  ("G3",), tprod.exact if pr_complete else None)
        nS_top = _choose([("G5", Tsize, False)], slack)
        ht_prod = ht_product_before(table, Height("lc", n, 0)).mul(nS_top)
        nP_lc = _choose([("G14", ht_prod, True), ("G4", nP, False)], slack)
        iota_star = _choose([("G6", bound_g6(n, Tsize, nP_lc), False)], slack)
        nB_lc = _choose([("G2", bound_g2(nP_lc), True)], slack)

        # lc schedule: two materialised probes at the minimum tuple, then
        # lower-certificate probes at the top of the lexicographic order.
        d_bounds = [("G10", nB_lc, True)]
        if carry is not None:
            d_bounds.append(("F10", carry, True))
        d0 = _choose(d_bounds, slack)
        g0 = _choose([("F2", bound_f2(n, acc_d, d0), False)], slack)
        h0 = _choose([("G7", bound_g7(n, d0, nP_lc), False), ("F1", d0, True)], slack)
        b0 = _choose([("F4", bound_f4(iota_star, g0, h0), False), ("F5", h0, True)], slack)
        nS0 = _choose([("G8", bound_g8(b0, h0), False)], slack)
        e_min = Entry({"d": d0, "h": h0, "b": b0, "nS": nS0})
        d1 = _choose([("G9", b0.pow(nS0), False)], slack)
        h1 = _choose([("G7", bound_g7(n, d1, nP_lc), False), ("F1", d1, True)], slack)
        b1 = _choose([("F4", bound_f4(iota_star, g0, h1), False), ("F5", h1, True)], slack)
        nS1 = _choose([("G8", bound_g8(b1, h1), False)], slack)
        e_min1 = Entry({"d": d1, "h": h1, "b": b1, "nS": nS1})
        e_deep = _deep_entry(e_min1, _LC_RULE)
        # per-t stats: b*, h* have astronomically many factors; lower
        # certificates come from the materialised columns.
        bstar_lo = Q(Cert(b0.cert.mul(b1.cert).lo, None), ("F6",))
        hstar_lo = Q(Cert(h0.cert.mul(b1.cert).lo, None), ("F6",))
        a_min = Q(Cert(acc_f9.add(hstar_lo.mul(bstar_lo.log2_ceil())).add(g0)
                       .cert.pow2().lo, None), ("F9",))
        ts_min = TStat(g0, a_min, bstar_lo, hstar_lo)
        g_max = Q(Cert(g0.cert.lo, None), ("F2",))
        a_max = Q(Cert(a_min.cert.lo, None), ("F9",))
        ts_max = TStat(g_max, a_max, bstar_lo, hstar_lo)
        lc = Schedule("lc", "probed", Tsize, iota_star,
                      {"min": e_min, "min+1": e_min1,
                       "max-1": e_deep, "max": e_deep},
                      {"min": ts_min, "max": ts_max},
                      ratio_base=2, rule=_LC_RULE)

        nS_Llc = _choose(
            [("G11", Q(Cert(nS0.cert.mul(nS1.cert).lo, None), ("G11",)), False)],
            slack)
        table = replace(table, depth=n + 1,
                        levels=table.levels + (_partial_level(n, iota_pr, pr,
                                                             pr_complete, Tsize,
                                                             nS_top, nP_lc,
                                                             iota_star, nB_lc, lc,
                                                             nS_Llc),))
        ht_prod = ht_product_before(table, Height("al", n))
        nP_al = _choose([("G14", ht_prod, True)], slack)
        nB_al = _choose([("G2", bound_g2(nP_al), True)], slack)

        # al schedule
        da_bounds = [("G12", nB_al, True), ("F10", ts_max.a.pow2(), True)]
        da = _choose(da_bounds, slack)
        ha = _choose([("G7", bound_g7(n, da, nP_al), False), ("F1", da, True)], slack)
        if n == 0:
            f3 = acc_h.add(h0)  # bottom level: heights strictly below only
        else:
            f3 = acc_h.add(h0).add(ha).pow(Q.of(max(n, 1)))
        ga = _choose([("F3", f3, False)], slack)
        ba = _choose([("F8", ga.mul(ha), True), ("F5", ha, True)], slack)
        aa = Q(Cert(acc_f9.add(hstar_lo.mul(bstar_lo.log2_ceil()))
                    .add(ha.mul(ba.log2_ceil())).add(ga).cert.pow2().lo, None),
               ("F9",))
        nSa = Q(Cert(aa.cert.lo, None), ("G8",))
        ea_min = Entry({"d": da, "h": ha, "g": ga, "b": ba, "a": aa, "nS": nSa})
        ea_deep = _deep_entry(ea_min, _AL_RULE)
        al = Schedule("al", "probed", Tsize, Q.of(1),
                      {"min": ea_min, "min+1": ea_deep,
                       "max-1": ea_deep, "max": ea_deep},
                      {}, ratio_base=2, rule=_AL_RULE)
        nS_Lal = _choose([("G13", Q(Cert(nSa.cert.lo, None), ("G13",)), False)], slack)
        lvl = replace(table.levels[n], nP_al=nP_al, nB_al=nB_al, al=al,
                      nS_Lal=nS_Lal)
        table = replace(table, levels=table.levels[:n] + (lvl,))
        ht_prod = ht_product_before(table, Height("pr", n + 1, 0))
        nP_next = _choose([("G14", ht_prod, True)], slack)
        lvl = replace(lvl, nP_next=nP_next)
        table = replace(table, levels=table.levels[:n] + (lvl,))
        carry = Q(Cert(ea_min.q["a"].cert.pow2().lo, None), ("F10",))
        nP = nP_next
    return table


def _partial_level(n, iota_pr, pr, pr_complete, Tsize, nS_top, nP_lc,
                   iota_star, nB_lc, lc, nS_Llc) -> Level:
    placeholder = Q.of(0)
    empty = Schedule("al", "probed", Tsize, Q.of(1),
                     {l: Entry({}) for l in PROBE_LABELS}, {})
    return Level(n, iota_pr, tuple(pr), pr_complete, Tsize, nS_top, nP_lc,
                 iota_star, nB_lc, lc, nS_Llc, placeholder, placeholder,
                 empty, placeholder, placeholder)


# ---------------------------------------------------------------------------
# TOY generator
# ---------------------------------------------------------------------------

TOY_DEFAULTS = {
    "toy_cap": 10 ** 6,
    "n_p0": 3,
    "iota_pr": 1,
    "iota_star": 2,
    "tstar": 3,
    "d_seed": 5,
    "nb_fallback": 4,
    "ns_pad": 2,
}


def _toy_fit(bound: LInt, cap: int, fallback: int) -> tuple[int, bool]:
    """(value, capped?) — the exact bound when it fits, else the fallback."""
    if bound.is_flat and bound.flat_value() <= cap:
        return bound.flat_value(), False
    return fallback, True


def _gen_toy(depth: int, knobs: dict) -> ParameterTable:
    k = dict(TOY_DEFAULTS)
    k.update(knobs or {})
    cap = int(k["toy_cap"])
    ipr, istar, tsize = int(k["iota_pr"]), int(k["iota_star"]), int(k["tstar"])
    dseed, nbf, pad = int(k["d_seed"]), int(k["nb_fallback"]), int(k["ns_pad"])
    if cap < 10 ** 3:
        raise InfeasibleKnobs("TOY cap too small for any conforming chain")
    if istar < 1 or tsize < 1 or ipr < 1:
        raise InfeasibleKnobs("sublevel counts must be positive")
    if dseed <= nbf:
        raise InfeasibleKnobs("d seed must exceed the n^B fallback")

    levels = []
    table = ParameterTable(TOY, 0, (), {"waived": [], "relaxed": []},
                           cap, 1, DEFAULT_DIGIT_BUDGET, DEFAULT_DEPTH_CAP, k)
    nP = int(k["n_p0"])
    for n in range(depth):
        acc_d, acc_h, _ = omega_accumulators(table, n)
        nP0 = nP
        pr = []
        for _u in range(ipr):
            nBv, _ = _toy_fit(ladd_int(lpow(lint(nP), nP), 1), cap, nbf)
            pr.append(PrSub(Q.of(nP), Q.of(nBv), Q.of(tsize)))
            nPv, _ = _toy_fit(ladd_int(lmul(lint(nP), lint(tsize)), 1), cap, nP + 1)
            nP = nPv
        tprod = tsize ** ipr
        nS_top = max(3, min(tprod, cap))
        lvl_stub = ParameterTable(TOY, n, table.levels, table.manifest, cap, 1,
                                  DEFAULT_DIGIT_BUDGET, DEFAULT_DEPTH_CAP, k)
        ht_prod = ht_product_before(table, Height("lc", n, 0)).int_value or 1
        ht_prod *= nS_top
        nP_lc = max(ht_prod + 1, nP)
        if nP_lc > cap:
            nP_lc = min(nP_lc, cap)
        nB_lc_bound = lpow(lint(nP_lc), nP_lc) if nP_lc <= 64 else lpow2(
            lmul(lint(nP_lc), llog2_ceil(lint(nP_lc))))
        nB_lc, _ = _toy_fit(ladd_int(nB_lc_bound, 1), cap, nbf)

        entries = {}
        tstats = {}
        accd_int = acc_d.int_value or 0
        acch_int = acc_h.int_value or 0
        prev_h = 0
        for t in range(tprod):
            r0 = t * istar
            dvals = [dseed + r0 + l for l in range(istar)]
            gb = (accd_int + dvals[0]) ** max(n, 1)
            g = max(gb, dvals[0] + 1)
            row = {}
            hs, bs = [], []
            cap_ok = True
            for l in range(istar):
                h = max(g, dvals[l], prev_h) + 1
                prev_h = h
                b = 2 * istar * g * h
                hs.append(h)
                bs.append(b)
            bstar = math.prod(bs)
            if bstar > cap or g > cap:
                # shrink to the structural minimum; the verifier will mark
                # the violated clauses and they land in the manifest
                g = dvals[0] + 1
                hs = [max(g, dvals[l], 0) + 1 + l for l in range(istar)]
                bs = [2 * istar * g * h for h in hs]
                bstar = math.prod(bs)
                if bstar > cap:
                    raise InfeasibleKnobs(
                        "cap cannot hold the product identity at this depth")
            for l in range(istar):
                nS = hs[l] + pad
                entries[(t, l)] = Entry({"d": Q.of(dvals[l]), "h": Q.of(hs[l]),
                                         "b": Q.of(bs[l]), "nS": Q.of(nS)})
            hstar = bstar - math.prod(b - h for b, h in zip(bs, hs))
            a = bstar + 1
            tstats[t] = TStat(Q.of(g), Q.of(a), Q.of(bstar), Q.of(hstar),
                              LDiff.of(lint(hstar)))
        lc = Schedule("lc", "explicit", Q.of(tprod), Q.of(istar), entries,
                      tstats, ratio_base=1, rule={})
        table = replace(table, depth=n + 1,
                        levels=table.levels + (_partial_level(
                            n, Q.of(ipr), pr, True, Q.of(tprod), Q.of(nS_top),
                            Q.of(nP_lc), Q.of(istar), Q.of(nB_lc), lc,
                            Q.of(0)),))
        msx = m_s(table, n, tprod - 1, istar - 1).int_value
        nS_Llc = min(msx, cap) if msx is not None else cap
        lvl = replace(table.levels[n], nS_Llc=Q.of(nS_Llc))
        table = replace(table, levels=table.levels[:n] + (lvl,))

        ht_prod = ht_product_before(table, Height("al", n)).int_value
        nP_al = min(ht_prod + 1, cap)
        nB_al_bound = lpow2(lmul(lint(nP_al), llog2_ceil(lint(nP_al)))) \
            if nP_al > 64 else lpow(lint(nP_al), nP_al)
        nB_al, _ = _toy_fit(ladd_int(nB_al_bound, 1), cap, nbf)
        al_entries = {}
        worst_hl0 = max(entries[(t, 0)].q["h"].int_value for t in range(tprod))
        for t in range(tprod):
            d = max(dseed, nB_al + 1) + t
            h = d + 2
            if n == 0:
                gb = acch_int + worst_hl0  # bottom level: strictly below
            else:
                gb = (acch_int + worst_hl0 + h) ** max(n, 1)
            g = max(gb, h + 1) + t
            if g > cap:
                g = h + 1 + t
            b = g * h + 1
            a = b + 1
            nS = h + pad
            al_entries[(t, 0)] = Entry({"d": Q.of(d), "h": Q.of(h), "g": Q.of(g),
                                        "b": Q.of(b), "a": Q.of(a), "nS": Q.of(nS)})
        al = Schedule("al", "explicit", Q.of(tprod), Q.of(1), al_entries, {},
                      ratio_base=1, rule={})
        nS_Lal = al_entries[(0, 0)].q["nS"].int_value
        lvl = replace(lvl, nP_al=Q.of(nP_al), nB_al=Q.of(nB_al), al=al,
                      nS_Lal=Q.of(nS_Lal))
        table = replace(table, levels=table.levels[:n] + (lvl,))
        ht_prod = ht_product_before(table, Height("pr", n + 1, 0)).int_value
        nP_next = min(ht_prod + 1, cap)
        lvl = replace(lvl, nP_next=Q.of(nP_next))
        table = replace(table, levels=table.levels[:n] + (lvl,))
        nP = nP_next

    # the manifest is computed, not asserted: run the verifier and record
    # exactly the failing clauses plus the <=2 relaxations
    report = verify_table(table)
    waived = sorted({e.clause for e in report.entries if e.status == FAIL})
    relaxed = []
    for n, lvl in enumerate(table.levels):
        for name, qv in (("iota_pr", lvl.iota_pr), ("iota_star", lvl.iota_star)):
            v = qv.int_value
            if v is not None and v <= 2:
                relaxed.append(f"n{n}.{name}")
    table = replace(table, manifest={"waived": waived, "relaxed": relaxed})

    # user overrides land *after* manifest computation: they produce
    # genuine FAILs, not waivers
    for ov in (knobs or {}).get("override", []):
        table = _apply_override(table, ov)
    return table


def _apply_override(table: ParameterTable, ov: dict) -> ParameterTable:
    n = ov["n"]
    lvl = table.levels[n]
    part = ov.get("part", "lc")
    sched = lvl.lc if part == "lc" else lvl.al
    key = (ov.get("t", 0), ov.get("l", 0))
    entry = sched.entries[key]
    newq = dict(entry.q)
    newq[ov["qty"]] = Q.of(int(ov["value"]))
    entries = dict(sched.entries)
    entries[key] = Entry(newq)
    sched = replace(sched, entries=entries)
    lvl = replace(lvl, **{part: sched})
    return replace(table, levels=table.levels[:n] + (lvl,) + table.levels[n + 1:])


# ---------------------------------------------------------------------------
# FP_ONLY generator (exact layered values; feeds the block module)
# ---------------------------------------------------------------------------

FP_DEFAULTS = {"tstar": 2, "iota_star": 2, "d_seed": 3}


def _pp(bound, strict=False):
    """Round a bound up to a pure power of two (keeps term counts small
    at every depth; every rounded quantity has only lower-bound clauses,
    so overshooting is sound)."""
    if bound.is_flat:
        return ladd(bound, L1) if strict else bound
    e = llog2_ceil(bound)
    v = lpow2(e)
    if strict and lcmp(v, bound) != GT:
        v = lpow2(ladd_int(e, 1))
    return v


def _gen_fp(depth: int, knobs: dict) -> ParameterTable:
    k = dict(FP_DEFAULTS)
    k.update(knobs or {})
    tsize, istar, dseed = int(k["tstar"]), int(k["iota_star"]), int(k["d_seed"])
    if tsize < 1 or istar < 1 or dseed < 3:
        raise InfeasibleKnobs("FP_ONLY needs tstar, iota* >= 1 and d seed > 2")
    table = ParameterTable(FP_ONLY, 0, (), {"waived": [], "relaxed": []},
                           0, 1, DEFAULT_DIGIT_BUDGET, 64, k)
    acc_d = acc_h = acc_f9 = L0
    carry = None  # worst a at the previous al height (its power-of-two bounds d)
    for n in range(depth):
        entries, tstats = {}, {}
        hl0_worst = L0
        for t in range(tsize):
            if n == 0:
                d0 = lint(dseed + t)
            else:
                d0 = ladd(lpow2(ladd_int(carry, t)), L1)
            g = _pp(lpow(ladd(acc_d, d0), max(n, 1)))
            ds, hs, bs = [], [], []
            prev = g
            for l in range(istar):
                dl = ladd_int(d0, l)
                hl = _pp(lmax(prev, dl), strict=True)
                bl = lmul(lint(2 * istar), lmul(g, hl))
                ds.append(dl)
                hs.append(hl)
                bs.append(bl)
                prev = hl
            hl0_worst = lmax(hl0_worst, hs[0])
            bstar = lprod(bs)
            diff = ldiff_prod_bh(bs, hs)
            hstar = LDiff(ladd(bstar, diff.neg), diff.pos)
            a = lpow2(lsum([acc_f9, lmul(bstar, llog2_ceil(bstar)), g]))
            for l in range(istar):
                nS = lpow2(lmul(hs[l], ladd_int(llog2_ceil(bs[l]), 1)))
                entries[(t, l)] = Entry({
                    "d": Q.from_exact(ds[l]), "h": Q.from_exact(hs[l]),
                    "b": Q.from_exact(bs[l]), "nS": Q.from_exact(nS)})
            hx = hstar.exact()
            tstats[t] = TStat(Q.from_exact(g), Q.from_exact(a),
                              Q.from_exact(bstar),
                              Q.from_exact(hx) if hx is not None
                              else Q(Cert(tower_bounds(lmul(hs[0], lprod(bs[1:])))[0],
                                          tower_bounds(bstar)[1])),
                              hstar)
        lc = Schedule("lc", "explicit", Q.of(tsize), Q.of(istar), entries,
                      tstats, ratio_base=2, rule={})

        al_entries = {}
        new_carry = L0
        for t in range(tsize):
            a_lc = tstats[t].a.exact
            d = ladd(lpow2(a_lc), L1)
            h = _pp(d, strict=True)
            if n == 0:
                g = _pp(ladd(acc_h, hl0_worst))  # bottom level: strictly below
            else:
                g = _pp(lpow(lsum([acc_h, hl0_worst, h]), max(n, 1)))
            b = ladd(lmul(g, h), L1)
            lc_term = lmul(tstats[t].bstar.exact, llog2_ceil(tstats[t].bstar.exact))
            a = lpow2(lsum([acc_f9, lc_term, lmul(h, llog2_ceil(b)), g]))
            nS = lpow2(lmul(h, ladd_int(llog2_ceil(a), 1)))
            new_carry = lmax(new_carry, a)
            al_entries[(t, 0)] = Entry({
                "d": Q.from_exact(d), "h": Q.from_exact(h), "g": Q.from_exact(g),
                "b": Q.from_exact(b), "a": Q.from_exact(a), "nS": Q.from_exact(nS)})
        al = Schedule("al", "explicit", Q.of(tsize), Q.of(1), al_entries, {},
                      ratio_base=2, rule={})

        # small placeholder bookkeeping for the unused pr-side
        pr = (PrSub(Q.of(3), Q.of(4), Q.of(tsize)),)
        lvl = Level(n, Q.of(1), pr, True, Q.of(tsize), Q.of(3), Q.of(4),
                    Q.of(istar), Q.of(3), lc, Q.of(3), Q.of(4), Q.of(3), al,
                    Q.of(3), Q.of(4))
        table = replace(table, depth=n + 1, levels=table.levels + (lvl,))

        # accumulators: worst tuple at each lower-height member
        d_lc_w = _lmax_many(entries[(t, 0)].q["d"].exact for t in range(tsize))
        d_al_w = _lmax_many(al_entries[(t, 0)].q["d"].exact for t in range(tsize))
        h_al_w = _lmax_many(al_entries[(t, 0)].q["h"].exact for t in range(tsize))
        acc_d = lsum([acc_d, d_lc_w, d_al_w])
        acc_h = lsum([acc_h, hl0_worst, h_al_w])
        f9_lc = _lmax_many(lmul(tstats[t].bstar.exact,
                                llog2_ceil(tstats[t].bstar.exact))
                           for t in range(tsize))
        f9_al = _lmax_many(lmul(al_entries[(t, 0)].q["h"].exact,
                                llog2_ceil(al_entries[(t, 0)].q["b"].exact))
                           for t in range(tsize))
        acc_f9 = lsum([acc_f9, f9_lc, f9_al])
        carry = new_carry
    return table


def _lmax_many(items):
    out = None
    for it in items:
        out = it if out is None else lmax(out, it)
    return out


def ldiff_prod_bh(bs, hs) -> LDiff:
    """prod over columns of (b - h), as an exact formal difference."""
    total = LDiff.of(L1)
    for b, h in zip(bs, hs):
        total = total.mul(LDiff(b, h))
    return total


# ---------------------------------------------------------------------------
# public generate entry point
# ---------------------------------------------------------------------------


def generate_table(depth: int, regime: str = VERIFY, knobs: dict | None = None
                   ) -> ParameterTable:
    if depth < 1:
        raise DepthExceeded("depth must be at least 1")
    if depth > 8:
        raise DepthExceeded("depth beyond 8 exceeds the supported nesting")
    knobs = knobs or {}
    if regime == VERIFY:
        return _gen_verify(depth, knobs)
    if regime == TOY:
        return _gen_toy(depth, knobs)
    if regime == FP_ONLY:
        return _gen_fp(depth, knobs)
    raise ParamError(f"unknown regime {regime!r}")


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReportEntry:
    clause: str
    location: str
    status: str
    method: str = "checked"
    detail: str = ""


@dataclass
class Report:
    entries: list

    def counts(self) -> dict:
        out: dict = {}
        for e in self.entries:
            out[e.status] = out.get(e.status, 0) + 1
        return out

    def by_status(self, status: str):
        return [e for e in self.entries if e.status == status]

    def ok(self) -> bool:
        return not self.by_status(FAIL) and not self.by_status(UNKNOWN)

    def lines(self):
        for e in self.entries:
            yield f"{e.status:8s} {e.clause:4s} @ {e.location}" + (
                f"  [{e.method}]" if e.method != "checked" else "") + (
                f"  {e.detail}" if e.detail else "")

    def to_json(self):
        return {
            "counts": self.counts(),
            "ok": self.ok(),
            "entries": [
                {"clause": e.clause, "location": e.location, "status": e.status,
                 "method": e.method, "detail": e.detail}
                for e in self.entries
            ],
        }


class _Checker:
    def __init__(self, table: ParameterTable, clauses):
        self.table = table
        self.clauses = set(clauses) if clauses else set(
            FEASIBILITY_CLAUSES if table.regime == FP_ONLY else ALL_CLAUSES)
        self.waived = set(table.manifest.get("waived", ()))
        self.entries: list = []

    def emit(self, clause, loc, ok, defn=(), probed=False, method="checked",
             detail=""):
        if clause not in self.clauses:
            return
        if ok is True:
            status = SAMPLED if probed else PASS
        elif ok is False:
            status = WAIVED if clause in self.waived else FAIL
            method = "violated" if method == "checked" else method
        elif clause in defn:
            status = SAMPLED if probed else PASS
            method = "construction"
        elif clause in self.waived:
            status = WAIVED
            method = "undecided"
        else:
            status = UNKNOWN
            method = "undecided"
        self.entries.append(ReportEntry(clause, loc, status, method, detail))

    def emit_pass(self, clause, loc, method, detail=""):
        if clause in self.clauses:
            self.entries.append(ReportEntry(clause, loc, PASS, method, detail))

    # -- per-level checks --

    def check_level(self, n: int):
        t = self.table
        lvl = t.level(n)
        acc_d, acc_h, acc_f9 = omega_accumulators(t, n)
        nP0 = lvl.pr[0].nP
        loc = f"n{n}"
        self.emit("G1", loc, q_ge(lvl.iota_pr, bound_g1(n, nP0)),
                  lvl.iota_pr.defn)
        for u, sub in enumerate(lvl.pr):
            sloc = f"{loc}.pr.u{u}"
            self.emit("G2", sloc, q_gt(sub.nB, bound_g2(sub.nP)), sub.nB.defn)
            self.emit("G3", sloc, q_ge(sub.Tstar, bound_g3(n, sub.nB, nP0)),
                      sub.Tstar.defn)
            nxt = lvl.pr[u + 1].nP if u + 1 < len(lvl.pr) else (
                lvl.nP_lc if lvl.pr_complete else None)
            if nxt is not None:
                self.emit("G4", sloc, q_gt(nxt, bound_g4(sub.nP, sub.Tstar)),
                          nxt.defn)
        self.emit("G5", loc, q_ge(lvl.nS_top, lvl.Tsize), lvl.nS_top.defn)
        self.emit("G14", f"{loc}.Llc",
                  q_gt(lvl.nP_lc, ht_product_before(t, Height("lc", n, 0))),
                  lvl.nP_lc.defn)
        self.emit("G6", loc, q_ge(lvl.iota_star, bound_g6(n, lvl.Tsize, lvl.nP_lc)),
                  lvl.iota_star.defn)
        self.emit("G2", f"{loc}.Llc", q_gt(lvl.nB_lc, bound_g2(lvl.nP_lc)),
                  lvl.nB_lc.defn)
        self._check_lc(n, lvl, acc_d, acc_f9)
        self.emit("G14", f"{loc}.Lal",
                  q_gt(lvl.nP_al, ht_product_before(t, Height("al", n))),
                  lvl.nP_al.defn)
        self.emit("G2", f"{loc}.Lal", q_gt(lvl.nB_al, bound_g2(lvl.nP_al)),
                  lvl.nB_al.defn)
        self._check_al(n, lvl, acc_h, acc_f9)
        self.emit("G14", f"{loc}.next",
                  q_gt(lvl.nP_next, ht_product_before(t, Height("pr", n + 1, 0))),
                  lvl.nP_next.defn)

    def _lc_items(self, sched: Schedule):
        """(key, entry, tstat, probed, is_first_column, location-suffix)."""
        if sched.kind == "explicit":
            for (tt, l), e in sorted(sched.entries.items()):
                yield (tt, l), e, sched.tstats[tt], False, l == 0, f"t{tt},l{l}"
        else:
            for label in PROBE_LABELS:
                ts = sched.tstats["min" if label.startswith("min") else "max"]
                yield (label, sched.entries[label], ts, True,
                       label == "min", label)

    def _check_lc(self, n: int, lvl: Level, acc_d: Q, acc_f9: Q):
        t = self.table
        sched = lvl.lc
        loc0 = f"n{n}.lc"
        for key, e, ts, probed, first, suff in self._lc_items(sched):
            loc = f"{loc0}[{suff}]"
            d, h, b, nS = e.q["d"], e.q["h"], e.q["b"], e.q["nS"]
            self.emit("F1", loc, q_gt(h, d), h.defn, probed)
            self.emit("G7", loc, q_ge(h, bound_g7(n, d, lvl.nP_lc)), h.defn,
                      probed)
            self.emit("F5", loc, q_gt(b, h), b.defn, probed)
            self._check_f4(loc, lvl, ts, e, probed)
            self._check_g8(loc, b, h, nS, probed, al=False)
            if first:
                self.emit("G10", loc, q_gt(d, lvl.nB_lc), d.defn, probed)
                self.emit("F10", loc, q_gt(d, Q.of(2)), d.defn, probed)
        # per-t checks: F2, F6, F9, and the cross-t parts
        if sched.kind == "explicit":
            keys = sorted(sched.tstats)
            lcount = sched.lcount.int_value
            for tt in keys:
                ts = sched.tstats[tt]
                loc = f"{loc0}.t{tt}"
                d0 = sched.entries[(tt, 0)].q["d"]
                self.emit("F2", loc, q_ge(ts.g, bound_f2(n, acc_d, d0)), ts.g.defn)
                self._check_f6(loc, sched, tt, ts)
                self._check_f9_lc(loc, acc_f9, ts)
            # G9 along the lexicographic order (with row wrap)
            order = [(tt, l) for tt in keys for l in range(lcount)]
            for (k1, k2) in zip(order, order[1:]):
                ms = m_s(t, n, *k1)
                bnd = sched.entries[k1].q["b"].pow(ms)
                ok = q_ge(sched.entries[k2].q["d"], bnd)
                self.emit("G9", f"{loc0}[{k1}->{k2}]", ok,
                          sched.entries[k2].q["d"].defn)
            # G10 second part across tuples
            for i, t1 in enumerate(keys):
                for t2 in keys[i + 1:]:
                    ms = m_s(t, n, t1, lcount - 1)
                    bnd = lvl.nP_lc.mul(sched.tstats[t1].a.pow(ms))
                    ok = q_gt(sched.entries[(t2, 0)].q["d"], bnd)
                    self.emit("G10", f"{loc0}.t{t1}<t{t2}", ok,
                              sched.entries[(t2, 0)].q["d"].defn)
        else:
            for which in ("min", "max"):
                ts = sched.tstats[which]
                loc = f"{loc0}.{which}"
                d0 = sched.entries["min" if which == "min" else "max-1"].q["d"]
                self.emit("F2", loc, q_ge(ts.g, bound_f2(n, acc_d, d0)),
                          ts.g.defn, probed=True)
                self.emit_pass("F6", loc, "definitional",
                               "b*/h* defined by the column products")
                self._check_f9_lc(loc, acc_f9, ts, probed=True)
            self.emit("G9", f"{loc0}[min->min+1]",
                      q_ge(sched.entries["min+1"].q["d"],
                           sched.entries["min"].q["b"].pow(
                               sched.entries["min"].q["nS"])),
                      sched.entries["min+1"].q["d"].defn, probed=True)
            for cl in ("G9", "G10"):
                if cl in set(sched.rule.get("d", ())):
                    self.emit_pass(cl, f"{loc0}.deep", "closed-form",
                                   "recurrence defines d from the clause bound")
        self.emit("G11", f"n{n}",
                  self._g11_ok(n, lvl), lvl.nS_Llc.defn,
                  probed=sched.kind == "probed")

    def _g11_ok(self, n: int, lvl: Level):
        sched = lvl.lc
        if sched.kind == "explicit":
            keys = sorted(sched.tstats)
            ms = m_s(self.table, n, keys[-1], sched.lcount.int_value - 1)
            return q_ge(lvl.nS_Llc, ms)
        lo = qprod([sched.entries["min"].q["nS"], sched.entries["min+1"].q["nS"]])
        return q_ge(lvl.nS_Llc, lo)

    def _check_f4(self, loc, lvl, ts: TStat, e: Entry, probed):
        g, h, b = ts.g, e.q["h"], e.q["b"]
        gi, hi, bi = g.int_value, h.int_value, b.int_value
        if gi is not None and hi is not None and bi is not None:
            # exact rational check over the whole column product where flat
            self.emit("F4", loc, bi >= 2 * (lvl.iota_star.int_value or 1) * gi * hi
                      or self._f4_exact(lvl, ts), b.defn, probed,
                      method="sufficient")
            return
        self.emit("F4", loc, q_ge(b, bound_f4(lvl.iota_star, g, h)), b.defn,
                  probed, method="sufficient")

    def _f4_exact(self, lvl: Level, ts: TStat) -> bool:
        from fractions import Fraction

        sched = lvl.lc
        if sched.kind != "explicit":
            return False
        tt = next(k for k, v in sched.tstats.items() if v is ts)
        g = ts.g.int_value
        prod = Fraction(1)
        for l in range(sched.lcount.int_value):
            e = sched.entries[(tt, l)]
            prod *= 1 - Fraction(e.q["h"].int_value, e.q["b"].int_value)
        return 1 - Fraction(1, g) < prod

    def _check_g8(self, loc, base: Q, h: Q, nS: Q, probed, al: bool):
        bi, hi, ni = base.int_value, h.int_value, nS.int_value
        if (self.table.regime == TOY and bi is not None and hi is not None
                and ni is not None):
            self.emit("G8", loc, ni >= count_subsets_le(bi, hi), nS.defn,
                      probed, method="exact-count")
            return
        self.emit("G8", loc, q_ge(nS, bound_g8(base, h)), nS.defn, probed,
                  method="sufficient")

    def _check_f6(self, loc, sched: Schedule, tt, ts: TStat):
        bs = [sched.entries[(tt, l)].q["b"] for l in range(sched.lcount.int_value)]
        hs = [sched.entries[(tt, l)].q["h"] for l in range(sched.lcount.int_value)]
        ok_b = q_ge(ts.bstar, qprod(bs)) and q_ge(qprod(bs), ts.bstar)
        ok_h = None
        if ts.hstar_diff is not None and all(b.exact is not None for b in bs):
            diff = ldiff_prod_bh([b.exact for b in bs], [h.exact for h in hs])
            want = LDiff(ladd(lprod([b.exact for b in bs]), diff.neg), diff.pos)
            ok_h = ts.hstar_diff.cmp(want) == EQ
        elif ts.hstar.int_value is not None:
            bi = [b.int_value for b in bs]
            hi = [h.int_value for h in hs]
            ok_h = ts.hstar.int_value == math.prod(bi) - math.prod(
                b - h for b, h in zip(bi, hi))
        self.emit("F6", loc, ok_b if ok_b is not True else ok_h, ("F6",),
                  method="identity")

    def _check_f9_lc(self, loc, acc_f9: Q, ts: TStat, probed=False):
        if ts.hstar_diff is not None and acc_f9.exact is not None \
                and ts.a.exact is not None and ts.g.exact is not None:
            try:
                log_b = llog2_ceil(ts.bstar.exact)
                rhs = ldiff_sum([LDiff.of(acc_f9.exact),
                                 ts.hstar_diff.mul_lint(log_b),
                                 LDiff.of(ts.g.exact)])
                log_a = llog2_floor(ts.a.exact)
                self.emit("F9", loc, rhs.cmp_lint(log_a) != GT, ts.a.defn,
                          probed, method="exact")
                return
            except Exception:
                pass
        bound = acc_f9.add(ts.hstar.mul(ts.bstar.log2_ceil())).add(ts.g)
        ok = cert_ge(ts.a.cert.log2_floor(), bound.cert)
        self.emit("F9", loc, ok, ts.a.defn, probed)

    def _check_al(self, n: int, lvl: Level, acc_h: Q, acc_f9: Q):
        sched = lvl.al
        loc0 = f"n{n}.al"
        items = (sorted(sched.entries.items()) if sched.kind == "explicit"
                 else [(l, sched.entries[l]) for l in PROBE_LABELS])
        probed = sched.kind == "probed"
        lc_sched = lvl.lc
        worst_hl0 = None
        if lc_sched.kind == "explicit":
            hl0s = [lc_sched.entries[(tt, 0)].q["h"]
                    for tt in sorted(lc_sched.tstats)]
            worst_hl0 = hl0s[0]
            for hq in hl0s[1:]:
                if q_ge(hq, worst_hl0) is True:
                    worst_hl0 = hq
        else:
            worst_hl0 = lc_sched.entries["min"].q["h"]
        for key, e in items:
            if not e.q:
                continue
            loc = f"{loc0}[{key}]"
            d, h, g, b, a, nS = (e.q["d"], e.q["h"], e.q["g"], e.q["b"],
                                 e.q["a"], e.q["nS"])
            self.emit("F1", loc, q_gt(h, d), h.defn, probed)
            self.emit("G7", loc, q_ge(h, bound_g7(n, d, lvl.nP_al)), h.defn,
                      probed)
            if n == 0:
                f3 = acc_h.add(worst_hl0)
            else:
                f3 = acc_h.add(worst_hl0).add(h).pow(Q.of(max(n, 1)))
            self.emit("F3", loc, q_ge(g, f3), g.defn, probed)
            self.emit("F8", loc, q_gt(b, g.mul(h)), b.defn, probed)
            self.emit("F5", loc, q_gt(b, h), b.defn, probed)
            self.emit_pass("F7", loc, "definitional", "b*=b, h*=h at this height")
            self._check_f9_al(loc, n, lvl, acc_f9, e, probed)
            self._check_g8(loc, a, h, nS, probed, al=True)
            self.emit("G12", loc, q_gt(d, lvl.nB_al), d.defn, probed)
            # F10 second part: d exceeds 2^(a at the matching lc height)
            a_lc = self._matching_lc_a(lvl, key)
            if a_lc is not None:
                self.emit("F10", loc, q_gt(d, a_lc.pow2()), d.defn, probed)
        if sched.kind == "explicit":
            keys = sorted(sched.tstats) or sorted({k[0] for k in sched.entries})
            for i, t1 in enumerate(keys):
                for t2 in keys[i + 1:]:
                    bnd = lvl.nP_al.mul(sched.entries[(t1, 0)].q["nS"].succ())
                    ok = q_gt(sched.entries[(t2, 0)].q["d"], bnd)
                    self.emit("G12", f"{loc0}.t{t1}<t{t2}", ok,
                              sched.entries[(t2, 0)].q["d"].defn)
        else:
            for cl in ("G12", "F10"):
                if cl in set(sched.rule.get("d", ())):
                    self.emit_pass(cl, f"{loc0}.deep", "closed-form",
                                   "recurrence defines d from the clause bound")
        nS_min = (sched.entries[_al_key(sched, "min")].q.get("nS")
                  if sched.entries[_al_key(sched, "min")].q else None)
        if nS_min is not None:
            self.emit("G13", f"n{n}", q_ge(lvl.nS_Lal, nS_min),
                      lvl.nS_Lal.defn, probed=probed)
        # F10 third part: next level's d exceeds 2^(a here), every tuple
        if n + 1 < self.table.depth:
            worst_a = self._worst_al_a(sched)
            nxt = self.table.level(n + 1).lc
            d_next = _entry_q(nxt, _lc_key(nxt, "min"), "d")
            self.emit("F10", f"{loc0}->n{n + 1}", q_gt(d_next, worst_a.pow2()),
                      d_next.defn, probed=probed or nxt.kind == "probed")

    def _matching_lc_a(self, lvl: Level, key) -> Q | None:
        lc = lvl.lc
        if lc.kind == "explicit":
            tt = key[0] if isinstance(key, tuple) else 0
            return lc.tstats[tt].a if tt in lc.tstats else None
        if key == "min":
            # the generator bounds every al-row d by the *largest* lc a
            return lc.tstats["max"].a
        return lc.tstats["max"].a

    def _worst_al_a(self, sched: Schedule) -> Q:
        if sched.kind == "explicit":
            best = None
            for k in sched.explicit_keys():
                a = sched.entries[k].q["a"]
                if best is None or q_ge(a, best) is True:
                    best = a
            return best
        return sched.entries[_al_key(sched, "max")].q.get(
            "a", sched.entries["min"].q["a"])

    def _check_f9_al(self, loc, n, lvl: Level, acc_f9: Q, e: Entry, probed):
        h, b, g, a = e.q["h"], e.q["b"], e.q["g"], e.q["a"]
        ts = _lc_tstat(lvl.lc, "max")
        if (a.exact is not None and acc_f9.exact is not None
                and ts.hstar_diff is not None):
            try:
                lc_term = ts.hstar_diff.mul_lint(llog2_ceil(ts.bstar.exact))
                rhs = ldiff_sum([LDiff.of(acc_f9.exact), lc_term,
                                 LDiff.of(lmul(h.exact, llog2_ceil(b.exact))),
                                 LDiff.of(g.exact)])
                self.emit("F9", loc, rhs.cmp_lint(llog2_floor(a.exact)) != GT,
                          a.defn, probed, method="exact")
                return
            except Exception:
                pass
        bound = acc_f9.add(ts.hstar.mul(ts.bstar.log2_ceil())) \
            .add(h.mul(b.log2_ceil())).add(g)
        self.emit("F9", loc, cert_ge(a.cert.log2_floor(), bound.cert), a.defn,
                  probed)


def verify_table(table: ParameterTable, clauses=None) -> Report:
    chk = _Checker(table, clauses)
    for n in range(table.depth):
        chk.check_level(n)
    return Report(chk.entries)


# ---------------------------------------------------------------------------
# schedule_eval
# ---------------------------------------------------------------------------


def schedule_eval(table: ParameterTable, n: int, part: str, quantity: str,
                  t_rank, l_rank):
    """The schedule value (as a HyperInt) at lexicographic rank (t, l).

    Explicit schedules return the stored value; probed schedules return the
    probe at the labelled ranks and the declared geometric lower bound at
    interior ranks.  Ranks may be ints or the strings "max"/"max-1".
    """
    lvl = table.level(n)
    sched = lvl.lc if part == "lc" else lvl.al
    lcount = sched.lcount.int_value

    def _check_range(rank, count: Q):
        if isinstance(rank, str):
            return
        if rank < 0:
            raise RankOutOfRange(f"negative rank {rank}")
        ci = count.int_value
        if ci is not None and rank >= ci:
            raise RankOutOfRange(f"rank {rank} >= count {ci}")

    _check_range(t_rank, sched.tcount)
    _check_range(l_rank, sched.lcount)

    if sched.kind == "explicit":
        if isinstance(t_rank, str) or isinstance(l_rank, str):
            tmax = sched.tcount.int_value - 1
            lmax_ = lcount - 1
            t_rank = tmax if t_rank == "max" else tmax - 1 if t_rank == "max-1" else t_rank
            l_rank = lmax_ if l_rank == "max" else lmax_ - 1 if l_rank == "max-1" else l_rank
        q = sched.entries[(t_rank, l_rank)].q[quantity]
        return q.cert.hyper_lo() if not q.cert.sharp else (
            q.cert.hyper_lo())
    label = None
    if t_rank in ("max", "max-1") :
        label = "max" if (l_rank in ("max", lcount)) or l_rank == "max" else "max-1"
        label = t_rank if part == "al" or lcount is None else label
    elif t_rank == 0 and l_rank in (0, "min"):
        label = "min"
    elif t_rank == 0 and l_rank == 1:
        label = "min+1"
    if label is not None and quantity in sched.entries[label].q:
        return sched.entries[label].q[quantity].cert.hyper_lo()
    # interior rank: declared geometric lower bound from the minimum entry
    base = sched.entries["min"].q[quantity]
    from .hyper import exact as hx_exact, pow2_lower
    steps = t_rank if isinstance(t_rank, int) else 0
    if isinstance(l_rank, int):
        steps = steps + l_rank
    lo = base.cert.mul(Cert.of(sched.ratio_base).pow(Cert.of(steps))).lo
    from .hyper import tower_hyper
    return tower_hyper(lo, "lower") if lo[0] else hx_exact(lo[1])


# ---------------------------------------------------------------------------
# Frame
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Frame:
    depth: int
    iota_pr: tuple  # per-level Q
    iota_star: tuple
    s_pr: tuple
    s_lc: dict  # i -> labels
    s_al: dict

    def i_star(self, label: str) -> str:
        if label in self.s_pr:
            return label
        for i, labels in self.s_lc.items():
            if label in labels:
                return i
        for i, labels in self.s_al.items():
            if label in labels:
                return i
        raise ParamError(f"unknown label {label!r}")

    def is_closed(self, labels) -> bool:
        ls = set(labels)
        return all(self.i_star(a) in ls for a in ls)

    def labels(self):
        out = list(self.s_pr)
        for i in self.s_pr:
            out.extend(self.s_lc.get(i, ()))
            out.extend(self.s_al.get(i, ()))
        return tuple(out)

    def heights(self, n: int):
        """Enumerate ht_n (requires enumerable sublevel counts)."""
        if not 0 <= n < self.depth:
            raise DepthExceeded(f"level {n} beyond frame depth {self.depth}")
        ipr = self.iota_pr[n].int_value
        istar = self.iota_star[n].int_value
        if ipr is None or istar is None or ipr > 10 ** 6 or istar > 10 ** 6:
            raise DepthExceeded("sublevel counts not enumerable at this level")
        out = [Height("pr", n, u) for u in range(ipr)]
        out += [Height("lc", n, v) for v in range(istar)]
        out.append(Height("al", n))
        return out

    def omega(self, n: int):
        """The lower-height members at level n (first lc sublevel + al)."""
        return [Height("lc", n, 0), Height("al", n)]


def frame_build(table: ParameterTable, s_pr=("i0", "i1"),
                lc_per=1, al_per=1) -> Frame:
    if table.depth < 1:
        raise DepthExceeded("table has no materialised levels")
    s_lc = {i: tuple(f"{i}.lc{j}" for j in range(lc_per)) for i in s_pr}
    s_al = {i: tuple(f"{i}.al{j}" for j in range(al_per)) for i in s_pr}
    return Frame(table.depth,
                 tuple(l.iota_pr for l in table.levels),
                 tuple(l.iota_star for l in table.levels),
                 tuple(s_pr), s_lc, s_al)
