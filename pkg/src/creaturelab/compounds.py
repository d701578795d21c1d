"""Compound creatures over a TOY parameter table.

Two compound kinds are modelled:

  PrCompound - a rectangle of P-kind subatoms indexed by (index, sublevel
               column), with a modesty constraint (at most one non-trivial
               subatom per column) and a halving parameter.
  LcCompound - rows of S-kind subatoms indexed by (index, tuple-row,
               column) with per-index tuple sets, strong modesty (at most
               one non-trivial cell per column across all rows) and a
               halving parameter.

The norm of a compound is log_2(max{1, min stacked norm - halving}) over
the possibility budget below the compound's height, where the stacked
norm of a row maximises min(mu^m(A), component norms on A) over witness
sets A of columns.

Operations: disjointification of witness sets, norm-positive builders,
amalgamation of compatible pairs, halving and restoration, lazy
possibility enumeration, homogenisation (making a colouring of the
possibilities depend only on coordinates up to a pivot) and support
separation for the pr kind.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import product

from .hyper import (GT, LT, NormValue, make_norm, norm_vs_norm,
                    DEFAULT_DIGIT_BUDGET)
from .layered import LDiff, lint
from .params import (TOY, Height, ParameterTable, Report, ReportEntry,
                     PASS, FAIL, m_s, verify_table, Q, Level, PrSub,
                     Schedule, Entry, TStat, DEFAULT_DEPTH_CAP,
                     count_subsets_le)
from .subatoms import (FamilyDescriptor, LimitExceeded, P_KIND, S_KIND,
                       Subatom, bigness_thin, full_subatom, subatom_norm)

DEFAULT_ENUM_LIMIT = 1 << 20
FLOAT_SLACK = 1e-9


class CompoundError(Exception):
    pass


class EmptySet(CompoundError):
    pass


class TooManySets(CompoundError):
    pass


class RegimeUnsupported(CompoundError):
    pass


class NormInfeasible(CompoundError):
    pass


class HypothesisViolated(CompoundError):
    pass


class UnhalveInfeasible(CompoundError):
    pass


# ---------------------------------------------------------------------------
# Table access
# ---------------------------------------------------------------------------


def table_fingerprint(table: ParameterTable) -> str:
    blob = json.dumps(table.to_json(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


class Scale:
    """Integer view of a TOY parameter table for compound arithmetic."""

    def __init__(self, table: ParameterTable):
        if table.regime != TOY:
            raise RegimeUnsupported(
                f"compound creatures need an enumerable table, not {table.regime}")
        self.table = table

    def _int(self, q: Q, what: str) -> int:
        v = q.int_value
        if v is None:
            raise RegimeUnsupported(f"{what} is not an explicit integer")
        return v

    def level(self, n: int) -> Level:
        return self.table.level(n)

    def iota_pr(self, n: int) -> int:
        return self._int(self.level(n).iota_pr, "iota_pr")

    def istar(self, n: int) -> int:
        return self._int(self.level(n).lc.lcount, "column count")

    def tsize(self, n: int) -> int:
        return self._int(self.level(n).Tsize, "tuple-set size")

    def tmax(self, n: int) -> int:
        return self.tsize(n) - 1

    def pr_sub(self, n: int, j: int) -> tuple:
        sub = self.level(n).pr[j]
        return (self._int(sub.nP, "nP"), self._int(sub.nB, "nB"),
                self._int(sub.Tstar, "Tstar"))

    def pr_family(self, n: int, j: int) -> FamilyDescriptor:
        _, nB, tstar = self.pr_sub(n, j)
        return FamilyDescriptor(P_KIND, nB, T=tstar)

    def lc_cell(self, n: int, t: int, l: int) -> dict:
        e = self.level(n).lc.entries[(t, l)]
        return {k: self._int(v, k) for k, v in e.q.items()}

    def al_cell(self, n: int, t: int) -> dict:
        e = self.level(n).al.entries[(t, 0)]
        return {k: self._int(v, k) for k, v in e.q.items()}

    def lc_family(self, n: int, t: int, l: int) -> FamilyDescriptor:
        c = self.lc_cell(n, t, l)
        return FamilyDescriptor(S_KIND, c["d"], c=c["b"], l=c["h"])

    def al_family(self, n: int, t: int) -> FamilyDescriptor:
        c = self.al_cell(n, t)
        return FamilyDescriptor(S_KIND, c["d"], c=c["a"], l=c["h"])

    def nP_pr(self, n: int) -> int:
        return self.pr_sub(n, 0)[0]

    def nP_lc(self, n: int) -> int:
        return self._int(self.level(n).nP_lc, "nP_lc")

    def nP_al(self, n: int) -> int:
        return self._int(self.level(n).nP_al, "nP_al")

    def nB_pr(self, n: int, j: int) -> int:
        return self.pr_sub(n, j)[1]

    def nB_lc(self, n: int) -> int:
        return self._int(self.level(n).nB_lc, "nB_lc")

    def nS_top(self, n: int) -> int:
        return self._int(self.level(n).nS_top, "nS_top")

    def nS_Llc(self, n: int) -> int:
        return self._int(self.level(n).nS_Llc, "nS_Llc")

    def waived(self) -> set:
        return set(self.table.manifest.get("waived", ()))


# ---------------------------------------------------------------------------
# Atomic creatures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AtomicCreature:
    """Per-column row of subatoms indexed by tuple-rows t."""

    height: Height
    components: tuple  # ((t, Subatom), ...), t ascending

    def __post_init__(self):
        comps = tuple(sorted(self.components, key=lambda p: p[0]))
        if not comps:
            raise CompoundError("atomic creature needs at least one component")
        object.__setattr__(self, "components", comps)

    @property
    def pr_indices(self) -> tuple:
        return tuple(t for t, _ in self.components)

    def component(self, t: int) -> Subatom:
        for u, s in self.components:
            if u == t:
                return s
        raise KeyError(t)

    @property
    def is_trivial(self) -> bool:
        return all(s.is_trivial for _, s in self.components)

    def norm_min(self) -> NormValue:
        norms = [subatom_norm(s) for _, s in self.components]
        best = norms[0]
        for nv in norms[1:]:
            if norm_vs_norm(nv, best) == LT:
                best = nv
        return best


def atomic_leq(y: AtomicCreature, x: AtomicCreature) -> bool:
    """y <= x: tuple rows shrink and every kept component shrinks."""
    if y.height != x.height:
        return False
    if not set(y.pr_indices) <= set(x.pr_indices):
        return False
    for t in y.pr_indices:
        if not set(y.component(t).members) <= set(x.component(t).members):
            return False
    return True


# ---------------------------------------------------------------------------
# mu and stacked norms
# ---------------------------------------------------------------------------


def mu(m: int, size: int) -> NormValue:
    """log_3(size) / (m + 1)."""
    if size < 1:
        raise EmptySet("mu of the empty set is undefined")
    return NormValue(Fraction(1, m + 1), 3, Fraction(size))


def _nv_min(a: NormValue, b: NormValue) -> NormValue:
    return b if norm_vs_norm(a, b) == GT else a


def stacked_norm(norms, m: int):
    """(best, witness): max over non-empty witness sets A of
    min(mu^m(|A|), min of the norms on A), by descending sort and prefix
    scan."""
    if not norms:
        raise EmptySet("stacked norm needs a non-empty index set")
    idx = list(range(len(norms)))
    # descending by norm value (stable on ties)
    for i in range(1, len(idx)):
        j = i
        while j > 0 and norm_vs_norm(norms[idx[j - 1]], norms[idx[j]]) == LT:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            j -= 1
    best = None
    wit = None
    for k in range(1, len(idx) + 1):
        cand = _nv_min(mu(m, k), norms[idx[k - 1]])
        if best is None or norm_vs_norm(cand, best) == GT:
            best, wit = cand, tuple(sorted(idx[:k]))
    return best, wit


def norm_to_rat(nv: NormValue):
    """(value, exact?) - exact Fraction when the argument is a power of
    the base, else a float-derived approximation flagged inexact."""
    f = nv.to_fraction()
    if f is not None and nv.exact:
        return f, True
    return Fraction(nv.value()).limit_denominator(10 ** 12), False


# ---------------------------------------------------------------------------
# Compound types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PrCompound:
    n: int
    dom: tuple               # sorted index labels
    supp: tuple              # sorted subset of dom
    grid: dict               # (i, j) -> Subatom, j < iota_pr
    d: Fraction = Fraction(0)
    d_exact: bool = True
    witness: dict = field(default_factory=dict, compare=False)

    kind = "pr"

    def cell(self, i, j) -> Subatom:
        return self.grid[(i, j)]

    def to_json(self, table=None):
        out = {
            "kind": "pr", "n": self.n, "dom": list(self.dom),
            "supp": list(self.supp),
            "d": {"num": str(self.d.numerator), "den": str(self.d.denominator)},
            "d_exact": self.d_exact,
            "grid": {f"{i}|{j}": s.to_json() for (i, j), s in self.grid.items()},
            "witness": {str(i): list(w) for i, w in self.witness.items()},
        }
        if table is not None:
            out["table"] = table_fingerprint(table)
        return out

    @staticmethod
    def from_json(obj) -> "PrCompound":
        grid = {}
        for k, v in obj["grid"].items():
            i, j = k.rsplit("|", 1)
            grid[(i, int(j))] = Subatom.from_json(v)
        return PrCompound(
            obj["n"], tuple(obj["dom"]), tuple(obj["supp"]), grid,
            Fraction(int(obj["d"]["num"]), int(obj["d"]["den"])),
            obj.get("d_exact", True),
            {i: tuple(w) for i, w in obj.get("witness", {}).items()})


@dataclass(frozen=True)
class LcCompound:
    n: int
    dom: tuple
    supp: tuple
    pr_indices: dict         # alpha -> tuple of rows t (alpha in supp)
    cells: dict              # (alpha, t, l) -> Subatom for alpha in supp
    outer: dict              # (alpha, l) -> trivial Subatom, alpha in dom \ supp
    d: Fraction = Fraction(0)
    d_exact: bool = True
    witness: dict = field(default_factory=dict, compare=False)

    kind = "lc"

    def cell(self, alpha, t, l) -> Subatom:
        return self.cells[(alpha, t, l)]

    def atomic(self, alpha, l, table) -> AtomicCreature:
        """The per-column atomic creature at (alpha, l)."""
        sc = Scale(table)
        h = Height("lc", self.n, 0)
        if alpha in self.supp:
            comps = tuple((t, self.cells[(alpha, t, l)])
                          for t in self.pr_indices[alpha])
        else:
            comps = ((sc.tmax(self.n), self.outer[(alpha, l)]),)
        return AtomicCreature(h, comps)

    def units(self):
        for alpha in self.supp:
            for t in self.pr_indices[alpha]:
                yield alpha, t

    def to_json(self, table=None):
        out = {
            "kind": "lc", "n": self.n, "dom": list(self.dom),
            "supp": list(self.supp),
            "pr_indices": {str(a): list(ts) for a, ts in self.pr_indices.items()},
            "cells": {f"{a}|{t}|{l}": s.to_json()
                      for (a, t, l), s in self.cells.items()},
            "outer": {f"{a}|{l}": s.to_json()
                      for (a, l), s in self.outer.items()},
            "d": {"num": str(self.d.numerator), "den": str(self.d.denominator)},
            "d_exact": self.d_exact,
            "witness": {f"{a}|{t}": list(w)
                        for (a, t), w in self.witness.items()},
        }
        if table is not None:
            out["table"] = table_fingerprint(table)
        return out

    @staticmethod
    def from_json(obj) -> "LcCompound":
        cells = {}
        for k, v in obj["cells"].items():
            a, t, l = k.rsplit("|", 2)
            cells[(a, int(t), int(l))] = Subatom.from_json(v)
        outer = {}
        for k, v in obj["outer"].items():
            a, l = k.rsplit("|", 1)
            outer[(a, int(l))] = Subatom.from_json(v)
        wit = {}
        for k, w in obj.get("witness", {}).items():
            a, t = k.rsplit("|", 1)
            wit[(a, int(t))] = tuple(w)
        return LcCompound(
            obj["n"], tuple(obj["dom"]), tuple(obj["supp"]),
            {a: tuple(ts) for a, ts in obj["pr_indices"].items()},
            cells, outer,
            Fraction(int(obj["d"]["num"]), int(obj["d"]["den"])),
            obj.get("d_exact", True), wit)


def compound_from_json(obj):
    return PrCompound.from_json(obj) if obj["kind"] == "pr" \
        else LcCompound.from_json(obj)


def trivial_pr(n: int) -> PrCompound:
    """The top pr-compound at level n: empty domain, halving 0."""
    return PrCompound(n, (), (), {})


def trivial_lc(n: int) -> LcCompound:
    return LcCompound(n, (), (), {}, {}, {})


def singleton_subatom(family: FamilyDescriptor) -> Subatom:
    """Deterministic trivial subatom: {0} for P-kind, {{}} for S-kind."""
    if family.kind == P_KIND:
        return Subatom(family, [0])
    return Subatom(family, [()])


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------


def pr_stacked(c: PrCompound, i, table):
    sc = Scale(table)
    norms = [subatom_norm(c.cell(i, j)) for j in range(sc.iota_pr(c.n))]
    return stacked_norm(norms, c.n)


def lc_stacked(c: LcCompound, alpha, t, table):
    sc = Scale(table)
    norms = [subatom_norm(c.cell(alpha, t, l)) for l in range(sc.istar(c.n))]
    return stacked_norm(norms, c.n * sc.tsize(c.n))


def min_stacked(c, table):
    """(NormValue, rational value, exact?) of the least stacked norm over
    the compound's rows; raises on empty support."""
    if not c.supp:
        raise EmptySet("no stacked norms with empty support")
    best = None
    if c.kind == "pr":
        for i in c.supp:
            nv, _ = pr_stacked(c, i, table)
            if best is None or norm_vs_norm(nv, best) == LT:
                best = nv
    else:
        for alpha, t in c.units():
            nv, _ = lc_stacked(c, alpha, t, table)
            if best is None or norm_vs_norm(nv, best) == LT:
                best = nv
    rat, exact = norm_to_rat(best)
    return best, rat, exact


def _np_below(c, table) -> int:
    sc = Scale(table)
    return sc.nP_pr(c.n) if c.kind == "pr" else sc.nP_lc(c.n)


def compound_norm(c, table) -> NormValue:
    """log_2(max{1, min stacked - d}) / nP-below; empty-support
    stipulations: 0 when the domain is non-empty, n when it is empty."""
    if not c.supp:
        return make_norm(Fraction(0) if c.dom else Fraction(c.n))
    _, rat, exact = min_stacked(c, table)
    arg = max(Fraction(1), rat - c.d)
    return NormValue(Fraction(1, _np_below(c, table)), 2, arg,
                     exact and c.d_exact)


def norm_ge_minus(a: NormValue, b: NormValue, eps: Fraction,
                  budget: int = DEFAULT_DIGIT_BUDGET) -> bool:
    """a >= b - eps for two compound norms (base 2, equal scales);
    exact cross-exponentiation when both are exact, else 1e-9 slack."""
    if a.base == b.base == 2 and a.scale == b.scale and a.exact and b.exact:
        e = eps / a.scale  # a >= b - eps <=> argA * 2^e >= argB
        p, q = e.numerator, e.denominator
        an, bn = a.argument, b.argument
        bits = q * max(an.numerator.bit_length(), an.denominator.bit_length())
        if bits + p <= budget:
            return an ** q * 2 ** p >= bn ** q
    return a.value() >= b.value() - float(eps) - FLOAT_SLACK


# ---------------------------------------------------------------------------
# Validation and order
# ---------------------------------------------------------------------------


def _family_ok(s: Subatom, fam: FamilyDescriptor) -> bool:
    return s.family == fam


def validate_compound(c, table) -> Report:
    sc = Scale(table)
    entries = []
    loc = f"{c.kind}@{c.n}"

    def emit(clause, ok, detail=""):
        entries.append(ReportEntry(clause, loc, PASS if ok else FAIL,
                                   "checked", detail))

    emit("SuppInDom", set(c.supp) <= set(c.dom))
    emit("HalvingZero", bool(c.supp) or c.d == 0,
         f"d={c.d} with empty support" if not c.supp and c.d != 0 else "")
    emit("HalvingNonneg", c.d >= 0)
    if c.kind == "pr":
        cols = range(sc.iota_pr(c.n))
        shape_ok = set(c.grid) == {(i, j) for i in c.dom for j in cols}
        emit("GridShape", shape_ok)
        if shape_ok:
            emit("FamilyFit", all(_family_ok(c.grid[(i, j)], sc.pr_family(c.n, j))
                                  for i in c.dom for j in cols))
            for j in cols:
                heavy = [i for i in c.supp if not c.cell(i, j).is_trivial]
                if len(heavy) > 1:
                    emit("Modesty", False, f"column {j}: {heavy}")
                    break
            else:
                emit("Modesty", True)
            emit("TrivialOutside",
                 all(c.cell(i, j).is_trivial
                     for i in c.dom if i not in c.supp for j in cols))
    else:
        cols = range(sc.istar(c.n))
        rows_ok = set(c.pr_indices) == set(c.supp) and all(
            c.pr_indices[a] and
            set(c.pr_indices[a]) <= set(range(sc.tsize(c.n)))
            for a in c.supp)
        emit("PrIndices", rows_ok)
        shape_ok = rows_ok and set(c.cells) == {
            (a, t, l) for a in c.supp for t in c.pr_indices[a] for l in cols
        } and set(c.outer) == {(a, l) for a in c.dom if a not in c.supp
                               for l in cols}
        emit("GridShape", shape_ok)
        if shape_ok:
            emit("FamilyFit",
                 all(_family_ok(c.cells[(a, t, l)], sc.lc_family(c.n, t, l))
                     for (a, t, l) in c.cells) and
                 all(_family_ok(s, sc.lc_family(c.n, sc.tmax(c.n), l))
                     for (a, l), s in c.outer.items()))
            for l in cols:
                heavy = [(a, t) for a, t in c.units()
                         if not c.cell(a, t, l).is_trivial]
                if len(heavy) > 1:
                    emit("StrongModesty", False, f"column {l}: {heavy}")
                    break
            else:
                emit("StrongModesty", True)
            emit("TrivialOutside", all(s.is_trivial for s in c.outer.values()))
    return Report(entries)


def compound_leq(cp, c) -> bool:
    """cp <= c: larger domain agreeing on supports, cellwise shrink,
    halving grows."""
    if cp.kind != c.kind or cp.n != c.n:
        return False
    if not set(c.dom) <= set(cp.dom):
        return False
    if set(cp.supp) & set(c.dom) != set(c.supp):
        return False
    if cp.d < c.d:
        return False
    if c.kind == "pr":
        for (i, j), s in c.grid.items():
            if not set(cp.grid[(i, j)].members) <= set(s.members):
                return False
        return True
    for a in c.supp:
        if not set(cp.pr_indices[a]) <= set(c.pr_indices[a]):
            return False
        for t in cp.pr_indices[a]:
            for (b, u, l), s in cp.cells.items():
                if b == a and u == t:
                    if not set(s.members) <= set(c.cells[(a, t, l)].members):
                        return False
    for key, s in c.outer.items():
        if key in cp.outer and cp.outer[key] != s:
            return False
    return True


# ---------------------------------------------------------------------------
# Disjointification (witness sets)
# ---------------------------------------------------------------------------


def disjointify(sets, m: int):
    """Pairwise disjoint B_i subseteq A_i with |B_i| >= ceil(|A_i|/3^(m+1)),
    greedily from the smallest set up."""
    if len(sets) > m + 1:
        raise TooManySets(f"{len(sets)} sets with budget m+1 = {m + 1}")
    order = sorted(range(len(sets)), key=lambda i: (len(sets[i]), i))
    used = set()
    out = [()] * len(sets)
    denom = 3 ** (m + 1)
    for i in order:
        a = sorted(sets[i])
        need = -(-len(a) // denom)
        avail = [x for x in a if x not in used]
        if len(avail) < need:
            raise CompoundError(
                "disjointification infeasible: sets too small and overlapping")
        b = tuple(avail[:need])
        used.update(b)
        out[i] = b
    return out


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def build_compound(kind: str, dom, supp, n: int, table,
                   pr_index_map=None):
    """A compound with the requested domain/support, halving 0 and norm
    > n: full subatoms on disjointified witness columns, deterministic
    singletons elsewhere."""
    sc = Scale(table)
    dom = tuple(sorted(set(dom)))
    supp = tuple(sorted(set(supp)))
    if not set(supp) <= set(dom):
        raise CompoundError("supp must be contained in dom")
    if kind == "pr":
        cols = list(range(sc.iota_pr(n)))
        grid = {}
        for i in dom:
            for j in cols:
                grid[(i, j)] = singleton_subatom(sc.pr_family(n, j))
        c = PrCompound(n, dom, supp, grid)
        if supp:
            try:
                wit = disjointify([tuple(cols)] * len(supp), n)
            except TooManySets as exc:
                raise NormInfeasible(str(exc)) from exc
            for i, b in zip(supp, wit):
                for j in b:
                    grid[(i, j)] = full_subatom(sc.pr_family(n, j))
            c = PrCompound(n, dom, supp, grid,
                           witness={i: b for i, b in zip(supp, wit)})
    elif kind == "lc":
        cols = list(range(sc.istar(n)))
        tmx = sc.tmax(n)
        outer = {(a, l): singleton_subatom(sc.lc_family(n, tmx, l))
                 for a in dom if a not in supp for l in cols}
        pr_index_map = {a: tuple(sorted(set(pr_index_map[a]))) for a in supp} \
            if pr_index_map else {a: (0,) for a in supp}
        units = [(a, t) for a in supp for t in pr_index_map[a]]
        cells = {(a, t, l): singleton_subatom(sc.lc_family(n, t, l))
                 for a, t in units for l in cols}
        c = LcCompound(n, dom, supp, pr_index_map, cells, outer)
        if supp:
            m = n * sc.tsize(n)
            try:
                wit = disjointify([tuple(cols)] * len(units), m)
            except TooManySets as exc:
                raise NormInfeasible(str(exc)) from exc
            for (a, t), b in zip(units, wit):
                for l in b:
                    cells[(a, t, l)] = full_subatom(sc.lc_family(n, t, l))
            c = LcCompound(n, dom, supp, pr_index_map, cells, outer,
                           witness={u: b for u, b in zip(units, wit)})
    else:
        raise CompoundError(f"unknown compound kind {kind!r}")

    if not supp and not dom:
        return c  # the trivial compound, norm = n by stipulation
    nv = compound_norm(c, table)
    target = make_norm(Fraction(n))
    if norm_vs_norm(nv, target) != GT:
        waived = ", ".join(sorted(sc.waived())) or "none"
        raise NormInfeasible(
            f"norm {nv.value():.4g} not above n = {n}; the table cannot "
            f"support the construction (waived clauses: {waived})")
    return c


# ---------------------------------------------------------------------------
# Amalgamation
# ---------------------------------------------------------------------------


def _common_agree(c0, c1):
    shared = set(c0.dom) & set(c1.dom)
    for a in shared:
        in0, in1 = a in c0.supp, a in c1.supp
        if in0 != in1:
            return False
        if c0.kind == "pr":
            js = {j for (i, j) in c0.grid if i == a}
            for j in js:
                if c0.grid[(a, j)] != c1.grid[(a, j)]:
                    return False
        else:
            if in0:
                if c0.pr_indices[a] != c1.pr_indices[a]:
                    return False
                for t in c0.pr_indices[a]:
                    ls = {l for (b, u, l) in c0.cells if b == a and u == t}
                    for l in ls:
                        if c0.cells[(a, t, l)] != c1.cells[(a, t, l)]:
                            return False
            else:
                ls = {l for (b, l) in c0.outer if b == a}
                for l in ls:
                    if c0.outer[(a, l)] != c1.outer[(a, l)]:
                        return False
    return True


def _union_fields(c0, c1, d):
    dom = tuple(sorted(set(c0.dom) | set(c1.dom)))
    supp = tuple(sorted(set(c0.supp) | set(c1.supp)))
    if c0.kind == "pr":
        grid = dict(c1.grid)
        grid.update(c0.grid)
        return PrCompound(c0.n, dom, supp, grid, d,
                          c0.d_exact and c1.d_exact)
    pri = dict(c1.pr_indices)
    pri.update(c0.pr_indices)
    cells = dict(c1.cells)
    cells.update(c0.cells)
    outer = dict(c1.outer)
    outer.update(c0.outer)
    return LcCompound(c0.n, dom, supp, pri, cells, outer, d,
                      c0.d_exact and c1.d_exact)


def amalgamate(c0, c1, table):
    """The common lower bound e of two compatible compounds:
    the canonical wedge when one support contains the other, otherwise
    the modesty-restoring construction over disjointified witnesses.
    The norm bound min - 1/nP (lc) resp. min - 1 (pr) is checked."""
    if c0.kind != c1.kind or c0.n != c1.n:
        raise HypothesisViolated("different kinds or levels")
    if not _common_agree(c0, c1):
        raise HypothesisViolated(
            "(i) the compounds disagree on their common domain")
    s0, s1 = set(c0.supp), set(c1.supp)
    nested = s0 <= s1 or s1 <= s0
    if nested:
        small, big = (c0, c1) if s0 <= s1 else (c1, c0)
        if small.d > big.d:
            raise HypothesisViolated(
                "(iii) the smaller support carries the larger halving")
        e = _union_fields(c0, c1, max(c0.d, c1.d))
    else:
        if len(s0 | s1) > c0.n:
            raise HypothesisViolated(
                f"(ii) union support of size {len(s0 | s1)} at level {c0.n}")
        if c0.d != c1.d:
            raise HypothesisViolated("(ii) halving parameters differ")
        e0 = _union_fields(c0, c1, c0.d)
        sc = Scale(table)
        if c0.kind == "pr":
            units = list(e0.supp)
            wits = []
            for i in units:
                owner = c0 if i in s0 else c1
                _, w = pr_stacked(owner, i, table)
                wits.append(w)
            bsets = disjointify(wits, c0.n)
            grid = dict(e0.grid)
            for i, b in zip(units, bsets):
                for j in range(sc.iota_pr(c0.n)):
                    if j not in b and not grid[(i, j)].is_trivial:
                        grid[(i, j)] = grid[(i, j)].subset(
                            [grid[(i, j)].members[0]])
            e = replace(e0, grid=grid,
                        witness={i: b for i, b in zip(units, bsets)})
        else:
            units = list(e0.units())
            wits = []
            for a, t in units:
                owner = c0 if a in s0 else c1
                _, w = lc_stacked(owner, a, t, table)
                wits.append(w)
            bsets = disjointify(wits, c0.n * sc.tsize(c0.n))
            cells = dict(e0.cells)
            for (a, t), b in zip(units, bsets):
                for l in range(sc.istar(c0.n)):
                    cell = cells[(a, t, l)]
                    if l not in b and not cell.is_trivial:
                        cells[(a, t, l)] = cell.subset([cell.members[0]])
            e = replace(e0, cells=cells,
                        witness={u: b for u, b in zip(units, bsets)})
    if not (compound_leq(e, c0) and compound_leq(e, c1)):
        raise CompoundError("amalgamation result not below both inputs")
    ne = compound_norm(e, table)
    n0 = compound_norm(c0, table)
    n1 = compound_norm(c1, table)
    nmin = n0 if norm_vs_norm(n0, n1) != GT else n1
    eps = Fraction(1) if c0.kind == "pr" else Fraction(1, Scale(table).nP_lc(c0.n))
    if not norm_ge_minus(ne, nmin, eps):
        raise CompoundError("amalgamation norm bound violated")
    return e


# ---------------------------------------------------------------------------
# Halving
# ---------------------------------------------------------------------------


def halve(c, table):
    """Replace the halving parameter by (D + d)/2 where D is the least
    stacked norm; unchanged on empty support."""
    if not c.supp:
        return c
    _, rat, exact = min_stacked(c, table)
    return replace(c, d=(rat + c.d) / 2, d_exact=c.d_exact and exact)


def unhalve_restore(cp, c, table):
    """Reset cp's halving parameter to c's, given cp <= halve(c) with
    positive norm; certifies norm >= norm(c) - 1/nP-below."""
    hc = halve(c, table)
    if not compound_leq(cp, hc):
        raise HypothesisViolated("input is not below the halved compound")
    ncp = compound_norm(cp, table)
    if not cp.supp or ncp.argument <= 1:
        raise UnhalveInfeasible("restoration needs positive norm")
    q = replace(cp, d=c.d, d_exact=cp.d_exact and c.d_exact)
    nq = compound_norm(q, table)
    eps = Fraction(1, _np_below(c, table))
    if not norm_ge_minus(nq, compound_norm(c, table), eps):
        raise CompoundError("unhalving norm bound violated")
    return q


# ---------------------------------------------------------------------------
# Possibilities
# ---------------------------------------------------------------------------


class PossSpace:
    """Lazy product of compound cells; coords is an ordered list of
    (coordinate, members)."""

    def __init__(self, coords, count_bound=None, limit=DEFAULT_ENUM_LIMIT):
        self.coords = coords
        self.count = 1
        for _, members in coords:
            self.count *= len(members)
        self.bound = count_bound
        self.bound_ok = None if count_bound is None else self.count <= count_bound
        if self.count > limit:
            raise LimitExceeded(f"{self.count} possibilities exceed the limit")

    def __iter__(self):
        keys = [k for k, _ in self.coords]
        for combo in product(*(members for _, members in self.coords)):
            yield dict(zip(keys, combo))

    def __len__(self):
        return self.count


def poss_compound(c, table, tbar=None, limit=DEFAULT_ENUM_LIMIT) -> PossSpace:
    """The possibility space: for pr all grid cells; for lc the cells of
    the chosen tuple row per index (tbar defaults to the first row of
    each) together with the trivial outer cells."""
    sc = Scale(table)
    if c.kind == "pr":
        coords = [((i, j), c.grid[(i, j)].members)
                  for i in c.dom for j in range(sc.iota_pr(c.n))]
        bound = 1  # the tuple space: one family value per sublevel column
        for j in range(sc.iota_pr(c.n)):
            bound *= sc.pr_sub(c.n, j)[2]
        return PossSpace(coords, count_bound=bound, limit=limit)
    if tbar is None:
        tbar = {a: c.pr_indices[a][0] for a in c.supp}
    for a in c.supp:
        if tbar[a] not in c.pr_indices[a]:
            raise CompoundError(f"tbar picks a row outside the index set at {a}")
    coords = []
    for a in c.dom:
        for l in range(sc.istar(c.n)):
            if a in c.supp:
                coords.append(((a, l), c.cells[(a, tbar[a], l)].members))
            else:
                coords.append(((a, l), c.outer[(a, l)].members))
    return PossSpace(coords, count_bound=sc.nS_Llc(c.n), limit=limit)


# ---------------------------------------------------------------------------
# Homogenisation
# ---------------------------------------------------------------------------


def _assignments(coords, limit=DEFAULT_ENUM_LIMIT):
    total = 1
    for _, members in coords:
        total *= len(members)
    if total > limit:
        raise LimitExceeded(f"{total} label evaluations exceed the limit")
    keys = [k for k, _ in coords]
    for combo in product(*(members for _, members in coords)):
        yield dict(zip(keys, combo))


def _check_pow_le(base: int, exp: int, bound: int) -> bool:
    if base <= 1:
        return True
    if exp * base.bit_length() > bound.bit_length() + exp:
        return False  # certainly larger
    return base ** exp <= bound


def _verify_dependence(coords, f, low_keys):
    """f constant on classes of possibilities agreeing on low_keys."""
    seen = {}
    for asg in _assignments(coords):
        key = tuple(asg[k] for k in low_keys)
        v = f(asg)
        if key in seen:
            if seen[key] != v:
                return False
        else:
            seen[key] = v
    return True


def _thin_positions(active, f, fixed):
    """Decreasing induction: thin each active (position-sorted) cell so
    the colouring no longer depends on it.  `active` is a list of
    (coord, Subatom) sorted by grid position ascending; `fixed` maps
    the remaining coords to their full member tuples.  Returns
    {coord: thinned Subatom}."""
    thinned = {coord: sub for coord, sub in active}
    for k in range(len(active) - 1, -1, -1):
        coord_k, sub_k = active[k]
        # representatives for already-thinned higher positions
        reps = {coord: thinned[coord].members[0]
                for coord, _ in active[k + 1:]}
        lower = [(coord, thinned[coord].members) for coord, _ in active[:k]]
        lower += [(coord, members) for coord, members in fixed]
        labels = {}
        values = {}
        for x in sub_k.members:
            sig = []
            for asg in _assignments(lower):
                asg.update(reps)
                asg[coord_k] = x
                sig.append(f(asg))
            sig = tuple(sig)
            if sig not in values:
                values[sig] = len(values)
            labels[x] = values[sig]
        m = sub_k.family.m
        if len(values) > m:
            raise HypothesisViolated(
                f"{len(values)} colour classes at {coord_k} exceed the "
                f"family base {m}")
        thinned[coord_k] = bigness_thin(sub_k, labels)
    return thinned


def _norm_loss_ok(old: Subatom, new: Subatom) -> bool:
    """norm(new) >= norm(old) - 1/m, exactly, for same-family subatoms."""
    m = old.family.m
    if old.family.kind == P_KIND:
        return m * len(new.members) >= len(old.members)
    from .subatoms import cov_norm
    return m * (cov_norm(new) + 1) >= cov_norm(old) + 1


def homogenize_lc(c: LcCompound, tbar, f, pivot, table, const=False,
                  limit=DEFAULT_ENUM_LIMIT) -> LcCompound:
    """Shrink the cells above the pivot position so f on the possibility
    space depends only on coordinates at positions <= pivot; per-cell
    norm loss <= 1/d at the shrunk positions, equality elsewhere.  With
    const=True (pivot at the minimum position, colour count within the
    nB budget) the result makes f constant."""
    sc = Scale(table)
    n = c.n
    istar, tsize = sc.istar(n), sc.tsize(n)
    t0, l0 = pivot
    if not (0 <= t0 < tsize and 0 <= l0 < istar):
        raise CompoundError("pivot outside the position grid")
    if tbar is None:
        tbar = {a: c.pr_indices[a][0] for a in c.supp}

    space = poss_compound(c, table, tbar, limit=limit)
    fvals = sorted({f(asg) for asg in space})
    bigm = len(fvals)

    # position of each possibility coordinate
    def pos(coord):
        a, l = coord
        return (tbar[a], l) if a in c.supp else (tsize - 1, l)

    if (t0, l0) == (tsize - 1, istar - 1) and not const:
        return c  # maximal pivot: nothing above it

    # hypothesis: bigm^(mS at pivot) <= d at the successor position
    succ = (t0, l0 + 1) if l0 + 1 < istar else (t0 + 1, 0)
    if succ[0] < tsize:
        ms = m_s(table, n, t0, l0).int_value
        d_succ = sc.lc_cell(n, succ[0], succ[1])["d"]
        if ms is None or not _check_pow_le(bigm, ms, d_succ):
            raise HypothesisViolated(
                f"M^(m^S at {pivot}) exceeds d at {succ} (M = {bigm})")

    active = []   # non-trivial coords strictly above the pivot
    fixed = []    # everything else, with full member tuples
    for (coord, members) in space.coords:
        a, l = coord
        if a in c.supp and len(members) > 1 and pos(coord) > (t0, l0):
            active.append((coord, c.cells[(a, tbar[a], l)]))
        else:
            fixed.append((coord, members))
    active.sort(key=lambda p: pos(p[0]))

    thinned = _thin_positions(active, f, fixed) if active else {}
    cells = dict(c.cells)
    for (a, l), sub in thinned.items():
        old = cells[(a, tbar[a], l)]
        if not _norm_loss_ok(old, sub):
            raise CompoundError(f"norm loss above 1/d at {(a, l)}")
        cells[(a, tbar[a], l)] = sub
    cp = replace(c, cells=cells)

    # verify the dependence claim exhaustively
    low_keys = [coord for coord, _ in space.coords if pos(coord) <= (t0, l0)]
    new_space = poss_compound(cp, table, tbar, limit=limit)
    if not _verify_dependence(new_space.coords, f, low_keys):
        raise CompoundError("dependence on the sub-pivot block failed")

    if const:
        if pivot != (0, 0):
            raise HypothesisViolated("constant mode needs the minimum pivot")
        if bigm > sc.nB_lc(n):
            raise HypothesisViolated(
                f"M = {bigm} exceeds the nB budget {sc.nB_lc(n)}")
        low_active = [(coord, cp.cells[(coord[0], tbar[coord[0]], coord[1])])
                      for coord, members in new_space.coords
                      if pos(coord) <= (t0, l0) and len(members) > 1
                      and coord[0] in c.supp]
        if low_active:
            (coord0, sub0) = low_active[0]
            others = [(coord, members) for coord, members in new_space.coords
                      if coord != coord0]
            reps = {coord: members[0] for coord, members in others}
            labels = {}
            vals = {}
            for x in sub0.members:
                asg = dict(reps)
                asg[coord0] = x
                v = f(asg)
                if v not in vals:
                    vals[v] = len(vals)
                labels[x] = vals[v]
            if len(vals) > sub0.family.m:
                raise HypothesisViolated(
                    "colour count at the pivot exceeds its family base")
            new_sub = bigness_thin(sub0, labels)
            if not _norm_loss_ok(sub0, new_sub):
                raise CompoundError("norm loss above 1/d at the pivot")
            cells = dict(cp.cells)
            cells[(coord0[0], tbar[coord0[0]], coord0[1])] = new_sub
            cp = replace(cp, cells=cells)
        final = poss_compound(cp, table, tbar, limit=limit)
        if len({f(asg) for asg in final}) > 1:
            raise CompoundError("constant mode failed to fix the colour")
    return cp


def homogenize_pr(c: PrCompound, f, L0: int, table,
                  limit=DEFAULT_ENUM_LIMIT) -> PrCompound:
    """Shrink the cells at sublevel columns >= L0 so f depends only on
    the coordinates below L0; per-cell norm loss <= 1/nB at the shrunk
    columns, equality below.  With L0 = 0 and the colour count within
    the nB budget the restriction becomes constant."""
    sc = Scale(table)
    n = c.n
    cols = sc.iota_pr(n)
    if not 0 <= L0 < cols:
        raise CompoundError("L0 outside the sublevel columns")
    space = poss_compound(c, table, limit=limit)
    bigm = len({f(asg) for asg in space})
    prod_below = 1
    for j in range(L0):
        prod_below *= sc.pr_sub(n, j)[2]
    if not _check_pow_le(bigm, prod_below, sc.nB_pr(n, L0)):
        raise HypothesisViolated(
            f"M^(poss below column {L0}) exceeds nB (M = {bigm})")

    active = []
    fixed = []
    for coord, members in space.coords:
        i, j = coord
        if i in c.supp and len(members) > 1 and j >= L0:
            active.append((coord, c.grid[coord]))
        else:
            fixed.append((coord, members))
    active.sort(key=lambda p: p[0][1])

    thinned = _thin_positions(active, f, fixed) if active else {}
    grid = dict(c.grid)
    for coord, sub in thinned.items():
        if not _norm_loss_ok(grid[coord], sub):
            raise CompoundError(f"norm loss above 1/nB at {coord}")
        grid[coord] = sub
    cp = replace(c, grid=grid)
    low_keys = [coord for coord, _ in space.coords if coord[1] < L0]
    new_space = poss_compound(cp, table, limit=limit)
    if not _verify_dependence(new_space.coords, f, low_keys):
        raise CompoundError("dependence below the column failed")
    return cp


# ---------------------------------------------------------------------------
# Separated support
# ---------------------------------------------------------------------------


def separate_pr(c: PrCompound, table, i0=None) -> PrCompound:
    """Remove the pivot's (singleton, by modesty) values from the other
    non-trivial cells; with i0 omitted, iterate over the whole support.
    Norm bound: >= norm(c) - |pivots|/nB."""
    sc = Scale(table)
    pivots = [i0] if i0 is not None else list(c.supp)
    grid = dict(c.grid)
    for p in pivots:
        if p not in c.supp:
            raise CompoundError(f"{p} is not in the support")
        for i in c.supp:
            if i == p:
                continue
            for j in range(sc.iota_pr(c.n)):
                cell = grid[(i, j)]
                if cell.is_trivial:
                    continue
                rest = [x for x in cell.members
                        if x not in grid[(p, j)].members]
                if rest:
                    grid[(i, j)] = cell.subset(rest)
    d = replace(c, grid=grid)
    nd = compound_norm(d, table)
    eps = Fraction(len(pivots), sc.nB_pr(c.n, 0))
    if not norm_ge_minus(nd, compound_norm(c, table), eps):
        raise CompoundError("separation norm bound violated")
    return d


def is_separated(c: PrCompound, table) -> bool:
    sc = Scale(table)
    for i in c.supp:
        for j in range(sc.iota_pr(c.n)):
            if c.cell(i, j).is_trivial:
                continue
            for i2 in c.supp:
                if i2 != i and set(c.cell(i, j).members) & \
                        set(c.cell(i2, j).members):
                    return False
    return True


# ---------------------------------------------------------------------------
# Lab tables: hand-sized TOY tables for compound experiments
# ---------------------------------------------------------------------------


def craft_lab_table(levels, toy_cap=10 ** 6) -> ParameterTable:
    """A TOY table from explicit per-level dictionaries.  Each level dict
    may set: pr (list of (nP, nB, Tstar)), tsize, istar, lc_cells
    ((t, l) -> dict with d, h, b, nS), lc_g/lc_a per t, al_cells
    (t -> dict with d, h, g, b, a, nS), nP_lc, nB_lc, nP_al, nB_al,
    nP_next, nS_top.  The manifest is computed by running the verifier."""
    built = []
    for n, spec in enumerate(levels):
        pr = tuple(PrSub(Q.of(a), Q.of(b), Q.of(c))
                   for a, b, c in spec.get("pr", [(3, 28, 3)]))
        tsize = spec.get("tsize", 2)
        istar = spec.get("istar", 2)
        entries = {}
        tstats = {}
        col_max_ns = [1] * istar
        for t in range(tsize):
            bs, hs = [], []
            for l in range(istar):
                cell = spec["lc_cells"][(t, l)]
                entries[(t, l)] = Entry({k: Q.of(cell[k])
                                         for k in ("d", "h", "b", "nS")})
                bs.append(cell["b"])
                hs.append(cell["h"])
                col_max_ns[l] = max(col_max_ns[l], cell["nS"])
            bstar = 1
            rem = 1
            for b, h in zip(bs, hs):
                bstar *= b
                rem *= b - h
            g = spec.get("lc_g", {}).get(t, bs[0])
            a = spec.get("lc_a", {}).get(t, bstar + 1)
            hstar = bstar - rem
            tstats[t] = TStat(Q.of(g), Q.of(a), Q.of(bstar), Q.of(hstar),
                              LDiff.of(lint(hstar)))
        lc = Schedule("lc", "explicit", Q.of(tsize), Q.of(istar), entries,
                      tstats, ratio_base=1, rule={})
        al_entries = {}
        for t in range(tsize):
            cell = spec.get("al_cells", {}).get(
                t, {"d": 3, "h": 5, "g": 7, "b": 36, "a": 37, "nS": 6})
            al_entries[(t, 0)] = Entry({k: Q.of(cell[k])
                                        for k in ("d", "h", "g", "b", "a", "nS")})
        al = Schedule("al", "explicit", Q.of(tsize), Q.of(1), al_entries, {},
                      ratio_base=1, rule={})
        lvl = Level(
            n=n, iota_pr=Q.of(len(pr)), pr=pr, pr_complete=True,
            Tsize=Q.of(tsize), nS_top=Q.of(spec.get("nS_top", 3)),
            nP_lc=Q.of(spec.get("nP_lc", 4)), iota_star=Q.of(istar),
            nB_lc=Q.of(spec.get("nB_lc", 2)), lc=lc,
            nS_Llc=Q.of(spec.get("nS_Llc", math.prod(col_max_ns))),
            nP_al=Q.of(spec.get("nP_al", 8)),
            nB_al=Q.of(spec.get("nB_al", 4)), al=al,
            nS_Lal=Q.of(spec.get("nS_Lal", 8)),
            nP_next=Q.of(spec.get("nP_next", 16)))
        built.append(lvl)
    table = ParameterTable(TOY, len(built), tuple(built),
                           {"waived": [], "relaxed": []}, toy_cap, 1,
                           DEFAULT_DIGIT_BUDGET, DEFAULT_DEPTH_CAP,
                           {"crafted": True})
    report = verify_table(table)
    waived = sorted({e.clause for e in report.entries if e.status == FAIL})
    return replace(table, manifest={"waived": waived, "relaxed": []})


def friendly_level(n: int = 0) -> dict:
    """A level spec whose numbers make homogenisation feasible for a
    two-colour function: tiny families whose chained d-budgets dominate
    2 to the power of the possibility count below each position."""
    ns0 = count_subsets_le(4, 2)   # 11
    ns1 = count_subsets_le(6, 2)   # 22
    return {
        "pr": [(3, 2, 5), (3, 64, 5)],
        "tsize": 2,
        "istar": 2,
        "lc_cells": {
            (0, 0): {"d": 2, "h": 2, "b": 4, "nS": ns0},
            (0, 1): {"d": 2 ** ns0, "h": 2, "b": 6, "nS": ns1},
            (1, 0): {"d": 2 ** (ns0 * ns1), "h": 2, "b": 6, "nS": ns1},
            (1, 1): {"d": 2 ** (ns1 * ns1), "h": 2, "b": 6, "nS": ns1},
        },
        "nB_lc": 2,
        "nP_lc": 4,
        "nS_top": 3,
    }


def friendly_table(depth: int = 1) -> ParameterTable:
    return craft_lab_table([friendly_level(n) for n in range(depth)])


def wide_level(n: int = 0, cols: int = 10, tstar: int = 5) -> dict:
    """A level spec wide enough for norm-positive builders at level 0:
    after the disjointification loss of 1 a witness of cols/3 columns
    still has mu above 1, and each full family has norm above 1.  With
    cols = 28 and tstar = 17 the minimum stacked norm exceeds 2, which
    makes pr halving reversible."""
    cell = {"d": 2, "h": 4, "b": 5, "nS": count_subsets_le(5, 4)}
    return {
        "pr": [(3, 2, tstar)] * cols,
        "tsize": 2,
        "istar": cols,
        "lc_cells": {(t, l): dict(cell)
                     for t in range(2) for l in range(cols)},
        "nB_lc": 2,
        "nP_lc": 4,
        "nS_top": 3,
    }


def wide_table(depth: int = 1, cols: int = 10, tstar: int = 5) -> ParameterTable:
    return craft_lab_table([wide_level(n, cols, tstar) for n in range(depth)])
