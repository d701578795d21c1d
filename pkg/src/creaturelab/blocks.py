"""Blocks of parameters and the finite kernels of their Tukey maps.

A block is a sextuple of strictly increasing sequences
d, h, g, b, f, a together with two interval partitions of the naturals:
I_n of width d(n) and J_n of width g(n).  The clauses are:

  B1  k in I_n implies k^n in J_n
  B2  g(n) * h(n) < b(n)
  B3  f(k) >= sum_{j<=n} h(j) * ceil(log2 b(j)) for k in J_n
  B4  f(k^n) <= floor(log2 a(n)) for k in I_n
  B5  b(n) <= a(n) and d(n) <= h(n)

Universal clauses are decided at interval endpoints (k maps to k^n and f
are monotone; the intervals themselves are astronomically long in the
exact regime).  Values are exact layered differences, so comparisons are
decidable; only closed-form logarithms can fail, and those spots are
reported UNKNOWN rather than guessed.

The module also hosts desk-size instances of the localisation relations
(membership in a slalom, the block-wise variant over a partition) and
the two constructive Tukey kernels: the product-slalom collapse
(phi*(n) = b*(n) minus the complement product) and the bit-string
avoidance argument for the covering map.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .hyper import EQ, GT, LT, UNKNOWN
from .layered import (LDiff, LInt, L0, L1, LayeredError, ladd, lcmp, lint,
                      llog2_ceil, llog2_floor, lmul)
from .params import (FP_ONLY, TOY, ParameterTable, Report, ReportEntry,
                     PASS, FAIL)

VACUOUS = "VACUOUS"
DEFAULT_ENUM_LIMIT = 1 << 20

MINUS_ONE = LDiff(L0, L1)


class BlockError(Exception):
    pass


class TableMissingFunctions(BlockError):
    pass


class HypothesisViolated(BlockError):
    pass


class LimitExceeded(BlockError):
    pass


def ld(v) -> LDiff:
    if isinstance(v, LDiff):
        return v
    if isinstance(v, LInt):
        return LDiff.of(v)
    return LDiff.of(lint(int(v)))


def ldiff_pow(x: LDiff, n: int) -> LDiff:
    out = ld(1)
    for _ in range(n):
        out = out.mul(x)
    return out


def _ld_lint(x: LDiff) -> LInt | None:
    """The value as a plain layered integer when the negative part
    vanishes or cancels."""
    if x.neg.is_zero():
        return x.pos
    return x.exact()


@dataclass(frozen=True)
class Block:
    """Six sequences over a finite horizon, f as per-interval base sums
    (f(k) = f_base(n) + k - min J_n on J_n)."""

    horizon: int
    d: tuple
    h: tuple
    g: tuple
    b: tuple
    a: tuple
    f_base: tuple
    bminus: tuple = ()   # per level: tuple of per-column b values (LInt)
    hminus: tuple = ()
    table: str = ""

    def __post_init__(self):
        for name in ("d", "h", "g", "b", "a", "f_base"):
            seq = tuple(ld(v) for v in getattr(self, name))
            if len(seq) < self.horizon:
                raise BlockError(f"{name} shorter than the horizon")
            object.__setattr__(self, name, seq)

    def i_bounds(self, n: int) -> tuple:
        """(min I_n, max I_n) as layered differences."""
        lo = ld(0)
        for j in range(n):
            lo = lo.add(self.d[j])
        return lo, lo.add(self.d[n]).add(MINUS_ONE)

    def j_bounds(self, n: int) -> tuple:
        lo = ld(0)
        for j in range(n):
            lo = lo.add(self.g[j])
        return lo, lo.add(self.g[n]).add(MINUS_ONE)

    def f_at(self, k: LDiff):
        """(value, interval) of f at the point k, or (None, None) when k
        lies beyond the materialised J intervals."""
        lo = ld(0)
        for n in range(self.horizon):
            hi = lo.add(self.g[n])
            if k.cmp(lo) != LT and k.cmp(hi) == LT:
                neg_lo = LDiff(lo.neg, lo.pos)
                return self.f_base[n].add(k).add(neg_lo), n
            lo = hi
        return None, None

    def to_json(self):
        out = {"horizon": self.horizon, "table": self.table}
        for name in ("d", "h", "g", "b", "a", "f_base"):
            out[name] = [v.to_json() for v in getattr(self, name)]
        out["bminus"] = [[v.to_json() for v in row] for row in self.bminus]
        out["hminus"] = [[v.to_json() for v in row] for row in self.hminus]
        return out

    @staticmethod
    def from_json(obj) -> "Block":
        seqs = {name: tuple(LDiff.from_json(v) for v in obj[name])
                for name in ("d", "h", "g", "b", "a", "f_base")}
        return Block(
            obj["horizon"], seqs["d"], seqs["h"], seqs["g"], seqs["b"],
            seqs["a"], seqs["f_base"],
            tuple(tuple(LInt.from_json(v) for v in row)
                  for row in obj.get("bminus", [])),
            tuple(tuple(LInt.from_json(v) for v in row)
                  for row in obj.get("hminus", [])),
            obj.get("table", ""))


def make_block(d, h, g, b, a, f_base=None) -> Block:
    """A block from plain integer sequences; f defaults to the clause-B3
    prefix sums so hand-built examples start from a conforming f."""
    n = len(d)
    if f_base is None:
        f_base, acc = [], ld(0)
        for j in range(n):
            acc = acc.add(ld(h[j] * max(1, (b[j] - 1).bit_length())))
            f_base.append(acc)
    return Block(n, tuple(map(ld, d)), tuple(map(ld, h)), tuple(map(ld, g)),
                 tuple(map(ld, b)), tuple(map(ld, a)),
                 tuple(map(ld, f_base)))


# ---------------------------------------------------------------------------
# Clause checking
# ---------------------------------------------------------------------------


def _log2_ceil_ld(x: LDiff):
    v = _ld_lint(x)
    if v is None:
        return None
    try:
        return llog2_ceil(v)
    except LayeredError:
        return None


def _log2_floor_ld(x: LDiff):
    v = _ld_lint(x)
    if v is None:
        return None
    try:
        return llog2_floor(v)
    except LayeredError:
        return None


def check_block(blk: Block, horizon: int | None = None) -> Report:
    N = blk.horizon if horizon is None else min(horizon, blk.horizon)
    entries = []

    def emit(clause, loc, status, method="endpoint", detail=""):
        entries.append(ReportEntry(clause, loc, status, method, detail))

    # strict monotonicity of the stored sequences
    for name in ("d", "h", "g", "b", "a"):
        seq = getattr(blk, name)
        bad = [n for n in range(N - 1) if seq[n].cmp(seq[n + 1]) != LT]
        emit("INC", name, PASS if not bad else FAIL, "exact",
             f"not increasing at {bad}" if bad else "")
    # f increasing across interval boundaries:
    # f(max J_n) < f(min J_{n+1})  <=>  f_base(n) + g(n) - 1 < f_base(n+1)
    bad = [n for n in range(N - 1)
           if blk.f_base[n].add(blk.g[n]).add(MINUS_ONE)
           .cmp(blk.f_base[n + 1]) != LT]
    emit("INC", "f", PASS if not bad else FAIL, "endpoint",
         f"boundary drop at {bad}" if bad else "")

    for n in range(N):
        loc = f"n={n}"
        i_lo, i_hi = blk.i_bounds(n)
        j_lo, j_hi = blk.j_bounds(n)
        # B1: endpoints of I_n map into J_n under k -> k^n
        lo_p, hi_p = ldiff_pow(i_lo, n), ldiff_pow(i_hi, n)
        ok = lo_p.cmp(j_lo) != LT and hi_p.cmp(j_hi) != GT
        emit("B1", loc, PASS if ok else FAIL, "endpoint",
             "" if ok else "interval image escapes J")
        # B2: g(n) h(n) < b(n)
        gh = blk.g[n].mul(blk.h[n])
        emit("B2", loc, PASS if gh.cmp(blk.b[n]) == LT else FAIL, "exact")
        # B3: f at min J_n >= sum_{j<=n} h(j) ceil(log2 b(j))
        total, unknown = ld(0), False
        for j in range(n + 1):
            lg = _log2_ceil_ld(blk.b[j])
            if lg is None:
                unknown = True
                break
            total = total.add(blk.h[j].mul_lint(lg))
        if unknown:
            emit("B3", loc, UNKNOWN, "endpoint", "log2 not in closed form")
        else:
            emit("B3", loc, PASS if blk.f_base[n].cmp(total) != LT else FAIL,
                 "endpoint")
        # B4: f((max I_n)^n) <= floor(log2 a(n))
        fval, _ = blk.f_at(hi_p)
        lg = _log2_floor_ld(blk.a[n])
        if fval is None or lg is None:
            emit("B4", loc, UNKNOWN, "endpoint",
                 "point beyond materialised intervals" if fval is None
                 else "log2 not in closed form")
        else:
            emit("B4", loc, PASS if fval.cmp_lint(lg) != GT else FAIL,
                 "endpoint")
        # B5: b <= a and d <= h
        ok = blk.b[n].cmp(blk.a[n]) != GT and blk.d[n].cmp(blk.h[n]) != GT
        emit("B5", loc, PASS if ok else FAIL, "exact")
    return Report(entries)


# ---------------------------------------------------------------------------
# Deriving blocks from parameter tables
# ---------------------------------------------------------------------------


def _exact(q, what: str) -> LInt:
    if q.exact is None:
        raise TableMissingFunctions(f"{what} has no exact value")
    return q.exact


def derive_block(table: ParameterTable, y, kind: str,
                 horizon: int | None = None) -> Block:
    """The block a tuple choice y induces: per level n the row y(n) of
    the schedule supplies the entries; the first component is d for the
    localisation block and h itself for the anti-localisation block."""
    if table.regime not in (FP_ONLY, TOY):
        raise TableMissingFunctions(
            f"blocks need enumerable schedule rows, not {table.regime}")
    if kind not in ("lc", "al"):
        raise BlockError(f"unknown block kind {kind!r}")
    N = table.depth if horizon is None else min(horizon, table.depth)
    if len(y) < N:
        raise BlockError("tuple choice shorter than the horizon")
    d, h, g, b, a = [], [], [], [], []
    bminus, hminus = [], []
    for n in range(N):
        lvl = table.level(n)
        sched = lvl.lc if kind == "lc" else lvl.al
        if sched.kind != "explicit":
            raise TableMissingFunctions("schedule rows are not explicit")
        tcount = sched.tcount.int_value
        t = int(y[n])
        if tcount is None or not 0 <= t < tcount:
            raise BlockError(f"tuple choice {t} outside the row range at {n}")
        if kind == "lc":
            ts = sched.tstats[t]
            d.append(ld(_exact(sched.entries[(t, 0)].q["d"], "d")))
            b.append(ld(_exact(ts.bstar, "b*")))
            if ts.hstar_diff is not None:
                h.append(ts.hstar_diff)
            else:
                h.append(ld(_exact(ts.hstar, "h*")))
            g.append(ld(_exact(ts.g, "g")))
            a.append(ld(_exact(ts.a, "a")))
            lcount = sched.lcount.int_value
            bminus.append(tuple(_exact(sched.entries[(t, l)].q["b"], "b")
                                for l in range(lcount)))
            hminus.append(tuple(_exact(sched.entries[(t, l)].q["h"], "h")
                                for l in range(lcount)))
        else:
            e = sched.entries[(t, 0)].q
            hv = ld(_exact(e["h"], "h"))
            d.append(hv)
            h.append(hv)
            g.append(ld(_exact(e["g"], "g")))
            b.append(ld(_exact(e["b"], "b")))
            a.append(ld(_exact(e["a"], "a")))
    f_base, acc = [], ld(0)
    for n in range(N):
        lg = _log2_ceil_ld(b[n])
        if lg is None:
            raise TableMissingFunctions(
                f"ceil(log2 b({n})) not in closed form")
        acc = acc.add(h[n].mul_lint(lg))
        f_base.append(acc)
    return Block(N, tuple(d), tuple(h), tuple(g), tuple(b), tuple(a),
                 tuple(f_base), tuple(bminus), tuple(hminus))


# ---------------------------------------------------------------------------
# Desk-size relation instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ToyRelationInstance:
    """A finite window of a localisation scenario: ground sizes b, width
    budget h, a point x with x(l) < b(l), and a slalom phi given as sets;
    positions where phi escapes its bounds are listed in `exceptions`
    (finitely many, per the starred slalom space)."""

    N: int
    b: tuple
    h: tuple
    x: tuple
    phi: tuple          # tuple of frozensets
    exceptions: frozenset = frozenset()
    partition: tuple = ()   # tuple of tuples of positions, or ()

    def __post_init__(self):
        object.__setattr__(self, "phi",
                           tuple(frozenset(s) for s in self.phi))
        for name in ("b", "h", "x"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "exceptions", frozenset(self.exceptions))
        object.__setattr__(self, "partition",
                           tuple(tuple(blkk) for blkk in self.partition))
        if not (len(self.b) == len(self.h) == len(self.x)
                == len(self.phi) == self.N):
            raise BlockError("sequence lengths disagree with the window")
        for l in range(self.N):
            if l in self.exceptions:
                continue
            if not set(self.phi[l]) <= set(range(self.b[l])):
                raise BlockError(f"slalom escapes the ground set at {l}")
            if len(self.phi[l]) > self.h[l]:
                raise BlockError(f"slalom width exceeds h at {l}")


def rel_holds(kind: str, inst: ToyRelationInstance, cutoff: int = 0) -> bool:
    """Finite-prefix reading of the tail relations: the 'all but
    finitely many' quantifier becomes 'for all positions >= cutoff
    inside the window', the 'infinitely many' one becomes 'for some'."""
    if kind == "in_star":
        return all(inst.x[l] in inst.phi[l]
                   for l in range(cutoff, inst.N))
    if kind == "in_infty":
        return any(inst.x[l] in inst.phi[l]
                   for l in range(cutoff, inst.N))
    if kind == "in_Ibar":
        if not inst.partition:
            raise BlockError("in_Ibar needs a partition")
        return all(any(inst.x[l] in inst.phi[l] for l in blkk)
                   for m, blkk in enumerate(inst.partition) if m >= cutoff)
    raise BlockError(f"unknown relation kind {kind!r}")


# ---------------------------------------------------------------------------
# Tukey kernel: product-slalom collapse
# ---------------------------------------------------------------------------


def tukey_lc214(inst: ToyRelationInstance, x_star=None,
                limit: int = DEFAULT_ENUM_LIMIT) -> dict:
    """The collapse of a per-column slalom to a product slalom:
    phi*(n) is the set of row tuples hitting phi in some column of the
    n-th partition block.  Verifies, per block, the equivalence
    "tuple in phi* iff some column value in phi" over the whole product,
    and the width bound |phi*(n)| <= b*(n) - prod(b - h)."""
    if not inst.partition:
        raise BlockError("the collapse needs a partition")
    out = {"blocks": [], "iff": True, "width_ok": True}
    for n, blkk in enumerate(inst.partition):
        sizes = [inst.b[l] for l in blkk]
        total = 1
        for s in sizes:
            total *= s
        if total > limit:
            raise LimitExceeded(f"product {total} beyond the budget")
        phi_star = set()
        for tup in product(*(range(s) for s in sizes)):
            if any(v in inst.phi[l] for v, l in zip(tup, blkk)):
                phi_star.add(tup)
        bstar = total
        hstar = bstar
        prod_compl = 1
        for l in blkk:
            prod_compl *= inst.b[l] - len(inst.phi[l] & set(range(inst.b[l])))
        hstar = bstar - prod_compl
        width_ok = len(phi_star) <= hstar
        # pointwise equivalence over the whole product
        iff = all((tup in phi_star)
                  == any(v in inst.phi[l] for v, l in zip(tup, blkk))
                  for tup in product(*(range(s) for s in sizes)))
        out["blocks"].append({"n": n, "phi_star": phi_star, "bstar": bstar,
                              "hstar": hstar, "width_ok": width_ok,
                              "iff": iff})
        out["iff"] = out["iff"] and iff
        out["width_ok"] = out["width_ok"] and width_ok
    # the forward map on a point of the product space: flatten
    if x_star is not None:
        flat = {}
        for n, blkk in enumerate(inst.partition):
            for pos, l in enumerate(blkk):
                flat[l] = x_star[n][pos]
        out["F"] = tuple(flat[l] for l in sorted(flat))
        out["hits"] = tuple(tuple(x_star[n]) in out["blocks"][n]["phi_star"]
                            for n in range(len(inst.partition)))
    return out


# ---------------------------------------------------------------------------
# Tukey kernel: bit-string avoidance
# ---------------------------------------------------------------------------


def _code_len(bn: int) -> int:
    return max(1, (bn - 1).bit_length())


def _encode(bn: int, v: int) -> str:
    return format(v, f"0{_code_len(bn)}b")


def tukey_cov29(S, sigma, b, g, h) -> dict:
    """The avoidance kernel: F(S) is the concatenation of fixed-width
    codes of a non-empty completion of S; H(n) collects the values the
    sigma-strings can decode at block n; G avoids H(n).  For every block
    where some sigma-string indexed inside J_n is a prefix of F(S), the
    avoided value is certified to lie outside S(n); blocks without such
    a hit are reported VACUOUS."""
    N = len(b)
    if not (len(S) == len(g) == len(h) == N):
        raise BlockError("parameter lengths disagree")
    # completion: per the construction, S'(n) is non-empty of size h(n)
    s_prime = []
    for n in range(N):
        vals = sorted(set(S[n]))
        if not set(vals) <= set(range(b[n])) or len(vals) > h[n]:
            raise HypothesisViolated(f"S escapes its bounds at n={n}")
        if h[n] < 1:
            raise HypothesisViolated(f"h({n}) < 1 leaves no room to encode")
        if not vals:
            vals = [0]
        while len(vals) < h[n]:
            vals.append(vals[-1])
        s_prime.append(vals)
    fs = "".join(_encode(b[n], v) for n in range(N) for v in s_prime[n])

    # the (n, l)-interval partition of bit positions, widths ceil(log2 b(n))
    starts = []
    pos = 0
    for n in range(N):
        row = []
        for _ in range(h[n]):
            row.append((pos, pos + _code_len(b[n])))
            pos += _code_len(b[n])
        starts.append(row)

    # J intervals over the sigma indices
    j_lo = [0]
    for n in range(N):
        j_lo.append(j_lo[-1] + g[n])

    entries = []
    H = []
    gx = []
    for n in range(N):
        if g[n] * h[n] >= b[n]:
            raise HypothesisViolated(
                f"g({n})h({n}) >= b({n}): avoidance impossible")
        hn = set()
        for k in range(j_lo[n], min(j_lo[n + 1], len(sigma))):
            s = sigma[k]
            for (lo, hi) in starts[n]:
                if hi <= len(s):
                    hn.add(int(s[lo:hi], 2))
        hn &= set(range(b[n]))
        H.append(hn)
        avoid = next(v for v in range(b[n]) if v not in hn)
        gx.append(avoid)
        # the obligation needs the string to reach past every code of
        # block n (the length hypothesis on the sigma-heights)
        needed = starts[n][-1][1] if starts[n] else 0
        hit = any(sigma[k] and len(sigma[k]) >= needed
                  and fs.startswith(sigma[k])
                  for k in range(j_lo[n], min(j_lo[n + 1], len(sigma))))
        if not hit:
            entries.append(ReportEntry("avoid", f"n={n}", VACUOUS,
                                       "prefix",
                                       "no sufficiently long prefix hit"))
        else:
            ok = avoid not in set(S[n])
            entries.append(ReportEntry("avoid", f"n={n}",
                                       PASS if ok else FAIL, "prefix",
                                       f"G={avoid}"))
    return {"F": fs, "H": H, "G": gx, "report": Report(entries)}


# ---------------------------------------------------------------------------
# Domination of f by the level-log of a
# ---------------------------------------------------------------------------


def gad_check(blk: Block, m: int, horizon: int | None = None) -> Report:
    """The finite part of the domination argument: past the threshold m,
    the image of each I_n endpoint under k -> k^n keeps f at or below
    the level-log of a(n).  The floor form is graded; the ceiling form
    (an alternative reading) is reported alongside without grading."""
    N = blk.horizon if horizon is None else min(horizon, blk.horizon)
    entries = []
    if m >= N - 1:
        entries.append(ReportEntry("gad", f"m={m}", PASS, "vacuous",
                                   "no levels past the threshold"))
        return Report(entries)
    for n in range(m + 1, N):
        _, i_hi = blk.i_bounds(n)
        p = ldiff_pow(i_hi, n)
        fval, _ = blk.f_at(p)
        floor_lg = _log2_floor_ld(blk.a[n])
        if fval is None or floor_lg is None:
            entries.append(ReportEntry("gad", f"m={m},n={n}", UNKNOWN,
                                       "endpoint", "not in closed form"))
            continue
        ok = fval.cmp_lint(floor_lg) != GT
        ceil_lg = _log2_ceil_ld(blk.a[n])
        ceil_note = ""
        if ceil_lg is not None:
            ceil_note = ("; ceiling form "
                         + ("holds" if fval.cmp_lint(ceil_lg) != GT
                            else "fails"))
        entries.append(ReportEntry("gad", f"m={m},n={n}",
                                   PASS if ok else FAIL, "endpoint",
                                   "floor form" + ceil_note))
    return Report(entries)


# ---------------------------------------------------------------------------
# The inequality diagram
# ---------------------------------------------------------------------------

DIAGRAM_NODES = (
    ("v_all_ad", "v-all(a,d)"),
    ("v_all_bh", "v-all(b,h)"),
    ("v_exists_ad", "v-exists(a,d)"),
    ("add_If", "add(I_f)"),
    ("cov_If", "cov(I_f)"),
    ("non_If", "non(I_f)"),
    ("cof_If", "cof(I_f)"),
    ("c_exists_ad", "c-exists(a,d)"),
    ("c_all_bh", "c-all(b,h)"),
    ("c_all_ad", "c-all(a,d)"),
)

DIAGRAM_EDGES = (
    ("v_all_ad", "v_all_bh"),
    ("v_all_bh", "cov_If"),
    ("cov_If", "c_exists_ad"),
    ("c_exists_ad", "c_all_ad"),
    ("v_all_ad", "v_exists_ad"),
    ("v_exists_ad", "non_If"),
    ("non_If", "c_all_bh"),
    ("c_all_bh", "c_all_ad"),
)


def diagram_emit(blk_id: str = "block", fmt: str = "dot") -> str:
    if fmt == "text":
        lines = [f"# inequality diagram for {blk_id}"]
        for src, _ in DIAGRAM_NODES:
            succ = [dst for s, dst in DIAGRAM_EDGES if s == src]
            lines.append(f"{src}: {' '.join(succ) if succ else '-'}")
        return "\n".join(lines) + "\n"
    lines = [f'digraph "{blk_id}" {{', "  rankdir=LR;"]
    for name, label in DIAGRAM_NODES:
        lines.append(f'  {name} [label="{label}"];')
    for src, dst in DIAGRAM_EDGES:
        lines.append(f"  {src} -> {dst};")
    lines.append("}")
    return "\n".join(lines) + "\n"
