"""Finite condition fragments over a frame and an enumerable table.

A fragment materialises finitely many levels of a three-part condition:

  pr-part - one PrCompound per level, domain = the pr support;
  lc-part - one LcCompound per level, domain = the lc support, whose
            tuple rows are exactly the possibility codes of the pr-part
            at the owner index;
  al-part - per (index, level) an AtomicCreature from the trunk on,
            a trivial subatom below.

The limit clauses of the infinite object (support density, norm
divergence, limsup norms) are replaced by a tail manifest: a dictionary
of declared numeric promises compared by pointwise domination in the
order.

Operations: clause-by-clause validation, the order with its trunk-window
clauses, possibility enumeration with the counting bound, the wedge
p AND eta deciding the generic below a height, restriction to a closed
label set, the modesty transform, support separation, the downward
homogenisation cascade, and generic-value extraction with derived
slalom values.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import product

from .hyper import GT, make_norm, norm_vs_norm
from .params import FAIL, Frame, Height, PASS, Q, Report, ReportEntry
from .subatoms import LimitExceeded, Subatom, subatom_norm, bigness_thin
from .compounds import (AtomicCreature, CompoundError, DEFAULT_ENUM_LIMIT,
                        HypothesisViolated, LcCompound, PrCompound, Scale,
                        atomic_leq, compound_leq, compound_norm,
                        homogenize_lc, homogenize_pr, separate_pr,
                        singleton_subatom, table_fingerprint, validate_compound,
                        _norm_loss_ok)

DEFAULT_TAIL = {
    "pr_norm_divergence": 1,
    "lc_norm_divergence": 1,
    "al_norm_limsup": 1,
    "supp_decay": 1,
}


class CondError(Exception):
    pass


class FrameMismatch(CondError):
    pass


class NotAPossibility(CondError):
    pass


class NotClosed(CondError):
    pass


class InsufficientTail(CondError):
    pass


class Undecided(CondError):
    pass


class NotInSupport(CondError):
    pass


# ---------------------------------------------------------------------------
# Tuple codes: the tuple space over the pr sublevels of a level,
# identified with an initial segment of the naturals by mixed radix.
# ---------------------------------------------------------------------------


def tuple_radices(sc: Scale, n: int):
    return [sc.pr_sub(n, j)[2] for j in range(sc.iota_pr(n))]


def tuple_code(sc: Scale, n: int, tvec) -> int:
    code = 0
    for j, base in enumerate(tuple_radices(sc, n)):
        v = tvec[j]
        if not 0 <= v < base:
            raise CondError(f"tuple component {v} outside [0, {base})")
        code = code * base + v
    return code


def tuple_decode(sc: Scale, n: int, code: int):
    radices = tuple_radices(sc, n)
    out = [0] * len(radices)
    for j in range(len(radices) - 1, -1, -1):
        out[j] = code % radices[j]
        code //= radices[j]
    if code:
        raise CondError("tuple code outside the tuple space")
    return tuple(out)


def pss_codes(c: PrCompound, i, sc: Scale, limit: int = 1 << 14):
    """The possibility codes of a pr-compound row: every tuple choice
    from the cells at index i, encoded into the tuple space."""
    cells = [c.cell(i, j).members for j in range(sc.iota_pr(c.n))]
    total = 1
    for m in cells:
        total *= len(m)
    if total > limit:
        raise LimitExceeded(f"{total} tuple choices at {i} exceed the limit")
    return tuple(sorted(tuple_code(sc, c.n, tvec) for tvec in product(*cells)))


# ---------------------------------------------------------------------------
# The fragment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConditionFragment:
    frame: Frame
    horizon: int
    trl: int
    supp_pr: tuple
    supp_lc: tuple
    supp_al: tuple
    trl_al: dict             # alpha -> trunk length, >= trl
    pr: tuple                # PrCompound per level < horizon
    lc: tuple                # LcCompound per level < horizon
    al: dict                 # (alpha, n) -> AtomicCreature | trivial Subatom
    tail: dict = field(default_factory=lambda: dict(DEFAULT_TAIL))

    def __post_init__(self):
        object.__setattr__(self, "supp_pr", tuple(sorted(self.supp_pr)))
        object.__setattr__(self, "supp_lc", tuple(sorted(self.supp_lc)))
        object.__setattr__(self, "supp_al", tuple(sorted(self.supp_al)))

    @property
    def supp(self) -> tuple:
        return tuple(sorted(set(self.supp_pr) | set(self.supp_lc)
                            | set(self.supp_al)))

    def al_entry(self, alpha, n: int):
        return self.al[(alpha, n)]

    def to_json(self, table=None):
        out = {
            "frame": _frame_json(self.frame),
            "frame_fp": frame_fingerprint(self.frame),
            "horizon": self.horizon,
            "trl": self.trl,
            "supp_pr": list(self.supp_pr),
            "supp_lc": list(self.supp_lc),
            "supp_al": list(self.supp_al),
            "trl_al": {str(a): t for a, t in self.trl_al.items()},
            "pr": [c.to_json() for c in self.pr],
            "lc": [c.to_json() for c in self.lc],
            "al": {f"{a}|{n}": _al_json(ent)
                   for (a, n), ent in self.al.items()},
            "tail": {k: str(v) for k, v in self.tail.items()},
        }
        if table is not None:
            out["table"] = table_fingerprint(table)
        return out

    @staticmethod
    def from_json(obj) -> "ConditionFragment":
        al = {}
        for key, ent in obj["al"].items():
            a, n = key.rsplit("|", 1)
            al[(a, int(n))] = _al_from_json(ent)
        return ConditionFragment(
            _frame_from_json(obj["frame"]),
            obj["horizon"], obj["trl"],
            tuple(obj["supp_pr"]), tuple(obj["supp_lc"]),
            tuple(obj["supp_al"]),
            {a: int(t) for a, t in obj["trl_al"].items()},
            tuple(PrCompound.from_json(c) for c in obj["pr"]),
            tuple(LcCompound.from_json(c) for c in obj["lc"]),
            al,
            {k: Fraction(v) for k, v in obj["tail"].items()})


def _al_json(ent):
    if isinstance(ent, AtomicCreature):
        return {"kind": "atomic",
                "height": {"kind": ent.height.kind, "n": ent.height.n,
                           "sub": ent.height.sub},
                "components": [[t, s.to_json()] for t, s in ent.components]}
    return {"kind": "subatom", "subatom": ent.to_json()}


def _al_from_json(obj):
    if obj["kind"] == "atomic":
        h = obj["height"]
        return AtomicCreature(
            Height(h["kind"], h["n"], h["sub"]),
            tuple((t, Subatom.from_json(s)) for t, s in obj["components"]))
    return Subatom.from_json(obj["subatom"])


def _frame_json(frame: Frame):
    return {
        "depth": frame.depth,
        "iota_pr": [q.to_json() for q in frame.iota_pr],
        "iota_star": [q.to_json() for q in frame.iota_star],
        "s_pr": list(frame.s_pr),
        "s_lc": {i: list(v) for i, v in frame.s_lc.items()},
        "s_al": {i: list(v) for i, v in frame.s_al.items()},
    }


def _frame_from_json(obj) -> Frame:
    return Frame(obj["depth"],
                 tuple(Q.from_json(q) for q in obj["iota_pr"]),
                 tuple(Q.from_json(q) for q in obj["iota_star"]),
                 tuple(obj["s_pr"]),
                 {i: tuple(v) for i, v in obj["s_lc"].items()},
                 {i: tuple(v) for i, v in obj["s_al"].items()})


def frame_fingerprint(frame: Frame) -> str:
    blob = json.dumps(_frame_json(frame), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def fragment_pss(frag: ConditionFragment, n: int, alpha, sc: Scale):
    """Possibility codes at level n for the owner index of alpha."""
    return pss_codes(frag.pr[n], frag.frame.i_star(alpha), sc)


# ---------------------------------------------------------------------------
# Possibilities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Possibility:
    """A decided prefix of the generic below the height `upto`.

    Items are (label, height, value) with pr values naturals and lc/al
    values canonical sorted tuples."""

    upto: Height
    items: tuple

    def __post_init__(self):
        canon = []
        for label, h, v in self.items:
            if h.kind == "pr":
                canon.append((label, h, int(v)))
            else:
                canon.append((label, h, tuple(sorted(int(x) for x in v))))
        canon.sort(key=lambda it: (it[1].key, it[0]))
        object.__setattr__(self, "items", tuple(canon))

    def mapping(self) -> dict:
        return {(label, h): v for label, h, v in self.items}

    def get(self, label, h: Height):
        for lab, hh, v in self.items:
            if lab == label and hh == h:
                return v
        raise KeyError((label, h))

    def restrict(self, L: Height) -> "Possibility":
        return Possibility(L, tuple(it for it in self.items
                                    if it[1].key < L.key))

    def restrict_labels(self, labels) -> "Possibility":
        ls = set(labels)
        return Possibility(self.upto, tuple(it for it in self.items
                                            if it[0] in ls))


def _hat_from(values: dict, frag: ConditionFragment, sc: Scale,
              alpha, n: int) -> int:
    i = frag.frame.i_star(alpha)
    tvec = [values[(i, Height("pr", n, j))] for j in range(sc.iota_pr(n))]
    return tuple_code(sc, n, tvec)


def eta_hat(frag: ConditionFragment, eta: Possibility, alpha, n: int,
            table) -> int:
    """The tuple code decided by eta at level n for alpha's owner."""
    return _hat_from(eta.mapping(), frag, Scale(table), alpha, n)


def _decided_pr(n: int, L: Height) -> bool:
    return n < L.n or (n == L.n and L.kind != "pr")


def _decided_lc(n: int, L: Height) -> bool:
    return n < L.n or (n == L.n and L.kind == "al")


def _decided_al(n: int, L: Height) -> bool:
    return n < L.n


@dataclass
class PossList:
    items: list
    count: int
    bound: int | None
    bound_ok: bool | None

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return self.count


def _check_upto(frag: ConditionFragment, L: Height):
    if L.sub != 0:
        raise CondError("enumeration boundaries sit at whole heights")
    top = L.n + (0 if L.kind == "pr" else 1)
    if top > frag.horizon:
        raise CondError(f"height {L!r} beyond the horizon {frag.horizon}")


def poss_bound(frag: ConditionFragment, L: Height, table) -> int | None:
    """The declared possibility budget below L."""
    sc = Scale(table)
    try:
        if L.kind == "pr":
            if L.n == 0:
                return None
            if L.n >= table.depth:
                return sc._int(sc.level(table.depth - 1).nP_next, "nP_next")
            return sc.nP_pr(L.n)
        if L.kind == "lc":
            return sc.nP_lc(L.n)
        return sc.nP_al(L.n)
    except Exception:
        return None


def poss_enum(frag: ConditionFragment, L: Height, table,
              limit: int = DEFAULT_ENUM_LIMIT) -> PossList:
    """All decided prefixes below L, level by level: pr choices first,
    then the lc cells of the decided tuple row, then the al members."""
    sc = Scale(table)
    _check_upto(frag, L)
    partials = [{}]

    def extend(parts, coords):
        out = parts
        for key, members in coords:
            new = []
            for part in out:
                for v in members:
                    ext = dict(part)
                    ext[key] = v
                    new.append(ext)
            if len(new) > limit:
                raise LimitExceeded(
                    f"possibility count beyond the limit {limit}")
            out = new
        return out

    for n in range(frag.horizon):
        if _decided_pr(n, L):
            coords = [((i, Height("pr", n, j)), frag.pr[n].cell(i, j).members)
                      for i in frag.supp_pr for j in range(sc.iota_pr(n))]
            partials = extend(partials, coords)
        if _decided_lc(n, L) and frag.supp_lc:
            c = frag.lc[n]
            new = []
            for part in partials:
                coords = []
                for a in frag.supp_lc:
                    if a in c.supp:
                        code = _hat_from(part, frag, sc, a, n)
                        if code not in c.pr_indices[a]:
                            raise CondError(
                                f"decided tuple {code} outside the rows "
                                f"of {a} at level {n}")
                        for l in range(sc.istar(n)):
                            coords.append(((a, Height("lc", n, l)),
                                           c.cells[(a, code, l)].members))
                    else:
                        for l in range(sc.istar(n)):
                            coords.append(((a, Height("lc", n, l)),
                                           c.outer[(a, l)].members))
                new.extend(extend([part], coords))
                if len(new) > limit:
                    raise LimitExceeded(
                        f"possibility count beyond the limit {limit}")
            partials = new
        if _decided_al(n, L) and frag.supp_al:
            new = []
            for part in partials:
                coords = []
                for a in frag.supp_al:
                    ent = frag.al[(a, n)]
                    if n >= frag.trl_al[a]:
                        code = _hat_from(part, frag, sc, a, n)
                        coords.append(((a, Height("al", n)),
                                       ent.component(code).members))
                    else:
                        coords.append(((a, Height("al", n)), ent.members))
                new.extend(extend([part], coords))
                if len(new) > limit:
                    raise LimitExceeded(
                        f"possibility count beyond the limit {limit}")
            partials = new

    items = [Possibility(L, tuple((lab, h, v) for (lab, h), v in part.items()))
             for part in partials]
    bound = poss_bound(frag, L, table)
    bound_ok = None if bound is None else len(items) < bound
    return PossList(items, len(items), bound, bound_ok)


def check_possibility(frag: ConditionFragment, eta: Possibility, table):
    """Raise NotAPossibility unless eta is a decided prefix of frag."""
    sc = Scale(table)
    _check_upto(frag, eta.upto)
    L = eta.upto
    values = eta.mapping()
    expected = set()
    for n in range(frag.horizon):
        if _decided_pr(n, L):
            for i in frag.supp_pr:
                for j in range(sc.iota_pr(n)):
                    key = (i, Height("pr", n, j))
                    expected.add(key)
                    if key not in values:
                        raise NotAPossibility(f"missing value at {key}")
                    if values[key] not in frag.pr[n].cell(i, j).members:
                        raise NotAPossibility(f"value at {key} not offered")
        if _decided_lc(n, L):
            c = frag.lc[n]
            for a in frag.supp_lc:
                for l in range(sc.istar(n)):
                    key = (a, Height("lc", n, l))
                    expected.add(key)
                    if key not in values:
                        raise NotAPossibility(f"missing value at {key}")
                    if a in c.supp:
                        code = _hat_from(values, frag, sc, a, n)
                        if code not in c.pr_indices[a]:
                            raise NotAPossibility(
                                f"tuple {code} outside the rows of {a}")
                        sub = c.cells[(a, code, l)]
                    else:
                        sub = c.outer[(a, l)]
                    if values[key] not in sub.members:
                        raise NotAPossibility(f"value at {key} not offered")
        if _decided_al(n, L):
            for a in frag.supp_al:
                key = (a, Height("al", n))
                expected.add(key)
                if key not in values:
                    raise NotAPossibility(f"missing value at {key}")
                ent = frag.al[(a, n)]
                if n >= frag.trl_al[a]:
                    code = _hat_from(values, frag, sc, a, n)
                    sub = ent.component(code)
                else:
                    sub = ent
                if values[key] not in sub.members:
                    raise NotAPossibility(f"value at {key} not offered")
    extra = set(values) - expected
    if extra:
        raise NotAPossibility(
            f"values beyond the decided prefix: {list(extra)[:3]}")
    return True


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate_fragment(frag: ConditionFragment, table,
                      modest: bool = False) -> Report:
    sc = Scale(table)
    fr = frag.frame
    entries = []

    def emit(clause, ok, detail=""):
        entries.append(ReportEntry(clause, "fragment", PASS if ok else FAIL,
                                   "checked", detail))

    lc_labels = {a for labs in fr.s_lc.values() for a in labs}
    al_labels = {a for labs in fr.s_al.values() for a in labs}
    emit("FrameLabels",
         set(frag.supp_pr) <= set(fr.s_pr)
         and set(frag.supp_lc) <= lc_labels
         and set(frag.supp_al) <= al_labels)
    emit("SuppClosed", fr.is_closed(frag.supp))
    emit("TrunkBound",
         0 <= frag.trl <= frag.horizon
         and len(frag.pr) == frag.horizon == len(frag.lc))
    emit("AlTrunkFloor",
         set(frag.trl_al) == set(frag.supp_al)
         and all(t >= frag.trl for t in frag.trl_al.values()))

    ok, detail = True, ""
    for n, c in enumerate(frag.pr):
        if c.n != n or tuple(c.dom) != frag.supp_pr:
            ok, detail = False, f"level {n}"
            break
    emit("PrDomain", ok, detail)
    ok, detail = True, ""
    for n, c in enumerate(frag.lc):
        if c.n != n or tuple(c.dom) != frag.supp_lc:
            ok, detail = False, f"level {n}"
            break
    emit("LcDomain", ok, detail)

    emit("PrSuppMonotone",
         all(set(frag.pr[n].supp) <= set(frag.pr[n + 1].supp)
             for n in range(frag.horizon - 1)))
    emit("LcSuppMonotone",
         all(set(frag.lc[n].supp) <= set(frag.lc[n + 1].supp)
             for n in range(frag.horizon - 1)))
    emit("BelowTrunkEmpty",
         all(not frag.pr[n].supp and not frag.lc[n].supp
             for n in range(min(frag.trl, frag.horizon))))
    emit("LcSuppLinked",
         all(fr.i_star(a) in frag.pr[n].supp
             for n in range(frag.horizon) for a in frag.lc[n].supp))

    ok, detail = True, ""
    for n in range(frag.horizon):
        c = frag.lc[n]
        for a in c.supp:
            try:
                want = fragment_pss(frag, n, a, sc)
            except LimitExceeded as exc:
                ok, detail = False, str(exc)
                break
            if tuple(c.pr_indices[a]) != want:
                ok, detail = False, f"rows of {a} at level {n}"
                break
        if not ok:
            break
    emit("LcTupleLink", ok, detail)

    ok, detail = True, ""
    link_ok, link_detail = True, ""
    for a in frag.supp_al:
        for n in range(frag.horizon):
            ent = frag.al.get((a, n))
            if ent is None:
                ok, detail = False, f"missing entry ({a}, {n})"
                break
            if n >= frag.trl_al.get(a, frag.trl):
                if not isinstance(ent, AtomicCreature) or \
                        ent.height != Height("al", n):
                    ok, detail = False, f"({a}, {n}) not atomic"
                    break
                try:
                    want = fragment_pss(frag, n, a, sc)
                except LimitExceeded as exc:
                    link_ok, link_detail = False, str(exc)
                    continue
                if ent.pr_indices != want:
                    link_ok, link_detail = False, f"rows of {a} at level {n}"
            else:
                if not isinstance(ent, Subatom) or not ent.is_trivial:
                    ok, detail = False, f"({a}, {n}) not a trivial subatom"
                    break
        if not ok:
            break
    emit("AlShape", ok, detail)
    emit("AlTupleLink", link_ok, link_detail)

    for kind, seq in (("PrCompound", frag.pr), ("LcCompound", frag.lc)):
        ok, detail = True, ""
        for c in seq:
            rep = validate_compound(c, table)
            bad = [e for e in rep.entries if e.status == FAIL]
            if bad:
                ok, detail = False, f"level {c.n}: {bad[0].clause}"
                break
        emit(kind, ok, detail)

    if modest:
        ok, detail = True, ""
        for n in range(frag.horizon):
            heavy = [a for a in frag.supp_al
                     if isinstance(frag.al.get((a, n)), AtomicCreature)
                     and not frag.al[(a, n)].is_trivial]
            if len(heavy) > 1:
                ok, detail = False, f"level {n}: {heavy}"
                break
        emit("Modesty", ok, detail)

    emit("TailTypes",
         all(isinstance(v, (int, Fraction)) and v >= 0
             for v in frag.tail.values()))
    return Report(entries)


# ---------------------------------------------------------------------------
# Order
# ---------------------------------------------------------------------------


def _tail_dominates(qtail: dict, ptail: dict) -> bool:
    return all(k in qtail and qtail[k] >= v for k, v in ptail.items())


def _window_pr(qc: PrCompound, pc: PrCompound, sc: Scale) -> bool:
    """The trunk-window comparison at a pr level: decided singleton
    values inside the offered cells on the old support, equality off it."""
    for i in pc.dom:
        for j in range(sc.iota_pr(pc.n)):
            qcell = qc.cell(i, j)
            if i in pc.supp:
                if not qcell.is_trivial:
                    raise Undecided(
                        f"window value at ({i}, {j}) not decided")
                if qcell.members[0] not in pc.cell(i, j).members:
                    return False
            else:
                if qcell.members != pc.cell(i, j).members:
                    return False
    return True


def _lc_value_subatom(c: LcCompound, alpha, l: int):
    """The decided subatom at (alpha, l) of an empty-support compound."""
    if alpha in c.supp:
        rows = c.pr_indices[alpha]
        if len(rows) != 1:
            raise Undecided(f"window rows at {alpha} not decided")
        return c.cells[(alpha, rows[0], l)]
    return c.outer[(alpha, l)]


def _window_lc(frag_q: ConditionFragment, n: int, pc: LcCompound,
               sc: Scale) -> bool:
    qc = frag_q.lc[n]
    for a in pc.dom:
        for l in range(sc.istar(n)):
            qsub = _lc_value_subatom(qc, a, l)
            if a in pc.supp:
                codes = fragment_pss(frag_q, n, a, sc)
                if len(codes) != 1:
                    raise Undecided(
                        f"window tuple at {a} level {n} not decided")
                if not qsub.is_trivial:
                    raise Undecided(
                        f"window value at ({a}, {l}) not decided")
                if qsub.members[0] not in pc.cells[(a, codes[0], l)].members:
                    return False
            else:
                if qsub.members != pc.outer[(a, l)].members:
                    return False
    return True


def cond_leq(q: ConditionFragment, p: ConditionFragment, table) -> bool:
    """q extends p: trunk grows, supports grow, compounds extend level
    by level with the trunk-window clauses between the two trunks, the
    al-part extends per index, and the tail manifest dominates."""
    if q.frame != p.frame:
        raise FrameMismatch("fragments live on different frames")
    sc = Scale(table)
    horizon = min(q.horizon, p.horizon)
    if q.trl < p.trl:
        return False
    if not (set(q.supp_pr) >= set(p.supp_pr)
            and set(q.supp_lc) >= set(p.supp_lc)
            and set(q.supp_al) >= set(p.supp_al)):
        return False
    for n in range(horizon):
        if n < p.trl or n >= q.trl:
            if not compound_leq(q.pr[n], p.pr[n]):
                return False
            if not compound_leq(q.lc[n], p.lc[n]):
                return False
        else:
            if not _window_pr(q.pr[n], p.pr[n], sc):
                return False
            if not _window_lc(q, n, p.lc[n], sc):
                return False
    for a in p.supp_al:
        if q.trl_al.get(a) != max(p.trl_al[a], q.trl):
            return False
        for n in range(horizon):
            pent = p.al[(a, n)]
            qent = q.al[(a, n)]
            if n < p.trl_al[a]:
                if not isinstance(qent, Subatom) or \
                        qent.members != pent.members:
                    return False
            elif n < q.trl_al[a]:
                codes = fragment_pss(q, n, a, sc)
                if len(codes) != 1:
                    raise Undecided(
                        f"window tuple at {a} level {n} not decided")
                if not isinstance(qent, Subatom) or not qent.is_trivial:
                    raise Undecided(
                        f"window value at ({a}, {n}) not decided")
                if qent.members[0] not in pent.component(codes[0]).members:
                    return False
            else:
                if not isinstance(qent, AtomicCreature) or \
                        not atomic_leq(qent, pent):
                    return False
    return _tail_dominates(q.tail, p.tail)


# ---------------------------------------------------------------------------
# Wedge
# ---------------------------------------------------------------------------


def _fit_subatom(value, family):
    """A trivial subatom holding a decided value, in the given family."""
    try:
        return Subatom(family, [value])
    except Exception as exc:
        raise HypothesisViolated(
            f"decided value {value!r} does not fit the widest family "
            f"(rows are not nested): {exc}") from exc


def _sync_level_links(frag: ConditionFragment, n: int, sc: Scale
                      ) -> ConditionFragment:
    """Restrict the lc rows and al components at level n to the current
    possibility codes of the pr-part (they can only shrink)."""
    c = frag.lc[n]
    if c.supp:
        pri = {}
        cells = dict(c.cells)
        for a in c.supp:
            want = fragment_pss(frag, n, a, sc)
            pri[a] = want
            for t in c.pr_indices[a]:
                if t not in want:
                    for l in range(sc.istar(n)):
                        cells.pop((a, t, l), None)
        lcn = replace(c, pr_indices=pri, cells=cells)
        frag = replace(frag, lc=frag.lc[:n] + (lcn,) + frag.lc[n + 1:])
    al = dict(frag.al)
    changed = False
    for a in frag.supp_al:
        ent = al[(a, n)]
        if isinstance(ent, AtomicCreature):
            want = fragment_pss(frag, n, a, sc)
            if ent.pr_indices != want:
                al[(a, n)] = AtomicCreature(
                    ent.height, tuple((t, s) for t, s in ent.components
                                      if t in want))
                changed = True
    if changed:
        frag = replace(frag, al=al)
    return frag


def wedge(frag: ConditionFragment, eta: Possibility, table
          ) -> ConditionFragment:
    """The condition deciding the generic below eta's height to be eta:
    decided cells become singletons, supports below the new trunk empty
    out, tuple rows shrink to the decided codes."""
    check_possibility(frag, eta, table)
    sc = Scale(table)
    L = eta.upto
    trlq = max(frag.trl, L.n)
    values = eta.mapping()

    new_pr = []
    for n in range(frag.horizon):
        c = frag.pr[n]
        if _decided_pr(n, L):
            grid = {(i, j): _fit_subatom(values[(i, Height("pr", n, j))],
                                         c.cell(i, j).family)
                    for i in c.dom for j in range(sc.iota_pr(n))}
            if n < trlq:
                new_pr.append(PrCompound(n, c.dom, (), grid))
            else:
                new_pr.append(PrCompound(n, c.dom, c.supp, grid, c.d,
                                         c.d_exact))
        else:
            new_pr.append(c)
    out = replace(frag, trl=trlq,
                  trl_al={a: max(t, trlq) for a, t in frag.trl_al.items()},
                  pr=tuple(new_pr))

    new_lc = []
    for n in range(frag.horizon):
        c = frag.lc[n]
        if _decided_lc(n, L):
            tmx_fams = {l: sc.lc_family(n, sc.tmax(n), l)
                        for l in range(sc.istar(n))}
            if n < trlq:
                outer = {(a, l): _fit_subatom(
                            values[(a, Height("lc", n, l))], tmx_fams[l])
                         for a in c.dom for l in range(sc.istar(n))}
                new_lc.append(LcCompound(n, c.dom, (), {}, {}, outer))
            else:
                pri, cells, outer = {}, {}, {}
                for a in c.dom:
                    if a in c.supp:
                        code = _hat_from(values, out, sc, a, n)
                        pri[a] = (code,)
                        for l in range(sc.istar(n)):
                            cells[(a, code, l)] = _fit_subatom(
                                values[(a, Height("lc", n, l))],
                                c.cells[(a, code, l)].family)
                    else:
                        for l in range(sc.istar(n)):
                            outer[(a, l)] = _fit_subatom(
                                values[(a, Height("lc", n, l))], tmx_fams[l])
                new_lc.append(LcCompound(n, c.dom, c.supp, pri, cells, outer,
                                         c.d, c.d_exact))
        else:
            new_lc.append(c)
    out = replace(out, lc=tuple(new_lc))

    al = dict(frag.al)
    for a in frag.supp_al:
        for n in range(frag.horizon):
            ent = al[(a, n)]
            if _decided_al(n, L):
                al[(a, n)] = _fit_subatom(values[(a, Height("al", n))],
                                          sc.al_family(n, sc.tmax(n)))
            elif isinstance(ent, AtomicCreature) and n < out.trl_al[a]:
                # the trunk moved past an undecided atomic row; this can
                # only happen when the height sits exactly at the new
                # trunk boundary, where the entry stays as it is
                pass
    out = replace(out, al=al)

    for n in range(frag.horizon):
        if _decided_pr(n, L):
            out = _sync_level_links(out, n, sc)
    return out


# ---------------------------------------------------------------------------
# Restriction
# ---------------------------------------------------------------------------


def restrict(frag: ConditionFragment, B, table) -> ConditionFragment:
    """The fragment with supports and domains cut down to the closed
    label set B; halving zeroes out where a support empties; the trunk
    survives even for B empty."""
    B = set(B)
    fr = frag.frame
    for a in B:
        if fr.i_star(a) not in B:
            raise NotClosed(f"{a} without its owner {fr.i_star(a)}")
    sc = Scale(table)
    supp_pr = tuple(sorted(set(frag.supp_pr) & B))
    supp_lc = tuple(sorted(set(frag.supp_lc) & B))
    supp_al = tuple(sorted(set(frag.supp_al) & B))

    new_pr = []
    for c in frag.pr:
        supp = tuple(sorted(set(c.supp) & B))
        grid = {(i, j): s for (i, j), s in c.grid.items() if i in B}
        d = c.d if supp else Fraction(0)
        new_pr.append(PrCompound(c.n, supp_pr, supp, grid, d, c.d_exact))
    new_lc = []
    for c in frag.lc:
        supp = tuple(sorted(set(c.supp) & B))
        pri = {a: ts for a, ts in c.pr_indices.items() if a in B}
        cells = {k: s for k, s in c.cells.items() if k[0] in B}
        outer = {k: s for k, s in c.outer.items() if k[0] in B}
        d = c.d if supp else Fraction(0)
        new_lc.append(LcCompound(c.n, supp_lc, supp, pri, cells, outer,
                                 d, c.d_exact))
    al = {(a, n): ent for (a, n), ent in frag.al.items() if a in B}
    return replace(frag, supp_pr=supp_pr, supp_lc=supp_lc, supp_al=supp_al,
                   trl_al={a: t for a, t in frag.trl_al.items() if a in B},
                   pr=tuple(new_pr), lc=tuple(new_lc), al=al)


# ---------------------------------------------------------------------------
# Modesty
# ---------------------------------------------------------------------------


def _trivial_atomic(ent: AtomicCreature) -> AtomicCreature:
    return AtomicCreature(
        ent.height,
        tuple((t, s.subset([s.members[0]])) for t, s in ent.components))


def _al_norm_gt(ent, m: int) -> bool:
    if not isinstance(ent, AtomicCreature):
        return False  # trivial subatoms carry norm zero
    from .hyper import norm_vs_norm
    return norm_vs_norm(ent.norm_min(), make_norm(Fraction(m))) == GT


def modestify(frag: ConditionFragment, table) -> ConditionFragment:
    """Keep, per al level, one index's creature of large norm and
    trivialise the rest, by round robin over the al support with growing
    norm demands; pr and lc parts stay untouched."""
    if not frag.supp_al:
        return frag
    cycle = list(frag.supp_al)
    al = dict(frag.al)
    prev = -1
    m = 0
    while prev < frag.horizon - 1:
        a_m = cycle[m % len(cycle)]
        pick = None
        for n in range(prev + 1, frag.horizon):
            if _al_norm_gt(frag.al[(a_m, n)], m):
                pick = n
                break
        if pick is None:
            raise InsufficientTail(
                f"no level after {prev} offers norm above {m} at {a_m} "
                f"(step {m})")
        for n in range(prev + 1, pick + 1):
            for a in frag.supp_al:
                if n == pick and a == a_m:
                    continue
                ent = frag.al[(a, n)]
                if isinstance(ent, AtomicCreature):
                    al[(a, n)] = _trivial_atomic(ent)
        prev = pick
        m += 1
    return replace(frag, al=al)


# ---------------------------------------------------------------------------
# Separated support
# ---------------------------------------------------------------------------


def separate_support(frag: ConditionFragment, table) -> ConditionFragment:
    """Make the pr-part separated (non-trivial cells of distinct support
    indices disjoint per column), after extending the trunk to a window
    where every populated pr level has positive norm and support within
    the level budget; al creatures with owners outside the pr support
    are trivialised."""
    sc = Scale(table)
    n0 = None
    for cand in range(frag.trl, frag.horizon + 1):
        ok = True
        for n in range(cand, frag.horizon):
            c = frag.pr[n]
            if not c.supp:
                continue
            if len(c.supp) > n or compound_norm(c, table).argument <= 1:
                ok = False
                break
        if ok:
            n0 = cand
            break
    if n0 is None or n0 == frag.horizon and any(
            c.supp for c in frag.pr[frag.trl:]):
        raise InsufficientTail(
            "no trunk window with positive norms and small supports")
    if n0 > frag.trl:
        pl = poss_enum(frag, Height("pr", n0, 0), table)
        if pl.count < 1:
            raise InsufficientTail("no possibility to extend the trunk")
        q = wedge(frag, pl.items[0], table)
    else:
        q = frag

    new_pr = list(q.pr)
    for n in range(n0, frag.horizon):
        c = new_pr[n]
        if not c.supp:
            continue
        d = separate_pr(c, table)
        if compound_norm(d, table).argument <= 1:
            raise InsufficientTail(
                f"separation exhausts the norm at level {n}")
        new_pr[n] = d
    q = replace(q, pr=tuple(new_pr))
    for n in range(frag.horizon):
        q = _sync_level_links(q, n, sc)

    al = dict(q.al)
    for a in q.supp_al:
        i = q.frame.i_star(a)
        for n in range(q.trl_al[a], frag.horizon):
            ent = al[(a, n)]
            if isinstance(ent, AtomicCreature) and not ent.is_trivial \
                    and i not in q.pr[n].supp:
                al[(a, n)] = _trivial_atomic(ent)
    return replace(q, al=al)


def is_separated_fragment(frag: ConditionFragment, table) -> bool:
    from .compounds import is_separated
    for n in range(frag.horizon):
        c = frag.pr[n]
        if c.supp and compound_norm(c, table).argument <= 1:
            return False
        if not is_separated(c, table):
            return False
    for a in frag.supp_al:
        i = frag.frame.i_star(a)
        for n in range(frag.horizon):
            ent = frag.al[(a, n)]
            if isinstance(ent, AtomicCreature) and not ent.is_trivial \
                    and i not in frag.pr[n].supp:
                return False
    return True


# ---------------------------------------------------------------------------
# Homogenisation cascade
# ---------------------------------------------------------------------------


def _ht_heights(upto: int):
    """The whole heights strictly below level `upto`, ascending."""
    out = []
    for n in range(upto):
        out.extend([Height("pr", n, 0), Height("lc", n, 0), Height("al", n)])
    return out


def _subatom_at(frag: ConditionFragment, sc: Scale, alpha, label_kind,
                h: Height, code):
    """Total accessor: the subatom at a coordinate for a decided tuple
    code, collapsing to the trivial subatom where no tuple applies."""
    if label_kind == "pr":
        return frag.pr[h.n].cell(alpha, h.sub)
    if label_kind == "lc":
        c = frag.lc[h.n]
        if alpha in c.supp:
            if code not in c.pr_indices[alpha]:
                return None
            return c.cells[(alpha, code, h.sub)]
        return c.outer[(alpha, h.sub)]
    ent = frag.al[(alpha, h.n)]
    if isinstance(ent, Subatom):
        return ent
    if code not in ent.pr_indices:
        return None
    return ent.component(code)


def _coord_kind(frag: ConditionFragment, label) -> str:
    if label in frag.frame.s_pr:
        return "pr"
    for labs in frag.frame.s_lc.values():
        if label in labs:
            return "lc"
    return "al"


def _compatible_tail(frag_q: ConditionFragment, sc: Scale, eta: Possibility,
                     L: Height) -> bool:
    """eta's values at heights in [L, upto) fall inside q's creatures."""
    for label, h, v in eta.items:
        if h.key < L.key:
            continue
        kind = _coord_kind(frag_q, label)
        code = None
        if kind != "pr":
            code = _hat_from(eta.mapping(), frag_q, sc, label, h.n)
        sub = _subatom_at(frag_q, sc, label, kind, h, code)
        if sub is None or v not in sub.members:
            return False
    return True


def homogenize_fragment(frag: ConditionFragment, L0: int, h0, proj, table,
                        limit: int = DEFAULT_ENUM_LIMIT):
    """Shrink the creatures below level L0 so that colourings of the
    possibility spaces commute with the projections: a descending sweep
    over the whole heights with one bigness application per case (al
    creature, lc compound, pr compound).  Returns the shrunk fragment
    and, per whole height L < L0, the induced colouring of poss(<L).

    `h0` maps each element of poss(<L0) to a colour; `proj(Lhigh, Llow,
    colour)` projects colours downward and must be coherent."""
    sc = Scale(table)
    rep = validate_fragment(frag, table, modest=True)
    if any(e.status == FAIL for e in rep.entries):
        bad = [e.clause for e in rep.entries if e.status == FAIL]
        raise HypothesisViolated(f"fragment not valid/modest: {bad}")
    top = Height("pr", L0, 0)
    p_top = poss_enum(frag, top, table, limit)
    h_top = {eta: h0(eta) for eta in p_top.items}
    bound = poss_bound(frag, top, table)
    if bound is not None and len(set(h_top.values())) > bound:
        raise HypothesisViolated("colour count beyond the budget at the top")

    heights = _ht_heights(L0)
    sweep = list(reversed(heights))
    h_map = {top: h_top}
    cur = frag
    L_prev = top
    h_prev = h_top
    for L in sweep:
        p_prev = poss_enum(frag, L_prev, table, limit)
        p_cur = poss_enum(frag, L, table, limit)
        groups = {}
        for eta in p_prev.items:
            groups.setdefault(eta.restrict(L), []).append(eta)
        h_j = {}

        if L.kind == "al":
            n = L.n
            heavy = [a for a in frag.supp_al
                     if isinstance(frag.al[(a, n)], AtomicCreature)
                     and not frag.al[(a, n)].is_trivial]
            if heavy:
                a0 = heavy[0]
                ent = cur.al[(a0, n)]
                new_comps = []
                consts = {}  # (code, member) -> colour per restricted eta'
                for t, sub in ent.components:
                    bt = [e for e in p_cur.items
                          if _hat_from(e.mapping(), frag, sc, a0, n) == t]
                    budget = None
                    try:
                        budget = sc._int(sc.level(n).nB_al, "nB_al")
                    except Exception:
                        budget = None
                    if budget is not None:
                        colours = len(set(h_prev.values()))
                        from .compounds import _check_pow_le
                        if not _check_pow_le(max(colours, 1), len(bt), budget):
                            raise HypothesisViolated(
                                f"colour-map count at al level {n} beyond "
                                f"the budget {budget}")
                    # signature of each member over the group
                    ext = {}
                    for e in p_prev.items:
                        if _hat_from(e.mapping(), frag, sc, a0, n) != t:
                            continue
                        key = (e.restrict(L), e.get(a0, Height("al", n)))
                        ext[key] = e
                    labels, sigs = {}, {}
                    for x in sub.members:
                        sig = tuple(proj(L_prev, L, h_prev[ext[(e2, x)]])
                                    for e2 in bt) if bt else ()
                        if sig not in sigs:
                            sigs[sig] = len(sigs)
                        labels[x] = sigs[sig]
                    if len(sigs) > sub.family.m:
                        raise HypothesisViolated(
                            f"{len(sigs)} colour classes at ({a0}, {n}) "
                            f"exceed the family base {sub.family.m}")
                    thin = bigness_thin(sub, labels)
                    if not _norm_loss_ok(sub, thin):
                        raise CompoundError(
                            f"norm loss above 1/m at ({a0}, {n})")
                    new_comps.append((t, thin))
                    x0 = thin.members[0]
                    for e in bt:
                        consts[e] = proj(L_prev, L, h_prev[ext[(e, x0)]])
                al = dict(cur.al)
                al[(a0, n)] = AtomicCreature(ent.height, tuple(new_comps))
                cur = replace(cur, al=al)
                for eta in p_cur.items:
                    h_j[eta] = consts[eta]
            else:
                for r, exts in groups.items():
                    if len(exts) != 1:
                        # branches only through trivial singletons: all
                        # extensions carry the same colour by modesty
                        vals = {proj(L_prev, L, h_prev[e]) for e in exts}
                        if len(vals) > 1:
                            raise HypothesisViolated(
                                "colour branches through a trivial level")
                        h_j[r] = vals.pop()
                    else:
                        h_j[r] = proj(L_prev, L, h_prev[exts[0]])
        elif L.kind == "lc":
            n = L.n
            c = cur.lc[n]
            active = c.supp and any(not s.is_trivial for s in c.cells.values())
            if active:
                for eta in p_cur.items:
                    tbar = {a: _hat_from(eta.mapping(), frag, sc, a, n)
                            for a in c.supp}

                    def f_k(asg, _eta=eta, _tbar=tbar):
                        items = list(_eta.items)
                        for (a, l), v in asg.items():
                            items.append((a, Height("lc", n, l), v))
                        full = Possibility(L_prev, tuple(items))
                        return proj(L_prev, L, h_prev[full])

                    c = homogenize_lc(c, tbar, f_k, (0, 0), table,
                                      const=True, limit=limit)
                    space = _lc_space(c, tbar, sc, n)
                    h_j[eta] = f_k(space)
                cur = replace(cur, lc=cur.lc[:n] + (c,) + cur.lc[n + 1:])
            else:
                for r, exts in groups.items():
                    vals = {proj(L_prev, L, h_prev[e]) for e in exts}
                    if len(vals) > 1:
                        raise HypothesisViolated(
                            "colour branches through a trivial level")
                    h_j[r] = vals.pop()
        else:  # pr height
            n = L.n
            c = cur.pr[n]
            active = c.supp and any(not s.is_trivial for s in c.grid.values())
            if active:
                for eta in p_cur.items:
                    def f_k(asg, _eta=eta):
                        items = list(_eta.items)
                        for (i, j), v in asg.items():
                            items.append((i, Height("pr", n, j), v))
                        full = Possibility(L_prev, tuple(items))
                        return proj(L_prev, L, h_prev[full])

                    c = homogenize_pr(c, f_k, 0, table, limit=limit)
                    asg0 = {(i, j): c.cell(i, j).members[0]
                            for i in c.dom for j in range(sc.iota_pr(n))}
                    h_j[eta] = f_k(asg0)
                cur = replace(cur, pr=cur.pr[:n] + (c,) + cur.pr[n + 1:])
                cur = _sync_level_links(cur, n, sc)
            else:
                for r, exts in groups.items():
                    vals = {proj(L_prev, L, h_prev[e]) for e in exts}
                    if len(vals) > 1:
                        raise HypothesisViolated(
                            "colour branches through a trivial level")
                    h_j[r] = vals.pop()

        bound = poss_bound(frag, L, table)
        if bound is not None and len(set(h_j.values())) > bound:
            raise HypothesisViolated(
                f"colour count below {L!r} beyond the budget {bound}")
        h_map[L] = h_j
        h_prev, L_prev = h_j, L

    # exhaustive commuting check: decided tails inside the shrunk
    # creatures project the top colour down to every lower height
    for L in heights:
        for eta in p_top.items:
            if not _compatible_tail(cur, sc, eta, L):
                continue
            want = proj(top, L, h_top[eta])
            got = h_map[L][eta.restrict(L)]
            if want != got:
                raise CondError(
                    f"commuting check failed at {L!r}")
    return cur, h_map


def _lc_space(c: LcCompound, tbar, sc: Scale, n: int):
    asg = {}
    for a in c.dom:
        for l in range(sc.istar(n)):
            if a in c.supp:
                asg[(a, l)] = c.cells[(a, tbar[a], l)].members[0]
            else:
                asg[(a, l)] = c.outer[(a, l)].members[0]
    return asg


# ---------------------------------------------------------------------------
# Generic reading
# ---------------------------------------------------------------------------


def read_generic(frag: ConditionFragment, alpha, h: Height, table):
    """The decided generic value at (alpha, h): defined when the trunk
    covers the height and the creature there is a singleton."""
    if alpha not in frag.supp:
        raise NotInSupport(f"{alpha} outside the support")
    sc = Scale(table)
    if h.n >= frag.trl:
        raise Undecided(f"trunk {frag.trl} does not cover level {h.n}")
    kind = _coord_kind(frag, alpha)
    if kind == "pr":
        sub = frag.pr[h.n].cell(alpha, h.sub)
    elif kind == "lc":
        sub = _lc_value_subatom(frag.lc[h.n], alpha, h.sub)
    else:
        ent = frag.al[(alpha, h.n)]
        if isinstance(ent, AtomicCreature):
            raise Undecided(f"({alpha}, {h!r}) still atomic")
        sub = ent
    if not sub.is_trivial:
        raise Undecided(f"({alpha}, {h!r}) not a singleton")
    return sub.members[0]


def slalom_value(frag: ConditionFragment, alpha, n: int, table):
    """The derived slalom value at level n: for an lc index the tuples
    over the decided ground sets that meet the decided generic somewhere
    (complement-of-products form); for an al index the decided member."""
    sc = Scale(table)
    kind = _coord_kind(frag, alpha)
    if kind == "al":
        return read_generic(frag, alpha, Height("al", n), table)
    if kind != "lc":
        raise CondError("slalom values live at lc and al indices")
    code = None
    i = frag.frame.i_star(alpha)
    tvec = [read_generic(frag, i, Height("pr", n, j), table)
            for j in range(sc.iota_pr(n))]
    code = tuple_code(sc, n, tvec)
    bs = [sc.lc_cell(n, code, l)["b"] for l in range(sc.istar(n))]
    ys = [set(read_generic(frag, alpha, Height("lc", n, l), table))
          for l in range(sc.istar(n))]
    out = []
    for v in product(*(range(b) for b in bs)):
        if any(v[l] in ys[l] for l in range(len(bs))):
            out.append(v)
    return tuple(out)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def one_fragment(frame: Frame, table, horizon: int, trl: int = 0
                 ) -> ConditionFragment:
    """The maximum condition cut at a horizon: empty supports, trivial
    compounds, a trunk that may be stipulated larger."""
    from .compounds import trivial_pr, trivial_lc
    return ConditionFragment(
        frame, horizon, trl, (), (), (), {},
        tuple(trivial_pr(n) for n in range(horizon)),
        tuple(trivial_lc(n) for n in range(horizon)), {})


def build_fragment(frame: Frame, table, horizon: int, trl: int = 0,
                   supp_pr=(), supp_lc=(), supp_al=(),
                   trl_al=None, full_al: bool = True,
                   pr_split: bool = False) -> ConditionFragment:
    """A fragment with the requested supports: below the trunk all
    supports are empty and every cell is a deterministic singleton; from
    the trunk on, one index per level carries full subatoms on the pr
    side (round robin, keeping modesty), the lc-part opens one cell per
    decided tuple row of its first support index, and the al-part is
    fully open (or trivial when full_al is false)."""
    sc = Scale(table)
    supp_pr = tuple(sorted(set(supp_pr)))
    supp_lc = tuple(sorted(set(supp_lc)))
    supp_al = tuple(sorted(set(supp_al)))
    labels = set(supp_pr) | set(supp_lc) | set(supp_al)
    if not frame.is_closed(labels):
        raise NotClosed("supports not closed under the owner map")
    trl_al = dict(trl_al or {})
    for a in supp_al:
        trl_al.setdefault(a, trl)
        if trl_al[a] < trl:
            raise CondError(f"trunk at {a} below the fragment trunk")

    from .subatoms import full_subatom
    prs = []
    for n in range(horizon):
        grid = {}
        owner = supp_pr[n % len(supp_pr)] if supp_pr and n >= trl else None
        for i in supp_pr:
            for j in range(sc.iota_pr(n)):
                fam = sc.pr_family(n, j)
                if pr_split and n >= trl:
                    # share the columns: each support index owns a block
                    col_owner = supp_pr[(j * len(supp_pr)) // sc.iota_pr(n)]
                    wide = i == col_owner
                else:
                    wide = i == owner
                grid[(i, j)] = full_subatom(fam) if wide \
                    else singleton_subatom(fam)
        supp = supp_pr if n >= trl else ()
        prs.append(PrCompound(n, supp_pr, supp, grid))

    frag = ConditionFragment(frame, horizon, trl, supp_pr, supp_lc, supp_al,
                             trl_al, tuple(prs),
                             tuple(LcCompound(n, supp_lc, (), {}, {}, {})
                                   for n in range(horizon)), {})

    lcs = []
    for n in range(horizon):
        supp = supp_lc if n >= trl else ()
        pri, cells, outer = {}, {}, {}
        for a in supp_lc:
            if a in supp:
                codes = fragment_pss(frag, n, a, sc)
                pri[a] = codes
                for t in codes:
                    for l in range(sc.istar(n)):
                        fam = sc.lc_family(n, t, l)
                        cells[(a, t, l)] = singleton_subatom(fam)
                if a == supp_lc[0]:
                    from .subatoms import full_subatom
                    t0 = codes[0]
                    cells[(a, t0, 0)] = full_subatom(sc.lc_family(n, t0, 0))
            else:
                for l in range(sc.istar(n)):
                    outer[(a, l)] = singleton_subatom(
                        sc.lc_family(n, sc.tmax(n), l))
        lcs.append(LcCompound(n, supp_lc, supp, pri, cells, outer))

    al = {}
    for a in supp_al:
        for n in range(horizon):
            if n >= trl_al[a]:
                codes = fragment_pss(frag, n, a, sc)
                comps = []
                for t in codes:
                    fam = sc.al_family(n, t)
                    if full_al:
                        from .subatoms import full_subatom
                        comps.append((t, full_subatom(fam)))
                    else:
                        comps.append((t, singleton_subatom(fam)))
                al[(a, n)] = AtomicCreature(Height("al", n), tuple(comps))
            else:
                al[(a, n)] = singleton_subatom(
                    sc.al_family(n, sc.tmax(n)))
    return replace(frag, lc=tuple(lcs), al=al)


def cond_level(n: int = 0) -> dict:
    """A level spec sized for condition experiments: one pr sublevel
    with a two-point tuple space, nested lc rows with chained halving
    budgets for the homogenisation cascade, wide al cells with norms
    above one, and honest possibility budgets."""
    from .params import count_subsets_le
    ns00 = count_subsets_le(3, 2)    # 7
    ns10 = count_subsets_le(4, 2)    # 11
    scale = 4096 ** n
    return {
        "pr": [(2 * scale, 8, 2)],
        "tsize": 2,
        "istar": 2,
        "lc_cells": {
            (0, 0): {"d": 4, "h": 2, "b": 3, "nS": ns00},
            (0, 1): {"d": 2 ** 7, "h": 2, "b": 3, "nS": ns00},
            (1, 0): {"d": 2 ** 49, "h": 2, "b": 4, "nS": ns10},
            (1, 1): {"d": 2 ** 77, "h": 2, "b": 4, "nS": ns10},
        },
        "al_cells": {
            0: {"d": 2, "h": 4, "g": 3, "b": 20, "a": 5, "nS": 30},
            1: {"d": 2, "h": 4, "g": 3, "b": 20, "a": 6, "nS": 57},
        },
        "nB_lc": 4,
        "nP_lc": 8 * scale,
        "nB_al": 1 << 40,
        "nP_al": 32 * scale,
        "nP_next": 8192 * scale,
        "nS_top": 2,
        "nS_Llc": ns10 * ns10,
        "nS_Lal": 57,
    }


def cond_table(depth: int = 2):
    from .compounds import craft_lab_table
    return craft_lab_table([cond_level(n) for n in range(depth)])


def sep_level(n: int, cols: int = 60, tstar: int = 7) -> dict:
    """A level spec wide enough for separated-support experiments at
    level n >= 2: sixty pr sublevels keep the stacked norm above one for
    two support indices on disjoint halves."""
    from .params import count_subsets_le
    cell = {"d": 2, "h": 2, "b": 3, "nS": count_subsets_le(3, 2)}
    return {
        "pr": [(1, 2, tstar)] * cols,
        "tsize": 2,
        "istar": 2,
        "lc_cells": {(t, l): dict(cell) for t in range(2) for l in range(2)},
        "nB_lc": 2,
        "nP_lc": 4,
        "nS_top": 3,
    }


def sep_table(depth: int = 3, cols: int = 60, tstar: int = 7):
    from .compounds import craft_lab_table
    return craft_lab_table([sep_level(n, cols, tstar)
                            for n in range(depth)])
