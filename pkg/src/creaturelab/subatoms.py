"""Subatomic families and their norms.

Two kinds of finite families are supported:

  P-kind  P(T, m)    - members are naturals below T; the norm is
                       (1/m) * log_m(|members|).
  S-kind  S(c, l, m) - members are subsets of [0, c) of size <= l; the
                       norm is (1/m) * log_m(cov + 1) where cov is the
                       covering number: the largest k <= c such that every
                       subset of [0, c) of size <= k is contained in some
                       member.

Both kinds support bigness thinning: given a labelling of the members
with fewer than m labels, a constant-labelled subfamily exists whose
norm drops by at most 1/m.  All norms are exact ``NormValue``s.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .hyper import NormValue
from .params import Report, ReportEntry, PASS, FAIL

P_KIND = "P"
S_KIND = "S"

# Brute-force guard rails: beyond these the operations fail loudly
# instead of silently approximating.
DEFAULT_GROUND_LIMIT = 30       # c for S-kind covering search
DEFAULT_WIDTH_LIMIT = 5         # l for S-kind members
DEFAULT_MEMBER_LIMIT = 1 << 20  # members of any subatom


class SubatomError(Exception):
    pass


class LimitExceeded(SubatomError):
    pass


class BignessHypothesisViolated(SubatomError):
    pass


@dataclass(frozen=True)
class FamilyDescriptor:
    """The ambient family a subatom lives in.

    kind P: members range over [0, T); ``m`` is the norm base.
    kind S: members are subsets of [0, c) of size <= l; ``m`` is the
    norm base and the label budget for bigness.
    """

    kind: str
    m: int
    T: int = 0
    c: int = 0
    l: int = 0

    def __post_init__(self):
        if self.kind not in (P_KIND, S_KIND):
            raise SubatomError(f"unknown family kind {self.kind!r}")
        if self.m < 2:
            raise SubatomError("family base m must be >= 2")
        if self.kind == P_KIND:
            if self.T < 1:
                raise SubatomError("P-kind ambient size T must be >= 1")
        else:
            if self.c < 1 or self.l < 1:
                raise SubatomError("S-kind needs c >= 1 and l >= 1")

    def to_json(self):
        if self.kind == P_KIND:
            return {"kind": self.kind, "m": self.m, "T": self.T}
        return {"kind": self.kind, "m": self.m, "c": self.c, "l": self.l}

    @staticmethod
    def from_json(obj) -> "FamilyDescriptor":
        if obj["kind"] == P_KIND:
            return FamilyDescriptor(P_KIND, int(obj["m"]), T=int(obj["T"]))
        return FamilyDescriptor(S_KIND, int(obj["m"]), c=int(obj["c"]),
                                l=int(obj["l"]))


def _canon_members(family: FamilyDescriptor, members):
    """Sorted, duplicate-free canonical form; validates ranges."""
    if family.kind == P_KIND:
        out = tuple(sorted(set(int(x) for x in members)))
        for x in out:
            if not 0 <= x < family.T:
                raise SubatomError(f"member {x} outside [0, {family.T})")
        return out
    canon = set()
    for mem in members:
        t = tuple(sorted(set(int(x) for x in mem)))
        if len(t) > family.l:
            raise SubatomError(f"member {t} larger than width bound {family.l}")
        for x in t:
            if not 0 <= x < family.c:
                raise SubatomError(f"member element {x} outside [0, {family.c})")
        canon.add(t)
    return tuple(sorted(canon))


@dataclass(frozen=True)
class Subatom:
    family: FamilyDescriptor
    members: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "members",
                           _canon_members(self.family, self.members))
        if not self.members:
            raise SubatomError("subatom must be non-empty (K1)")
        if len(self.members) > DEFAULT_MEMBER_LIMIT:
            raise LimitExceeded("too many members")

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def is_trivial(self) -> bool:
        return len(self.members) == 1

    def subset(self, members) -> "Subatom":
        sub = Subatom(self.family, members)
        if not set(sub.members) <= set(self.members):
            raise SubatomError("not a subfamily")
        return sub

    def to_json(self):
        mem = [list(m) for m in self.members] if self.family.kind == S_KIND \
            else list(self.members)
        return {"family": self.family.to_json(), "members": mem}

    @staticmethod
    def from_json(obj) -> "Subatom":
        return Subatom(FamilyDescriptor.from_json(obj["family"]),
                       obj["members"])


def full_subatom(family: FamilyDescriptor) -> Subatom:
    """The subatom holding every possible member of the family."""
    if family.kind == P_KIND:
        if family.T > DEFAULT_MEMBER_LIMIT:
            raise LimitExceeded("ambient family too large to materialise")
        return Subatom(family, range(family.T))
    _check_s_limits(family)
    members = []
    for k in range(family.l + 1):
        members.extend(combinations(range(family.c), k))
    # the empty tuple is a legitimate S-kind member (the empty subset)
    return Subatom(family, members)


def _check_s_limits(family: FamilyDescriptor):
    if family.c > DEFAULT_GROUND_LIMIT:
        raise LimitExceeded(f"ground set {family.c} beyond brute-force limit")
    if family.l > DEFAULT_WIDTH_LIMIT:
        raise LimitExceeded(f"member width {family.l} beyond brute-force limit")


def cov_norm(s: Subatom) -> int:
    """Largest k <= c such that every subset of [0, c) of size <= k is
    contained in some member; 0 when no such k >= 1 exists."""
    if s.family.kind != S_KIND:
        raise SubatomError("cov_norm is defined for S-kind subatoms only")
    _check_s_limits(s.family)
    c, l = s.family.c, s.family.l
    members = [frozenset(m) for m in s.members]
    # a set of size k can only fit inside a member of size >= k, so the
    # covering number never exceeds the width bound l
    cov = 0
    for k in range(1, min(c, l) + 1):
        ok = all(any(set(x) <= mem for mem in members)
                 for x in combinations(range(c), k))
        if not ok:
            break
        cov = k
    return cov


def subatom_norm(s: Subatom) -> NormValue:
    """(1/m) log_m(|members|) for P-kind; (1/m) log_m(cov + 1) for S-kind."""
    m = s.family.m
    if s.family.kind == P_KIND:
        return NormValue(Fraction(1, m), m, Fraction(len(s.members)))
    return NormValue(Fraction(1, m), m, Fraction(cov_norm(s) + 1))


def _label_classes(s: Subatom, labels) -> dict:
    """Group members by label; validates the labelling."""
    m = s.family.m
    classes: dict = {}
    for mem in s.members:
        if mem not in labels:
            raise BignessHypothesisViolated(f"member {mem!r} has no label")
        lab = int(labels[mem])
        if not 0 <= lab < m:
            raise BignessHypothesisViolated(
                f"label {lab} outside [0, {m}); label budget exceeds the base")
        classes.setdefault(lab, []).append(mem)
    return classes


def bigness_thin(s: Subatom, labels) -> Subatom:
    """A constant-labelled subfamily with norm >= norm(s) - 1/m.

    P-kind: the largest label preimage (pigeonhole: with at most m
    labels, some class has size >= |s|/m, so the norm drops by at most
    (1/m) log_m(m) = 1/m).

    S-kind: the label class of the largest covering number.  The
    covering numbers satisfy cov(s) + 1 <= sum over classes of
    (cov_class + 1), so the best class has cov + 1 >= (cov(s) + 1)/m.
    Should the class search ever fall short of the bound, an exhaustive
    subfamily search inside each class is attempted before giving up.
    """
    classes = _label_classes(s, labels)
    if s.family.kind == P_KIND:
        best = max(classes.values(), key=lambda v: (len(v), -min(v)))
        return Subatom(s.family, best)
    # S-kind
    target = cov_norm(s)  # need class cov + 1 >= (target + 1)/m, i.e.
    need = -(-(target + 1) // s.family.m) - 1  # class cov >= ceil((t+1)/m)-1
    best_mem, best_cov = None, -1
    for lab in sorted(classes):
        members = classes[lab]
        d = Subatom(s.family, members)
        cv = cov_norm(d)
        if cv > best_cov or (cv == best_cov and best_mem is None):
            best_mem, best_cov = members, cv
    if best_cov >= need:
        return Subatom(s.family, best_mem)
    # fallback: exhaustive subfamily search within each class (covering
    # numbers are monotone, so this cannot beat a full class; kept as a
    # loud safety net rather than silent failure)
    for lab in sorted(classes):
        members = classes[lab]
        if len(members) > 20:
            raise LimitExceeded("subfamily search space too large")
        for size in range(len(members), 0, -1):
            for sub in combinations(members, size):
                if cov_norm(Subatom(s.family, sub)) >= need:
                    return Subatom(s.family, sub)
    raise BignessHypothesisViolated(
        "no constant-labelled subfamily within 1/m of the norm")


def validate_subatom(s: Subatom) -> Report:
    """Clause checks K1 (non-empty), K2 (well-formed members),
    K3 (norm monotone under subfamilies), K4 (singletons have norm 0)."""
    entries = []

    def emit(clause, ok, detail=""):
        entries.append(ReportEntry(clause, f"subatom[{s.family.kind}]",
                                   PASS if ok else FAIL, "checked", detail))

    emit("K1", len(s.members) >= 1, f"{len(s.members)} members")
    # construction canonicalises and range-checks, so re-derive
    try:
        _canon_members(s.family, s.members)
        emit("K2", True)
    except SubatomError as exc:  # pragma: no cover - constructor blocks this
        emit("K2", False, str(exc))
    norm = subatom_norm(s)
    mono_ok = True
    check = s.members if len(s.members) <= 64 else s.members[:32] + s.members[-32:]
    for mem in check:
        sub = Subatom(s.family, [mem])
        sv = subatom_norm(sub).to_fraction()
        if sv is None or sv > (norm.to_fraction() or Fraction(10 ** 9)):
            mono_ok = False
            break
    emit("K3", mono_ok)
    if s.is_trivial:
        frac = subatom_norm(s).to_fraction()
        emit("K4", frac == 0, f"singleton norm {frac}")
    else:
        sv = subatom_norm(Subatom(s.family, [s.members[0]])).to_fraction()
        emit("K4", sv == 0, "one-element subfamily norm")
    return Report(entries)
