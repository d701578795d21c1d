"""Exact arithmetic for iterated-exponential integers.

Values produced by the feasibility-clause generator grow like short towers
of exponentials (2^(2^(2^k...))).  Certified lower/upper tower pairs cannot
decide some of the comparisons the block checker needs (small multiplicative
margins sit strictly between adjacent representable towers), so this module
provides an *exact* representation closed under the operations we actually
perform: addition, multiplication, small powers, 2^x, and comparison.

An LInt is a finite sum  sum_i coeff_i * 2^(exp_i) + rest  where the
exponents are themselves LInts (strictly decreasing), the coefficients are
positive Python ints, and `rest` is a plain non-negative int.  Values whose
exponents are small are folded into `rest`, so ordinary integers stay
ordinary.  LDiff is a formal difference of two LInts, needed for quantities
defined by subtraction (complement counts) whose exact value has no finite
binary expansion at tower scale; comparisons cross-add so they stay exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

LT = "LT"
EQ = "EQ"
GT = "GT"

# A power 2^e is folded into the plain-int part when e <= FLAT_BITS.
FLAT_BITS = 1 << 16


def _ij(v: int):
    from . import hyper
    return hyper.int_to_json(v)


def _fj(s) -> int:
    from . import hyper
    return hyper.int_from_json(s)


class LayeredError(Exception):
    pass


@dataclass(frozen=True)
class LInt:
    # value = sum(c * 2^e for (e, c) in terms) + rest, terms sorted by
    # strictly decreasing exponent, every term exponent > FLAT_BITS.
    terms: tuple = ()
    rest: int = 0

    def __post_init__(self):
        if self.rest < 0:
            raise LayeredError("LInt is non-negative")

    @property
    def is_flat(self) -> bool:
        return not self.terms

    def flat_value(self) -> int:
        if self.terms:
            raise LayeredError("not a flat value")
        return self.rest

    def is_zero(self) -> bool:
        return not self.terms and self.rest == 0

    def pure_exponent(self) -> "LInt | None":
        """The e with self == 2^e exactly, if self has that shape."""
        if not self.terms:
            v = self.rest
            if v > 0 and v & (v - 1) == 0:
                return lint(v.bit_length() - 1)
            return None
        if len(self.terms) == 1 and self.rest == 0 and self.terms[0][1] == 1:
            return self.terms[0][0]
        return None

    def to_json(self):
        if not self.terms:
            return {"int": _ij(self.rest)}
        return {
            "sum": [[e.to_json(), _ij(c)] for e, c in self.terms],
            "rest": _ij(self.rest),
        }

    @staticmethod
    def from_json(obj) -> "LInt":
        if "int" in obj:
            return lint(_fj(obj["int"]))
        terms = tuple(
            (LInt.from_json(e), _fj(c)) for e, c in obj["sum"]
        )
        return _canon(terms, _fj(obj["rest"]))

    def __repr__(self):
        if not self.terms:
            v = self.rest
            return str(v) if v.bit_length() <= 64 else f"<{v.bit_length()}-bit int>"
        parts = [f"{c}*2^({e!r})" for e, c in self.terms[:3]]
        if len(self.terms) > 3:
            parts.append("...")
        if self.rest:
            parts.append(str(self.rest))
        return "(" + " + ".join(parts) + ")"


def _cached_hash(self) -> int:
    h = self.__dict__.get("_hash")
    if h is None:
        h = hash((self.terms, self.rest))
        object.__setattr__(self, "_hash", h)
    return h


LInt.__hash__ = _cached_hash  # type: ignore[assignment]


def lint(v: int) -> LInt:
    return LInt((), v)


L0 = lint(0)
L1 = lint(1)
L2 = lint(2)


def _canon(terms, rest: int) -> LInt:
    """Normalise a term list: merge equal exponents, fold small powers."""
    out = []
    for e, c in terms:
        if c == 0:
            continue
        if e.is_flat and e.rest <= FLAT_BITS:
            rest += c << e.rest
            continue
        # keep coefficients odd: c = odd * 2^j folds into the exponent
        j = (c & -c).bit_length() - 1
        if j:
            e, c = ladd_int(e, j), c >> j
        out.append((e, c))
    # insertion sort by exponent, descending; merge equals (term counts stay small)
    sorted_terms: list = []
    for e, c in out:
        placed = False
        for i, (e2, c2) in enumerate(sorted_terms):
            cmp = lcmp(e, e2)
            if cmp == EQ:
                sorted_terms[i] = (e2, c2 + c)
                placed = True
                break
            if cmp == GT:
                sorted_terms.insert(i, (e, c))
                placed = True
                break
        if not placed:
            sorted_terms.append((e, c))
    # merging equal exponents can leave an even coefficient; re-run so the
    # representation is canonical (odd coefficients, no foldable powers)
    if any(c == 0 or c & 1 == 0 or (e.is_flat and e.rest <= FLAT_BITS)
           for e, c in sorted_terms):
        return _canon(tuple(sorted_terms), rest)
    return LInt(tuple(sorted_terms), rest)


def ladd(a: LInt, b: LInt) -> LInt:
    if not a.terms and not b.terms:
        return lint(a.rest + b.rest)
    return _canon(a.terms + b.terms, a.rest + b.rest)


def ladd_int(a: LInt, n: int) -> LInt:
    return ladd(a, lint(n))


def lsum(items) -> LInt:
    total = L0
    for it in items:
        total = ladd(total, it)
    return total


def lpow2(e: LInt) -> LInt:
    if e.is_flat and e.rest <= FLAT_BITS:
        return lint(1 << e.rest)
    return LInt(((e, 1),), 0)


def lmul(a: LInt, b: LInt) -> LInt:
    if not a.terms and not b.terms:
        return lint(a.rest * b.rest)
    terms = []
    rest = a.rest * b.rest
    for ea, ca in a.terms:
        for eb, cb in b.terms:
            terms.append((ladd(ea, eb), ca * cb))
        if b.rest:
            terms.append((ea, ca * b.rest))
    for eb, cb in b.terms:
        if a.rest:
            terms.append((eb, cb * a.rest))
    return _canon(tuple(terms), rest)


def lprod(items) -> LInt:
    total = L1
    for it in items:
        total = lmul(total, it)
    return total


def lpow(a: LInt, n: int) -> LInt:
    if n < 0:
        raise LayeredError("negative power")
    result = L1
    base = a
    while n:
        if n & 1:
            result = lmul(result, base)
        base_needed = n >> 1
        if base_needed:
            base = lmul(base, base)
        n = base_needed
    return result


def _gap_small(hi: LInt, lo: LInt, cap: int) -> int | None:
    """Exact hi - lo if it is a plain int <= 2^cap-ish, else None.

    Works by cancelling structurally equal terms; anything left over with a
    large exponent means the gap is astronomically large (returns None).
    Assumes hi >= lo.
    """
    remaining = list(hi.terms)
    for e, c in lo.terms:
        for i, (e2, c2) in enumerate(remaining):
            if lcmp(e, e2) == EQ:
                if c2 == c:
                    remaining.pop(i)
                elif c2 > c:
                    remaining[i] = (e2, c2 - c)
                else:
                    return None  # hi has a deficit at this scale
                break
        else:
            return None  # lo has a term hi lacks; caller's orientation wrong
    if remaining:
        return None  # leftover term with huge exponent -> huge gap
    diff = hi.rest - lo.rest
    if diff < 0 or diff.bit_length() > cap:
        return None
    return diff


_LCMP_CACHE: dict = {}


def lcmp(a: LInt, b: LInt) -> str:
    if not a.terms and not b.terms:
        return LT if a.rest < b.rest else GT if a.rest > b.rest else EQ
    key = (a, b)
    r = _LCMP_CACHE.get(key)
    if r is None:
        r = _lcmp_impl(a, b)
        if len(_LCMP_CACHE) > 1 << 20:
            _LCMP_CACHE.clear()
        _LCMP_CACHE[key] = r
    return r


def _lcmp_impl(a: LInt, b: LInt) -> str:
    # Merge the term lists into one descending sweep of exponents, tracking
    # the signed coefficient accumulator rescaled at each exponent change.
    entries = [(e, c, 1) for e, c in a.terms] + [(e, c, -1) for e, c in b.terms]
    merged: list = []  # (exp, signed coeff), descending, exponents distinct
    for e, c, sign in entries:
        placed = False
        for i, (e2, c2) in enumerate(merged):
            cmp = lcmp(e, e2)
            if cmp == EQ:
                merged[i] = (e2, c2 + sign * c)
                placed = True
                break
            if cmp == GT:
                merged.insert(i, (e, sign * c))
                placed = True
                break
        if not placed:
            merged.append((e, sign * c))
    acc = 0
    prev_exp: LInt | None = None
    tail_bound = sum(abs(c) for _, c in merged)  # bound on everything below
    for e, c in merged:
        if acc != 0:
            # scale the accumulator from prev_exp down to e
            need = tail_bound.bit_length() + 2
            gap = _gap_small(prev_exp, e, max(need, 64))
            if gap is None or gap > max(need, 64):
                # accumulated lead dominates all remaining terms and rests
                return GT if acc > 0 else LT
            acc <<= gap
        acc += c
        tail_bound -= abs(c)
        prev_exp = e
    if acc != 0:
        # remaining flat rests are < 2^FLAT_BITS < 2^prev_exp
        return GT if acc > 0 else LT
    return LT if a.rest < b.rest else GT if a.rest > b.rest else EQ


def lmax(a: LInt, b: LInt) -> LInt:
    return b if lcmp(a, b) == LT else a


def lmin(a: LInt, b: LInt) -> LInt:
    return b if lcmp(a, b) == GT else a


def llog2_floor(a: LInt) -> LInt:
    """Exact floor(log2 a) when computable in closed form.

    Exact for flat values and pure powers; for general sums the floor equals
    lead exponent + floor(log2 of the scaled remainder) only when the lower
    terms cannot push the value over the next power of two, which holds
    whenever the leading gap is large (always true for our generators).
    """
    if a.is_zero():
        raise LayeredError("log of zero")
    if not a.terms:
        return lint(a.rest.bit_length() - 1)
    (e, c) = a.terms[0]
    tail = sum(cc for _, cc in a.terms[1:]) + (1 if a.rest else 0)
    lead_bits = c.bit_length() - 1
    if tail == 0 or (c >> lead_bits) << lead_bits != c or tail < (1 << 30):
        # floor(log2) is e + floor(log2 c) unless the tail carries c over a
        # power of two; with c's low bits or any tail < 2^e that cannot
        # happen beyond lead_bits.
        return ladd_int(e, lead_bits)
    raise LayeredError("floor log2 not decidable in closed form")


def llog2_ceil(a: LInt) -> LInt:
    if a.is_zero():
        raise LayeredError("log of zero")
    if not a.terms:
        v = a.rest
        return lint(v.bit_length() - 1 if v & (v - 1) == 0 else v.bit_length())
    p = a.pure_exponent()
    if p is not None:
        return p
    return ladd_int(llog2_floor(a), 1)


# ---------------------------------------------------------------------------
# Formal differences (needed for complement counts like b* - prod(b - h)).
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LDiff:
    pos: LInt
    neg: LInt

    @staticmethod
    def of(v: LInt) -> "LDiff":
        return LDiff(v, L0)

    def exact(self) -> LInt | None:
        """Collapse to an LInt when the subtraction is small enough."""
        if self.neg.is_zero():
            return self.pos
        if not self.pos.terms and not self.neg.terms:
            return lint(self.pos.rest - self.neg.rest)
        return None

    def add(self, other: "LDiff") -> "LDiff":
        return LDiff(ladd(self.pos, other.pos), ladd(self.neg, other.neg))

    def mul(self, other: "LDiff") -> "LDiff":
        return LDiff(
            ladd(lmul(self.pos, other.pos), lmul(self.neg, other.neg)),
            ladd(lmul(self.pos, other.neg), lmul(self.neg, other.pos)),
        )

    def mul_lint(self, k: LInt) -> "LDiff":
        return LDiff(lmul(self.pos, k), lmul(self.neg, k))

    def cmp(self, other: "LDiff") -> str:
        return lcmp(ladd(self.pos, other.neg), ladd(other.pos, self.neg))

    def cmp_lint(self, v: LInt) -> str:
        return lcmp(self.pos, ladd(v, self.neg))

    def is_nonneg(self) -> bool:
        return lcmp(self.pos, self.neg) != LT

    def to_json(self):
        if self.neg.is_zero():
            return self.pos.to_json()
        return {"pos": self.pos.to_json(), "neg": self.neg.to_json()}

    @staticmethod
    def from_json(obj) -> "LDiff":
        if "pos" in obj:
            return LDiff(LInt.from_json(obj["pos"]), LInt.from_json(obj["neg"]))
        return LDiff.of(LInt.from_json(obj))

    def __repr__(self):
        if self.neg.is_zero():
            return repr(self.pos)
        return f"({self.pos!r} - {self.neg!r})"


def ldiff_sum(items) -> LDiff:
    total = LDiff.of(L0)
    for it in items:
        total = total.add(it)
    return total


def ldiff_prod(items) -> LDiff:
    total = LDiff.of(L1)
    for it in items:
        total = total.mul(it)
    return total


# ---------------------------------------------------------------------------
# Interop with the certified tower arithmetic.
# ---------------------------------------------------------------------------


def tower_bounds(a: LInt) -> tuple:
    """Sound ((k, n) lower, (k, n) upper) tower bounds for interop."""
    from . import hyper

    if not a.terms:
        return (0, a.rest), (0, a.rest)
    lo_log = llog2_floor(a)
    hi_log = ladd_int(lo_log, 1)
    lo_k, lo_n = tower_bounds(lo_log)[0]
    hi_k, hi_n = tower_bounds(hi_log)[1]
    return hyper.t_norm((lo_k + 1, lo_n)), hyper.t_norm((hi_k + 1, hi_n))
