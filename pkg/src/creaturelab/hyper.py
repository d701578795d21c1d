"""Certified arithmetic for quantities that may be towers of exponentials.

Values are naturals represented either exactly or by certified power-of-two
bounds.  All comparisons are sound: an answer of LT/EQ/GT is always correct,
and UNKNOWN is returned whenever the certificates overlap.  Exact rationals
and symbolic logarithmic norm values live here as well, so every inequality
in the rest of the package can be checked without floating-point guesswork
(a guarded float path with documented slack exists for norm-vs-norm
comparisons whose exact form is out of reach).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

# comparison outcomes
LT = "LT"
EQ = "EQ"
GT = "GT"
UNKNOWN = "UNKNOWN"

DEFAULT_DIGIT_BUDGET = 1 << 20  # bits
DEFAULT_DEPTH_CAP = 4

FLOAT_SLACK = 1e-9


def int_to_json(v: int):
    """Big naturals serialise as hex strings (decimal conversion of
    tower-scale flats exceeds the interpreter's digit limit)."""
    return str(v) if v.bit_length() <= 256 else hex(v)


def int_from_json(s) -> int:
    if isinstance(s, int):
        return s
    return int(s, 16) if s.startswith("0x") else int(s)


class HyperError(Exception):
    pass


class DepthExceeded(HyperError):
    pass


class DirectionMismatch(HyperError):
    pass


class BudgetExceeded(HyperError):
    pass


# ---------------------------------------------------------------------------
# Towers.
#
# A "tower" is a pair (k, n) of naturals denoting the exact value
# 2^2^...^2^n with k twos.  (0, n) is just n.  Towers are how we do sound
# arithmetic on bound certificates: every rounding step is an explicit
# over- or under-approximation, so derived bounds stay certified.
# ---------------------------------------------------------------------------

Tower = tuple[int, int]

# collapse 2^n into the top whenever the result stays tiny
_COLLAPSE = 64


def t_norm(t: Tower) -> Tower:
    k, n = t
    while k >= 1 and n <= _COLLAPSE:
        n = 1 << n
        k -= 1
    return (k, n)


def t_cmp(a: Tower, b: Tower, budget: int = DEFAULT_DIGIT_BUDGET) -> str:
    """Exact three-way comparison of two towers (never UNKNOWN)."""
    (k1, n1), (k2, n2) = t_norm(a), t_norm(b)
    # peel common exponentiation levels: cmp(2^x, 2^y) == cmp(x, y)
    # (valid because all tower values here are >= 1 after normalisation,
    #  except the bare value 0 which only occurs with k == 0)
    while k1 > 0 and k2 > 0:
        k1 -= 1
        k2 -= 1
    if k1 == 0 and k2 == 0:
        return LT if n1 < n2 else GT if n1 > n2 else EQ
    if k2 > 0:  # make the taller side the left one
        inv = {LT: GT, GT: LT, EQ: EQ}
        return inv[t_cmp((k2, n2), (k1, n1), budget)]
    # left is 2^^(k1, n1) with k1 >= 1 and n1 > _COLLAPSE; right is exact n2
    if k1 == 1 and n1 <= budget:
        v = 1 << n1
        return LT if v < n2 else GT if v > n2 else EQ
    # left >= 2^budget while right < 2^budget (exact ints respect the budget)
    return GT


def t_max(a: Tower, b: Tower) -> Tower:
    return a if t_cmp(a, b) != LT else b


def t_min(a: Tower, b: Tower) -> Tower:
    return a if t_cmp(a, b) != GT else b


def t_succ_upper(t: Tower) -> Tower:
    """A tower >= t + 1."""
    k, n = t
    if k == 0:
        return (0, n + 1)
    # 2^x + 1 <= 2^(x+1)
    inner = t_succ_upper((k - 1, n))
    return (inner[0] + 1, inner[1])


def t_double_upper(t: Tower) -> Tower:
    """A tower >= 2 * t."""
    k, n = t
    if k == 0:
        return (0, 2 * n)
    inner = t_succ_upper((k - 1, n))
    return (inner[0] + 1, inner[1])


def t_add_upper(a: Tower, b: Tower) -> Tower:
    if a[0] == 0 and b[0] == 0:
        return (0, a[1] + b[1])
    return t_double_upper(t_max(a, b))


def t_add_lower(a: Tower, b: Tower) -> Tower:
    if a[0] == 0 and b[0] == 0:
        return (0, a[1] + b[1])
    return t_max(a, b)


def t_log2_floor(t: Tower) -> Tower:
    k, n = t_norm(t)
    if k == 0:
        if n <= 0:
            raise HyperError("log2 of value <= 0")
        return (0, n.bit_length() - 1)
    return (k - 1, n)


def t_log2_ceil(t: Tower) -> Tower:
    k, n = t_norm(t)
    if k == 0:
        if n <= 0:
            raise HyperError("log2 of value <= 0")
        return (0, (n - 1).bit_length() if n > 1 else 0)
    return (k - 1, n)


def _fits(bits: Tower, budget: int) -> bool:
    return t_cmp(bits, (0, budget)) != GT


def t_mul_upper(a: Tower, b: Tower, budget: int = DEFAULT_DIGIT_BUDGET) -> Tower:
    a, b = t_norm(a), t_norm(b)
    if a[0] == 0 and b[0] == 0:
        if a[1].bit_length() + b[1].bit_length() <= budget:
            return (0, a[1] * b[1])
    if a == (0, 0) or b == (0, 0):
        return (0, 0)
    e = t_add_upper(t_log2_ceil(a), t_log2_ceil(b))
    return t_norm((e[0] + 1, e[1]))


def t_mul_lower(a: Tower, b: Tower, budget: int = DEFAULT_DIGIT_BUDGET) -> Tower:
    a, b = t_norm(a), t_norm(b)
    if a[0] == 0 and b[0] == 0:
        if a[1].bit_length() + b[1].bit_length() <= budget:
            return (0, a[1] * b[1])
    if a == (0, 0) or b == (0, 0):
        return (0, 0)
    e = t_add_lower(t_log2_floor(a), t_log2_floor(b))
    return t_norm((e[0] + 1, e[1]))


def t_pow_upper(base: Tower, exp: Tower, budget: int = DEFAULT_DIGIT_BUDGET) -> Tower:
    base, exp = t_norm(base), t_norm(exp)
    if exp == (0, 0):
        return (0, 1)
    if base[0] == 0 and base[1] <= 1:
        return base
    if base[0] == 0 and exp[0] == 0:
        bits = exp[1] * base[1].bit_length()
        if bits <= budget:
            return (0, base[1] ** exp[1])
    e = t_mul_upper(t_log2_ceil(base), exp, budget)
    return t_norm((e[0] + 1, e[1]))


def t_pow_lower(base: Tower, exp: Tower, budget: int = DEFAULT_DIGIT_BUDGET) -> Tower:
    base, exp = t_norm(base), t_norm(exp)
    if exp == (0, 0):
        return (0, 1)
    if base[0] == 0 and base[1] <= 1:
        return base
    if base[0] == 0 and exp[0] == 0:
        bits = exp[1] * base[1].bit_length()
        if bits <= budget:
            return (0, base[1] ** exp[1])
    e = t_mul_lower(t_log2_floor(base), exp, budget)
    return t_norm((e[0] + 1, e[1]))


# ---------------------------------------------------------------------------
# HyperInt: the exchange representation.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HyperInt:
    """An exact natural, or a certified power-of-two bound on one.

    form is one of "exact", "pow2lower", "pow2upper".  Pow2Lower(e)
    certifies value >= 2^e; Pow2Upper(e) certifies value <= 2^e.
    """

    form: str
    value: int | None = None
    exp: "HyperInt | None" = None

    def __post_init__(self):
        if self.form == "exact":
            if self.value is None or self.value < 0:
                raise HyperError("exact HyperInt needs a natural value")
        elif self.form in ("pow2lower", "pow2upper"):
            if self.exp is None:
                raise HyperError("bound HyperInt needs an exponent")
        else:
            raise HyperError(f"bad form {self.form!r}")

    @property
    def depth(self) -> int:
        if self.form == "exact":
            return 0
        return 1 + self.exp.depth

    @property
    def is_exact(self) -> bool:
        return self.form == "exact"

    def check_depth(self, cap: int = DEFAULT_DEPTH_CAP) -> "HyperInt":
        if self.depth > cap:
            raise DepthExceeded(f"nesting depth {self.depth} exceeds cap {cap}")
        return self

    def lower_tower(self) -> Tower:
        """A tower t with value >= t (certified)."""
        if self.form == "exact":
            return (0, self.value)
        if self.form == "pow2lower":
            k, n = self.exp.lower_tower()
            return t_norm((k + 1, n))
        return (0, 0)

    def upper_tower(self) -> Tower | None:
        """A tower t with value <= t, or None for 'no upper bound known'."""
        if self.form == "exact":
            return (0, self.value)
        if self.form == "pow2upper":
            t = self.exp.upper_tower()
            if t is None:
                return None
            return t_norm((t[0] + 1, t[1]))
        return None

    def to_json(self):
        if self.form == "exact":
            return {"exact": int_to_json(self.value)}
        key = self.form
        return {key: self.exp.to_json()}

    @staticmethod
    def from_json(obj) -> "HyperInt":
        if not isinstance(obj, dict) or len(obj) != 1:
            raise HyperError(f"bad HyperInt json: {obj!r}")
        key, val = next(iter(obj.items()))
        if key == "exact":
            return HyperInt("exact", value=int_from_json(val))
        if key in ("pow2lower", "pow2upper"):
            return HyperInt(key, exp=HyperInt.from_json(val))
        raise HyperError(f"bad HyperInt json key: {key!r}")

    def __repr__(self):
        if self.form == "exact":
            v = self.value
            s = str(v) if v.bit_length() <= 64 else f"~2^{v.bit_length() - 1}"
            return f"Exact({s})"
        tag = "Pow2Lower" if self.form == "pow2lower" else "Pow2Upper"
        return f"{tag}({self.exp!r})"


def exact(v: int) -> HyperInt:
    return HyperInt("exact", value=v)


def pow2_lower(e: HyperInt) -> HyperInt:
    return HyperInt("pow2lower", exp=e)


def pow2_upper(e: HyperInt) -> HyperInt:
    return HyperInt("pow2upper", exp=e)


def tower_hyper(t: Tower, direction: str) -> HyperInt:
    """Encode an exact tower as a nested bound HyperInt of one direction."""
    k, n = t
    h = exact(n)
    form = "pow2lower" if direction == "lower" else "pow2upper"
    for _ in range(k):
        h = HyperInt(form, exp=h)
    return h


def bound_hyper(t: Tower, direction: str) -> HyperInt:
    """Render a tower that is merely a bound (not the exact value).

    A flat tower (0, n) cannot be returned as Exact(n) here — that would
    overstate what is certified — so it is rounded to the nearest sound
    power-of-two bound.
    """
    k, n = t_norm(t)
    if k > 0:
        return tower_hyper((k, n), direction)
    if direction == "lower":
        if n < 1:
            raise HyperError("no useful lower bound below 1")
        return pow2_lower(exact(n.bit_length() - 1))
    return pow2_upper(exact((n - 1).bit_length() if n > 1 else 0))


def hyper_compare(a: HyperInt, b: HyperInt,
                  budget: int = DEFAULT_DIGIT_BUDGET) -> str:
    if a.is_exact and b.is_exact:
        return LT if a.value < b.value else GT if a.value > b.value else EQ
    ua, lb = a.upper_tower(), b.lower_tower()
    if ua is not None and t_cmp(ua, lb, budget) == LT:
        return LT
    la, ub = a.lower_tower(), b.upper_tower()
    if ub is not None and t_cmp(la, ub, budget) == GT:
        return GT
    return UNKNOWN


def _floor_log2_hyper(a: HyperInt) -> Tower:
    t = a.lower_tower()
    return t_log2_floor(t) if t_cmp(t, (0, 0)) == GT else (0, 0)


def hyper_mul(a: HyperInt, b: HyperInt, direction: str = "lower",
              budget: int = DEFAULT_DIGIT_BUDGET,
              depth_cap: int = DEFAULT_DEPTH_CAP) -> HyperInt:
    if a.is_exact and b.is_exact:
        if a.value.bit_length() + b.value.bit_length() <= budget:
            return exact(a.value * b.value)
        t = (t_mul_lower if direction == "lower" else t_mul_upper)(
            (0, a.value), (0, b.value), budget)
        return bound_hyper(t, direction).check_depth(depth_cap)
    if a.is_exact and a.value == 1:
        return b
    if b.is_exact and b.value == 1:
        return a
    if (a.is_exact and a.value == 0) or (b.is_exact and b.value == 0):
        return exact(0)
    forms = {a.form, b.form}
    if "pow2lower" in forms and "pow2upper" in forms:
        raise DirectionMismatch("cannot multiply a lower and an upper bound")
    if "pow2lower" in forms:
        t = t_mul_lower(a.lower_tower(), b.lower_tower(), budget)
        return bound_hyper(t, "lower").check_depth(depth_cap)
    ua, ub = a.upper_tower(), b.upper_tower()
    t = t_mul_upper(ua, ub, budget)
    return bound_hyper(t, "upper").check_depth(depth_cap)


def hyper_pow(a: HyperInt, e: HyperInt, direction: str = "lower",
              budget: int = DEFAULT_DIGIT_BUDGET,
              depth_cap: int = DEFAULT_DEPTH_CAP) -> HyperInt:
    if t_cmp(a.upper_tower() or (1, budget), (0, 1)) == LT:
        raise HyperError("hyper_pow requires base >= 1")
    if e.is_exact and e.value == 0:
        return exact(1)
    if a.is_exact and e.is_exact:
        bits = e.value * a.value.bit_length()
        if bits <= budget:
            return exact(a.value ** e.value)
    if direction == "lower":
        t = t_pow_lower(a.lower_tower(), e.lower_tower(), budget)
        return bound_hyper(t, "lower").check_depth(depth_cap)
    ua, ue = a.upper_tower(), e.upper_tower()
    if ua is None or ue is None:
        raise DirectionMismatch("no certified upper bound available for power")
    t = t_pow_upper(ua, ue, budget)
    return bound_hyper(t, "upper").check_depth(depth_cap)


# ---------------------------------------------------------------------------
# Cert: a certified interval used internally by the table generator and
# clause checker.  lo/hi are exact towers (hi may be None = unbounded).
# A "sharp" Cert has lo == hi and denotes an exactly known value, possibly
# far beyond the digit budget.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cert:
    lo: Tower
    hi: Tower | None

    @staticmethod
    def of(v: int) -> "Cert":
        return Cert((0, v), (0, v))

    @staticmethod
    def tower(k: int, n: int) -> "Cert":
        t = t_norm((k, n))
        return Cert(t, t)

    @staticmethod
    def from_hyper(h: HyperInt) -> "Cert":
        return Cert(h.lower_tower(), h.upper_tower())

    @property
    def sharp(self) -> bool:
        return self.hi is not None and self.lo == self.hi

    @property
    def exact_value(self) -> int | None:
        if self.sharp and self.lo[0] == 0:
            return self.lo[1]
        return None

    def hyper_lo(self) -> HyperInt:
        k, n = self.lo
        return exact(n) if k == 0 else tower_hyper(self.lo, "lower")

    def hyper_hi(self) -> HyperInt | None:
        if self.hi is None:
            return None
        k, n = self.hi
        return exact(n) if k == 0 else tower_hyper(self.hi, "upper")

    def to_json(self):
        if self.exact_value is not None:
            return {"exact": int_to_json(self.exact_value)}
        out = {"lo": [self.lo[0], int_to_json(self.lo[1])]}
        if self.hi is not None:
            out["hi"] = [self.hi[0], int_to_json(self.hi[1])]
        return out

    @staticmethod
    def from_json(obj) -> "Cert":
        if "exact" in obj:
            return Cert.of(int_from_json(obj["exact"]))
        lo = tuple(obj["lo"])
        hi = tuple(obj["hi"]) if "hi" in obj else None
        return Cert((lo[0], int_from_json(lo[1])),
                    None if hi is None else (hi[0], int_from_json(hi[1])))

    # -- arithmetic (all roundings sound) --

    def add(self, other: "Cert") -> "Cert":
        lo = t_add_lower(self.lo, other.lo)
        hi = None
        if self.hi is not None and other.hi is not None:
            hi = t_add_upper(self.hi, other.hi)
            if self.hi[0] == 0 and other.hi[0] == 0:
                hi = (0, self.hi[1] + other.hi[1])
        return Cert(lo, hi)

    def mul(self, other: "Cert", budget: int = DEFAULT_DIGIT_BUDGET) -> "Cert":
        lo = t_mul_lower(self.lo, other.lo, budget)
        hi = None
        if self.hi is not None and other.hi is not None:
            hi = t_mul_upper(self.hi, other.hi, budget)
        return Cert(lo, hi)

    def pow(self, e: "Cert", budget: int = DEFAULT_DIGIT_BUDGET) -> "Cert":
        lo = t_pow_lower(self.lo, e.lo, budget)
        hi = None
        if self.hi is not None and e.hi is not None:
            hi = t_pow_upper(self.hi, e.hi, budget)
        return Cert(lo, hi)

    def pow2(self) -> "Cert":
        """2 ** self."""
        lo = t_norm((self.lo[0] + 1, self.lo[1]))
        hi = None if self.hi is None else t_norm((self.hi[0] + 1, self.hi[1]))
        return Cert(lo, hi)

    def log2_floor(self) -> "Cert":
        lo = t_log2_floor(self.lo) if t_cmp(self.lo, (0, 0)) == GT else (0, 0)
        hi = None if self.hi is None else t_log2_ceil(self.hi)
        return Cert(lo, hi)

    def log2_ceil(self) -> "Cert":
        return self.log2_floor()  # same certified interval

    def succ(self) -> "Cert":
        return self.add(Cert.of(1))

    def double(self) -> "Cert":
        return self.mul(Cert.of(2))

    def round_up(self) -> "Cert":
        """Sharpen to the exact tower given by the upper bound.

        Used by the generator: 'at least the clause bound' becomes the
        concrete value hi, which certifies the clause by construction.
        """
        if self.hi is None:
            raise HyperError("cannot round up an unbounded Cert")
        return Cert(self.hi, self.hi)

    def cmp(self, other: "Cert", budget: int = DEFAULT_DIGIT_BUDGET) -> str:
        if self.sharp and other.sharp:
            return t_cmp(self.lo, other.lo, budget)
        if self.hi is not None and t_cmp(self.hi, other.lo, budget) == LT:
            return LT
        if other.hi is not None and t_cmp(self.lo, other.hi, budget) == GT:
            return GT
        return UNKNOWN

    def __repr__(self):
        def ts(t):
            if t is None:
                return "inf"
            k, n = t
            ns = str(n) if n.bit_length() <= 64 else f"#2^{n.bit_length() - 1}"
            return "2^" * k + ns

        if self.sharp:
            return f"Cert({ts(self.lo)})"
        return f"Cert[{ts(self.lo)}, {ts(self.hi)}]"


def cert_sum(items) -> Cert:
    total = Cert.of(0)
    for it in items:
        total = total.add(it)
    return total


def cert_prod(items, budget: int = DEFAULT_DIGIT_BUDGET) -> Cert:
    total = Cert.of(1)
    for it in items:
        total = total.mul(it, budget)
    return total


# ---------------------------------------------------------------------------
# NormValue: symbolic scale * log_base(argument).
# ---------------------------------------------------------------------------


def _flog2(x: Fraction) -> float:
    """Accurate float log2 of a positive Fraction of any size."""
    n, d = x.numerator, x.denominator

    def ilog2(v: int) -> float:
        if v.bit_length() <= 900:
            return math.log2(v)
        shift = v.bit_length() - 64
        return math.log2(v >> shift) + shift

    return ilog2(n) - ilog2(d)


@dataclass(frozen=True)
class NormValue:
    """The value scale * log_base(argument), kept symbolic.

    `exact` is False when the argument was obtained through a float
    fallback; comparisons against such values carry 1e-9 slack.
    """

    scale: Fraction
    base: int
    argument: Fraction
    exact: bool = True

    def __post_init__(self):
        if self.scale <= 0:
            raise HyperError("NormValue scale must be positive")
        if self.base < 2:
            raise HyperError("NormValue base must be >= 2")
        if self.argument <= 0:
            raise HyperError("NormValue argument must be positive")

    def value(self) -> float:
        return float(self.scale) * _flog2(self.argument) / math.log2(self.base)

    def to_fraction(self) -> Fraction | None:
        """Exact rational value, when the argument is a power of the base."""

        def plog(v: int) -> int | None:
            if v == 1:
                return 0
            e = 0
            while v % self.base == 0:
                v //= self.base
                e += 1
            return e if v == 1 else None

        en = plog(self.argument.numerator)
        ed = plog(self.argument.denominator)
        if en is None or ed is None:
            return None
        return self.scale * (en - ed)

    def to_json(self):
        return {
            "scale": {"num": str(self.scale.numerator), "den": str(self.scale.denominator)},
            "base": self.base,
            "argument": {"num": str(self.argument.numerator), "den": str(self.argument.denominator)},
            "exact": self.exact,
            "float": self.value(),
        }

    @staticmethod
    def from_json(obj) -> "NormValue":
        return NormValue(
            Fraction(int(obj["scale"]["num"]), int(obj["scale"]["den"])),
            int(obj["base"]),
            Fraction(int(obj["argument"]["num"]), int(obj["argument"]["den"])),
            bool(obj.get("exact", True)),
        )

    def __repr__(self):
        return f"NormValue({self.value():.6g}{'' if self.exact else '~'})"


ZERO_NORM = NormValue(Fraction(1), 2, Fraction(1))


def make_norm(v: Fraction) -> NormValue:
    """A NormValue with exact rational value v >= 0."""
    if v < 0:
        raise HyperError("norms are non-negative")
    if v == 0:
        return NormValue(Fraction(1), 2, Fraction(1))
    return NormValue(v, 2, Fraction(2))


def norm_cmp(x: NormValue, z: Fraction,
             budget: int = DEFAULT_DIGIT_BUDGET) -> str:
    """Exact comparison of a NormValue against a rational threshold.

    Decides scale*log_base(arg) vs z by cross-exponentiation:
    log_base(arg) vs p/q  <=>  arg^q vs base^p.
    """
    zz = z / x.scale
    p, q = zz.numerator, zz.denominator
    an, ad = x.argument.numerator, x.argument.denominator
    # arg^q vs base^p  <=>  an^q * base^max(-p,0) vs ad^q * base^max(p,0)
    bits_l = q * an.bit_length() + max(-p, 0) * x.base.bit_length()
    bits_r = q * ad.bit_length() + max(p, 0) * x.base.bit_length()
    if bits_l > budget or bits_r > budget:
        raise BudgetExceeded("cross-exponentiation exceeds digit budget")
    left = an ** q * x.base ** max(-p, 0)
    right = ad ** q * x.base ** max(p, 0)
    return LT if left < right else GT if left > right else EQ


def norm_cmp_float(x: NormValue, z: Fraction, slack: float = FLOAT_SLACK) -> str:
    v = x.value() - float(z)
    if v > slack:
        return GT
    if v < -slack:
        return LT
    return EQ


def norm_ge(x: NormValue, z: Fraction, budget: int = DEFAULT_DIGIT_BUDGET) -> bool:
    """x >= z, exact when in budget, float path (1e-9 slack) otherwise."""
    if x.exact:
        try:
            return norm_cmp(x, z, budget) != LT
        except BudgetExceeded:
            pass
    return norm_cmp_float(x, z) != LT


def norm_vs_norm(x: NormValue, y: NormValue,
                 budget: int = DEFAULT_DIGIT_BUDGET) -> str:
    """Compare two NormValues; exact where structure allows, else float."""
    if x.base == y.base and x.scale == y.scale and x.exact and y.exact:
        a, b = x.argument, y.argument
        return LT if a < b else GT if a > b else EQ
    fx, fy = (x.to_fraction() if x.exact else None), (y.to_fraction() if y.exact else None)
    if fx is not None and fy is not None:
        return LT if fx < fy else GT if fx > fy else EQ
    if fx is not None and x.exact and y.exact:
        try:
            inv = {LT: GT, GT: LT, EQ: EQ}
            return inv[norm_cmp(y, fx, budget)]
        except BudgetExceeded:
            pass
    if fy is not None and x.exact and y.exact:
        try:
            return norm_cmp(x, fy, budget)
        except BudgetExceeded:
            pass
    vx, vy = x.value(), y.value()
    if vx < vy - FLOAT_SLACK:
        return LT
    if vx > vy + FLOAT_SLACK:
        return GT
    return EQ


def norm_min(values) -> NormValue:
    values = list(values)
    if not values:
        raise HyperError("norm_min of nothing")
    best = values[0]
    for v in values[1:]:
        if norm_vs_norm(v, best) == LT:
            best = v
    return best


def norm_value_fraction(x: NormValue) -> tuple[Fraction, bool]:
    """Best-effort rational value: (value, is_exact)."""
    f = x.to_fraction()
    if f is not None and x.exact:
        return f, True
    return Fraction(x.value()).limit_denominator(10 ** 12), False


def rat_to_json(r: Fraction):
    return {"num": str(r.numerator), "den": str(r.denominator)}


def rat_from_json(obj) -> Fraction:
    return Fraction(int(obj["num"]), int(obj["den"]))
