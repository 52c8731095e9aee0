"""Midpoint-radius ("ball") real arithmetic on dyadic numbers.

A :class:`BallReal` stores ``mid = man * 2**exp`` (rounded to ``prec``
significant bits) and an upper bound ``rad = rman * 2**rexp`` whose
mantissa is kept below 2**RAD_BITS and always rounded up. Every operation
returns a ball containing the exact image of every point of its inputs.
"""
from __future__ import annotations

import enum
import functools
import math
import os
from fractions import Fraction
from typing import Callable, TypeVar, Union

from .errors import DomainError, PrecisionExhausted, StraddlesHalfInteger

RAD_BITS = 30
DEFAULT_BITS = 256
MAX_BITS = 1 << 20

Number = Union[int, Fraction, "BallReal"]
T = TypeVar("T")


def default_bits() -> int:
    env = os.environ.get("FIBCUBES_BITS")
    return int(env) if env else DEFAULT_BITS


# ---- helpers on non-negative dyadic bounds (m, e) meaning m * 2**e ----------

def _up(m: int, e: int) -> tuple[int, int]:
    bl = m.bit_length()
    if bl > RAD_BITS:
        s = bl - RAD_BITS
        m = (m >> s) + 1
        e += s
    return m, e


def _down(m: int, e: int) -> tuple[int, int]:
    bl = m.bit_length()
    if bl > RAD_BITS + 2:
        s = bl - RAD_BITS - 2
        m >>= s
        e += s
    return m, e


def _add_up(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    (am, ae), (bm, be) = a, b
    if am == 0:
        return b
    if bm == 0:
        return a
    if ae < be:
        am, ae, bm, be = bm, be, am, ae
    if be + bm.bit_length() <= ae:
        # b is below one unit of a
        return _up(am + 1, ae)
    return _up((am << (ae - be)) + bm, be)


def _mul_up(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    return _up(a[0] * b[0], a[1] + b[1])


def _div_up(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    (am, ae), (bm, be) = a, b
    if bm <= 0:
        raise ZeroDivisionError
    if am == 0:
        return 0, 0
    s = RAD_BITS + 2 + bm.bit_length() - am.bit_length()
    if s >= 0:
        q = -((-(am << s)) // bm)
    else:
        q = -((-am) // (bm << -s))
    return _up(q, ae - be - s)


def _sqrt_up(a: tuple[int, int]) -> tuple[int, int]:
    m, e = a
    if m == 0:
        return 0, 0
    if e % 2:
        m <<= 1
        e -= 1
    t = max(0, RAD_BITS + 2 - m.bit_length() // 2)
    m <<= 2 * t
    e -= 2 * t
    r = math.isqrt(m)
    if r * r != m:
        r += 1
    return _up(r, e // 2)


def _sqrt_down(a: tuple[int, int]) -> tuple[int, int]:
    m, e = a
    if m == 0:
        return 0, 0
    if e % 2:
        m <<= 1
        e -= 1
    t = max(0, RAD_BITS + 2 - m.bit_length() // 2)
    m <<= 2 * t
    e -= 2 * t
    return _down(math.isqrt(m), e // 2)


def _frac_up(x: Fraction) -> tuple[int, int]:
    x = abs(Fraction(x))
    if x == 0:
        return 0, 0
    return _div_up((x.numerator, 0), (x.denominator, 0))


def _cmp_dyadic(am: int, ae: int, bm: int, be: int) -> int:
    """Exact comparison of two non-negative dyadics."""
    if am == 0 or bm == 0:
        return (am > 0) - (bm > 0)
    ta, tb = ae + am.bit_length(), be + bm.bit_length()
    if ta != tb:
        return 1 if ta > tb else -1
    if ae >= be:
        x, y = am << (ae - be), bm
    else:
        x, y = am, bm << (be - ae)
    return (x > y) - (x < y)


def _round_mid(man: int, exp: int, prec: int) -> tuple[int, int, tuple[int, int]]:
    """Round a signed dyadic to ``prec`` bits; returns (man, exp, error bound)."""
    bl = man.bit_length()
    if bl <= prec:
        return man, exp, (0, 0)
    s = bl - prec
    if man & ((1 << s) - 1) == 0:
        return man >> s, exp + s, (0, 0)
    half = 1 << (s - 1)
    man = (man + half) >> s
    return man, exp + s, (1, exp + s - 1)


class Ordering(enum.Enum):
    LESS = "less"
    GREATER = "greater"
    EQUAL = "equal"
    UNKNOWN = "unknown"


class BallReal:
    __slots__ = ("man", "exp", "rman", "rexp", "prec")

    def __init__(self, man: int, exp: int, rman: int = 0, rexp: int = 0, prec: int = DEFAULT_BITS):
        if man == 0:
            exp = 0
        if rman < 0:
            raise ValueError("radius must be non-negative")
        self.man = man
        self.exp = exp
        self.rman, self.rexp = _up(rman, rexp) if rman else (0, 0)
        self.prec = prec

    # -- construction ---------------------------------------------------------

    @classmethod
    def _make(cls, man, exp, rad, prec):
        man, exp, err = _round_mid(man, exp, prec)
        rad = _add_up(rad, err)
        return cls(man, exp, rad[0], rad[1], prec)

    @classmethod
    def exact(cls, value: int | Fraction | str, prec: int = DEFAULT_BITS) -> BallReal:
        """Ball for an int, Fraction or decimal string; exact when dyadic."""
        if isinstance(value, BallReal):
            return value
        if isinstance(value, str):
            value = Fraction(value)
        if isinstance(value, int):
            return cls._make(value, 0, (0, 0), prec)
        if isinstance(value, float):
            value = Fraction(value)
        num, den = value.numerator, value.denominator
        if den & (den - 1) == 0:
            return cls._make(num, -(den.bit_length() - 1), (0, 0), prec)
        s = prec + 2 + den.bit_length() - num.bit_length()
        s = max(s, 0)
        q = (num << s) // den
        return cls._make(q, -s, (1, -s), prec)

    @classmethod
    def from_bounds(cls, lo: Fraction, hi: Fraction, prec: int = DEFAULT_BITS) -> BallReal:
        lo, hi = Fraction(lo), Fraction(hi)
        centre = (lo + hi) / 2
        mid = cls.exact(centre, prec)
        rm, re = _frac_up((hi - lo) / 2 + abs(mid.mid_fraction() - centre))
        return cls(mid.man, mid.exp, rm, re, prec)

    def _coerce(self, other) -> BallReal:
        if isinstance(other, BallReal):
            return other
        if isinstance(other, (int, Fraction)):
            return BallReal.exact(other, self.prec)
        raise TypeError(f"cannot combine BallReal with {type(other).__name__}")

    # -- inspection -----------------------------------------------------------

    @property
    def radius_bound(self) -> tuple[int, int]:
        return self.rman, self.rexp

    def mid_fraction(self) -> Fraction:
        if self.exp >= 0:
            return Fraction(self.man << self.exp)
        return Fraction(self.man, 1 << -self.exp)

    def rad_fraction(self) -> Fraction:
        if self.rexp >= 0:
            return Fraction(self.rman << self.rexp)
        return Fraction(self.rman, 1 << -self.rexp)

    def lower(self) -> Fraction:
        return self.mid_fraction() - self.rad_fraction()

    def upper(self) -> Fraction:
        return self.mid_fraction() + self.rad_fraction()

    def is_exact(self) -> bool:
        return self.rman == 0

    def contains(self, value: int | Fraction | BallReal) -> bool:
        if isinstance(value, BallReal):
            return self.lower() <= value.lower() and value.upper() <= self.upper()
        return self.lower() <= Fraction(value) <= self.upper()

    def overlaps(self, other: BallReal) -> bool:
        return not (self.upper() < other.lower() or other.upper() < self.lower())

    def radius_below(self, log2_bound: int) -> bool:
        """True iff rad < 2**log2_bound."""
        if self.rman == 0:
            return True
        return self.rexp + self.rman.bit_length() <= log2_bound

    def is_positive(self) -> bool:
        return self.man > 0 and _cmp_dyadic(self.man, self.exp, self.rman, self.rexp) > 0

    def is_negative(self) -> bool:
        return self.man < 0 and _cmp_dyadic(-self.man, self.exp, self.rman, self.rexp) > 0

    def excludes_zero(self) -> bool:
        return self.is_positive() or self.is_negative()

    def __float__(self) -> float:
        return math.ldexp(self.man, self.exp) if self.man else 0.0

    def __repr__(self):
        return f"BallReal({self.to_decimal(20)} ± {float(self.rad_fraction()):.3g})"

    def to_decimal(self, digits: int = 30) -> str:
        """Midpoint as a decimal string with ``digits`` significant digits."""
        return format_fraction(self.mid_fraction(), digits)

    def with_prec(self, prec: int) -> BallReal:
        return BallReal._make(self.man, self.exp, (self.rman, self.rexp), prec)

    # -- arithmetic -----------------------------------------------------------

    def __neg__(self):
        return BallReal(-self.man, self.exp, self.rman, self.rexp, self.prec)

    def __pos__(self):
        return self

    def __add__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        prec = max(self.prec, o.prec)
        rad = _add_up((self.rman, self.rexp), (o.rman, o.rexp))
        m1, e1, m2, e2 = self.man, self.exp, o.man, o.exp
        if m1 == 0:
            return BallReal._make(m2, e2, rad, prec)
        if m2 == 0:
            return BallReal._make(m1, e1, rad, prec)
        t1, t2 = e1 + m1.bit_length(), e2 + m2.bit_length()
        if t2 < t1 - prec - 4:
            return BallReal._make(m1, e1, _add_up(rad, (1, t2)), prec)
        if t1 < t2 - prec - 4:
            return BallReal._make(m2, e2, _add_up(rad, (1, t1)), prec)
        e = min(e1, e2)
        return BallReal._make((m1 << (e1 - e)) + (m2 << (e2 - e)), e, rad, prec)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        prec = max(self.prec, o.prec)
        r1, r2 = (self.rman, self.rexp), (o.rman, o.rexp)
        rad = _add_up(
            _add_up(_mul_up(_up(abs(self.man), self.exp), r2), _mul_up(_up(abs(o.man), o.exp), r1)),
            _mul_up(r1, r2),
        )
        return BallReal._make(self.man * o.man, self.exp + o.exp, rad, prec)

    __rmul__ = __mul__

    def _abs_lower(self) -> tuple[int, int]:
        """Lower bound of min |x| over the ball, as a non-negative dyadic."""
        m, e, rm, re = abs(self.man), self.exp, self.rman, self.rexp
        if rm == 0:
            return _down(m, e)
        if m > 1 and re + rm.bit_length() <= e:
            return _down(m - 1, e)
        if re >= e:
            diff = (m << (e - min(e, re))) - (rm << (re - min(e, re)))
            return _down(max(diff, 0), min(e, re))
        diff = (m << (e - re)) - rm
        return _down(max(diff, 0), re)

    def __truediv__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        if not o.excludes_zero():
            raise DomainError("division by a ball containing zero")
        prec = max(self.prec, o.prec)
        m1, e1, m2, e2 = self.man, self.exp, o.man, o.exp
        s = max(0, prec + 2 + m2.bit_length() - m1.bit_length())
        q, r = divmod(m1 << s, m2)
        qe = e1 - e2 - s
        rad = (1, qe) if r else (0, 0)  # truncation of the quotient
        if self.rman or o.rman:
            t = _up(abs(q) + 1, qe)
            num = _add_up((self.rman, self.rexp), _mul_up(t, (o.rman, o.rexp)))
            rad = _add_up(rad, _div_up(num, o._abs_lower()))
        return BallReal._make(q, qe, rad, prec)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return 1 / (self ** (-n))
        result = BallReal.exact(1, self.prec)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def mul_2exp(self, k: int) -> BallReal:
        """Exact multiplication by 2**k."""
        return BallReal(self.man, self.exp + k, self.rman, self.rexp + k if self.rman else 0, self.prec)

    def __abs__(self):
        if self.is_positive() or self.man == 0 and self.rman == 0:
            return self
        if self.is_negative():
            return -self
        hi = _add_up(_up(abs(self.man), self.exp), (self.rman, self.rexp))
        return BallReal(hi[0], hi[1] - 1, hi[0], hi[1] - 1, self.prec)

    # -- discrete decisions ---------------------------------------------------

    def floor(self) -> int:
        lo, hi = math.floor(self.lower()), math.floor(self.upper())
        if lo != hi:
            raise PrecisionExhausted(f"floor of {self!r} is ambiguous")
        return lo


def ball(value: int | Fraction | str, prec: int | None = None) -> BallReal:
    return BallReal.exact(value, prec or default_bits())


def format_fraction(x: Fraction, digits: int = 30) -> str:
    """Decimal string of a rational rounded to ``digits`` significant digits."""
    if x == 0:
        return "0"
    sign = "-" if x < 0 else ""
    x = abs(x)
    e = len(str(x.numerator)) - len(str(x.denominator))
    # normalise so 10**(digits-1) <= x * 10**(digits-1-e) < 10**digits
    while x * Fraction(10) ** (digits - 1 - e) >= 10**digits:
        e += 1
    while x * Fraction(10) ** (digits - 1 - e) < 10 ** (digits - 1):
        e -= 1
    n = round(x * Fraction(10) ** (digits - 1 - e))
    if n == 10**digits:
        n //= 10
        e += 1
    if -5 <= e < digits:
        return sign + _plain(n, digits - 1 - e)
    s = str(n).rstrip("0")
    mant = s[0] + ("." + s[1:] if len(s) > 1 else "")
    return f"{sign}{mant}e{e:+d}"


def _plain(n: int, frac_digits: int) -> str:
    if frac_digits <= 0:
        return str(n * 10 ** (-frac_digits))
    s = str(n).rjust(frac_digits + 1, "0")
    whole, frac = s[:-frac_digits], s[-frac_digits:].rstrip("0")
    return whole + ("." + frac if frac else "")


# ---- certified comparisons --------------------------------------------------

def cmp_certified(x: BallReal | int | Fraction, y: BallReal | int | Fraction) -> Ordering:
    bits = max(getattr(x, "prec", DEFAULT_BITS), getattr(y, "prec", DEFAULT_BITS))
    x = BallReal.exact(x, bits) if not isinstance(x, BallReal) else x
    y = BallReal.exact(y, bits) if not isinstance(y, BallReal) else y
    if x.upper() < y.lower():
        return Ordering.LESS
    if y.upper() < x.lower():
        return Ordering.GREATER
    if x.is_exact() and y.is_exact() and x.mid_fraction() == y.mid_fraction():
        return Ordering.EQUAL
    return Ordering.UNKNOWN


def certainly_less(x, y) -> bool:
    return cmp_certified(x, y) is Ordering.LESS


def nearest_int_distance(x: BallReal) -> BallReal:
    """Ball for the distance from x to the nearest integer."""
    lo, hi = x.lower(), x.upper()
    n_lo, n_hi = math.floor(lo + Fraction(1, 2)), math.floor(hi + Fraction(1, 2))
    if n_lo != n_hi or (hi > lo and lo == n_lo - Fraction(1, 2)):
        raise StraddlesHalfInteger(f"{x!r} contains a half-integer")
    return abs(x - n_lo)


def nearest_integer(x: BallReal) -> int:
    lo, hi = x.lower(), x.upper()
    n_lo, n_hi = math.floor(lo + Fraction(1, 2)), math.floor(hi + Fraction(1, 2))
    if n_lo != n_hi:
        raise StraddlesHalfInteger(f"{x!r} contains a half-integer")
    return n_lo


# ---- elementary functions ---------------------------------------------------

def sqrt(x: BallReal) -> BallReal:
    if x.is_negative():
        raise DomainError("sqrt of a negative ball")
    prec = x.prec
    if x.man < 0 or x.man == 0:
        # ball touches zero: enclose [0, sqrt(hi)]
        hi = _add_up(_up(max(x.man, 0), x.exp), (x.rman, x.rexp))
        r = _sqrt_up(hi)
        return BallReal(r[0], r[1] - 1, r[0], r[1] - 1, prec)
    m, e = x.man, x.exp
    if e % 2:
        m <<= 1
        e -= 1
    t = max(0, prec + 2 - m.bit_length() // 2)
    root = math.isqrt(m << (2 * t))
    re = (e - 2 * t) // 2
    rad = (1, re)
    if x.rman:
        lo = x._abs_lower() if x.is_positive() else (0, 0)
        if lo[0]:
            prop = _div_up((x.rman, x.rexp), _sqrt_down(lo))
        else:
            prop = _sqrt_up((x.rman, x.rexp))
        rad = _add_up(rad, prop)
    return BallReal._make(root, re, rad, prec)


@functools.lru_cache(maxsize=64)
def _ln2(prec: int) -> BallReal:
    # ln 2 = 2 atanh(1/3)
    w = prec + 20
    z = BallReal.exact(Fraction(1, 3), w)
    z2 = z * z
    term = z
    total = z
    k = 1
    while True:
        term = term * z2
        k += 2
        piece = term / k
        total = total + piece
        if piece.upper() < Fraction(1, 1 << (w + 4)):
            break
    # tail after the last term: < term*z2/(1-z2) <= 2^-(w+4)
    total = total + BallReal(0, 0, 1, -(w + 3), w)
    return (total * 2).with_prec(prec)


def _atanh_series(z: BallReal, w: int) -> BallReal:
    """2*atanh(z) for |z| small, with certified tail."""
    z2 = z * z
    zmax = abs(z).upper()
    if zmax >= Fraction(1, 2):
        raise DomainError("series argument too large")
    term = z
    total = z
    k = 1
    eps = Fraction(1, 1 << (w + 4))
    while True:
        term = term * z2
        k += 2
        total = total + term / k
        tail_bound = zmax ** (k + 2) / (1 - zmax * zmax)
        if tail_bound < eps:
            break
    total = total + BallReal(0, 0, *_frac_up(tail_bound), w)
    return total * 2


def log(x: BallReal) -> BallReal:
    """Natural logarithm of a strictly positive ball."""
    if not x.is_positive():
        raise DomainError(f"log of a ball not certified positive: {x!r}")
    prec = x.prec
    r = max(4, int(math.isqrt(prec)) // 2)
    w = prec + r + 24
    # x = v * 2**t with v in [1, 2)
    t = x.exp + x.man.bit_length() - 1
    v = x.with_prec(w).mul_2exp(-t)
    for _ in range(r):
        v = sqrt(v)
    z = (v - 1) / (v + 1)
    ln_v = _atanh_series(z, w).mul_2exp(r)
    result = ln_v + _ln2(w) * t if t else ln_v
    return result.with_prec(prec)


def exp(x: BallReal) -> BallReal:
    prec = x.prec
    top = x.exp + abs(x.man).bit_length() if x.man else -1 << 30
    rtop = x.rexp + x.rman.bit_length() if x.rman else -1 << 30
    mag = max(top, rtop)
    if mag > 40:
        raise DomainError("exp argument too large")
    r = max(0, mag + 10)
    w = prec + r + 24
    y = x.with_prec(w).mul_2exp(-r)
    # Taylor series; |y| <= 2**-10
    ymax = abs(y).upper()
    total = BallReal.exact(1, w)
    term = BallReal.exact(1, w)
    k = 0
    eps = Fraction(1, 1 << (w + 4))
    while True:
        k += 1
        term = term * y / k
        total = total + term
        tail_bound = 2 * ymax ** (k + 1) / math.factorial(k + 1)
        if tail_bound < eps:
            break
    total = total + BallReal(0, 0, *_frac_up(tail_bound), w)
    for _ in range(r):
        total = total * total
    return total.with_prec(prec)


# ---- named constants --------------------------------------------------------

class ConstantId(enum.Enum):
    ALPHA = "alpha"
    ABS_BETA = "abs_beta"
    SQRT5 = "sqrt5"
    LOG_ALPHA = "log_alpha"
    LOG5 = "log5"
    LOG_ABS_BETA = "log_abs_beta"
    LOG_5SQRT5 = "log_5sqrt5"


@functools.lru_cache(maxsize=256)
def constant(cid: ConstantId, bits: int = DEFAULT_BITS) -> BallReal:
    """Certified ball of radius <= 2**(1-bits) around a named constant."""
    if bits < 64:
        raise ValueError("bits must be >= 64")
    w = bits + 16
    s5 = sqrt(BallReal.exact(5, w))
    if cid is ConstantId.SQRT5:
        val = s5
    elif cid is ConstantId.ALPHA:
        val = (s5 + 1).mul_2exp(-1)
    elif cid is ConstantId.ABS_BETA:
        val = (s5 - 1).mul_2exp(-1)
    elif cid is ConstantId.LOG_ALPHA:
        val = log((s5 + 1).mul_2exp(-1))
    elif cid is ConstantId.LOG_ABS_BETA:
        val = -log((s5 + 1).mul_2exp(-1))
    elif cid is ConstantId.LOG5:
        val = log(BallReal.exact(5, w))
    elif cid is ConstantId.LOG_5SQRT5:
        val = log(BallReal.exact(5, w)) * Fraction(3, 2)
    else:  # pragma: no cover
        raise ValueError(cid)
    out = BallReal(val.man, val.exp, val.rman, val.rexp, bits)
    assert out.radius_below(1 - bits)
    return out


def escalate(fn: Callable[[int], T], bits: int | None = None, cap: int = MAX_BITS) -> T:
    """Call ``fn(bits)``, doubling ``bits`` whenever a decision cannot be certified."""
    bits = bits or default_bits()
    while True:
        try:
            return fn(bits)
        except PrecisionExhausted as exc:
            if bits * 2 > cap:
                raise PrecisionExhausted(f"gave up at {bits} bits: {exc}") from exc
            bits *= 2
