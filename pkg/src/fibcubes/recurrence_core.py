"""Exact Fibonacci/Lucas values and arithmetic in Z[(1+sqrt5)/2].

Everything here is pure integer arithmetic; nothing is rounded.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .errors import IdentityViolation


class SequenceKind(enum.Enum):
    FIBONACCI = "fib"
    LUCAS = "lucas"
    NATURALS = "naturals"

    @classmethod
    def parse(cls, text: str) -> SequenceKind:
        aliases = {
            "fib": cls.FIBONACCI,
            "fibonacci": cls.FIBONACCI,
            "lucas": cls.LUCAS,
            "naturals": cls.NATURALS,
            "natural": cls.NATURALS,
        }
        try:
            return aliases[text.lower()]
        except KeyError:
            raise ValueError(f"unknown sequence kind {text!r}") from None


def _fib_pair(n: int) -> tuple[int, int]:
    """Return (F_n, F_{n+1}) by fast doubling."""
    a, b = 0, 1
    for bit in bin(n)[2:]:
        c = a * (2 * b - a)
        d = a * a + b * b
        if bit == "1":
            a, b = d, c + d
        else:
            a, b = c, d
    return a, b


def seq_value(kind: SequenceKind, n: int) -> int:
    """n-th term of the sequence, O(log n) multiplications."""
    if n < 0:
        raise ValueError("index must be non-negative")
    if kind is SequenceKind.NATURALS:
        return n
    f, f1 = _fib_pair(n)
    if kind is SequenceKind.FIBONACCI:
        return f
    # L_n = 2 F_{n+1} - F_n
    return 2 * f1 - f


def iter_values(kind: SequenceKind, start: int = 0) -> Iterator[int]:
    """Consecutive terms from ``start`` onward, by plain iteration."""
    if kind is SequenceKind.NATURALS:
        n = start
        while True:
            yield n
            n += 1
    a = seq_value(kind, start)
    b = seq_value(kind, start + 1)
    while True:
        yield a
        a, b = b, a + b


def seq_range(kind: SequenceKind, stop: int) -> list[int]:
    """Terms 0 .. stop-1 as a list."""
    it = iter_values(kind)
    return [next(it) for _ in range(stop)]


@dataclass(frozen=True)
class QuadExact:
    """The number (p + q*sqrt5)/2 with p and q of equal parity."""

    p: int
    q: int

    def __post_init__(self):
        if (self.p - self.q) % 2:
            raise ValueError(f"parity violated: ({self.p} + {self.q}√5)/2")

    @classmethod
    def from_int(cls, n: int) -> QuadExact:
        return cls(2 * n, 0)

    def _coerce(self, other):
        if isinstance(other, QuadExact):
            return other
        if isinstance(other, int):
            return QuadExact.from_int(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadExact(self.p + o.p, self.q + o.q)

    __radd__ = __add__

    def __neg__(self):
        return QuadExact(-self.p, -self.q)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadExact(self.p - o.p, self.q - o.q)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        # (p1 + q1 r)(p2 + q2 r)/4 with r^2 = 5
        p = self.p * o.p + 5 * self.q * o.q
        q = self.p * o.q + self.q * o.p
        return QuadExact(p // 2, q // 2)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> QuadExact:
        return quad_power(self, n)

    def conjugate(self) -> QuadExact:
        return QuadExact(self.p, -self.q)

    def norm(self) -> int:
        # (p^2 - 5 q^2)/4 is an integer whenever p = q (mod 2)
        return (self.p * self.p - 5 * self.q * self.q) // 4

    def inverse(self) -> QuadExact:
        """Inverse of a unit (norm +-1); other elements have no inverse in the ring."""
        nrm = self.norm()
        if nrm not in (1, -1):
            raise ZeroDivisionError(f"{self} is not a unit")
        c = self.conjugate()
        return c if nrm == 1 else -c

    @property
    def rational_part(self) -> Fraction:
        return Fraction(self.p, 2)

    @property
    def sqrt5_part(self) -> Fraction:
        return Fraction(self.q, 2)

    def sign(self) -> int:
        """Exact sign of the real number (p + q*sqrt5)/2."""
        p, q = self.p, self.q
        if q == 0:
            return (p > 0) - (p < 0)
        if p == 0:
            return 1 if q > 0 else -1
        if (p > 0) == (q > 0):
            return 1 if p > 0 else -1
        d = p * p - 5 * q * q
        if d == 0:
            return 0
        # the term with the larger square dominates
        if p > 0:
            return 1 if d > 0 else -1
        return -1 if d > 0 else 1

    def __str__(self):
        return f"({self.p} {'+' if self.q >= 0 else '-'} {abs(self.q)}√5)/2"


ONE = QuadExact(2, 0)
ALPHA = QuadExact(1, 1)
BETA = QuadExact(1, -1)
SQRT5 = QuadExact(0, 2)


def quad_power(base: QuadExact, n: int) -> QuadExact:
    """Binary exponentiation; negative exponents are allowed for units."""
    if n < 0:
        return quad_power(base.inverse(), -n)
    result = ONE
    sq = base
    while n:
        if n & 1:
            result = result * sq
        n >>= 1
        if n:
            sq = sq * sq
    return result


def binet_check(kind: SequenceKind, n: int) -> int:
    """Recover F_n or L_n from alpha^n +- beta^n and cross-check the recurrence."""
    if n < 0:
        raise ValueError("index must be non-negative")
    a_n = quad_power(ALPHA, n)
    b_n = quad_power(BETA, n)
    if kind is SequenceKind.FIBONACCI:
        diff = a_n - b_n
        # alpha - beta = sqrt5, so alpha^n - beta^n must be a pure sqrt5 multiple
        if diff.p != 0 or diff.q % 2:
            raise IdentityViolation(f"alpha^{n} - beta^{n} = {diff} is not an integer multiple of sqrt5")
        value = diff.q // 2
    elif kind is SequenceKind.LUCAS:
        total = a_n + b_n
        if total.q != 0 or total.p % 2:
            raise IdentityViolation(f"alpha^{n} + beta^{n} = {total} is not an integer")
        value = total.p // 2
    else:
        raise ValueError("Binet formulas exist only for Fibonacci and Lucas")
    expected = seq_value(kind, n)
    if value != expected:
        raise IdentityViolation(f"Binet gives {value}, recurrence gives {expected} at n={n}")
    return value


def fib_cube_via_identity(n: int) -> int:
    """F_n^3 = (F_{3n} + 3 (-1)^{n+1} F_n) / 5."""
    if n < 1:
        raise ValueError("n must be >= 1")
    sign = 1 if n % 2 else -1
    top = seq_value(SequenceKind.FIBONACCI, 3 * n) + 3 * sign * seq_value(SequenceKind.FIBONACCI, n)
    cube, rem = divmod(top, 5)
    if rem:
        raise IdentityViolation(f"F_{3 * n} + 3(-1)^{n + 1}F_{n} = {top} is not divisible by 5")
    return cube


def fib_cube_printed_form(n: int) -> Fraction:
    """The identity as printed without the factor 3: (F_{3n} + (-1)^{n+1} F_n)/5.

    Kept only so the failure at n = 3 can be demonstrated; it is not F_n^3.
    """
    sign = 1 if n % 2 else -1
    top = seq_value(SequenceKind.FIBONACCI, 3 * n) + sign * seq_value(SequenceKind.FIBONACCI, n)
    return Fraction(top, 5)


def lucas_cube_via_identity(n: int) -> int:
    """L_n^3 = L_{3n} + 3 (-1)^n L_n."""
    if n < 0:
        raise ValueError("n must be >= 0")
    sign = -1 if n % 2 else 1
    cube = seq_value(SequenceKind.LUCAS, 3 * n) + 3 * sign * seq_value(SequenceKind.LUCAS, n)
    if cube != seq_value(SequenceKind.LUCAS, n) ** 3:
        raise IdentityViolation(f"Lucas cube identity fails at n={n}")
    return cube
