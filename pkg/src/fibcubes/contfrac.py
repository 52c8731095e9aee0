"""Certified continued-fraction expansion of a ball."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .ballreal import BallReal
from .errors import PrecisionExhausted


@dataclass
class CFExpansion:
    quotients: list[int] = field(default_factory=list)
    convergents: list[tuple[int, int]] = field(default_factory=list)
    terminated: bool = False  # the ball was an exact rational and the expansion ended

    @property
    def last(self) -> tuple[int, int]:
        return self.convergents[-1]

    def check_determinants(self) -> None:
        """Raise AssertionError unless p_j q_{j-1} - p_{j-1} q_j = (-1)^(j-1) for all j >= 1."""
        for j in range(1, len(self.convergents)):
            p, q = self.convergents[j]
            pp, qp = self.convergents[j - 1]
            if p * qp - pp * q != (-1) ** (j - 1):
                raise AssertionError(f"determinant identity fails at j={j}")


def fold(quotients: list[int]) -> Fraction:
    """Evaluate [a0; a1, ..., an] back to a fraction."""
    value = Fraction(quotients[-1])
    for a in reversed(quotients[:-1]):
        value = a + 1 / value
    return value


def expand(
    x: BallReal,
    stop: Optional[Callable[[int], bool]] = None,
    max_terms: Optional[int] = None,
) -> CFExpansion:
    """Expand ``x`` until the first convergent whose q satisfies ``stop``.

    Every partial quotient is certified: if the ball straddles an integer
    the expansion raises PrecisionExhausted instead of guessing.
    """
    if stop is None and max_terms is None:
        raise ValueError("give a stop predicate or max_terms")
    out = CFExpansion()
    # seeds p_{-2}, p_{-1} = 0, 1 and q_{-2}, q_{-1} = 1, 0
    p_prev, p = 0, 1
    q_prev, q = 1, 0
    y = x
    while True:
        a = y.floor()
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        out.quotients.append(a)
        out.convergents.append((p, q))
        if stop is not None and stop(q):
            return out
        if max_terms is not None and len(out.quotients) >= max_terms:
            return out
        frac = y - a
        if not frac.excludes_zero():
            if frac.is_exact() and frac.man == 0:
                out.terminated = True
                return out
            raise PrecisionExhausted(f"cannot certify partial quotient {len(out.quotients)}")
        y = 1 / frac


def convergent_quality(x: BallReal, j: int, expansion: Optional[CFExpansion] = None) -> BallReal:
    """Certified |x - p_j/q_j| * q_j * q_{j+1}; lies in (0, 1) for a correct expansion."""
    cf = expansion or expand(x, max_terms=j + 2)
    if len(cf.convergents) < j + 2:
        raise ValueError(f"need {j + 2} convergents, have {len(cf.convergents)}")
    p, q = cf.convergents[j]
    q_next = cf.convergents[j + 1][1]
    return abs(x * q - p) * q_next
