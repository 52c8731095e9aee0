"""Linear forms in logarithms for the Fibonacci-cube equation.

Heights and Matveev constants, the two linear forms and their
non-vanishing, the elementary inequality chain, Dujella-Pethö reduction and
the log-type bound solver.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from . import ballreal as br
from .ballreal import BallReal, ConstantId, Ordering, cmp_certified, constant, escalate
from .contfrac import expand
from .errors import (
    BoundViolation,
    EpsilonNeverPositive,
    IdentityViolation,
    NonConvergent,
    PrecisionExhausted,
)
from .recurrence_core import ALPHA, SQRT5, QuadExact, SequenceKind, quad_power, seq_value

Real = Union[int, Fraction, str, BallReal]

MIN_A_VALUE = Fraction(16, 100)

# Reduction parameters exactly as published: (p, q) of the convergent used,
# the rounded epsilon, the constant A and the printed gap ||mu q|| - M||tau q||.
REDUCTION_CAP = 617 * 10**26
M_REDUCTION = {
    "p": 1525877489570449597447393973665623,
    "q": 10077880367083566939117366710009822,
    "epsilon": Fraction("0.156"),
    "gap": Fraction("0.155453"),
    "a_coeff": 13,
    "bound": 171,
}
K_REDUCTION = {
    "p": 2212592356477735770384775317659,
    "q": 4871129611675295815188675787912,
    "epsilon": Fraction("0.041"),
    "gap": Fraction("0.0401388"),
    "a_coeff": 75,
    "bound": 162,
}
# Published intermediate values of the bound chain.
PUBLISHED = {
    "matveev_lambda1": Fraction("2.17e12"),
    "m_coeff": Fraction("4.54e12"),
    "matveev_lambda2": Fraction("3.62e11"),
    "k_coeff": Fraction("7.55e11"),
    "combined": Fraction("1.54e28"),
}


def _ball(x: Real, bits: int) -> BallReal:
    return x if isinstance(x, BallReal) else BallReal.exact(x, bits)


# ---- heights ----------------------------------------------------------------

@dataclass(frozen=True)
class LogMultiple:
    """coef * log(base), with the ball value kept alongside the exact form."""

    coef: Fraction
    base: str
    value: BallReal

    def at_least(self, other: LogMultiple) -> bool:
        if self.base == other.base:
            # every base used here has a positive logarithm (or is log 1 = 0)
            return self.coef >= other.coef or other.value.is_exact() and other.value.man == 0
        return cmp_certified(self.value, other.value) in (Ordering.GREATER, Ordering.EQUAL)


@dataclass(frozen=True)
class HeightEntry:
    form: int
    label: str
    height_exact: LogMultiple
    a_exact: LogMultiple
    log_abs_exact: LogMultiple
    degree: int = 2

    @property
    def height(self) -> BallReal:
        return self.height_exact.value

    @property
    def a_value(self) -> BallReal:
        return self.a_exact.value

    def admissible(self) -> bool:
        """Certified A >= max(d*h, |log eta|, 0.16)."""
        h = self.height_exact
        dh = LogMultiple(h.coef * self.degree, h.base, h.value * self.degree)
        if not (self.a_exact.at_least(dh) and self.a_exact.at_least(self.log_abs_exact)):
            return False
        return cmp_certified(self.a_value, MIN_A_VALUE) is Ordering.GREATER


def height_table(m_index: int, k_index: int, bits: int = br.DEFAULT_BITS) -> list[HeightEntry]:
    """Heights and A-values of both Matveev applications.

    The A-value for F_m is taken as 2k log(alpha) as published; it is only
    admissible when log F_m <= k log(alpha), i.e. for m <= k + 1.
    """
    if m_index < 1 or k_index < 1:
        raise ValueError("indices must be >= 1")
    la = constant(ConstantId.LOG_ALPHA, bits)
    l5 = constant(ConstantId.LOG5, bits)
    log_fm = br.log(BallReal.exact(seq_value(SequenceKind.FIBONACCI, m_index), bits))

    def lm(coef, base):
        coef = Fraction(coef)
        unit = {"log_alpha": la, "log5": l5, "log_Fm": log_fm}[base]
        return LogMultiple(coef, base, unit * coef)

    half = Fraction(1, 2)
    return [
        HeightEntry(1, "alpha", lm(half, "log_alpha"), lm(1, "log_alpha"), lm(1, "log_alpha")),
        HeightEntry(1, "F_m", lm(1, "log_Fm"), lm(2 * k_index, "log_alpha"), lm(1, "log_Fm")),
        HeightEntry(1, "5sqrt5", lm(Fraction(3, 2), "log5"), lm(3, "log5"), lm(Fraction(3, 2), "log5")),
        HeightEntry(2, "alpha", lm(half, "log_alpha"), lm(1, "log_alpha"), lm(1, "log_alpha")),
        HeightEntry(2, "abs_beta", lm(half, "log_alpha"), lm(1, "log_alpha"), lm(1, "log_alpha")),
        HeightEntry(2, "sqrt5", lm(half, "log5"), lm(1, "log5"), lm(half, "log5")),
    ]


# ---- Matveev ----------------------------------------------------------------

@dataclass(frozen=True)
class MatveevInstance:
    l: int
    degree: int
    a_values: tuple
    max_abs_b: int

    def __post_init__(self):
        if self.l < 1 or self.degree < 1 or self.max_abs_b < 1:
            raise ValueError("l, degree and max_abs_b must be >= 1")
        if len(self.a_values) != self.l:
            raise ValueError(f"expected {self.l} A-values, got {len(self.a_values)}")


def matveev_coefficient(inst: MatveevInstance, bits: int = br.DEFAULT_BITS) -> BallReal:
    """C = 1.4 * 30^(l+3) * l^4.5 * d^2 * (1 + log d) * prod(A_j)."""
    l, d = inst.l, inst.degree
    c = BallReal.exact(Fraction(7, 5) * 30 ** (l + 3) * l**4 * d * d, bits)
    c = c * br.sqrt(BallReal.exact(l, bits))
    c = c * (br.log(BallReal.exact(d, bits)) + 1)
    for a in inst.a_values:
        c = c * _ball(a, bits)
    return c


def matveev_log_lower_bound(inst: MatveevInstance, bits: int = br.DEFAULT_BITS) -> BallReal:
    """Lower bound for log|Lambda|: -C (1 + log max|b_j|)."""
    return -matveev_coefficient(inst, bits) * (br.log(BallReal.exact(inst.max_abs_b, bits)) + 1)


def lambda1_instance(k: int, m: int, bits: int = br.DEFAULT_BITS) -> MatveevInstance:
    la = constant(ConstantId.LOG_ALPHA, bits)
    l5 = constant(ConstantId.LOG5, bits)
    return MatveevInstance(3, 2, (la, la * (2 * k), l5 * 3), 3 * m)


def lambda2_instance(m: int, bits: int = br.DEFAULT_BITS) -> MatveevInstance:
    la = constant(ConstantId.LOG_ALPHA, bits)
    l5 = constant(ConstantId.LOG5, bits)
    return MatveevInstance(3, 2, (la, la, l5), 3 * m)


# ---- the linear forms -------------------------------------------------------

@dataclass(frozen=True)
class LinearFormValue:
    lam: BallReal
    gamma: BallReal
    bits: int


def lambda1_nonzero(k: int, m: int) -> bool:
    """Exact proof that alpha^(3k) != 5 sqrt5 F_m^3.

    The right side is a pure sqrt5 multiple while alpha^(3k) has rational
    part L_{3k}/2 > 0.
    """
    lhs = quad_power(ALPHA, 3 * k)
    rhs = QuadExact(0, 10 * seq_value(SequenceKind.FIBONACCI, m) ** 3)
    if lhs.p <= 0:
        raise IdentityViolation(f"rational part of alpha^{3 * k} is not positive")
    return lhs != rhs


def lambda2_nonzero(k: int, m: int) -> bool:
    """Exact proof that alpha^(3m+k) != sqrt5 (alpha powers have rational part L_n/2 > 0)."""
    lhs = quad_power(ALPHA, 3 * m + k)
    if lhs.p <= 0:
        raise IdentityViolation(f"rational part of alpha^{3 * m + k} is not positive")
    return lhs != SQRT5


def eval_lambda1(k: int, m: int, bits: Optional[int] = None) -> LinearFormValue:
    """alpha^(3k) F_m^(-3) (5 sqrt5)^(-1) - 1 and its logarithm, with certified sign."""
    if k < 1 or m < 1:
        raise ValueError("k and m must be >= 1")
    if not lambda1_nonzero(k, m):
        raise IdentityViolation(f"Lambda1 vanishes at k={k}, m={m}")
    fm = seq_value(SequenceKind.FIBONACCI, m)

    def attempt(b: int) -> LinearFormValue:
        alpha = constant(ConstantId.ALPHA, b)
        s5 = constant(ConstantId.SQRT5, b)
        lam = alpha ** (3 * k) / (BallReal.exact(fm**3, b) * s5 * 5) - 1
        if not lam.excludes_zero():
            raise PrecisionExhausted("sign of Lambda1 not yet certified")
        gamma = (
            constant(ConstantId.LOG_ALPHA, b) * (3 * k)
            - br.log(BallReal.exact(fm, b)) * 3
            - constant(ConstantId.LOG_5SQRT5, b)
        )
        return LinearFormValue(lam, gamma, b)

    return escalate(attempt, bits)


def eval_lambda2(k: int, m: int, bits: Optional[int] = None) -> LinearFormValue:
    """alpha^(-3m) |beta|^k sqrt5 - 1 and its logarithm, with certified sign."""
    if k < 1 or m < 1:
        raise ValueError("k and m must be >= 1")
    if not lambda2_nonzero(k, m):
        raise IdentityViolation(f"Lambda2 vanishes at k={k}, m={m}")

    def attempt(b: int) -> LinearFormValue:
        alpha = constant(ConstantId.ALPHA, b)
        s5 = constant(ConstantId.SQRT5, b)
        lam = s5 / alpha ** (3 * m + k) - 1
        if not lam.excludes_zero():
            raise PrecisionExhausted("sign of Lambda2 not yet certified")
        # |beta| = 1/alpha, so k log|beta| = -k log(alpha)
        gamma = (
            -constant(ConstantId.LOG_ALPHA, b) * (3 * m)
            + constant(ConstantId.LOG_ABS_BETA, b) * k
            + constant(ConstantId.LOG5, b) * Fraction(1, 2)
        )
        return LinearFormValue(lam, gamma, b)

    return escalate(attempt, bits)


# ---- inequality chain ---------------------------------------------------------

@dataclass
class FibBoundsReport:
    n_max: int
    lower_checked: tuple[int, int]
    upper_checked: tuple[int, int]
    exact_resolutions: list = field(default_factory=list)
    n0_lower_holds: bool = False


def _leq(x: BallReal | int, y: BallReal | int) -> Optional[bool]:
    """x <= y by ball comparison; None when the balls cannot decide."""
    order = cmp_certified(x, y)
    if order in (Ordering.LESS, Ordering.EQUAL):
        return True
    if order is Ordering.GREATER:
        return False
    return None


def verify_fib_bounds(n_max: int, bits: int = br.DEFAULT_BITS) -> FibBoundsReport:
    """Certify alpha^(n-2) <= F_n (1 <= n <= n_max) and F_n <= alpha^(n-1) (0 <= n <= n_max)."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    alpha = constant(ConstantId.ALPHA, bits)
    report = FibBoundsReport(n_max, (1, n_max), (0, n_max))
    power = 1 / (alpha * alpha)  # alpha^(n-2) at n = 0
    f_prev, f = 1, 0  # F_{-1}, F_0
    for n in range(0, n_max + 1):
        upper = power * alpha  # alpha^(n-1)
        if n >= 1:
            ok = _leq(power, f)
            if ok is None:
                ok = (QuadExact.from_int(f) - quad_power(ALPHA, n - 2)).sign() >= 0
                report.exact_resolutions.append((n, "lower"))
            if not ok:
                raise BoundViolation(f"alpha^{n - 2} <= F_{n} fails", witness=n)
        else:
            report.n0_lower_holds = cmp_certified(power, f) is not Ordering.GREATER
        ok = _leq(f, upper)
        if ok is None:
            ok = (quad_power(ALPHA, n - 1) - QuadExact.from_int(f)).sign() >= 0
            report.exact_resolutions.append((n, "upper"))
        if not ok:
            raise BoundViolation(f"F_{n} <= alpha^{n - 1} fails", witness=n)
        power = upper
        f_prev, f = f, f + f_prev
    return report


def constraint_filter(k: int, l: int, m: int, n: int) -> bool:
    """Necessary conditions on (k, l, m, n) for F_k^3 + F_l^3 = F_m^3 + F_n^3."""
    return k >= l and m >= n and m > k and l - 1 <= m and n - 1 <= k and m < 3 * k


# ---- Dujella-Pethö reduction ---------------------------------------------------

@dataclass(frozen=True)
class ReductionInstance:
    tau: BallReal
    mu: BallReal
    a_coeff: BallReal
    b_base: BallReal
    cap: int

    def __post_init__(self):
        if not self.a_coeff.is_positive():
            raise ValueError("A must be positive")
        if cmp_certified(self.b_base, 1) is not Ordering.GREATER:
            raise ValueError("B must exceed 1")
        if self.cap < 1:
            raise ValueError("M must be >= 1")


@dataclass(frozen=True)
class ReductionOutcome:
    q_used: int
    epsilon: BallReal
    bound: int
    convergent_index: Optional[int] = None


def reduction_bound(a_coeff: BallReal, q: int, epsilon: BallReal, b_base: BallReal) -> int:
    """floor(log(A q / eps) / log B), certified (raises PrecisionExhausted if ambiguous)."""
    return (br.log(a_coeff * q / epsilon) / br.log(b_base)).floor()


def reduce_fixture(
    q: int,
    epsilon: Real,
    a_coeff: Real,
    b_base: Optional[Real] = None,
    cap: Optional[int] = None,
    bits: Optional[int] = None,
) -> ReductionOutcome:
    """Reduction step with a supplied convergent denominator and epsilon."""

    def attempt(b: int) -> ReductionOutcome:
        base = _ball(b_base, b) if b_base is not None else constant(ConstantId.ALPHA, b)
        eps = _ball(epsilon, b)
        if not eps.is_positive():
            raise EpsilonNeverPositive("supplied epsilon is not positive")
        if cap is not None and q <= 6 * cap:
            raise ValueError(f"q = {q} does not exceed 6M = {6 * cap}")
        return ReductionOutcome(q, eps, reduction_bound(_ball(a_coeff, b), q, eps, base))

    return escalate(attempt, bits)


def dujella_petho_reduce(inst: ReductionInstance, max_attempts: int = 30) -> ReductionOutcome:
    """Live reduction: expand tau until q > 6M and find a convergent with eps > 0.

    Works at the precision of ``inst``; wrap in :func:`escalate` with an
    instance factory to retry on PrecisionExhausted.
    """
    six_m = 6 * inst.cap
    cf = expand(inst.tau, stop=lambda q: q > six_m)
    if cf.terminated:
        raise PrecisionExhausted("tau expanded as a rational number")
    j = len(cf.convergents) - 1
    for _ in range(max_attempts):
        if j >= len(cf.convergents):
            cf = expand(inst.tau, max_terms=j + 1)
            if cf.terminated or j >= len(cf.convergents):
                raise PrecisionExhausted("tau expanded as a rational number")
        q = cf.convergents[j][1]
        eps = br.nearest_int_distance(inst.mu * q) - br.nearest_int_distance(inst.tau * q) * inst.cap
        if eps.is_positive():
            return ReductionOutcome(q, eps, reduction_bound(inst.a_coeff, q, eps, inst.b_base), j)
        if not (eps.is_negative() or eps.is_exact()):
            raise PrecisionExhausted("sign of epsilon not certified")
        j += 1
    raise EpsilonNeverPositive(f"no positive epsilon in {max_attempts} convergents")


# ---- log-type bound solver ------------------------------------------------------

def solve_log_bound(coeff: Real, scale: Real, power: int, bits: int = br.DEFAULT_BITS, max_steps: int = 1000) -> int:
    """Largest integer x that may satisfy x < coeff * (1 + log(scale * x))**power.

    For power 0 this is floor(coeff). Otherwise the largest fixed point is
    approached from above by x -> ceil(f(x)), then stepped down until
    x* + 1 is certified to violate the inequality.
    """
    c = _ball(coeff, bits)
    s = _ball(scale, bits)
    if not c.is_positive() or not s.is_positive():
        raise ValueError("coeff and scale must be positive")
    if power == 0:
        return math.floor(c.upper())
    if power not in (1, 2):
        raise ValueError("power must be 0, 1 or 2")

    def f(x: int) -> BallReal:
        return c * (br.log(s * x) + 1) ** power

    def violates(x: int) -> bool:
        return x >= 1 and cmp_certified(f(x), x) is Ordering.LESS

    x = max(2, math.ceil(c.upper()) * 2)
    steps = 0
    while not violates(x):
        x *= 4
        steps += 1
        if steps > max_steps:
            raise NonConvergent("could not bracket the fixed point")
    while True:
        nxt = max(1, math.ceil(f(x).upper()))
        steps += 1
        if steps > max_steps:
            raise NonConvergent("fixed-point iteration did not settle")
        if nxt >= x:
            break
        x = nxt
    while violates(x):
        x -= 1
        steps += 1
        if steps > max_steps:
            raise NonConvergent("step-down did not terminate")
    return x


# ---- full bound chain --------------------------------------------------------------

@dataclass(frozen=True)
class PipelineBounds:
    c_lambda1: BallReal
    c_lambda2: BallReal
    m_coeff: BallReal
    k_coeff: BallReal
    combined_bound: int
    published_combined_bound: int
    min_index: int


def pipeline_bounds(min_index: int = 7, bits: int = br.DEFAULT_BITS) -> PipelineBounds:
    """Matveev constants, the two absolute coefficients and the combined bound on m.

    From log|Lambda1| < log 9 - m log(alpha) and the Matveev bound,
    m < (C1 k (1 + log 3m) + log 9) / log(alpha); for m >= ``min_index`` the
    additive log 9 is folded into the coefficient, and likewise log 18 for k.
    """
    la = constant(ConstantId.LOG_ALPHA, bits)
    c1 = matveev_coefficient(lambda1_instance(1, 1, bits), bits)
    c2 = matveev_coefficient(lambda2_instance(1, bits), bits)
    scale = br.log(BallReal.exact(3 * min_index, bits)) + 1
    m_coeff = (c1 + br.log(BallReal.exact(9, bits)) / scale) / la
    k_coeff = (c2 + br.log(BallReal.exact(18, bits)) / scale) / la
    combined = solve_log_bound(m_coeff * k_coeff, 3, 2, bits)
    published = solve_log_bound(PUBLISHED["m_coeff"] * PUBLISHED["k_coeff"], 3, 2, bits)
    return PipelineBounds(c1, c2, m_coeff, k_coeff, combined, published, min_index)
