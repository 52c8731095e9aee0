import math
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from fibcubes import ballreal as br
from fibcubes.ballreal import ConstantId, Ordering, ball, cmp_certified, constant
from fibcubes.errors import EpsilonNeverPositive
from fibcubes.expr import evaluate
from fibcubes.linforms import (
    K_REDUCTION,
    M_REDUCTION,
    PUBLISHED,
    REDUCTION_CAP,
    MatveevInstance,
    ReductionInstance,
    constraint_filter,
    dujella_petho_reduce,
    eval_lambda1,
    eval_lambda2,
    height_table,
    lambda1_instance,
    lambda1_nonzero,
    lambda2_instance,
    lambda2_nonzero,
    matveev_coefficient,
    matveev_log_lower_bound,
    pipeline_bounds,
    reduce_fixture,
    solve_log_bound,
    verify_fib_bounds,
)
from fibcubes.recurrence_core import SequenceKind, seq_value


def weil_height(coeffs):
    """Absolute logarithmic height from the minimal polynomial (leading coefficient first)."""
    roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=200)
    d = len(coeffs) - 1
    return (mpmath.log(abs(coeffs[0])) + sum(mpmath.log(max(1, abs(r))) for r in roots)) / d


def close(b, value, rel=mpmath.mpf(10) ** -40):
    mid = mpmath.mpf(b.mid_fraction().numerator) / b.mid_fraction().denominator
    return abs(mid - value) <= rel * (1 + abs(value))


MINPOLY = {
    "alpha": [1, -1, -1],
    "abs_beta": [1, 1, -1],
    "5sqrt5": [1, 0, -125],
    "sqrt5": [1, 0, -5],
}


@pytest.mark.parametrize("m,k", [(8, 7), (12, 11), (20, 30)])
def test_heights_match_weil_oracle(m, k):
    table = height_table(m, k)
    assert len(table) == 6
    for e in table:
        if e.label == "F_m":
            expected = mpmath.log(seq_value(SequenceKind.FIBONACCI, m))
        else:
            expected = weil_height(MINPOLY[e.label])
        assert close(e.height, expected), e.label


def test_admissibility_flags():
    table = height_table(8, 7)
    assert all(e.admissible() for e in table)
    # 2k log(alpha) no longer dominates 2 log F_m once m is well above k
    wide = {e.label: e for e in height_table(30, 10) if e.form == 1}
    assert not wide["F_m"].admissible()
    assert wide["alpha"].admissible()


def test_matveev_examples():
    c1 = matveev_coefficient(lambda1_instance(1, 1))
    c2 = matveev_coefficient(lambda2_instance(1))
    assert abs(float(c1) / 2.17e12 - 1) < 0.01
    assert abs(float(c2) / 3.62e11 - 1) < 0.01
    # 1.4 * 30^4 * 1 * 1 * 1 * 1
    assert matveev_coefficient(MatveevInstance(1, 1, (1,), 1)).contains(1134000)


def test_matveev_lambda1_scales_with_k():
    c = matveev_coefficient(lambda1_instance(1, 1))
    c5 = matveev_coefficient(lambda1_instance(5, 1))
    assert (c5 - c * 5).contains(0)


def test_matveev_lower_bound_value():
    inst = MatveevInstance(1, 1, (1,), 10)
    lb = matveev_log_lower_bound(inst)
    assert close(lb, -1134000 * (1 + mpmath.log(10)))


def test_matveev_validation():
    with pytest.raises(ValueError):
        MatveevInstance(2, 2, (1,), 3)
    with pytest.raises(ValueError):
        MatveevInstance(1, 2, (1,), 0)


positive = st.fractions(min_value=Fraction(1, 5), max_value=Fraction(100))


@settings(max_examples=60, deadline=None)
@given(st.lists(positive, min_size=1, max_size=4), st.integers(1, 4), st.integers(1, 10**6), positive, st.integers(0, 3))
def test_matveev_monotone(a_values, d, b, bump, which):
    l = len(a_values)
    base = MatveevInstance(l, d, tuple(a_values), b)
    bigger = list(a_values)
    bigger[which % l] += bump
    assert cmp_certified(matveev_coefficient(MatveevInstance(l, d, tuple(bigger), b), 128),
                         matveev_coefficient(base, 128)) is Ordering.GREATER
    assert cmp_certified(matveev_coefficient(MatveevInstance(l, d + 1, tuple(a_values), b), 128),
                         matveev_coefficient(base, 128)) is Ordering.GREATER
    assert cmp_certified(matveev_log_lower_bound(MatveevInstance(l, d, tuple(a_values), b + 1), 128),
                         matveev_log_lower_bound(base, 128)) is Ordering.LESS


def test_lambda_examples():
    assert eval_lambda1(1, 3).lam.is_negative()
    assert eval_lambda2(1, 1).lam.is_negative()


def test_nonvanishing_sweep():
    for k in range(1, 201):
        for m in range(1, 201, 7):
            assert lambda1_nonzero(k, m)
            assert lambda2_nonzero(k, m)


@pytest.mark.parametrize("k,m", [(1, 3), (5, 6), (40, 41), (100, 130)])
def test_lambda_matches_gamma(k, m):
    for v in (eval_lambda1(k, m), eval_lambda2(k, m)):
        assert v.lam.excludes_zero()
        diff = br.exp(v.gamma) - 1 - v.lam
        assert diff.contains(0)


def test_lambda1_shrinks_on_the_diagonal():
    # for k = m the form is tiny: |Lambda1| decreases and stays below 9 / alpha^m
    prev = None
    for m in range(5, 60):
        lam = abs(eval_lambda1(m, m).lam)
        cap = ball(9) / constant(ConstantId.ALPHA, 256) ** m
        assert cmp_certified(lam, cap) is Ordering.LESS
        if prev is not None:
            assert cmp_certified(lam, prev) is Ordering.LESS
        prev = lam


def test_fib_bounds():
    report = verify_fib_bounds(2000)
    assert report.lower_checked == (1, 2000)
    assert report.upper_checked == (0, 2000)
    assert set(report.exact_resolutions) == {(1, "upper"), (2, "lower")}
    assert not report.n0_lower_holds


@pytest.mark.parametrize("quad,expected", [((10, 1, 12, 1), True), ((5, 5, 4, 4), False), ((10, 1, 40, 1), False)])
def test_constraint_filter_examples(quad, expected):
    assert constraint_filter(*quad) is expected


def direct_filter(k, l, m, n):
    ok = k >= l and m >= n
    ok = ok and k < m
    ok = ok and l <= m + 1 and n <= k + 1
    return ok and m < 3 * k


def test_constraint_filter_random():
    rng = random.Random(7)
    for _ in range(20000):
        q = tuple(rng.randint(0, 60) for _ in range(4))
        assert constraint_filter(*q) == direct_filter(*q)


def test_fixture_reductions():
    m = reduce_fixture(M_REDUCTION["q"], M_REDUCTION["epsilon"], M_REDUCTION["a_coeff"])
    k = reduce_fixture(K_REDUCTION["q"], K_REDUCTION["epsilon"], K_REDUCTION["a_coeff"])
    assert m.bound == 171
    assert k.bound == 162


def test_fixture_checks():
    with pytest.raises(EpsilonNeverPositive):
        reduce_fixture(10**30, 0, 13)
    with pytest.raises(ValueError):
        reduce_fixture(10, "0.1", 13, cap=REDUCTION_CAP)


def _live(bits, mu_text="log(3)/log(5)"):
    return ReductionInstance(
        tau=evaluate("log(alpha)/log(5)", bits),
        mu=evaluate(mu_text, bits),
        a_coeff=ball(13, bits),
        b_base=constant(ConstantId.ALPHA, bits),
        cap=REDUCTION_CAP,
    )


def test_live_reduction_invariants():
    out = br.escalate(lambda b: dujella_petho_reduce(_live(b)), 512)
    assert out.q_used > 6 * REDUCTION_CAP
    assert out.epsilon.is_positive()
    again = dujella_petho_reduce(_live(2 * out.epsilon.prec))
    assert again.bound == out.bound and again.q_used == out.q_used
    # the bound is below log(A q / eps) / log B + 1
    assert out.bound < math.log(13 * out.q_used / float(out.epsilon)) / math.log((1 + 5**0.5) / 2) + 1


def test_live_reduction_zero_mu():
    with pytest.raises(EpsilonNeverPositive):
        br.escalate(lambda b: dujella_petho_reduce(_live(b, "0"), max_attempts=5), 512)


def test_reduction_instance_validation():
    with pytest.raises(ValueError):
        ReductionInstance(ball(1), ball(1), ball(-1), ball(2), 10)
    with pytest.raises(ValueError):
        ReductionInstance(ball(1), ball(1), ball(1), ball(1), 10)


@pytest.mark.parametrize("args,expected", [((10, 1, 1), 48), ((100, 1, 0), 100)])
def test_solve_log_bound_examples(args, expected):
    assert solve_log_bound(*args) == expected


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10**6), st.integers(1, 50), st.sampled_from([1, 2]))
def test_solve_log_bound_is_the_last_candidate(coeff, scale, power):
    x = solve_log_bound(coeff, scale, power)
    f = lambda v: ball(coeff) * (br.log(ball(scale * v)) + 1) ** power
    assert cmp_certified(f(x + 1), x + 1) is Ordering.LESS
    assert cmp_certified(f(x), x) is not Ordering.LESS


def test_solve_log_bound_published_instance():
    x = solve_log_bound(PUBLISHED["m_coeff"] * PUBLISHED["k_coeff"], 3, 2)
    assert abs(x / 1.54e28 - 1) < 0.01


def test_pipeline_bounds():
    pb = pipeline_bounds()
    assert abs(float(pb.m_coeff) / 4.54e12 - 1) < 0.01
    assert abs(float(pb.k_coeff) / 7.55e11 - 1) < 0.01
    assert pb.combined_bound <= pb.published_combined_bound
    assert pb.published_combined_bound < REDUCTION_CAP
