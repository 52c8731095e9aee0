"""End-to-end acceptance checks, one marked test (or group) per criterion.

Run ``pytest tests/test_acceptance.py -v``; the terminal summary prints a
PASS/FAIL line per criterion number.
"""
import itertools
import random
import time
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from fibcubes import ballreal as br
from fibcubes.ballreal import BallReal, ConstantId, constant
from fibcubes.collision_search import SearchConfig, search
from fibcubes.contfrac import expand
from fibcubes.expr import evaluate
from fibcubes.linforms import (
    K_REDUCTION,
    M_REDUCTION,
    PUBLISHED,
    constraint_filter,
    lambda1_instance,
    lambda2_instance,
    matveev_coefficient,
    pipeline_bounds,
    reduce_fixture,
    solve_log_bound,
    verify_fib_bounds,
)
from fibcubes.recurrence_core import (
    SequenceKind,
    fib_cube_printed_form,
    fib_cube_via_identity,
    lucas_cube_via_identity,
)

FIB, LUC, NAT = SequenceKind.FIBONACCI, SequenceKind.LUCAS, SequenceKind.NATURALS


def rel_close(x, target, tol=0.01):
    return abs(Fraction(x) / Fraction(target) - 1) < tol


def brute_values(kind, top):
    if kind is NAT:
        return list(range(top + 1))
    a, b = (0, 1) if kind is FIB else (2, 1)
    out = []
    for _ in range(top + 1):
        out.append(a)
        a, b = b, a + b
    return out


# ---- 1-3: collision searches ------------------------------------------------------

@pytest.mark.criterion(1)
def test_fibonacci_cubes_only_trivial():
    t0 = time.perf_counter()
    recs = search(SearchConfig(FIB, 3, 162, 171))
    elapsed = time.perf_counter() - t0
    got = [(r.value, r.pair_a, r.pair_b, r.trivial) for r in recs]
    assert got == [(2, (1, 1), (2, 1), True), (2, (1, 1), (2, 2), True)]
    assert elapsed < 60


@pytest.mark.criterion(2)
def test_lucas_cubes_none():
    t0 = time.perf_counter()
    assert search(SearchConfig(LUC, 3, 162, 171)) == []
    assert time.perf_counter() - t0 < 60


@pytest.mark.criterion(3)
def test_taxicab():
    recs = search(SearchConfig(NAT, 3, 12, 12))
    assert [(r.value, r.pair_a, r.pair_b) for r in recs] == [(1729, (10, 9), (12, 1))]
    assert 12**3 + 1**3 == 10**3 + 9**3 == 1729
    assert search(SearchConfig(NAT, 3, 9, 9)) == []


# ---- 4-6: bound chain regressions ---------------------------------------------------

@pytest.mark.criterion(4)
def test_matveev_and_pipeline_coefficients():
    assert rel_close(matveev_coefficient(lambda1_instance(1, 1)).mid_fraction(), PUBLISHED["matveev_lambda1"])
    assert rel_close(matveev_coefficient(lambda2_instance(1)).mid_fraction(), PUBLISHED["matveev_lambda2"])
    pb = pipeline_bounds()
    assert rel_close(pb.m_coeff.mid_fraction(), PUBLISHED["m_coeff"])
    assert rel_close(pb.k_coeff.mid_fraction(), PUBLISHED["k_coeff"])


@pytest.mark.criterion(5)
def test_fixture_reductions():
    assert reduce_fixture(M_REDUCTION["q"], M_REDUCTION["epsilon"], M_REDUCTION["a_coeff"]).bound == 171
    assert reduce_fixture(K_REDUCTION["q"], K_REDUCTION["epsilon"], K_REDUCTION["a_coeff"]).bound == 162


@pytest.mark.criterion(6)
def test_combined_bound():
    x = solve_log_bound(PUBLISHED["m_coeff"] * PUBLISHED["k_coeff"], 3, 2)
    assert rel_close(x, PUBLISHED["combined"])
    # the bound assembled from freshly computed coefficients is no larger
    assert pipeline_bounds().combined_bound <= x


# ---- 7: identities ----------------------------------------------------------------------

@pytest.mark.criterion(7)
def test_cube_identities():
    fib = brute_values(FIB, 502)
    luc = brute_values(LUC, 502)
    for n in range(1, 501):
        assert fib_cube_via_identity(n) == fib[n] ** 3
    for n in range(0, 501):
        assert lucas_cube_via_identity(n) == luc[n] ** 3


@pytest.mark.criterion(7)
def test_printed_cube_identity_fails_at_three():
    printed = fib_cube_printed_form(3)
    assert printed == Fraction(36, 5)
    assert printed != brute_values(FIB, 3)[3] ** 3


# ---- 8: inequalities --------------------------------------------------------------------

@pytest.mark.criterion(8)
def test_fibonacci_bounds_certified():
    report = verify_fib_bounds(2000)
    assert report.lower_checked == (1, 2000)
    assert report.upper_checked == (0, 2000)


def _direct_a6(k, l, m, n):
    if not (k >= l and m >= n):
        return False
    if not m > k:
        return False
    return l <= m + 1 and n <= k + 1 and m < 3 * k


@pytest.mark.criterion(8)
def test_constraint_filter_random_quadruples():
    rng = random.Random(20240501)
    for _ in range(10**5):
        q = (rng.randint(0, 200), rng.randint(0, 200), rng.randint(0, 200), rng.randint(0, 200))
        assert constraint_filter(*q) == _direct_a6(*q)


# ---- 9: oracle equivalence ------------------------------------------------------------

@pytest.mark.criterion(9)
@pytest.mark.parametrize("kind", [FIB, LUC, NAT])
def test_search_matches_quadruple_loop(kind):
    top = 40
    vals = [v**3 for v in brute_values(kind, top)]
    idx = range(1, top + 1)
    expected = set()
    for k, l, m, n in itertools.product(idx, repeat=4):
        if l <= k and n <= m and k < m and vals[k] + vals[l] == vals[m] + vals[n]:
            expected.add((vals[k] + vals[l], (k, l), (m, n)))
    got = {(r.value, r.pair_a, r.pair_b) for r in search(SearchConfig(kind, 3, top, top))}
    assert got == expected


# ---- 10: certified arithmetic ---------------------------------------------------------

@pytest.mark.criterion(10)
@settings(max_examples=100, deadline=None)
@given(st.fractions(min_value=Fraction(1, 1000), max_value=Fraction(1000)), st.sampled_from([64, 128, 256]))
def test_containment_under_doubling(v, bits):
    exact = mpmath.log(mpmath.sqrt(mpmath.mpf(v.numerator) / v.denominator) + 1) * mpmath.exp(mpmath.mpf(1) / 3)

    def compute(b):
        x = BallReal.exact(v, b)
        return br.log(br.sqrt(x) + 1) * br.exp(BallReal.exact(Fraction(1, 3), b))

    lo, hi = compute(bits), compute(2 * bits)
    for ball_ in (lo, hi):
        a, b = ball_.lower(), ball_.upper()
        assert mpmath.mpf(a.numerator) / a.denominator <= exact + mpmath.mpf(10) ** -95
        assert exact - mpmath.mpf(10) ** -95 <= mpmath.mpf(b.numerator) / b.denominator
    assert lo.overlaps(hi)
    assert hi.rad_fraction() <= lo.rad_fraction()


@pytest.mark.criterion(10)
def test_golden_identities_at_256_bits():
    a = constant(ConstantId.ALPHA, 256)
    b = constant(ConstantId.ABS_BETA, 256)
    for e in (a * b - 1, a * a - a - 1):
        assert e.contains(0) and e.radius_below(-200)


@pytest.mark.criterion(10)
@pytest.mark.parametrize("text", ["alpha", "sqrt5", "log(alpha)/log(5)", "log(alpha)/log(2)", "exp(1)"])
def test_cf_determinants(text):
    cf = expand(evaluate(text, 1024), stop=lambda q: q > 10**80)
    cf.check_determinants()
