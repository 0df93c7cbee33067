import math
from fractions import Fraction

import mpmath
import pytest

from nfsieve.ideal_census import (
    ClassTag,
    census,
    census_constant,
    class_of,
    count_ideals_in_class_by_elements,
    frak_N,
    inverse_class,
    is_principal,
    lemma9_bound,
    lemma9_partial_sums,
    lemma9_sum,
)
from nfsieve.nf_arith import NfIdeal, ideal_counts, ideal_mul, ideals_of_norm_up_to, primes_above

from .conftest import ALL_FIELDS, field


def test_principality_in_q_sqrt_m5():
    F = field("q_sqrt_m5")
    P2 = primes_above(F, 2)[0].ideal  # (2, 1 + sqrt -5), not principal
    assert is_principal(F, P2) is None
    g = is_principal(F, ideal_mul(P2, P2))
    assert g is not None and abs(F.norm(g)) == 4
    P3, P3b = (P.ideal for P in primes_above(F, 3))
    assert class_of(F, P3) == class_of(F, P2) != class_of(F, NfIdeal.unit_ideal(F))
    assert is_principal(F, ideal_mul(P2, P3)) is not None
    assert inverse_class(F, class_of(F, P2)) == class_of(F, P2)


@pytest.mark.parametrize("x", [50, 300])
def test_class_split_q_sqrt_m5_against_binary_form(x):
    """Principal ideals of norm <= x <-> (x^2 + 5 y^2) representations / 2."""
    F = field("q_sqrt_m5")
    rep = sum(1 for a in range(-40, 41) for b in range(-20, 21) if 0 < a * a + 5 * b * b <= x)
    rep_ = census(F, x)
    assert rep_.per_class[0] * 2 == rep
    assert sum(rep_.per_class) == rep_.total == sum(ideal_counts(F, x))


@pytest.mark.parametrize("name", ALL_FIELDS)
def test_per_class_counts_two_routes(name):
    F = field(name)
    x = 150
    rep = census(F, x)
    for i in range(F.class_number):
        assert count_ideals_in_class_by_elements(F, ClassTag(i), x) == rep.per_class[i]


@pytest.mark.parametrize("name", ALL_FIELDS)
def test_census_passes_and_ratio_is_moderate(name):
    rep = census(field(name), 1000)
    assert rep.passed
    assert rep.empirical_ratio < 10


def test_census_constant_formula():
    with mpmath.workdps(30):
        for n, reg_h in [(2, 0.8813735870), (3, 1.3473773), (4, 0.9624236501)]:
            v = census_constant(n, reg_h)
            expect = mpmath.mpf(n) ** (10 * n * n) * mpmath.mpf(reg_h) ** (mpmath.mpf(1) / n) * (
                1 + mpmath.log(reg_h)
            ) ** (mpmath.mpf((n - 1) ** 2) / n)
            assert abs(v - expect) < 1e-20 * expect


def test_lemma9_sums_frozen():
    F = field("q_i")  # norms 1, 2, 4, 5, 5, 8, ...
    with mpmath.workdps(30):
        assert abs(lemma9_sum(F, 3) - (1 + 1 / mpmath.sqrt(2) + mpmath.mpf(1) / 2)) < 1e-25
        assert abs(lemma9_sum(F, 5) - (1 + 1 / mpmath.sqrt(2) + mpmath.mpf(1) / 2 + 2 / mpmath.sqrt(5))) < 1e-25


@pytest.mark.parametrize("name", ALL_FIELDS)
def test_lemma9_inequality_small_range(name):
    F = field(name)
    sums = lemma9_partial_sums(F, 120)
    for y in range(2, 121):
        assert sums[y - 1] <= lemma9_bound(F.n, y)


def test_frak_N_q_sqrt2():
    F = field("q_sqrt2")  # m_1 = 3: the ideals of norm 1, 2, 4
    with mpmath.workdps(30):
        assert abs(frak_N(F, ClassTag(0)) - (1 + 1 / mpmath.sqrt(2) + mpmath.mpf(1) / 2)) < 1e-25
