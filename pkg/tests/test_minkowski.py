import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from nfsieve.minkowski import (
    INSIDE,
    OUTSIDE,
    DomainSpec,
    MinkowskiPoint,
    apply_cell,
    domain_volume,
    exp_coords,
    in_domain,
    lemma4_bound,
    lipschitz_constant,
    log_coords,
    monte_carlo_volume,
    partition_cells,
    partition_integral,
    partition_integral_quadrature,
)
from nfsieve.nf_arith import NfIdeal
from nfsieve.lattice_count import enumerate_in_domain, translated_lattice

from .conftest import DEMO_FIELDS, field

UNIT_FIELDS = ["q_sqrt2", "q_sqrt5", "cubic_x3m2", "q_zeta5"]


def test_lipschitz_constant_value():
    M, L = lipschitz_constant(1)
    assert M == 4
    assert L == pytest.approx((1 + 2 * math.pi) ** 1.5 * math.e, rel=1e-12)
    assert L == pytest.approx(53.43, abs=0.01)
    assert lipschitz_constant(0) == (2, pytest.approx((2 * math.pi) ** 1.5))


@pytest.mark.parametrize("bad", [((Fraction(1, 2), Fraction(1, 3)),), ((Fraction(-1), Fraction(1)),)])
def test_domain_spec_rejects_bad_boxes(bad):
    with pytest.raises(ValueError):
        DomainSpec(bad, 10)
    with pytest.raises(ValueError):
        DomainSpec(((0, 1),), 0)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(UNIT_FIELDS), st.data())
def test_each_unit_orbit_meets_domain_once(name, data):
    """Among eps^k alpha, k in a window, exactly one point lies in F(X) for X >= |N(alpha)|."""
    F = field(name)
    a = data.draw(st.tuples(*[st.integers(-9, 9)] * F.n))
    assume(any(a))
    N = abs(F.norm(a))
    D = DomainSpec.full(F, N)
    eps = F.fundamental_units[0]
    eps_inv = F.unit_inverse(eps)
    pts = [tuple(a)]
    fwd = bwd = tuple(a)
    for _ in range(8):
        fwd, bwd = F.mul(fwd, eps), F.mul(bwd, eps_inv)
        pts += [fwd, bwd]
    hits = [p for p in pts if in_domain(F, MinkowskiPoint.from_element(F, p), D) == INSIDE]
    assert len(hits) == 1


@pytest.mark.parametrize("name", UNIT_FIELDS)
def test_walls_decided_exactly(name):
    F = field(name)
    D = DomainSpec.full(F, 10**6)
    # rational integers sit on the wall xi_1 = 0 (included); eps * m sits on xi_1 = 1 (excluded)
    for m in (1, 2, 7):
        a = F.scale(F.one(), m)
        assert in_domain(F, MinkowskiPoint.from_element(F, a), D) == INSIDE
        b = F.mul(a, F.fundamental_units[0])
        assert in_domain(F, MinkowskiPoint.from_element(F, b), D) == OUTSIDE


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(DEMO_FIELDS), st.data())
def test_log_coords_roundtrip(name, data):
    F = field(name)
    a = data.draw(st.tuples(*[st.integers(-30, 30)] * F.n))
    assume(F.norm(a) != 0)
    x = MinkowskiPoint.from_element(F, a)
    xi, vec = log_coords(F, x)
    back = exp_coords(F, xi, vec)
    with mpmath.workprec(F.precision):
        assert abs(xi - abs(F.norm(a))) < 1e-30 * xi
        for z, m in zip(x.coords, back):
            assert abs(abs(z) - m) < 1e-30 * m


@pytest.mark.parametrize("name", DEMO_FIELDS)
def test_volume_against_monte_carlo(name):
    F = field(name)
    D = DomainSpec.full(F, 50)
    vol = float(domain_volume(F, D))
    est = monte_carlo_volume(F, D, 400_000, np.random.default_rng(1))
    assert est == pytest.approx(vol, rel=0.03)


@pytest.mark.parametrize("name", DEMO_FIELDS)
def test_small_slice_euclidean_bound(name):
    F = field(name)
    X = Fraction(200)
    D = DomainSpec.small_box(F, X, half=True)
    Lat = translated_lattice(F, NfIdeal.unit_ideal(F), NfIdeal.unit_ideal(F), F.one())
    res = enumerate_in_domain(Lat, D)
    B = lemma4_bound(F, X)
    for p in res.points:
        x = MinkowskiPoint.from_element(F, p)
        assert float(x.euclidean_norm()) <= B


@pytest.mark.parametrize("name", UNIT_FIELDS)
def test_cell_twists_have_norm_one_and_shift(name):
    F = field(name)
    cells = partition_cells(F)
    assert len(cells) == F.unit_product
    a = MinkowskiPoint.from_element(F, F.scale(F.one(), 3))
    _, base = log_coords(F, a)
    for c in cells:
        y = apply_cell(F, a, c)
        _, vec = log_coords(F, y)
        with mpmath.workprec(F.precision):
            assert abs(c.beta.norm() - 1) < 1e-30
            for v, b0, s in zip(vec, base, c.shift(F)):
                assert abs(v - b0 - mpmath.mpf(s.numerator) / s.denominator) < 1e-30


@pytest.mark.parametrize("name", ["q_sqrt2", "cubic_x3m2"])
def test_cell_integral_closed_form(name):
    F = field(name)
    rng = np.random.default_rng(7)
    for _ in range(3):
        a = tuple(int(v) for v in rng.integers(-6, 7, F.n))
        if F.norm(a) == 0:
            continue
        emb = F.embed(a)[: F.n_places]
        closed = float(partition_integral(F, emb))
        quad = partition_integral_quadrature(F, emb)
        assert quad == pytest.approx(closed, rel=1e-6)
