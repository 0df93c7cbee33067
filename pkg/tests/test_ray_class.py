import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nfsieve.errors import NotCoprime
from nfsieve.nf_arith import NfIdeal, ideal_mul, ideals_of_norm_up_to, is_coprime
from nfsieve.ray_class import (
    RhoImage,
    build_group_data,
    class_labels,
    element_label,
    ideal_labels,
    label_mul,
    narrow_class_label,
    prime_class_partition,
    rho,
    same_narrow_class,
)

from .conftest import field

# (field, modulus generator, phi(f), |rho(V)|, h*); h* for Q(sqrt2),(3) and Q(i),(3) by hand:
# (Z[sqrt2]/3)^* has 8 elements, times 4 sign patterns, modulo the 16-element image of <-1, 1+sqrt2>.
# Mod 2 in Q(sqrt5) the golden ratio has residue order 3 and signs (+,-), so with -1 it fills all 12.
CASES = [
    ("q_sqrt2", (3, 0), 8, 16, 2),
    ("q_sqrt5", (2, 0), 3, 12, 1),
    ("q_i", (3, 0), 8, 4, 2),
    ("q_sqrt5_x2m5", (-1, 2), 4, 8, 2),  # f = (sqrt5); the basis is 1, (1 + sqrt5)/2
    ("q_sqrt_m5", (3, 0), 4, 2, 4),
]


@pytest.mark.parametrize("name, gen, phi, rv, hstar", CASES)
def test_group_data_frozen(name, gen, phi, rv, hstar):
    F = field(name)
    d = build_group_data(F, NfIdeal.principal(F, gen))
    assert d.phi_f == phi and len(d.rho_V) == rv
    assert d.h_star == d.h_star_enumerated == hstar
    assert len(class_labels(d)) == hstar


@pytest.mark.parametrize("name, gen, phi, rv, hstar", CASES)
def test_primes_fill_every_class(name, gen, phi, rv, hstar):
    F = field(name)
    f = NfIdeal.principal(F, gen)
    part = prime_class_partition(F, f, 1000)
    assert set(part) == set(class_labels(build_group_data(F, f)))
    # a partition: every prime in exactly one class
    flat = [P for ps in part.values() for P in ps]
    assert len(flat) == len(set(flat))


def test_rho_example():
    F = field("q_sqrt2")
    f = NfIdeal.principal(F, (3, 0))
    assert rho(F, (1, 1), f) == RhoImage((1, 1), (1, -1))
    with pytest.raises(NotCoprime):
        rho(F, (3, 0), f)


def test_units_have_trivial_label():
    F = field("q_sqrt2")
    d = build_group_data(F, NfIdeal.principal(F, (3, 0)))
    one = element_label(F, F.one(), d)
    assert element_label(F, (1, 1), d) == one
    assert element_label(F, (-1, 0), d) == one
    # 7 = 1 mod 3 and totally positive
    assert element_label(F, (7, 0), d) == one
    # -1 + 3 sqrt2 = -1 mod 3 but has mixed signs; -1 itself is a unit, so the class differs
    assert element_label(F, (-1, 3), d) != one


def _coprime_ideals(name, gen, x=80):
    F = field(name)
    f = NfIdeal.principal(F, gen)
    return F, f, [I for I in ideals_of_norm_up_to(F, x) if is_coprime(I, f)]


_POOLS = {c[0]: _coprime_ideals(c[0], c[1]) for c in CASES}


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(sorted(_POOLS)), st.data())
def test_labels_are_multiplicative(name, data):
    F, f, pool = _POOLS[name]
    d = build_group_data(F, f)
    a = data.draw(st.sampled_from(pool))
    b = data.draw(st.sampled_from(pool))
    la, lb = narrow_class_label(F, a, d), narrow_class_label(F, b, d)
    assert narrow_class_label(F, ideal_mul(a, b), d) == label_mul(F, d, la, lb)
    assert same_narrow_class(F, a, b, f) == (la == lb)


@pytest.mark.parametrize("name", ["q_sqrt_m5", "q_sqrt2"])
def test_bulk_labels_agree_with_direct(name):
    F, f, pool = _POOLS[name]
    d = build_group_data(F, f)
    assert ideal_labels(F, pool, d) == [narrow_class_label(F, I, d) for I in pool]
