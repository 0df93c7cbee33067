import json

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nfsieve.errors import ParseError, ValidationError
from nfsieve.field_data import (
    DATA_DIR,
    choose_reduced_units,
    dumps_field,
    lemma5_bounds,
    load_field,
    parse_field,
    validate_field,
)

from .conftest import ALL_FIELDS, field

# Regulators and residues recomputed here from closed forms, independently of the data files:
# the units are 1 + sqrt2, the golden ratio, 1 + 2^{1/3} + 4^{1/3}, and the golden ratio again
# (a complex place carries weight 2 in Q(zeta5)).
def _oracle():
    PHI = (1 + mpmath.sqrt(5)) / 2
    return {
        "q_sqrt2": dict(disc=8, reg=mpmath.log(1 + mpmath.sqrt(2)), h=1, w=2),
        "q_sqrt5": dict(disc=5, reg=mpmath.log(PHI), h=1, w=2),
        "q_sqrt5_x2m5": dict(disc=5, reg=mpmath.log(PHI), h=1, w=2),
        "q_i": dict(disc=-4, reg=mpmath.mpf(1), h=1, w=4),
        "q_sqrt_m5": dict(disc=-20, reg=mpmath.mpf(1), h=2, w=2),
        "cubic_x3m2": dict(disc=-108, reg=mpmath.log(1 + mpmath.cbrt(2) + mpmath.cbrt(4)), h=1, w=2),
        "q_zeta5": dict(disc=125, reg=2 * mpmath.log(PHI), h=1, w=10),
    }


@pytest.mark.parametrize("name", ALL_FIELDS)
def test_invariants_match_closed_forms(name):
    F = field(name)
    with mpmath.workdps(50):
        _check_against_oracle(F, _oracle()[name])


def _check_against_oracle(F, o):
    assert F.disc == o["disc"]
    assert F.class_number == o["h"]
    assert F.roots_of_unity == o["w"]
    assert abs(F.reg_convention - o["reg"]) < mpmath.mpf("1e-30")
    kappa = 2**F.r1 * (2 * mpmath.pi) ** F.r2 * o["reg"] * o["h"] / (o["w"] * mpmath.sqrt(abs(o["disc"])))
    assert abs(F.residue - kappa) < mpmath.mpf("1e-30")


def test_known_residues():
    with mpmath.workdps(50):
        assert abs(field("q_i").residue - mpmath.pi / 4) < 1e-30
    assert abs(float(field("q_sqrt2").residue) - 0.6232252401) < 1e-9


def _doc(name):
    return json.loads((DATA_DIR / "fields" / f"{name}.field").read_text())


@pytest.mark.parametrize(
    "mutate, invariant",
    [
        (lambda d: d.__setitem__("regulator", "0.9"), "regulator"),
        (lambda d: d.__setitem__("disc", "12"), "discriminant"),
        (lambda d: d.__setitem__("unit_bounds", [7]), "unit bounds"),
        (lambda d: d.__setitem__("residue", "0.7"), "residue"),
        (lambda d: d.__setitem__("fundamental_units", [[2, 1]]), "unit norm"),
        (lambda d: d.__setitem__("defining_poly", [-1, 0, 1]), "irreducible"),
    ],
)
def test_corrupted_file_rejected(mutate, invariant):
    d = _doc("q_sqrt2")
    mutate(d)
    with pytest.raises(ValidationError) as ei:
        validate_field(parse_field(d))
    assert ei.value.invariant == invariant


def test_parse_errors(tmp_path):
    d = _doc("q_i")
    del d["version"]
    with pytest.raises(ParseError):
        parse_field(d)
    p = tmp_path / "bad.field"
    p.write_text("{not json")
    with pytest.raises(ParseError):
        load_field(p)
    with pytest.raises(FileNotFoundError):
        load_field(tmp_path / "missing.field")


@pytest.mark.parametrize("name", ALL_FIELDS)
def test_roundtrip(name, tmp_path):
    F = field(name)
    p = tmp_path / "f.field"
    p.write_text(dumps_field(F))
    G = load_field(p)
    assert G.defining_poly == F.defining_poly and G.fundamental_units == F.fundamental_units
    assert G.disc == F.disc and abs(G.regulator - F.regulator) < 1e-30


@pytest.mark.parametrize("name", ["q_sqrt2", "q_sqrt5", "cubic_x3m2", "q_zeta5"])
def test_unit_reduction_idempotent_and_in_bounds(name):
    F = field(name)
    G = choose_reduced_units(F)
    validate_field(G, check_classes=False)
    assert choose_reduced_units(G).fundamental_units == G.fundamental_units
    lo, hi = lemma5_bounds(G)
    assert lo <= G.unit_product <= hi
    assert abs(G.regulator - F.regulator) < 1e-25


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(ALL_FIELDS), st.data())
def test_multiplication_ring_axioms(name, data):
    F = field(name)
    el = st.tuples(*[st.integers(-20, 20)] * F.n)
    a, b, c = data.draw(el), data.draw(el), data.draw(el)
    assert F.mul(a, b) == F.mul(b, a)
    assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
    assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
    assert F.norm(F.mul(a, b)) == F.norm(a) * F.norm(b)
    assert F.mul(a, F.one()) == tuple(a)
