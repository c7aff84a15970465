import pytest
from hypothesis import given
from hypothesis import strategies as st

from bnkh.cube import build_reduced_complex
from bnkh.errors import IdentityViolation
from bnkh.tqft import (
    BNAlgebra, BigradedComplex, H, ONE, RingElement, X_LABEL, poly_str, ring_mul, verify_complex,
    verify_frobenius,
)

polys = st.integers(0, 1 << 12).map(RingElement)


def test_characteristic_two():
    one_plus_h = ONE + H
    assert ring_mul(one_plus_h, one_plus_h) == RingElement.monomial(2) + ONE
    assert H + H == RingElement(0)
    assert poly_str(0b1011) == "1+H+H^3"


@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@given(polys, polys)
def test_degree_is_additive(a, b):
    if a and b:
        assert (a * b).degree() == a.degree() + b.degree()


@pytest.mark.parametrize("n", [2, 3, 5])
def test_frobenius_axioms_hold(n):
    rep = verify_frobenius(n)
    assert rep.ok
    names = {name for name, _ in rep.checks}
    assert "genus relation m.delta = H" in names


def test_khovanov_specialization_is_frobenius():
    assert verify_frobenius(2, BNAlgebra(h=0)).ok


class _NilpotentX(BNAlgebra):
    def mult(self, a, b):
        if a == X_LABEL and b == X_LABEL:
            return {}
        return super().mult(a, b)


def test_broken_algebra_names_failing_axiom():
    with pytest.raises(IdentityViolation, match="frobenius relation"):
        verify_frobenius(3, _NilpotentX())


def test_truncation_order_checked():
    with pytest.raises(ValueError):
        verify_frobenius(1)


def test_cube_complexes_are_complexes(trefoil, figure_eight):
    for d in (trefoil, figure_eight):
        assert verify_complex(build_reduced_complex(d)).ok


def test_verify_complex_catches_defects():
    c = BigradedComplex([(0, 0), (1, 0), (2, 0)])
    c.add_entry(0, 1, 1)
    c.add_entry(1, 2, 1)
    rep = verify_complex(c)
    assert rep.d_squared_failures == [(0, [2])]
    bad = BigradedComplex([(0, 0), (1, 2)])
    bad.add_entry(0, 1, 1)
    assert verify_complex(bad).homogeneity_failures


def test_complex_json_round_trip(trefoil):
    c = build_reduced_complex(trefoil)
    back = BigradedComplex.from_json(c.to_json())
    assert back.grades == c.grades
    assert sorted(back.entries()) == sorted(c.entries())


def test_specialize_kills_h_entries():
    c = BigradedComplex([(0, -2), (1, 0)])
    c.add_entry(0, 1, 2)
    assert not c.specialize(0).diff
    assert c.specialize(1).diff == {0: {1: 1}}
