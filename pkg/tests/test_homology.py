import pytest
from hypothesis import given
from hypothesis import strategies as st

from bnkh.codec import connected_sum, dt_to_diagram, mirror, parse_dt
from bnkh.corpus import braid_closure
from bnkh.cube import build_reduced_complex
from bnkh.errors import BadK, BasisMismatch, EmptyBigrading
from bnkh.homology import (
    INF, BNDecomposition, Coordinates, decompose, homology_piece, khovanov_ranks,
    normal_form_complex, render_table, spanned_submodule, s_invariant, ss_page, survives_H, tensor_decompositions,
    torsion_order, torus_knot_bn,
)
from bnkh.scan import scan_reduce

from conftest import braid_knots


def _dec(d):
    return decompose(build_reduced_complex(d))


def _mirror_dec(dec):
    return BNDecomposition(-dec.s, tuple((1 - a, 2 * m - b, m) for a, b, m in dec.torsion))


# Reduced Khovanov polynomials of small knots (standard tables, F2 coefficients):
#   3_1 (positive): q^2 + t^2 q^6 + t^3 q^8
#   4_1: t^-2 q^-4 + t^-1 q^-2 + 1 + t q^2 + t^2 q^4
#   5_1 (positive): q^4 + t^2 q^8 + t^3 q^10 + t^4 q^12 + t^5 q^14
KNOWN = {
    "4 6 2": BNDecomposition(2, ((3, 8, 1),)),
    "4 6 8 2": BNDecomposition(0, ((-1, -2, 1), (2, 4, 1))),
    "6 8 10 2 4": BNDecomposition(4, ((3, 10, 1), (5, 14, 1))),
}


@pytest.mark.parametrize("code", sorted(KNOWN))
def test_small_knots(code):
    assert _dec(dt_to_diagram(parse_dt(code))) == KNOWN[code]


def test_trefoil_pages(trefoil):
    dec = _dec(trefoil)
    assert s_invariant(dec) == 2
    assert ss_page(dec, 1).ranks == {(0, 2): 1, (2, 6): 1, (3, 8): 1}
    assert ss_page(dec, 2).ranks == {(0, 2): 1}
    assert khovanov_ranks(build_reduced_complex(trefoil)) == ss_page(dec, 1).ranks


def test_page_index_checked():
    with pytest.raises(ValueError):
        ss_page(BNDecomposition(0), 0)


@given(braid_knots(max_crossings=7))
def test_mirror_dualizes(d):
    assert _dec(mirror(d)) == _mirror_dec(_dec(d))


@given(braid_knots(max_crossings=7))
def test_page_one_is_khovanov(d):
    cx = build_reduced_complex(d)
    dec = decompose(cx)
    assert ss_page(dec, 1).ranks == khovanov_ranks(cx)
    assert ss_page(dec, 1 + dec.max_order()).ranks == {(0, dec.s): 1}


@given(braid_knots(max_crossings=7))
def test_normal_form_round_trip(d):
    dec = _dec(d)
    assert decompose(normal_form_complex(dec)) == dec


def test_survives_h():
    dec = BNDecomposition(0, ((0, 0, 2), (-1, -4, 1), (2, 4, 1)))
    # F2[H]/H^2 topped at (0, 0) plus the tower: H moves (0, 0) to (0, -2) injectively
    assert survives_H(dec, 0, 0) is True
    # the bottom of F2[H]/H^2 sits at (0, -2) and H kills it
    assert survives_H(dec, 0, -2) is False
    assert survives_H(dec, 2, 4) is False
    with pytest.raises(EmptyBigrading):
        survives_H(dec, 5, 5)


def test_homology_piece():
    dec = BNDecomposition(-2, ((0, -2, 2), (0, -2, 1)))
    assert homology_piece(dec, 0, -2) == {"free": 1, "torsion": {2: 1, 1: 1}}
    assert homology_piece(dec, 1, 0) == {"free": 0, "torsion": {}}


def test_spanned_submodule():
    dec = BNDecomposition(-2, ((0, -2, 2), (0, 0, 3), (1, -2, 1)))
    # tower, F2[H]/H^2 topped here, and F2[H]/H^3 entered one step down
    assert spanned_submodule(dec, 0, -2) == {"free": 1, "torsion": {2: 2}}
    assert spanned_submodule(dec, 0, 0) == {"free": 0, "torsion": {3: 1}}
    assert spanned_submodule(dec, 0, -6) == {"free": 1, "torsion": {}}


def test_torsion_order():
    dec = BNDecomposition(0, ((0, 0, 2), (1, 4, 3)))
    assert torsion_order(dec, Coordinates(0, 0, False, {0: True})) == 2
    assert torsion_order(dec, Coordinates(0, -2, False, {0: True})) == 1
    assert torsion_order(dec, Coordinates(0, 0, True, {0: True})) == INF
    with pytest.raises(BasisMismatch):
        torsion_order(dec, Coordinates(0, 0, False, {1: True}))


@pytest.mark.parametrize("k", [1, 3, 5, 7])
def test_torus_closed_form(k):
    # the closure of sigma_1^-k is the mirror of T(2, k)
    d = braid_closure([-1] * k, 2)
    assert torus_knot_bn(k) == _dec(d)


@pytest.mark.parametrize("k", [0, 2, -3, 4.0])
def test_torus_rejects_bad_k(k):
    with pytest.raises(BadK):
        torus_knot_bn(k)


def test_torus_example():
    assert torus_knot_bn(3) == BNDecomposition(-2, ((-2, -6, 1),))
    assert ss_page(torus_knot_bn(3), 1).total() == 3


@pytest.mark.parametrize("a, b", [("4 6 2", "4 6 2"), ("4 6 2", "4 6 8 2"), ("4 6 8 2", "6 8 10 2 4")])
def test_kunneth_matches_connected_sum(a, b):
    d1, d2 = dt_to_diagram(parse_dt(a)), dt_to_diagram(parse_dt(b))
    direct = decompose(scan_reduce(connected_sum(d1, d2)))
    assert tensor_decompositions(_dec(d1), _dec(d2)) == direct


def test_kunneth_with_mirror_creates_higher_torsion(trefoil):
    # T # -T is slice, so the tower lands at s = 0
    dec = tensor_decompositions(_dec(trefoil), _dec(mirror(trefoil)))
    assert dec.s == 0
    assert dec == decompose(scan_reduce(connected_sum(trefoil, mirror(trefoil))))


@given(st.integers(1, 4).map(lambda g: 2 * g - 1))
def test_tensor_unit(k):
    dec = torus_knot_bn(k)
    assert tensor_decompositions(dec, BNDecomposition(0)) == dec


def test_render_table():
    dec = torus_knot_bn(3)
    text = render_table(ss_page(dec, 1), h_min=-3, q_min=-8, tower=(0, -2), h_max=0, q_max=-2)
    lines = text.splitlines()
    assert lines[0].split() == ["q\\h", "-3", "-2", "-1", "0"]
    assert lines[1].split() == ["-2", "1*"]
    assert lines[3].split() == ["-6", "1"]
    assert lines[4].split() == ["-8", "1"]
    assert render_table(ss_page(dec, 1), h_min=5) == "(empty)"


def test_decomposition_json():
    dec = BNDecomposition(-2, ((0, -2, 2), (-1, -6, 1)))
    assert BNDecomposition.from_json(dec.to_json()) == dec
    assert dec.torsion == ((-1, -6, 1), (0, -2, 2))
