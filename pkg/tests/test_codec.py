import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from bnkh.codec import (
    PlanarDiagram, connected_sum, diagram_to_dt, dt_to_diagram, from_pd, mirror, parse_dt, render_dt,
)
from bnkh.errors import DuplicateLabel, InvalidDiagram, MultiComponent, NonRealizable, OddLabel
from bnkh.cube import build_reduced_complex
from bnkh.homology import decompose
from bnkh.known import k1_code, minus_k_code

from conftest import braid_knots


def test_trefoil_code():
    code = parse_dt("4 6 2")
    assert len(code) == 3
    d = dt_to_diagram(code)
    assert d.n == 3 and d.n_plus + d.n_minus == 3
    assert d.is_knot()


def test_both_printed_layouts_parse():
    assert len(parse_dt(minus_k_code())) == 46
    assert len(parse_dt(k1_code())) == 64
    assert parse_dt("4, 6,\n 2") == parse_dt("4 6 2")


def test_large_codes_decode():
    d = dt_to_diagram(parse_dt(minus_k_code()))
    assert d.n == 46
    assert len(d.faces()) == d.n + 2
    d1 = dt_to_diagram(parse_dt(k1_code()))
    assert d1.n == 64 and len(d1.faces()) == 66


@pytest.mark.parametrize("text, err", [
    ("4 4 2", DuplicateLabel),
    ("4 5 2", OddLabel),
    ("4 x 2", OddLabel),
    ("4 8 2", NonRealizable),
])
def test_bad_codes(text, err):
    with pytest.raises(err):
        parse_dt(text)


def test_non_planar_code_rejected():
    # a permutation of labels that admits no planar realization
    with pytest.raises(NonRealizable):
        dt_to_diagram(parse_dt("4 6 8 10 2"))


def test_empty_code_is_unknot():
    d = dt_to_diagram(parse_dt(""))
    assert d.n == 0 and d.loops == (d.basepoint,)


def test_mirror(trefoil):
    m = mirror(trefoil)
    assert (m.n_plus, m.n_minus) == (trefoil.n_minus, trefoil.n_plus)
    assert mirror(m) == trefoil
    u = dt_to_diagram(parse_dt(""))
    assert mirror(u) == u


def test_mirror_involution_large():
    d = dt_to_diagram(parse_dt(minus_k_code()))
    assert mirror(mirror(d)) == d


def test_connected_sum_counts(trefoil, figure_eight):
    u = dt_to_diagram(parse_dt(""))
    assert connected_sum(trefoil, u).n == 3
    tt = connected_sum(trefoil, trefoil)
    assert tt.n == 6 and tt.is_knot()
    assert len(tt.faces()) == 8
    assert tt.basepoint in trefoil.edges()


def test_connected_sum_needs_knots(trefoil):
    link = PlanarDiagram(trefoil.crossings, basepoint=trefoil.basepoint, loops=(7,))
    with pytest.raises(MultiComponent):
        connected_sum(trefoil, link)


def test_pd_round_trip(trefoil):
    data = trefoil.to_json()
    assert PlanarDiagram.from_json(data) == trefoil
    unsigned = [c[:4] for c in trefoil.crossings]
    assert from_pd(unsigned, basepoint=trefoil.basepoint) == trefoil


def test_pd_json_accepts_sign_strings(trefoil):
    rows = [list(c[:4]) + ["+" if c[4] > 0 else "-"] for c in trefoil.crossings]
    d = PlanarDiagram.from_json({"crossings": rows, "basepoint": trefoil.basepoint})
    assert d == trefoil


def test_edge_twice_required():
    with pytest.raises(InvalidDiagram):
        PlanarDiagram(((1, 2, 3, 4, 1),), basepoint=1).validate()


def test_basepoint_override(trefoil):
    d = trefoil.with_basepoint(5)
    assert d.basepoint == 5
    with pytest.raises(InvalidDiagram):
        trefoil.with_basepoint(99)


@given(st.lists(st.integers(1, 30), min_size=1, max_size=8, unique=True))
def test_render_parse_round_trip(labels):
    # any sign pattern on the trefoil and figure-eight codes renders and parses back
    for base in ("4 6 2", "4 6 8 2"):
        entries = [int(x) for x in base.split()]
        signs = [(-1 if lab % 2 else 1) for lab in labels] + [1] * len(entries)
        code = parse_dt(" ".join(str(s * e) for s, e in zip(signs, entries)))
        assert parse_dt(render_dt(code)) == code


@given(braid_knots(max_crossings=8))
def test_braid_diagrams_are_valid(d):
    d.validate()
    assert len(d.faces()) == d.n + 2 or d.n == 0
    assert d.n_plus + d.n_minus == d.n


def _prime_reduced(d):
    """No face meets itself and no two faces share two edges.

    A DT code fixes the chirality of every piece only for such diagrams;
    nugatory kinks and connected summands can be flipped independently.
    """
    faces = d.faces()
    edge_sets = []
    for f in faces:
        if len({x for x, _ in f}) < len(f):
            return False
        edge_sets.append({d.crossings[x][s] for x, s in f})
    for i in range(len(edge_sets)):
        for j in range(i + 1, len(edge_sets)):
            if len(edge_sets[i] & edge_sets[j]) >= 2:
                return False
    return True


@given(braid_knots(max_crossings=8, min_crossings=3))
def test_dt_round_trip_through_diagram(d):
    assume(d.n > 0 and _prime_reduced(d))
    code = diagram_to_dt(d)
    back = dt_to_diagram(code)
    assert back.n == d.n
    assert back.writhe == d.writhe
    assert sorted(c[4] for c in back.crossings) == sorted(c[4] for c in d.crossings)
    assert decompose(build_reduced_complex(back)) == decompose(build_reduced_complex(d))
