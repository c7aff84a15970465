import pytest
from hypothesis import given
from hypothesis import strategies as st

from bnkh.errors import NonInvertibleBasisChange, NotDualPair
from bnkh.laurent import (
    LaurentMatrix, LaurentPoly, T, TINV, bar, cancel_hyperbolic_pairs, congruence, determinant,
    fixture, forms_equal, load_matrix, parse_poly,
)

polys = st.dictionaries(st.integers(-4, 4), st.integers(-5, 5), max_size=4).map(LaurentPoly.from_dict)

REDUCED = LaurentMatrix.from_rows([[0, T - 1], [TINV - 1, 0]])


def _hermitian(draw_entries, n):
    rows = [[None] * n for _ in range(n)]
    it = iter(draw_entries)
    for i in range(n):
        for j in range(i, n):
            p = next(it)
            rows[i][j] = p if i != j else p + bar(p)
            rows[j][i] = bar(rows[i][j])
    return LaurentMatrix.from_rows(rows)


def test_canonical_form():
    p = LaurentPoly.from_dict({0: 0, 1: 2, -1: 0})
    assert p.as_dict() == {1: 2}
    assert LaurentPoly.from_dict({}) == LaurentPoly()


def test_bar_examples():
    assert bar(T - 1) == TINV - 1
    p = parse_poly("t^-1-2+t")
    assert bar(p) == p
    assert str(p) == "t-2+t^-1"


@given(polys)
def test_bar_is_involution(p):
    assert bar(bar(p)) == p


@given(polys, polys)
def test_bar_is_ring_map(p, q):
    assert bar(p * q) == bar(p) * bar(q)
    assert bar(p + q) == bar(p) + bar(q)


def test_units():
    assert T.is_unit() and (-TINV).is_unit()
    assert not (T - 1).is_unit()
    assert not LaurentPoly.const(2).is_unit()


def test_congruence_with_identity():
    q0 = fixture("q0")
    assert forms_equal(congruence(q0, LaurentMatrix.identity(6)), q0)


def test_paper_pipelines():
    a = congruence(fixture("q0"), fixture("p"))
    b = congruence(fixture("q0_prime"), fixture("p_prime"))
    assert forms_equal(a, fixture("q0_after_p"))
    assert forms_equal(b, fixture("q0_prime_after_p_prime"))
    qa = cancel_hyperbolic_pairs(a, [(0, 5), (1, 2)])
    qb = cancel_hyperbolic_pairs(b, [(0, 5), (1, 2)])
    assert forms_equal(qa, REDUCED)
    assert forms_equal(qb, REDUCED)
    assert forms_equal(qa, qb)
    assert forms_equal(qa, fixture("q_reduced"))


def test_fixtures_are_hermitian():
    for name in ("q0", "q0_prime", "q0_after_p", "q0_prime_after_p_prime", "q_reduced"):
        assert fixture(name).is_hermitian(), name


def test_swapped_diagonal():
    q0, q0p = fixture("q0"), fixture("q0_prime")
    assert q0[4, 4] == q0p[5, 5] and q0[5, 5] == q0p[4, 4]
    assert {str(q0[4, 4]), str(q0[5, 5])} == {"0", "t-2+t^-1"}


def test_non_invertible_basis_change():
    p = LaurentMatrix.from_rows([[1, 0], [0, T - 1]])
    with pytest.raises(NonInvertibleBasisChange):
        congruence(REDUCED, p)


def test_hyperbolic_identity_cancels_to_empty():
    h = LaurentMatrix.from_rows([[0, 1], [1, 0]])
    assert cancel_hyperbolic_pairs(h, [(0, 1)]).n == 0


def test_not_dual_pair():
    with pytest.raises(NotDualPair):
        cancel_hyperbolic_pairs(REDUCED, [(0, 1)])
    m = LaurentMatrix.from_rows([[0, 1, 1], [1, 0, 0], [1, 0, 0]])
    with pytest.raises(NotDualPair):
        cancel_hyperbolic_pairs(m, [(0, 1)])


def test_forms_equal_examples():
    assert forms_equal(REDUCED, REDUCED.transpose().bar())
    scaled = LaurentMatrix.from_rows([[e * T for e in row] for row in REDUCED.rows])
    assert not forms_equal(REDUCED, scaled)


@given(st.lists(polys, min_size=6, max_size=6), st.integers(-3, 3), polys, polys)
def test_congruence_preserves_hermitian(entries, k, x, y):
    q = _hermitian(entries, 3)
    # unipotent times a unit monomial is invertible over the Laurent ring
    p = LaurentMatrix.from_rows([[LaurentPoly.mono(1, k), x, y], [0, 1, x], [0, 0, -1]])
    assert determinant(p).is_unit()
    assert congruence(q, p).is_hermitian()


@given(st.lists(polys, min_size=3, max_size=3), polys, polys)
def test_congruence_is_functorial(entries, x, y):
    q = _hermitian(entries, 2)
    p1 = LaurentMatrix.from_rows([[1, x], [0, 1]])
    p2 = LaurentMatrix.from_rows([[T, 0], [y, 1]])
    assert forms_equal(congruence(congruence(q, p1), p2), congruence(q, p1 @ p2))


def test_load_matrix_formats(tmp_path):
    path = tmp_path / "m.json"
    path.write_text('{"labels": ["a", "b"], "rows": [["0", "t-1"], ["t^-1-1", "0"]]}')
    m = load_matrix(str(path))
    assert forms_equal(m, REDUCED) and m.labels == ("a", "b")
    assert forms_equal(load_matrix([["0", "t-1"], ["t^-1-1", "0"]]), REDUCED)
