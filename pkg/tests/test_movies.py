import json
import random

import pytest

from bnkh.codec import PlanarDiagram, dt_to_diagram, parse_dt
from bnkh.corpus import legal_moves, random_knot, random_movie, random_reidemeister_walk
from bnkh.cube import build_reduced_complex
from bnkh.errors import BasepointViolation, IllegalMove, NotACycle
from bnkh.homology import decompose
from bnkh.movies import (
    InducedClass, Move, Movie, apply_move, class_coordinates, evaluate_class_pairing,
    induced_class, induces_isomorphism, is_boundary, is_chain_map, maps_agree_on_homology,
    movie_chain_map, stabilize_map, unknot_generator,
)
from bnkh.tqft import RingElement

UNKNOT = PlanarDiagram((), basepoint=1, loops=(1,))


def _check_step(d, move):
    st = apply_move(d, move)
    src, tgt = build_reduced_complex(st.before), build_reduced_complex(st.after)
    mat = st.matrix(src, tgt)
    assert is_chain_map(mat, src, tgt)
    return st, src, tgt, mat


def test_identity_movie():
    c = induced_class(Movie(UNKNOT, []))
    assert (c.h, c.q) == (0, 0)
    assert not c.is_zero()


def test_tube_is_multiplication_by_h():
    m = Movie(UNKNOT, [])
    tubed = m.stabilized()
    assert tubed.euler_characteristic() == -2
    c = induced_class(tubed)
    assert c.q == -2
    assert c.chain == stabilize_map(induced_class(m)).chain


def test_sphere_evaluates_to_zero():
    m = Movie(UNKNOT, [Move("birth", (2,)), Move("death", (2,))])
    assert induced_class(m).is_zero()


def test_death_of_basepoint_rejected():
    with pytest.raises(BasepointViolation):
        apply_move(UNKNOT, Move("death", (1,)))


@pytest.mark.parametrize("move", [
    Move("r1-", (99,)),
    Move("saddle", (1, 99)),
    Move("r2-", (1, 2)),
])
def test_illegal_moves(trefoil, move):
    with pytest.raises(IllegalMove):
        apply_move(trefoil, move)


@pytest.mark.parametrize("sign", [1, -1])
@pytest.mark.parametrize("side", ["left", "right"])
def test_kink_on_crossingless_unknot(sign, side):
    st, src, tgt, mat = _check_step(UNKNOT, Move("r1+", (1,), sign, side))
    assert st.after.n == 1
    assert induces_isomorphism(mat, src, tgt)
    back = next(m for m in legal_moves(st.after, ("r1-",)))
    st2, src2, tgt2, mat2 = _check_step(st.after, back)
    assert st2.after.n == 0
    assert induces_isomorphism(mat2, src2, tgt2)


def test_r2_between_circle_and_edge(trefoil):
    d = PlanarDiagram(trefoil.crossings, basepoint=trefoil.basepoint, loops=(7,))
    for e in trefoil.edges():
        st, src, tgt, mat = _check_step(d, Move("r2+", (7, e)))
        assert st.after.n == 5
        assert induces_isomorphism(mat, src, tgt)


def test_reidemeister_maps_are_isomorphisms(trefoil, figure_eight):
    rng = random.Random(5)
    for d in (trefoil, figure_eight):
        for kind in ("r1+", "r1-", "r2+", "r2-", "r3"):
            moves = legal_moves(d, (kind,))
            for m in rng.sample(moves, min(2, len(moves))):
                st, src, tgt, mat = _check_step(d, m)
                assert induces_isomorphism(mat, src, tgt), m


def test_r3_available_after_walk():
    rng = random.Random(11)
    d = random_knot(rng, 6)
    seen = set()
    for m in random_reidemeister_walk(rng, d, 12, max_crossings=8):
        st, src, tgt, mat = _check_step(d, m)
        assert decompose(src) == decompose(tgt)
        assert induces_isomorphism(mat, src, tgt)
        seen.add(m.type)
        d = st.after
    assert "r3" in seen


def test_khovanov_maps_on_h_zero_complexes():
    rng = random.Random(3)
    k = random_knot(rng, 5)
    m = random_movie(rng, k, 3, 6)
    f = movie_chain_map(m, khovanov=True)
    for i, mat in enumerate(f.matrices):
        assert is_chain_map(mat, f.complexes[i].specialize(0), f.complexes[i + 1].specialize(0))


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_tube_lemma_on_random_movies(seed):
    rng = random.Random(seed)
    m = random_movie(rng, random_knot(rng, 5), 3, 6, genus_rate=0.3)
    f = movie_chain_map(m)
    g = movie_chain_map(m.stabilized(at=rng.randint(0, len(m.moves))))
    assert maps_agree_on_homology(g, stabilize_map(f))


def test_maps_agree_detects_difference():
    m = Movie(UNKNOT, [])
    assert not maps_agree_on_homology(movie_chain_map(m), movie_chain_map(m.stabilized()))


def test_movie_json_round_trip(trefoil):
    m = Movie(trefoil, [Move("r1+", (1,), -1, "right"), Move("saddle", (2, 2))])
    back = Movie.from_json(json.dumps(m.to_json()))
    assert back.moves == m.moves
    assert back.start == m.start
    assert back.euler_characteristic() == -1


def test_move_json_validation():
    with pytest.raises(IllegalMove):
        Move.from_json({"type": "r4"})
    with pytest.raises(IllegalMove):
        Move.from_json({"type": "r1+", "edges": [1], "side": "up"})
    assert Move.from_json({"type": "R1+", "edges": [1], "sign": "-"}).sign == -1


def test_basepoint_track_follows_edges():
    m = Movie(UNKNOT, [Move("birth", (2,)), Move("saddle", (2, 1))])
    track = m.basepoint_track()
    assert track[0] == 1 and len(track) == 3 and track[-1] is not None


def test_class_coordinates_and_pairing():
    # pushing the unknot class through a tube multiplies it by H
    m = Movie(UNKNOT, []).stabilized()
    cx = build_reduced_complex(UNKNOT)
    z = unknot_generator(cx)
    dec, coords = class_coordinates(cx, z)
    assert coords.tower and dec.s == 0
    assert evaluate_class_pairing(m, z) == RingElement.monomial(1)
    assert evaluate_class_pairing(Movie(UNKNOT, []), z) == RingElement(1)


def test_pairing_rejects_non_cycles(trefoil):
    cx = build_reduced_complex(trefoil)
    nc = next({g: 1} for g in range(len(cx)) if cx.diff.get(g))
    with pytest.raises(NotACycle):
        evaluate_class_pairing(Movie(trefoil, []), nc)


def test_induced_class_json():
    c = induced_class(Movie(UNKNOT, []))
    data = c.to_json()
    assert data["h"] == 0 and data["chain"][0]["coefficient"] == "1"
    assert isinstance(c, InducedClass)
    assert is_boundary(c.complex, {})
