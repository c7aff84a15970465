"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``.
Criterion 1 computes the 46-crossing knot from scratch (a couple of
minutes).  Criterion 4 needs the 64-crossing knot; set ``BNKH_TABLE2=1`` to
attempt it, otherwise a decomposition previously written by ``bnkh`` to
``data/minus_k1_decomposition.json`` is used when present.
"""
import os
import random
import sys
import time
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bnkh.codec import connected_sum, dt_to_diagram, parse_dt  # noqa: E402
from bnkh.corpus import braid_closure, knot_corpus, random_knot, random_movie, random_reidemeister_walk  # noqa: E402
from bnkh.cube import build_reduced_complex  # noqa: E402
from bnkh.homology import (  # noqa: E402
    decompose, khovanov_ranks, render_table, spanned_submodule, ss_page, survives_H,
    tensor_decompositions, torus_knot_bn,
)
from bnkh.known import minus_k, minus_k1, stored_decomposition  # noqa: E402
from bnkh.laurent import cancel_hyperbolic_pairs, congruence, fixture, forms_equal  # noqa: E402
from bnkh.movies import (  # noqa: E402
    apply_move, induces_isomorphism, maps_agree_on_homology, movie_chain_map, stabilize_map,
)
from bnkh.scan import scan_reduce  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"
RESULTS: dict = {}


def report(n, ok, detail=""):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
    RESULTS[n] = line  # printed by the terminal summary hook in conftest
    return ok


def _golden(name):
    return (GOLDEN / name).read_text()


_MINUS_K = {}


def minus_k_result():
    if not _MINUS_K:
        t0 = time.time()
        dec = decompose(scan_reduce(minus_k()))
        _MINUS_K["dec"] = dec
        _MINUS_K["seconds"] = time.time() - t0
    return _MINUS_K["dec"], _MINUS_K["seconds"]


def _minus_k1_result():
    """(decomposition, provenance) for -K1, or (None, reason)."""
    if os.environ.get("BNKH_TABLE2"):
        t0 = time.time()
        dec = decompose(scan_reduce(minus_k1()))
        return dec, f"computed in {time.time() - t0:.0f}s"
    ref = resources.files("bnkh") / "data" / "minus_k1_decomposition.json"
    if ref.is_file():
        return stored_decomposition("minus_k1"), "stored result of an earlier scan_reduce run"
    return None, ("not computed: the scanning reducer peaks above the 6 GB of this machine "
                  "around crossing 49 of 64; set BNKH_TABLE2=1 on a larger machine")


@pytest.mark.slow
def test_criterion_1_table1_page1():
    dec, secs = minus_k_result()
    page = ss_page(dec, 1)
    table = render_table(page, -4, -12, tower=(0, dec.s), h_max=3, q_max=2) + "\n"
    spot = {(-4, -10): 75, (-3, -8): 44, (0, -4): 14, (0, 0): 2, (2, 0): 3, (3, 2): 2}
    ok = (table == _golden("table1_page1.txt")
          and all(page.ranks.get(k) == v for k, v in spot.items())
          and secs <= 15 * 60
          and dec == stored_decomposition("minus_k"))
    report(1, ok, f"46-crossing page 1 matches the golden table cell for cell ({secs:.0f}s)")
    assert ok


@pytest.mark.slow
def test_criterion_2_table1_page2():
    dec, _ = minus_k_result()
    window = ss_page(dec, 2).window(-4, -12)
    table = render_table(ss_page(dec, 2), -4, -12, tower=(0, dec.s), h_max=3, q_max=2) + "\n"
    ok = window == {(0, 0): 2, (-1, -4): 1} and table == _golden("table1_page2.txt")
    report(2, ok, f"page 2 in window = {dict(sorted(window.items()))}")
    assert ok


@pytest.mark.slow
def test_criterion_3_torsion_structure():
    dec, _ = minus_k_result()
    at_origin = [t for t in dec.torsion if t[:2] == (0, 0)]
    ok = dec.s == 0 and at_origin == [(0, 0, 2)] and survives_H(dec, 0, 0)
    report(3, ok, f"s = {dec.s}, summands topped at (0,0): {at_origin}, survives_H(0,0) = "
                  f"{survives_H(dec, 0, 0)}")
    assert ok


@pytest.mark.slow
def test_criterion_4_table2():
    dec, how = _minus_k1_result()
    if dec is None:
        report(4, False, how)
        pytest.xfail(how)
    page1 = ss_page(dec, 1)
    t1 = render_table(page1, -4, -14, tower=(0, dec.s), h_max=3, q_max=0) + "\n"
    t2 = ss_page(dec, 2).window(-4, -14)
    spot = {(-4, -14): 348, (-2, -10): 129, (0, -6): 33, (0, -2): 2}
    ok = (t1 == _golden("table2_page1.txt") and t2 == {(0, -2): 2, (-1, -6): 1}
          and all(page1.ranks.get(k) == v for k, v in spot.items()))
    report(4, ok, f"64-crossing pages against the golden tables ({how})")
    assert ok


def test_criterion_5_torus_closed_form():
    bad = [k for k in (3, 5, 7) if torus_knot_bn(k) != decompose(build_reduced_complex(braid_closure([-1] * k, 2)))]
    report(5, not bad, "closed form = direct cube for k = 3, 5, 7" + (f"; mismatch at {bad}" if bad else ""))
    assert not bad


def _dec_of(code):
    return decompose(scan_reduce(dt_to_diagram(parse_dt(code))))


def test_criterion_6_kunneth():
    pairs = [("4 6 2", "4 6 2"), ("4 6 2", "4 6 8 2"), ("4 6 8 2", "4 6 8 2"), ("4 6 2", "6 8 10 2 4")]
    small_ok = True
    for a, b in pairs:
        direct = decompose(scan_reduce(connected_sum(dt_to_diagram(parse_dt(a)), dt_to_diagram(parse_dt(b)))))
        small_ok &= tensor_decompositions(_dec_of(a), _dec_of(b)) == direct
    k1, how = _minus_k1_result()
    if k1 is None:
        report(6, False, f"small sums agree = {small_ok}; (0,-2g) piece for -K1 # -T(2,2g-1) {how}")
        if not small_ok:
            pytest.fail("small connected sums disagree")
        pytest.xfail(how)
    pieces = {}
    for g in (2, 3):
        dec = tensor_decompositions(k1, torus_knot_bn(2 * g - 1))
        pieces[g] = spanned_submodule(dec, 0, -2 * g)
    big_ok = all(p == {"free": 1, "torsion": {2: 1}} for p in pieces.values())
    ok = small_ok and big_ok
    report(6, ok, f"small sums agree = {small_ok}; (0,-2g) pieces {pieces}")
    assert ok


def test_criterion_7_laurent():
    t0 = time.time()
    a = congruence(fixture("q0"), fixture("p"))
    b = congruence(fixture("q0_prime"), fixture("p_prime"))
    qa = cancel_hyperbolic_pairs(a, [(0, 5), (1, 2)])
    qb = cancel_hyperbolic_pairs(b, [(0, 5), (1, 2)])
    secs = time.time() - t0
    ok = (forms_equal(a, fixture("q0_after_p")) and forms_equal(b, fixture("q0_prime_after_p_prime"))
          and forms_equal(qa, fixture("q_reduced")) and forms_equal(qa, qb) and secs < 1)
    report(7, ok, f"both 6x6 displays and the reduced 2x2 form reproduced ({secs * 1000:.0f} ms)")
    assert ok


def test_criterion_8_tube_lemma():
    rng = random.Random(8)
    agree, chis = 0, []
    for _ in range(20):
        m = random_movie(rng, random_knot(rng, 6), 4, 7, genus_rate=0.3)
        f = movie_chain_map(m)
        g = movie_chain_map(m.stabilized(at=rng.randint(0, len(m.moves))))
        agree += maps_agree_on_homology(g, stabilize_map(f))
        chis.append(m.euler_characteristic())
    ok = agree == 20
    report(8, ok, f"{agree}/20 tube-stabilized movies induce H times the original map "
                  f"(chi from {max(chis)} to {min(chis)})")
    assert ok


def test_criterion_9_oracle_equivalence():
    corpus = knot_corpus(40, max_crossings=9, seed=9)
    bad = 0
    for d in corpus:
        cube = build_reduced_complex(d)
        dec = decompose(cube)
        if decompose(scan_reduce(d)) != dec or ss_page(dec, 1).ranks != khovanov_ranks(cube):
            bad += 1
    ok = bad == 0
    report(9, ok, f"scan = cube and page 1 = H=0 Khovanov ranks on {len(corpus) - bad}/{len(corpus)} "
                  f"knots (up to {max(d.n for d in corpus)} crossings)")
    assert ok


def test_criterion_10_invariance():
    rng = random.Random(10)
    corpus = knot_corpus(15, max_crossings=9, seed=10)
    changed, checked_maps, bad_maps = 0, 0, 0
    for d in corpus:
        ref = decompose(scan_reduce(d))
        for e in rng.sample(d.edges(), min(3, len(d.edges()))):
            changed += decompose(scan_reduce(d.with_basepoint(e))) != ref
        cur = d
        for m in random_reidemeister_walk(rng, d, 6, max_crossings=9):
            st = apply_move(cur, m)
            cur = st.after
            changed += decompose(scan_reduce(cur)) != ref
            if st.before.n <= 7 and st.after.n <= 7:
                src, tgt = build_reduced_complex(st.before), build_reduced_complex(st.after)
                checked_maps += 1
                bad_maps += not induces_isomorphism(st.matrix(src, tgt), src, tgt)
    ok = changed == 0 and bad_maps == 0 and checked_maps > 0
    report(10, ok, f"{changed} decomposition changes under moves and basepoint changes; "
                   f"{checked_maps - bad_maps}/{checked_maps} Reidemeister maps are homology isomorphisms")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
