import pytest
from hypothesis import given

from bnkh.codec import PlanarDiagram, mirror
from bnkh.cube import LabeledState, build_reduced_complex, resolve, state_to_chain
from bnkh.errors import CapacityExceeded, UnknownResolution
from bnkh.homology import decompose, khovanov_ranks
from bnkh.scan import ScanStats, crossing_order, diagram_points, scan_reduce
from bnkh.tqft import UNIT_LABEL, X_LABEL, verify_complex

from conftest import braid_knots


def test_crossingless_unknot():
    u = PlanarDiagram((), basepoint=1, loops=(1,))
    cx = build_reduced_complex(u)
    assert cx.grades == [(0, 0)]
    assert scan_reduce(u).grades == [(0, 0)]


def test_trefoil_cube_size(trefoil):
    cx = build_reduced_complex(trefoil)
    # 2 + 3*1 + 3*2 + 4 reduced states over the eight vertices
    assert len(cx) == 15
    assert len(cx.resolutions) == 8
    assert verify_complex(cx).ok


def test_resolve_counts_circles(trefoil):
    assert len(resolve(trefoil, (0, 0, 0))) == 2
    assert len(resolve(trefoil, (1, 1, 1))) == 3
    assert len(resolve(trefoil, (1, 0, 0))) == 1


def test_state_to_chain(trefoil):
    cx = build_reduced_complex(trefoil)
    ch = state_to_chain(cx, LabeledState((0, 0, 0), (X_LABEL, X_LABEL)))
    # two X circles: q = -2 + 0 + 3 + 1; the merge sends X*X to H*X
    assert (ch.h, ch.q) == (0, 2)
    assert ch.is_cycle is False
    top = state_to_chain(cx, LabeledState((1, 1, 1), (X_LABEL, X_LABEL, X_LABEL)))
    assert top.is_cycle and (top.h, top.q) == (3, 4)


def test_state_to_chain_by_edges(trefoil):
    cx = build_reduced_complex(trefoil)
    labels = {e: X_LABEL for e in trefoil.edges()}
    ch = state_to_chain(cx, LabeledState((1, 1, 1), edge_labels=labels))
    assert ch.is_cycle


@pytest.mark.parametrize("state", [
    LabeledState((0, 0), (X_LABEL,)),
    LabeledState((0, 0, 0), (UNIT_LABEL, UNIT_LABEL, UNIT_LABEL)),
])
def test_state_to_chain_rejects_bad_states(trefoil, state):
    cx = build_reduced_complex(trefoil)
    with pytest.raises(UnknownResolution):
        state_to_chain(cx, state)


def test_capacity_guard(trefoil):
    with pytest.raises(CapacityExceeded):
        build_reduced_complex(trefoil, max_generators=5)
    with pytest.raises(CapacityExceeded):
        scan_reduce(trefoil, max_generators=2)


def test_scan_matches_cube_small(trefoil, figure_eight):
    for d in (trefoil, figure_eight, mirror(trefoil)):
        assert decompose(scan_reduce(d)) == decompose(build_reduced_complex(d))


@given(braid_knots(max_crossings=8))
def test_scan_matches_cube(d):
    scanned = scan_reduce(d)
    assert verify_complex(scanned).ok
    assert decompose(scanned) == decompose(build_reduced_complex(d))
    assert khovanov_ranks(scanned) == khovanov_ranks(build_reduced_complex(d))


@given(braid_knots(max_crossings=7))
def test_scan_independent_of_order(d):
    pts, _, _ = diagram_points(d)
    a = decompose(scan_reduce(d))
    b = decompose(scan_reduce(d, order=list(reversed(crossing_order(pts)))))
    assert a == b


def test_scan_stats(figure_eight):
    stats = ScanStats()
    scan_reduce(figure_eight, stats=stats)
    assert sorted(stats.order) == [0, 1, 2, 3]
    assert len(stats.sizes) == 4
