"""Scanning reducer: add crossings one at a time, deloop, cancel isomorphisms.

The tangle complex lives in the dotted cobordism category of
:mod:`bnkh.tangles`.  After each crossing is tensored in, closed loops are
delooped and every entry that is an isomorphism (same matching, same
q-degree) is cancelled by Gaussian elimination.  Once all crossings are in,
the boundary consists of the two ends of the basepoint edge and the complex is
an ordinary complex of free F2[H]-modules.
"""
from __future__ import annotations

import heapq
import logging
import time
from dataclasses import dataclass, field

from .codec import PlanarDiagram
from .errors import CapacityExceeded, InvalidDiagram
from .tangles import IDENTITY, SADDLE, CobordismAlgebra, CrossingGluer
from .tqft import BigradedComplex

log = logging.getLogger(__name__)

DEFAULT_MAX_GENERATORS = 5_000_000


def crossing_order(points: list[tuple], start: int | None = None) -> list[int]:
    """Greedy order keeping the tangle boundary small.

    Each step takes the crossing sharing the most points with the current
    boundary, preferring the smallest resulting boundary; ties go to the
    lowest index.
    """
    n = len(points)
    if n == 0:
        return []
    remaining = set(range(n))
    boundary: set = set()
    order = []
    first = 0 if start is None else start
    while remaining:
        if not order:
            best = first
        else:
            best = None
            best_key = None
            for x in remaining:
                pts = points[x]
                shared = sum(1 for p in pts if p in boundary)
                key = (-shared, -_net_close(pts, boundary), x)
                if best_key is None or key < best_key:
                    best, best_key = x, key
        remaining.discard(best)
        order.append(best)
        for p in points[best]:
            if p in boundary:
                boundary.discard(p)
            elif points[best].count(p) == 1:
                boundary.add(p)
    return order


def _net_close(pts, boundary) -> int:
    return sum(1 for p in pts if p in boundary) - sum(
        1 for p in pts if p not in boundary and pts.count(p) == 1
    )


def diagram_points(d: PlanarDiagram):
    """Crossing slot points with the basepoint edge cut in two.

    Returns ``(points, bp1, bp2)`` where ``points[x]`` lists the four point
    ids of crossing ``x`` counterclockwise.
    """
    labels = {e: i for i, e in enumerate(sorted(d.edges(), key=repr))}
    bp1, bp2 = len(labels), len(labels) + 1
    bp = d.basepoint
    pts = [[labels[e] for e in c[:4]] for c in d.crossings]
    if bp is not None and bp not in d.loops:
        xt, st = d.tail(bp)
        xh, sh = d.head(bp)
        pts[xt][st] = bp1
        pts[xh][sh] = bp2
    return [tuple(p) for p in pts], bp1, bp2


@dataclass
class ScanStats:
    order: list = field(default_factory=list)
    sizes: list = field(default_factory=list)
    girth: list = field(default_factory=list)
    seconds: float = 0.0


class TangleComplex:
    """Generators ``id -> (object, h, q)`` with sparse morphism matrices."""

    def __init__(self, alg: CobordismAlgebra):
        self.alg = alg
        self.gens: dict[int, tuple[int, int, int]] = {}
        self.out: dict[int, dict[int, int]] = {}
        self.inn: dict[int, set] = {}
        self.next_id = 0

    def add(self, obj: int, h: int, q: int) -> int:
        i = self.next_id
        self.next_id += 1
        self.gens[i] = (obj, h, q)
        self.out[i] = {}
        self.inn[i] = set()
        return i

    def toggle(self, x: int, y: int, m: int) -> None:
        if not m:
            return
        row = self.out[x]
        v = row.get(y, 0) ^ m
        if v:
            row[y] = v
            self.inn[y].add(x)
        else:
            del row[y]
            self.inn[y].discard(x)

    def is_iso(self, x: int, y: int) -> bool:
        gx, gy = self.gens[x], self.gens[y]
        return gx[0] == gy[0] and gx[2] == gy[2]

    def remove(self, g: int) -> None:
        for y in self.out.pop(g):
            self.inn[y].discard(g)
        for x in self.inn.pop(g):
            del self.out[x][g]
        del self.gens[g]

    def eliminate(self, candidates) -> int:
        """Cancel isomorphism entries until none are left; returns count."""
        heap = list(candidates)
        heapq.heapify(heap)
        alg = self.alg
        done = 0
        out, inn, gens = self.out, self.inn, self.gens
        while heap:
            x, y = _unpack(heapq.heappop(heap))
            if x not in gens or y not in gens or out[x].get(y) != IDENTITY:
                continue
            mid = gens[y][0]
            sources = [s for s in inn[y] if s != x]
            targets = [(t, m) for t, m in out[x].items() if t != y]
            for s in sources:
                m1 = out[s][y]
                a = gens[s][0]
                for t, m2 in targets:
                    v = alg.compose(a, mid, gens[t][0], m1, m2)
                    if v:
                        self.toggle(s, t, v)
                        if t in out[s] and self.is_iso(s, t):
                            heapq.heappush(heap, _pack(self._cost(s, t), s, t))
            self.remove(x)
            self.remove(y)
            done += 1
        return done

    def _cost(self, x: int, y: int) -> int:
        return (len(self.inn[y]) - 1) * (len(self.out[x]) - 1)

    def iso_entries(self):
        for x, row in self.out.items():
            for y in row:
                if self.is_iso(x, y):
                    yield _pack(self._cost(x, y), x, y)


# Heap entries are packed into single ints (cost, then source, then target)
# so that millions of pending pivots stay affordable.
_ID_BITS = 40


def _pack(cost: int, x: int, y: int) -> int:
    return (((cost << _ID_BITS) | x) << _ID_BITS) | y


def _unpack(key: int) -> tuple[int, int]:
    mask = (1 << _ID_BITS) - 1
    return (key >> _ID_BITS) & mask, key & mask


def scan_reduce(
    d: PlanarDiagram,
    max_generators: int = DEFAULT_MAX_GENERATORS,
    order: list[int] | None = None,
    stats: ScanStats | None = None,
    progress=None,
) -> BigradedComplex:
    """Reduced Bar-Natan complex of ``d``, simplified crossing by crossing."""
    t0 = time.time()
    d.validate()
    if d.n == 0:
        return _loops_only(d)
    points, bp1, bp2 = diagram_points(d)
    alg = CobordismAlgebra((bp1, bp2))
    cx = TangleComplex(alg)
    cx.add(alg.intern(()), 0, 0)
    boundary: frozenset = frozenset()
    if order is None:
        order = crossing_order(points)
    if sorted(order) != list(range(d.n)):
        raise InvalidDiagram("crossing order must be a permutation")
    for step, xi in enumerate(order):
        gl = CrossingGluer(alg, boundary, points[xi])
        new = TangleComplex(alg)
        new.next_id = cx.next_id
        # new id of (old generator g, smoothing bit, loop labels lab) is
        # ids[g << 3 | bit << 2 | lab]; a crossing closes at most two loops
        ids: dict = {}
        for g, (obj, h, q) in sorted(cx.gens.items()):
            for bit in (0, 1):
                obj2, loops = gl.glue_object(obj, bit)
                nl = len(loops)
                for lab in range(1 << nl):
                    xs = bin(lab).count("1")
                    ids[g << 3 | bit << 2 | lab] = new.add(obj2, h + bit, q + bit + (nl - xs) - xs)
        if len(new.gens) > max_generators:
            raise CapacityExceeded(
                f"{len(new.gens)} generators after crossing {step + 1} exceed the budget"
            )
        cx.inn = {}
        for g in list(cx.gens):
            obj = cx.gens[g][0]
            row = cx.out.pop(g)
            for bit in (0, 1):
                for y, m in row.items():
                    _, _, ns, nt, table = gl.glue_morphism(obj, cx.gens[y][0], bit, m)
                    for (s, t), v in table.items():
                        new.toggle(ids[g << 3 | bit << 2 | s], ids[y << 3 | bit << 2 | t], v)
            _, _, ns, nt, table = gl.glue_morphism(obj, obj, SADDLE, IDENTITY)
            for (s, t), v in table.items():
                new.toggle(ids[g << 3 | s], ids[g << 3 | 4 | t], v)
        del ids
        before = len(new.gens)
        new.eliminate(list(new.iso_entries()))
        cx = new
        boundary = frozenset(gl.new_boundary)
        alg.clear_caches()
        if stats is not None:
            stats.order.append(xi)
            stats.sizes.append((before, len(cx.gens)))
            stats.girth.append(len(boundary))
        if progress is not None:
            progress(step + 1, d.n, before, len(cx.gens), len(boundary))
        log.debug("crossing %d/%d: %d -> %d generators, boundary %d",
                  step + 1, d.n, before, len(cx.gens), len(boundary))
    if stats is not None:
        stats.seconds = time.time() - t0
    return _finish(d, cx, len(d.loops))


def _finish(d: PlanarDiagram, cx: TangleComplex, extra_loops: int) -> BigradedComplex:
    hs, qs = -d.n_minus, d.n_plus - 2 * d.n_minus
    index = {}
    out = BigradedComplex([])
    for g in sorted(cx.gens):
        _, h, q = cx.gens[g]
        for lab in range(1 << extra_loops):
            xs = bin(lab).count("1")
            index[(g, lab)] = out.add_generator(h + hs, q + qs + (extra_loops - xs) - xs)
    for g in sorted(cx.gens):
        for y, m in cx.out[g].items():
            if m != IDENTITY:
                raise AssertionError("closed-up morphism should be a power of H")
            for lab in range(1 << extra_loops):
                s, t = index[(g, lab)], index[(y, lab)]
                qd = out.grades[t][1] - out.grades[s][1]
                out.diff.setdefault(s, {})[t] = 1 << (qd // 2)
    return out


def _loops_only(d: PlanarDiagram) -> BigradedComplex:
    """Crossingless diagrams: the basepoint circle plus delooped free circles."""
    k = len(d.loops) - 1
    out = BigradedComplex([])
    for lab in range(1 << k):
        xs = bin(lab).count("1")
        out.add_generator(0, (k - xs) - xs)
    return out
