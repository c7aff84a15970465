"""Reduced Bar-Natan cube of resolutions over F2[H].

At a crossing ``(a, b, c, d, sign)`` the 0-smoothing joins ``a-b`` and
``c-d``; the 1-smoothing joins ``a-d`` and ``b-c``.  The reduced complex is
the subcomplex spanned by states whose basepoint circle carries ``X``.

Gradings: ``h = w - n_minus`` and
``q = #1 - #X + w + n_plus - 2 n_minus + 1`` where ``w`` is the number of
1-smoothings; the final ``+1`` puts the reduced unknot at ``(0, 0)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .codec import PlanarDiagram
from .errors import CapacityExceeded, UnknownResolution
from .tqft import UNIT_LABEL, X_LABEL, BigradedComplex

DEFAULT_MAX_GENERATORS = 2_000_000


class _DSU:
    def __init__(self, items):
        self.p = {x: x for x in items}

    def find(self, x):
        p = self.p
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.p[ra] = rb


def smoothing_pairs(crossing, bit: int) -> tuple[tuple[int, int], tuple[int, int]]:
    a, b, c, d = crossing[:4]
    if bit == 0:
        return (a, b), (c, d)
    return (a, d), (b, c)


def resolve(d: PlanarDiagram, vertex: tuple[int, ...]) -> list[tuple[int, ...]]:
    """Circles of a complete resolution, each a sorted tuple of edges.

    Circles are ordered by their smallest edge label.
    """
    edges = d.edges()
    dsu = _DSU(edges)
    for x, bit in zip(d.crossings, vertex):
        for u, v in smoothing_pairs(x, bit):
            dsu.union(u, v)
    groups: dict = {}
    for e in edges:
        groups.setdefault(dsu.find(e), []).append(e)
    return sorted((tuple(sorted(g)) for g in groups.values()), key=lambda g: g[0])


@dataclass(frozen=True)
class Resolution:
    vertex: tuple[int, ...]
    circles: tuple[tuple[int, ...], ...]
    basepoint_circle: int

    @property
    def weight(self) -> int:
        return sum(self.vertex)


@dataclass(frozen=True)
class LabeledState:
    """A vertex of the cube with a label (0 for 1, 1 for X) on each circle.

    ``labels`` is aligned with the circles of the resolution, ordered by
    smallest edge label.  Alternatively ``edge_labels`` maps any edge of a
    circle to its label.
    """

    vertex: tuple[int, ...]
    labels: tuple[int, ...] = ()
    edge_labels: dict = field(default=None, compare=False, hash=False)


@dataclass
class CubeComplex(BigradedComplex):
    diagram: PlanarDiagram | None = None
    resolutions: dict = field(default_factory=dict)
    index: dict = field(default_factory=dict)  # (vertex, labels) -> id


def state_grading(d: PlanarDiagram, vertex, labels) -> tuple[int, int]:
    w = sum(vertex)
    ones = sum(1 for x in labels if x == UNIT_LABEL)
    xs = len(labels) - ones
    h = w - d.n_minus
    q = ones - xs + w + d.n_plus - 2 * d.n_minus + 1
    return h, q


def build_reduced_complex(
    d: PlanarDiagram, max_generators: int = DEFAULT_MAX_GENERATORS
) -> CubeComplex:
    """Full cube of resolutions, restricted to the reduced subcomplex."""
    n = d.n
    if n > 40:
        raise CapacityExceeded(f"2^{n} vertices exceed the cube budget; use scan_reduce")
    cx = CubeComplex(labels=[], diagram=d)
    bp = d.basepoint
    res_of = {}
    total = 0
    for vertex in itertools.product((0, 1), repeat=n):
        circles = resolve(d, vertex)
        bpc = next(i for i, c in enumerate(circles) if bp in c)
        res_of[vertex] = Resolution(vertex, tuple(circles), bpc)
        total += 1 << (len(circles) - 1)
        if total > max_generators:
            raise CapacityExceeded(f"reduced cube exceeds {max_generators} generators")
    cx.resolutions = res_of
    for vertex, r in res_of.items():
        k = len(r.circles)
        for free in itertools.product((UNIT_LABEL, X_LABEL), repeat=k - 1):
            labels = free[: r.basepoint_circle] + (X_LABEL,) + free[r.basepoint_circle:]
            h, q = state_grading(d, vertex, labels)
            gid = cx.add_generator(h, q, (vertex, labels))
            cx.index[(vertex, labels)] = gid
    hval = 2  # packed H
    for vertex, r in res_of.items():
        for i in range(n):
            if vertex[i]:
                continue
            w = vertex[:i] + (1,) + vertex[i + 1:]
            r2 = res_of[w]
            _add_edge_maps(cx, r, r2, hval)
    return cx


def _circle_map(r, r2):
    """Match circles of two adjacent resolutions; returns (kind, data)."""
    edge_to_new = {}
    for j, c in enumerate(r2.circles):
        for e in c:
            edge_to_new[e] = j
    images = [edge_to_new[c[0]] for c in r.circles]
    # which old circles are split: an old circle whose edges land in 2 new ones
    for i, c in enumerate(r.circles):
        targets = {edge_to_new[e] for e in c}
        if len(targets) == 2:
            return "split", (i, images, tuple(sorted(targets)))
    # otherwise two old circles merge into one new circle
    seen = {}
    for i, j in enumerate(images):
        if j in seen:
            return "merge", (seen[j], i, images)
        seen[j] = i
    raise AssertionError("adjacent resolutions differ by neither merge nor split")


def _add_edge_maps(cx: CubeComplex, r: Resolution, r2: Resolution, hval: int) -> None:
    kind, data = _circle_map(r, r2)
    bp2 = r2.basepoint_circle
    k2 = len(r2.circles)
    for (vertex, labels), gid in _states_of(cx, r):
        out = {}
        if kind == "merge":
            i1, i2, images = data
            a, b = labels[i1], labels[i2]
            new = [None] * k2
            for i, j in enumerate(images):
                if i not in (i1, i2):
                    new[j] = labels[i]
            j = images[i1]
            if a == UNIT_LABEL:
                new[j] = b
                out[tuple(new)] = 1
            elif b == UNIT_LABEL:
                new[j] = a
                out[tuple(new)] = 1
            else:
                new[j] = X_LABEL
                out[tuple(new)] = hval
        else:
            i0, images, (j1, j2) = data
            base = [None] * k2
            for i, j in enumerate(images):
                if i != i0:
                    base[j] = labels[i]
            if labels[i0] == X_LABEL:
                terms = [((X_LABEL, X_LABEL), 1)]
            else:
                terms = [((UNIT_LABEL, X_LABEL), 1), ((X_LABEL, UNIT_LABEL), 1),
                         ((UNIT_LABEL, UNIT_LABEL), hval)]
            for (l1, l2), c in terms:
                new = list(base)
                new[j1], new[j2] = l1, l2
                out[tuple(new)] = c
        for new_labels, c in out.items():
            if new_labels[bp2] != X_LABEL:
                continue
            tgt = cx.index[(r2.vertex, new_labels)]
            cx.add_entry(gid, tgt, c)


def _states_of(cx: CubeComplex, r: Resolution):
    k = len(r.circles)
    for free in itertools.product((UNIT_LABEL, X_LABEL), repeat=k - 1):
        labels = free[: r.basepoint_circle] + (X_LABEL,) + free[r.basepoint_circle:]
        yield (r.vertex, labels), cx.index[(r.vertex, labels)]


@dataclass
class Chain:
    vector: dict  # generator id -> packed coefficient
    h: int
    q: int
    is_cycle: bool


def state_to_chain(cx: CubeComplex, s: LabeledState) -> Chain:
    """Generator vector of a labelled state, with its cycle flag."""
    vertex = tuple(s.vertex)
    r = cx.resolutions.get(vertex)
    if r is None:
        raise UnknownResolution(f"vertex {vertex} is not in the cube")
    if s.edge_labels is not None:
        labels = []
        for c in r.circles:
            vals = {s.edge_labels[e] for e in c if e in s.edge_labels}
            if len(vals) != 1:
                raise UnknownResolution(f"circle {c} needs exactly one label")
            labels.append(vals.pop())
        labels = tuple(labels)
    else:
        labels = tuple(s.labels)
    gid = cx.index.get((vertex, labels))
    if gid is None:
        raise UnknownResolution(f"labels {labels} do not give a reduced state at {vertex}")
    vec = {gid: 1}
    h, q = cx.grades[gid]
    return Chain(vec, h, q, not cx.apply(vec))
