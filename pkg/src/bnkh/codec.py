"""Knot diagram encodings: DT codes, PD codes and signed Gauss codes.

A :class:`PlanarDiagram` stores crossings as ``(a, b, c, d, sign)`` where the
four edge labels are listed counterclockwise starting from the incoming
under-strand.  The under-strand runs ``a -> c``; the over-strand runs
``d -> b`` at a positive crossing and ``b -> d`` at a negative one.  This is
the KnotTheory PD convention with the sign made explicit, so edge labels
are free to be any integers.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx

from .errors import (
    DuplicateLabel,
    InvalidDiagram,
    MultiComponent,
    NonRealizable,
    OddLabel,
)

Crossing = tuple  # (a, b, c, d, sign)

# The signed DT convention: a negative even entry means the strand passing the
# even label goes over.  The planar embedding is fixed (out of its two
# reflections) by requiring the second strand through the crossing of label 1
# to pass from right to left.  Together these reproduce the published tables.
ODD_OVER_WHEN_NEGATIVE = False
FIRST_CROSSING_RIGHT_TO_LEFT = True


# ----------------------------------------------------------------------------
# DT codes


@dataclass(frozen=True)
class DTCode:
    entries: tuple[int, ...]

    @property
    def crossing_number(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def _validate_entries(entries: Sequence[int]) -> None:
    seen = set()
    for e in entries:
        if e == 0 or e % 2:
            raise OddLabel(f"DT entry {e} is not a nonzero even integer")
        if abs(e) in seen:
            raise DuplicateLabel(f"DT label {abs(e)} occurs twice")
        seen.add(abs(e))
    n = len(entries)
    if seen != set(range(2, 2 * n + 1, 2)):
        missing = sorted(set(range(2, 2 * n + 1, 2)) - seen)
        raise NonRealizable(f"DT labels must be 2..{2 * n}; missing {missing}")


def parse_dt(text: str) -> DTCode:
    """Parse a DT code written with spaces, commas or line breaks.

    Both layouts used in print (``-28 -84 14 ...`` and ``-8,58,-128,...``)
    are accepted.  The code is checked for realizability.
    """
    body = text.strip()
    if body.upper().startswith("DT"):
        body = body.split(":", 1)[-1] if ":" in body else body[2:]
    body = body.strip().strip("[](){}")
    tokens = [t for t in re.split(r"[\s,;()\[\]]+", body) if t]
    try:
        entries = tuple(int(t) for t in tokens)
    except ValueError as exc:
        raise OddLabel(f"non-integer token in DT code: {exc}") from None
    _validate_entries(entries)
    code = DTCode(entries)
    if entries:
        _embed(code)
    return code


def render_dt(code: DTCode, sep: str = " ") -> str:
    return sep.join(str(e) for e in code.entries)


def _embed(code: DTCode) -> dict[int, tuple[int, ...]]:
    """Return, per crossing, the counterclockwise order of its four slots.

    Slots: 0 = odd visit incoming, 1 = even visit incoming, 2 = odd visit
    outgoing, 3 = even visit outgoing.  Each crossing is blown up into a wheel
    so that any planar embedding forces the two passes to cross transversally.
    """
    n = len(code.entries)
    cross_of = {}
    for i, e in enumerate(code.entries):
        cross_of[2 * i + 1] = i
        cross_of[abs(e)] = i
    g = nx.Graph()
    for i in range(n):
        for s in range(4):
            g.add_edge(("h", i), ("c", i, s))
            g.add_edge(("c", i, s), ("c", i, (s + 1) % 4))
    for k in range(1, 2 * n + 1):
        nxt = k % (2 * n) + 1
        tail = ("c", cross_of[k], 2 if k % 2 else 3)
        head = ("c", cross_of[nxt], 0 if nxt % 2 else 1)
        g.add_edge(tail, ("e", k))
        g.add_edge(("e", k), head)
    planar, emb = nx.check_planarity(g)
    if not planar:
        raise NonRealizable("DT code does not describe a planar diagram")
    orders = {}
    for i in range(n):
        cw = [v[2] for v in emb.neighbors_cw_order(("h", i))]
        ccw = cw[::-1]
        j = ccw.index(0)
        orders[i] = tuple(ccw[j:] + ccw[:j])
    if (orders[0][1] == 1) != FIRST_CROSSING_RIGHT_TO_LEFT:
        orders = {i: (o[0], o[3], o[2], o[1]) for i, o in orders.items()}
    return orders


def dt_to_diagram(code: DTCode, basepoint: int | None = None) -> "PlanarDiagram":
    """Reconstruct an oriented planar diagram from a signed DT code.

    Edge ``k`` runs from the ``k``-th to the ``(k+1)``-th crossing visit.
    """
    n = len(code.entries)
    if n == 0:
        return PlanarDiagram((), basepoint=1 if basepoint is None else basepoint, loops=(1,))
    orders = _embed(code)
    crossings = []
    for i, e in enumerate(code.entries):
        o, ev = 2 * i + 1, abs(e)
        slot_edge = {
            0: 2 * n if o == 1 else o - 1,
            1: ev - 1,
            2: o,
            3: ev,
        }
        odd_over = (e < 0) == ODD_OVER_WHEN_NEGATIVE
        under_in = 1 if odd_over else 0
        ccw = orders[i]
        j = ccw.index(under_in)
        seq = ccw[j:] + ccw[:j]
        # over-strand incoming slot is whichever of {0,1} is not the under one
        over_in = 1 - under_in
        sign = 1 if seq[3] == over_in else -1
        crossings.append(tuple(slot_edge[s] for s in seq) + (sign,))
    d = PlanarDiagram(tuple(crossings))
    if basepoint is not None:
        d = d.with_basepoint(basepoint)
    return d


# ----------------------------------------------------------------------------
# Planar diagrams


def _in_out(sign: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """Incoming and outgoing slots at a crossing of the given sign."""
    if sign > 0:
        return (0, 3), (2, 1)
    return (0, 1), (2, 3)


@dataclass(frozen=True)
class PlanarDiagram:
    crossings: tuple[Crossing, ...]
    basepoint: int | None = None
    loops: tuple[int, ...] = ()
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "crossings", tuple(tuple(c) for c in self.crossings))
        object.__setattr__(self, "loops", tuple(self.loops))
        if self.basepoint is None:
            if self.crossings:
                object.__setattr__(self, "basepoint", self.crossings[0][0])
            elif self.loops:
                object.__setattr__(self, "basepoint", self.loops[0])

    # -- basic counts ---------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.crossings)

    @property
    def n_plus(self) -> int:
        return sum(1 for c in self.crossings if c[4] > 0)

    @property
    def n_minus(self) -> int:
        return sum(1 for c in self.crossings if c[4] < 0)

    @property
    def writhe(self) -> int:
        return self.n_plus - self.n_minus

    def edges(self) -> list[int]:
        seen = []
        s = set()
        for c in self.crossings:
            for e in c[:4]:
                if e not in s:
                    s.add(e)
                    seen.append(e)
        for e in self.loops:
            if e not in s:
                s.add(e)
                seen.append(e)
        return seen

    def edge_ends(self) -> dict[int, list[tuple[int, int]]]:
        if "ends" not in self._cache:
            ends: dict[int, list[tuple[int, int]]] = {}
            for x, c in enumerate(self.crossings):
                for s in range(4):
                    ends.setdefault(c[s], []).append((x, s))
            self._cache["ends"] = ends
        return self._cache["ends"]

    def head(self, e: int) -> tuple[int, int]:
        """Crossing slot where edge ``e`` ends (enters a crossing)."""
        for x, s in self.edge_ends()[e]:
            if s in _in_out(self.crossings[x][4])[0]:
                return x, s
        raise InvalidDiagram(f"edge {e} has no incoming end")

    def tail(self, e: int) -> tuple[int, int]:
        for x, s in self.edge_ends()[e]:
            if s in _in_out(self.crossings[x][4])[1]:
                return x, s
        raise InvalidDiagram(f"edge {e} has no outgoing end")

    def next_edge(self, e: int) -> int:
        x, s = self.head(e)
        return self.crossings[x][(s + 2) % 4]

    def components(self) -> list[list[int]]:
        """Edges of each component in traversal order."""
        if "components" in self._cache:
            return self._cache["components"]
        comps = []
        seen = set()
        for e in self.edges():
            if e in seen:
                continue
            if e in self.loops:
                comps.append([e])
                seen.add(e)
                continue
            comp = []
            f = e
            while f not in seen:
                seen.add(f)
                comp.append(f)
                f = self.next_edge(f)
            comps.append(comp)
        self._cache["components"] = comps
        return comps

    def component_of(self, e: int) -> int:
        for i, comp in enumerate(self.components()):
            if e in comp:
                return i
        raise InvalidDiagram(f"unknown edge {e}")

    def is_knot(self) -> bool:
        return len(self.components()) == 1

    # -- validation -----------------------------------------------------
    def validate(self) -> "PlanarDiagram":
        counts: dict[int, int] = {}
        for c in self.crossings:
            if len(c) != 5 or c[4] not in (1, -1):
                raise InvalidDiagram(f"malformed crossing {c}")
            for e in c[:4]:
                counts[e] = counts.get(e, 0) + 1
        bad = [e for e, k in counts.items() if k != 2]
        if bad:
            raise InvalidDiagram(f"edges {bad} do not appear exactly twice")
        for e in self.loops:
            if e in counts:
                raise InvalidDiagram(f"loop label {e} is also a crossing edge")
        for e in counts:
            heads = tails = 0
            for x, s in self.edge_ends()[e]:
                ins, outs = _in_out(self.crossings[x][4])
                heads += s in ins
                tails += s in outs
            if heads != 1 or tails != 1:
                raise InvalidDiagram(f"edge {e} is not consistently oriented")
        if self.basepoint is None or (self.basepoint not in counts and self.basepoint not in self.loops):
            raise InvalidDiagram("basepoint must be an edge of the diagram")
        return self

    # -- transformations ------------------------------------------------
    def with_basepoint(self, e: int) -> "PlanarDiagram":
        d = PlanarDiagram(self.crossings, basepoint=e, loops=self.loops)
        if e not in d.edges():
            raise InvalidDiagram(f"basepoint {e} is not an edge")
        return d

    def relabel(self, mapping) -> "PlanarDiagram":
        f = mapping.__getitem__ if hasattr(mapping, "__getitem__") else mapping
        xs = tuple(tuple(f(e) for e in c[:4]) + (c[4],) for c in self.crossings)
        return PlanarDiagram(
            xs,
            basepoint=None if self.basepoint is None else f(self.basepoint),
            loops=tuple(f(e) for e in self.loops),
        )

    def normalized(self) -> "PlanarDiagram":
        """Relabel edges 1..2n in traversal order starting at the basepoint."""
        order = []
        comps = self.components()
        bp_comp = self.component_of(self.basepoint) if self.basepoint is not None else 0
        comps = [comps[bp_comp]] + comps[:bp_comp] + comps[bp_comp + 1:]
        for comp in comps:
            if self.basepoint in comp:
                i = comp.index(self.basepoint)
                comp = comp[i:] + comp[:i]
            order.extend(comp)
        mapping = {e: i + 1 for i, e in enumerate(order)}
        return self.relabel(mapping)

    # -- faces ----------------------------------------------------------
    def faces(self) -> list[list[tuple[int, int]]]:
        """Faces as cyclic lists of darts ``(crossing, slot)`` left of travel.

        A dart ``(x, s)`` means: leave crossing ``x`` along slot ``s``.
        """
        if "faces" in self._cache:
            return self._cache["faces"]
        ends = self.edge_ends()

        def other_end(x, s):
            e = self.crossings[x][s]
            pair = ends[e]
            if pair[0] == (x, s):
                return pair[1]
            return pair[0]

        seen = set()
        faces = []
        for x in range(self.n):
            for s in range(4):
                if (x, s) in seen:
                    continue
                face = []
                cur = (x, s)
                while cur not in seen:
                    seen.add(cur)
                    face.append(cur)
                    y, t = other_end(*cur)
                    # arriving at slot t, the face on our left continues
                    # along the slot clockwise-adjacent to t
                    cur = (y, (t - 1) % 4)
                faces.append(face)
        self._cache["faces"] = faces
        return faces

    # -- serialization --------------------------------------------------
    def to_json(self) -> dict:
        out = {
            "crossings": [list(c[:4]) + ["+" if c[4] > 0 else "-"] for c in self.crossings],
            "basepoint": self.basepoint,
        }
        if self.loops:
            out["loops"] = list(self.loops)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "PlanarDiagram":
        rows = data.get("crossings", [])
        crossings = []
        unsigned = []
        for row in rows:
            if len(row) == 5:
                sign = row[4]
                if isinstance(sign, str):
                    sign = 1 if sign.strip() == "+" else -1
                crossings.append(tuple(int(e) for e in row[:4]) + (int(sign),))
            elif len(row) == 4:
                unsigned.append(tuple(int(e) for e in row))
            else:
                raise InvalidDiagram(f"crossing {row} must have 4 edges and a sign")
        if unsigned:
            if crossings:
                raise InvalidDiagram("mix of signed and unsigned crossings")
            return from_pd(unsigned, basepoint=data.get("basepoint"), loops=data.get("loops", ()))
        d = cls(tuple(crossings), basepoint=data.get("basepoint"), loops=tuple(data.get("loops", ())))
        return d.validate()

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def from_pd(rows: Iterable[Sequence[int]], basepoint=None, loops=()) -> PlanarDiagram:
    """Build a diagram from unsigned KnotTheory-style PD tuples.

    Over-strand directions are propagated along components from the
    under-passes; a component with no under-pass falls back on the
    consecutive-label rule.
    """
    rows = [tuple(r) for r in rows]
    ends: dict[int, list[tuple[int, int]]] = {}
    for x, r in enumerate(rows):
        for s, e in enumerate(r):
            ends.setdefault(e, []).append((x, s))
    for e, lst in ends.items():
        if len(lst) != 2:
            raise InvalidDiagram(f"edge {e} does not appear exactly twice")
    over_in: dict[int, int] = {}  # crossing -> incoming over slot (1 or 3)
    # edge direction: head slot known for under slots
    head: dict[int, tuple[int, int]] = {}
    for x, r in enumerate(rows):
        head[r[0]] = (x, 0)

    def other(e, xs):
        a, b = ends[e]
        return b if a == xs else a

    changed = True
    while changed:
        changed = False
        for x, r in enumerate(rows):
            # under strand a->c: c leaves x at slot 2, so c's head is its other end
            e = r[2]
            h = other(e, (x, 2))
            if head.get(e) != h and e not in head:
                head[e] = h
                changed = True
        for e, (x, s) in list(head.items()):
            if s in (1, 3) and x not in over_in:
                over_in[x] = s
                out_slot = 4 - s
                f = rows[x][out_slot]
                head[f] = other(f, (x, out_slot))
                changed = True
    for x, r in enumerate(rows):
        if x not in over_in:
            b, d = r[1], r[3]
            over_in[x] = 3 if (b - d == 1 or d - b > 1) else 1
    crossings = tuple(r + ((1 if over_in[x] == 3 else -1),) for x, r in enumerate(rows))
    return PlanarDiagram(crossings, basepoint=basepoint, loops=tuple(loops)).validate()


def load_diagram(path: str, basepoint: int | None = None) -> PlanarDiagram:
    """Read a DT text file or a JSON PD file."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.strip()
    if stripped.startswith("{"):
        d = PlanarDiagram.from_json(json.loads(stripped))
    else:
        d = dt_to_diagram(parse_dt(stripped))
    if basepoint is not None:
        d = d.with_basepoint(basepoint)
    return d


# ----------------------------------------------------------------------------
# Operations


def mirror(d: PlanarDiagram) -> PlanarDiagram:
    """Reflect through the projection plane: swap over and under everywhere."""
    xs = []
    for a, b, c, dd, sign in d.crossings:
        if sign > 0:
            xs.append((dd, a, b, c, -1))
        else:
            xs.append((b, c, dd, a, 1))
    return PlanarDiagram(tuple(xs), basepoint=d.basepoint, loops=d.loops)


def reverse(d: PlanarDiagram) -> PlanarDiagram:
    """Reverse the orientation of every component."""
    xs = []
    for a, b, c, dd, sign in d.crossings:
        # the under-strand now enters at c; counterclockwise from c
        xs.append((c, dd, a, b, sign))
    return PlanarDiagram(tuple(xs), basepoint=d.basepoint, loops=d.loops)


def connected_sum(d1: PlanarDiagram, d2: PlanarDiagram) -> PlanarDiagram:
    """Band-sum two knot diagrams; the basepoint of ``d1`` is kept."""
    if not d1.is_knot() or not d2.is_knot():
        raise MultiComponent("connected sum needs two knot diagrams")
    if d2.n == 0:
        return d1
    if d1.n == 0:
        return d2.with_basepoint(d2.basepoint)
    offset = max(d1.edges()) + 1 - min(d2.edges())
    d2 = d2.relabel(lambda e: e + offset)
    # cut d1 away from its basepoint edge
    e1 = next(e for e in d1.components()[0] if e != d1.basepoint) if d1.n > 0 else d1.basepoint
    e2 = d2.basepoint
    new2 = max(d2.edges()) + 1
    # e1 runs A->B, e2 runs C->D; reconnect as A->D (label e1) and C->B (label new2)
    xb, sb = d1.head(e1)
    xs1 = [list(c) for c in d1.crossings]
    xs1[xb][sb] = new2
    xd, sd = d2.head(e2)
    xs2 = [list(c) for c in d2.crossings]
    xs2[xd][sd] = e1
    # the tail end of e2 at C keeps label e2 -> rename to new2 so C->B is one edge
    xc, sc = d2.tail(e2)
    xs2[xc][sc] = new2
    crossings = tuple(tuple(c) for c in xs1 + xs2)
    return PlanarDiagram(crossings, basepoint=d1.basepoint).validate()


def diagram_to_dt(d: PlanarDiagram) -> DTCode:
    """Signed DT code of a knot diagram, read from its basepoint.

    The sign pattern is chosen so that decoding returns the same chirality.
    """
    if not d.is_knot():
        raise MultiComponent("DT codes describe knots")
    if d.n == 0:
        return DTCode(())
    comp = d.components()[0]
    i = comp.index(d.basepoint)
    comp = comp[i:] + comp[:i]
    visits: dict[int, list[tuple[int, bool]]] = {}
    for k, e in enumerate(comp, start=1):
        x, s = d.head(e)
        visits.setdefault(x, []).append((k + 0, s == 0))
    # label the visit *at* the head of edge comp[k-1] as k+1 (mod 2n), so the
    # first edge starts at the visit labelled 1
    n2 = 2 * d.n
    pairs = {}
    for x, vs in visits.items():
        (k1, under1), (k2, under2) = vs
        l1, l2 = k1 % n2 + 1, k2 % n2 + 1
        if l1 % 2 == l2 % 2:
            raise NonRealizable("diagram has a non-alternating parity pattern")
        odd, even = (l1, l2) if l1 % 2 else (l2, l1)
        odd_under = under1 if l1 % 2 else under2
        odd_over = not odd_under
        sign = -1 if odd_over == ODD_OVER_WHEN_NEGATIVE else 1
        pairs[odd] = sign * even
    code = DTCode(tuple(pairs[o] for o in range(1, n2, 2)))
    back = dt_to_diagram(code)
    if (back.n_plus, back.n_minus) != (d.n_plus, d.n_minus):
        code = DTCode(tuple(-e for e in code.entries))
    return code


def gauss_code(d: PlanarDiagram) -> list[list[int]]:
    """Signed Gauss code per component: +x over, -x under (crossings 1-based)."""
    out = []
    for comp in d.components():
        seq = []
        for e in comp:
            if e in d.loops:
                continue
            x, s = d.head(e)
            seq.append(-(x + 1) if s == 0 else (x + 1))
        out.append(seq)
    return out
