"""Normal-form decomposition of reduced Bar-Natan complexes and what follows.

A knot's reduced complex over F2[H] is homotopy equivalent to a tower
``h^0 q^s F2[H]`` plus two-step pieces
``h^(a-1) q^(b-2m) F2[H] --H^m--> h^a q^b F2[H]``.  :func:`decompose` finds
them by graded elimination; the spectral-sequence pages, the H-survival
predicate and torsion orders are read off from the triples ``(a, b, m)``.
"""
from __future__ import annotations

import heapq
import json
from collections import Counter
from dataclasses import dataclass, field

from .errors import BadK, EmptyBigrading, NotACycle, NotAKnotComplex
from .tqft import BigradedComplex

INF = float("inf")


@dataclass(frozen=True)
class BNDecomposition:
    s: int
    torsion: tuple[tuple[int, int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "torsion", tuple(sorted(tuple(t) for t in self.torsion)))

    def to_json(self) -> dict:
        return {"s": self.s, "torsion": [list(t) for t in self.torsion]}

    @classmethod
    def from_json(cls, data: dict) -> "BNDecomposition":
        return cls(int(data["s"]), tuple(tuple(int(v) for v in t) for t in data.get("torsion", [])))

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    def max_order(self) -> int:
        return max((m for _, _, m in self.torsion), default=0)


@dataclass
class Coordinates:
    """A homology class written in the basis of a decomposition.

    ``tower`` says whether the tower generator appears; ``torsion`` lists,
    per triple index, whether the top generator of that summand appears.
    Coefficients are monomials whose exponent follows from the gradings.
    """

    h: int
    q: int
    tower: bool
    torsion: dict = field(default_factory=dict)  # triple index -> True

    def is_zero(self) -> bool:
        return not self.tower and not self.torsion


def _pivot_elimination(grades, support, tracked=None):
    """Core graded elimination shared by :func:`decompose` and its tracker.

    ``support`` maps source id to the set of target ids.  Returns the
    surviving generator ids, the list of torsion pivots ``(x, y, m)`` and the
    tracked chains rewritten in the final basis.
    """
    out = {s: set(t) for s, t in support.items() if t}
    inn: dict[int, set] = {}
    for s, ts in out.items():
        for t in ts:
            inn.setdefault(t, set()).add(s)
    alive = set(range(len(grades)))
    tracked = [set(c) for c in tracked] if tracked else []
    heap = []
    for s, ts in out.items():
        for t in ts:
            heap.append(((grades[t][1] - grades[s][1]) // 2, s, t))
    heapq.heapify(heap)
    pivots = []
    while heap:
        m, x, y = heapq.heappop(heap)
        if x not in alive or y not in alive or y not in out.get(x, ()):
            continue
        ox = out.get(x, set())
        # clear every other entry into y using the pivot column
        for x2 in sorted(inn.get(y, ()) - {x}):
            o2 = out.setdefault(x2, set())
            for z in ox:
                if z in o2:
                    o2.discard(z)
                    inn[z].discard(x2)
                else:
                    o2.add(z)
                    inn.setdefault(z, set()).add(x2)
                    heapq.heappush(heap, ((grades[z][1] - grades[x2][1]) // 2, x2, z))
            for ch in tracked:
                if x2 in ch:
                    ch ^= {x}
        for ch in tracked:
            if y in ch:
                for z in ox:
                    if z != y:
                        ch ^= {z}
        pivots.append((x, y, m))
        for g in (x, y):
            alive.discard(g)
            for z in out.pop(g, set()):
                inn[z].discard(g)
            for s in inn.pop(g, set()):
                out[s].discard(g)
    return alive, pivots, tracked


def decompose(c: BigradedComplex) -> BNDecomposition:
    """Graded Smith reduction over F2[H], minimal H-power pivots first."""
    dec, _ = decompose_tracked(c)
    return dec


def decompose_tracked(c: BigradedComplex, chains=()):
    """Decompose and express homogeneous cycles in the new basis.

    Each chain is an iterable of generator ids (or a ``{id: coefficient}``
    map) read as a homogeneous chain whose coefficients are the monomials
    forced by the gradings.  Returns the decomposition and one
    :class:`Coordinates` per chain.
    """
    for s, t, e in c.entries():
        if e & (e - 1):
            raise NotAKnotComplex(f"entry {s}->{t} is not a monomial")
    grades = c.grades
    chain_q = []
    lists = []
    for ch in chains:
        if isinstance(ch, dict):
            ids = [g for g, e in ch.items() if e]
            qs = {grades[g][1] - 2 * (ch[g].bit_length() - 1) for g in ids}
            if len(qs) > 1:
                raise NotACycle("chain is not homogeneous")
            chain_q.append(qs.pop() if qs else 0)
        else:
            ids = list(ch)
            chain_q.append(min((grades[g][1] for g in ids), default=0))
        lists.append(ids)
    chains = lists
    for ch in chains:
        if len({grades[g][0] for g in ch}) > 1:
            raise NotACycle("chain is not homogeneous")
    alive, pivots, tracked = _pivot_elimination(grades, c.homogeneous_support(), chains)
    if len(alive) != 1:
        raise NotAKnotComplex(f"free part has rank {len(alive)}, expected 1")
    tower = next(iter(alive))
    th, s = grades[tower]
    if th != 0:
        raise NotAKnotComplex(f"tower sits in homological degree {th}")
    triples = []
    tops = []
    for x, y, m in pivots:
        if m > 0:
            triples.append(grades[y] + (m,))
            tops.append(y)
    dec = BNDecomposition(s, tuple(triples))
    # dec.torsion is sorted; index summands accordingly
    order = sorted(range(len(triples)), key=lambda i: triples[i])
    rank_of = {tops[i]: k for k, i in enumerate(order)}
    sources = {x for x, _, _ in pivots}
    classes = []
    for orig, ch, q in zip(chains, tracked, chain_q):
        if ch & sources:
            raise NotACycle("chain is not a cycle")
        h = grades[orig[0]][0] if orig else 0
        classes.append(
            Coordinates(h=h, q=q, tower=tower in ch,
                        torsion={rank_of[g]: True for g in ch if g in rank_of})
        )
    return dec, classes


def s_invariant(dec: BNDecomposition) -> int:
    return dec.s


@dataclass(frozen=True)
class SSPage:
    r: int
    ranks: dict

    def total(self) -> int:
        return sum(self.ranks.values())

    def window(self, h_min: int = -4, q_min: int = -12) -> dict:
        return {k: v for k, v in self.ranks.items() if k[0] >= h_min and k[1] >= q_min}


def ss_page(dec: BNDecomposition, r: int) -> SSPage:
    """Page ``r`` of the H-filtration spectral sequence."""
    if r < 1:
        raise ValueError("pages start at r = 1")
    ranks: Counter = Counter()
    ranks[(0, dec.s)] += 1
    for a, b, m in dec.torsion:
        if m >= r:
            ranks[(a, b)] += 1
            ranks[(a - 1, b - 2 * m)] += 1
    return SSPage(r, dict(ranks))


def survives_H(dec: BNDecomposition, h: int, q: int) -> bool:
    """Whether every nonzero class in bigrading ``(h, q)`` has nonzero H-multiple."""
    present = (h, q) == (0, dec.s) or (h == 0 and q < dec.s and (dec.s - q) % 2 == 0)
    for a, b, m in dec.torsion:
        if a == h and b - 2 * (m - 1) <= q <= b and (b - q) % 2 == 0:
            present = True
    if not present:
        raise EmptyBigrading(f"homology vanishes in bigrading ({h}, {q})")
    return not any(a == h and b - 2 * (m - 1) == q for a, b, m in dec.torsion)


def homology_piece(dec: BNDecomposition, h: int, q: int) -> dict:
    """Summands meeting bigrading ``(h, q)``: ``{"free": n, "torsion": {m: count}}``.

    A free summand with generator at ``(0, s)`` contributes to every
    ``q <= s`` of the same parity; ``F2[H]/H^m`` with top in ``(a, b)``
    contributes to ``q`` in ``[b - 2(m-1), b]``.  The summands listed are
    those whose generator sits exactly at ``(h, q)``.
    """
    free = 1 if (h, q) == (0, dec.s) else 0
    tors: Counter = Counter()
    for a, b, m in dec.torsion:
        if (a, b) == (h, q):
            tors[m] += 1
    return {"free": free, "torsion": dict(tors)}


def spanned_submodule(dec: BNDecomposition, h: int, q: int) -> dict:
    """Isomorphism type of the F2[H]-submodule generated by bigrading ``(h, q)``.

    Every summand meeting ``(h, q)`` contributes: the tower a free module,
    ``F2[H]/H^m`` topped at ``(h, b)`` a cyclic module of order
    ``m - (b - q)/2``.  Returns ``{"free": n, "torsion": {order: count}}``.
    """
    free = 1 if h == 0 and q <= dec.s and (dec.s - q) % 2 == 0 else 0
    tors: Counter = Counter()
    for a, b, m in dec.torsion:
        if a == h and b - 2 * (m - 1) <= q <= b and (b - q) % 2 == 0:
            tors[m - (b - q) // 2] += 1
    return {"free": free, "torsion": dict(tors)}


def torus_knot_bn(k: int) -> BNDecomposition:
    """Closed form for the mirror of the (2, k) torus knot.

    The tower sits at ``q = 1 - k``; the torsion summands are
    ``F2[H]/H`` at ``(i, 2i + 1 - k)`` for even ``i`` from ``1 - k`` to
    ``-2``, giving the ``k`` generators of reduced Khovanov homology.
    """
    if not isinstance(k, int) or k < 1 or k % 2 == 0:
        raise BadK(f"k must be an odd positive integer, got {k}")
    torsion = tuple((i, -k + 2 * i + 1, 1) for i in range(-(k - 1), -1) if i % 2 == 0)
    return BNDecomposition(1 - k, torsion)


def normal_form_complex(dec: BNDecomposition) -> BigradedComplex:
    """The minimal complex realizing a decomposition."""
    c = BigradedComplex([(0, dec.s)])
    for a, b, m in dec.torsion:
        x = c.add_generator(a - 1, b - 2 * m)
        y = c.add_generator(a, b)
        c.diff[x] = {y: 1 << m}
    return c


def tensor_complexes(c1: BigradedComplex, c2: BigradedComplex) -> BigradedComplex:
    """Tensor product over F2[H] (no signs in characteristic 2)."""
    n2 = len(c2)
    out = BigradedComplex([])
    for (h1, q1) in c1.grades:
        for (h2, q2) in c2.grades:
            out.grades.append((h1 + h2, q1 + q2))
    for i in range(len(c1)):
        for j in range(n2):
            row = {}
            for t, e in c1.diff.get(i, {}).items():
                row[t * n2 + j] = row.get(t * n2 + j, 0) ^ e
            for t, e in c2.diff.get(j, {}).items():
                row[i * n2 + t] = row.get(i * n2 + t, 0) ^ e
            row = {k: v for k, v in row.items() if v}
            if row:
                out.diff[i * n2 + j] = row
    return out


def tensor_decompositions(d1: BNDecomposition, d2: BNDecomposition) -> BNDecomposition:
    """Decomposition of a connected sum from those of the summands."""
    return decompose(tensor_complexes(normal_form_complex(d1), normal_form_complex(d2)))


def torsion_order(dec: BNDecomposition, cls: Coordinates):
    """Least ``k`` with ``H^k`` killing the class; ``inf`` on a tower component."""
    from .errors import BasisMismatch

    if cls.tower:
        return INF
    best = 0
    for i in cls.torsion:
        if i >= len(dec.torsion):
            raise BasisMismatch(f"summand {i} is not part of the decomposition")
        a, b, m = dec.torsion[i]
        if a != cls.h:
            raise BasisMismatch("class and summand live in different homological degrees")
        e = (b - cls.q) // 2
        best = max(best, m - e)
    return best


def render_table(page: SSPage, h_min: int = -4, q_min: int = -12, tower=None,
                 h_max: int | None = None, q_max: int | None = None) -> str:
    """Rows ``q`` descending, columns ``h`` ascending; the tower cell is starred."""
    ranks = page.window(h_min, q_min)
    if not ranks:
        return "(empty)"
    hs = range(h_min, (h_max if h_max is not None else max(h for h, _ in ranks)) + 1)
    q_hi = q_max if q_max is not None else max(q for _, q in ranks)
    qs = [q for q in range(q_hi, q_min - 1, -1) if q % 2 == q_hi % 2]
    width = max(4, max(len(str(v)) for v in ranks.values()) + 2)
    lines = ["q\\h".rjust(5) + "".join(str(h).rjust(width) for h in hs)]
    for q in qs:
        cells = []
        for h in hs:
            v = ranks.get((h, q), 0)
            cell = "" if v == 0 else str(v)
            if tower is not None and (h, q) == tower and v:
                cell += "*"
            cells.append(cell.rjust(width))
        lines.append(str(q).rjust(5) + "".join(cells))
    return "\n".join(lines)


def khovanov_ranks(c: BigradedComplex) -> dict:
    """F2 ranks of the ``H = 0`` specialization, per bigrading."""
    from .linalg import rank_f2

    k = c.specialize(0)
    by_deg: dict = {}
    for i, g in enumerate(k.grades):
        by_deg.setdefault(g, []).append(i)
    ranks = {}
    for (h, q), gens in by_deg.items():
        tgt = by_deg.get((h + 1, q), [])
        pos = {g: j for j, g in enumerate(tgt)}
        rows = []
        for g in gens:
            v = 0
            for t in k.diff.get(g, {}):
                if t in pos:
                    v |= 1 << pos[t]
            rows.append(v)
        ranks[(h, q)] = rank_f2(rows)
    out = {}
    for (h, q), gens in by_deg.items():
        r_out = ranks[(h, q)]
        r_in = ranks.get((h - 1, q), 0)
        dim = len(gens) - r_out - r_in
        if dim:
            out[(h, q)] = dim
    return out
