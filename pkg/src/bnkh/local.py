"""Local tangle rewrites and the chain maps they induce.

A Reidemeister move replaces the part of a diagram inside a small disk.  The
disk meets the diagram in boundary points (ports).  Every edge is cut at the
ports into segments, which are either outer (shared by both diagrams) or
inner.  :func:`rewrite` builds the new diagram from a description of the new
inner tangle, and :func:`local_equivalence` finds the chain map between the
two inner tangle complexes by solving the chain-map equations over F2 in the
dotted cobordism category.  :func:`glue_map` tensors it with the identity
outside the disk and evaluates it on the full reduced cube complexes.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .codec import PlanarDiagram, _in_out
from .cube import CubeComplex
from .errors import BasepointViolation, IllegalMove
from .linalg import SpanF2, nullspace_f2
from .tangles import SMOOTHINGS, UnionFind, iter_bits
from .tqft import UNIT_LABEL, X_LABEL, ring_mul_bits

HBITS = 2  # the packed polynomial H


# ----------------------------------------------------------------------------
# Segment-level view of one side of a move


@dataclass
class SideView:
    """A diagram with its edges cut into segments at the ports.

    ``chains[e]`` alternates segment names and port ids along the
    orientation of edge ``e``; ``cyclic`` lists edges that are free loops.
    Segment names starting with ``"o"`` are outer, all others inner.
    """

    diagram: PlanarDiagram
    local: tuple  # crossing indices inside the disk, in local order
    chains: dict
    cyclic: set = field(default_factory=set)

    def __post_init__(self):
        self.seg_ends: dict = {}  # seg -> [start, end]; port id or ("slot", x, s)
        self.port_segs: dict = {}  # port -> (seg before, seg after)
        d = self.diagram
        for e, chain in self.chains.items():
            n = len(chain)
            for i, tok in enumerate(chain):
                if isinstance(tok, int):
                    if e in self.cyclic:
                        prev, nxt = chain[(i - 1) % n], chain[(i + 1) % n]
                    else:
                        prev, nxt = chain[i - 1], chain[i + 1]
                    self.port_segs[tok] = (prev, nxt)
                    continue
                if e in self.cyclic:
                    start, end = chain[(i - 1) % n], chain[(i + 1) % n]
                else:
                    start = chain[i - 1] if i > 0 else ("slot",) + d.tail(e)
                    end = chain[i + 1] if i < n - 1 else ("slot",) + d.head(e)
                self.seg_ends[tok] = (start, end)
        self.local_set = set(self.local)

    def slot_seg(self, x: int, s: int):
        e = self.diagram.crossings[x][s]
        ins, _ = _in_out(self.diagram.crossings[x][4])
        chain = self.chains[e]
        return chain[-1] if s in ins else chain[0]

    @staticmethod
    def is_outer(seg) -> bool:
        return seg[0] == "o"

    def segment_circles(self, vertex):
        """Union-find over segments for a full resolution; seg -> root."""
        segs = list(self.seg_ends)
        idx = {s: i for i, s in enumerate(segs)}
        uf = UnionFind(len(segs))
        for x, bit in enumerate(vertex):
            for i, j in SMOOTHINGS[bit]:
                uf.union(idx[self.slot_seg(x, i)], idx[self.slot_seg(x, j)])
        for p, (a, b) in self.port_segs.items():
            uf.union(idx[a], idx[b])
        return {s: uf.find(idx[s]) for s in segs}

    def local_tangle(self) -> "LocalTangle":
        crossings = []
        for x in self.local:
            pts = []
            for s in range(4):
                seg = self.slot_seg(x, s)
                a, b = self.seg_ends[seg]
                other = b if self._is_slot_end(a, x, s, seg) else a
                if isinstance(other, int):
                    pts.append(other)
                else:
                    pts.append(seg)
            crossings.append(tuple(pts) + (self.diagram.crossings[x][4],))
        free = []
        for seg, (a, b) in self.seg_ends.items():
            if not self.is_outer(seg) and isinstance(a, int) and isinstance(b, int):
                free.append((a, b, seg))
        return LocalTangle(tuple(crossings), tuple(sorted(free, key=repr)))

    def _is_slot_end(self, end, x, s, seg) -> bool:
        return isinstance(end, tuple) and end[0] == "slot" and end[1] == x and end[2] == s


# ----------------------------------------------------------------------------
# Local tangles and their cobordism category


@dataclass(frozen=True)
class LocalTangle:
    crossings: tuple  # (p0, p1, p2, p3, sign); ints are ports, others internal
    free_arcs: tuple  # (port, port, seg)

    @property
    def n(self) -> int:
        return len(self.crossings)

    @property
    def n_plus(self) -> int:
        return sum(1 for c in self.crossings if c[4] > 0)

    @property
    def n_minus(self) -> int:
        return sum(1 for c in self.crossings if c[4] < 0)

    def ports(self) -> list:
        out = set()
        for c in self.crossings:
            out.update(p for p in c[:4] if isinstance(p, int))
        for a, b, _ in self.free_arcs:
            out.update((a, b))
        return sorted(out)

    def state(self, v) -> "LocalObject":
        """Matching of the ports and the closed loops of a resolution."""
        nodes: dict = {}

        def node(p):
            k = nodes.get(p)
            if k is None:
                k = nodes[p] = len(nodes)
            return k

        arcs = []
        for j, (c, bit) in enumerate(zip(self.crossings, v)):
            for k, (i1, i2) in enumerate(SMOOTHINGS[bit]):
                arcs.append(((j, k), c[i1], c[i2]))
        for k, (a, b, _) in enumerate(self.free_arcs):
            arcs.append((("f", k), a, b))
        for _, p, q in arcs:
            node(p)
            node(q)
        uf = UnionFind(len(nodes))
        for _, p, q in arcs:
            uf.union(nodes[p], nodes[q])
        groups: dict = {}
        for p, k in nodes.items():
            groups.setdefault(uf.find(k), []).append(p)
        pairs = []
        loops = []
        for r, pts in groups.items():
            ports = [p for p in pts if isinstance(p, int)]
            if ports:
                if len(ports) != 2:
                    raise IllegalMove("local tangle has a dangling strand")
                pairs.append(tuple(sorted(ports)))
            else:
                loop_arcs = tuple(sorted(a for a, p, q in arcs if uf.find(nodes[p]) == r))
                loops.append((frozenset(pts), loop_arcs))
        loops.sort(key=lambda t: t[1])
        return LocalObject(tuple(sorted(pairs)), tuple(loops))


@dataclass(frozen=True)
class LocalObject:
    pairs: tuple
    loops: tuple  # (internal points, arcs)

    def partner(self) -> dict:
        out = {}
        for p, q in self.pairs:
            out[p] = q
            out[q] = p
        return out


def circle_layout(a: LocalObject, b: LocalObject):
    """Boundary circles of a cobordism ``a -> b``.

    Returns ``(cycle_of_port, n_cycles, n_total)``: cycles through ports first,
    then the loops of ``a``, then the loops of ``b``.
    """
    pa, pb = a.partner(), b.partner()
    cyc = {}
    n = 0
    for p in sorted(pa):
        if p in cyc:
            continue
        q = p
        while True:
            cyc[q] = n
            r = pa[q]
            cyc[r] = n
            q = pb[r]
            if q == p:
                break
        n += 1
    return cyc, n, n + len(a.loops) + len(b.loops)


def evaluate_presence(comp_cmask, dotted: int) -> int:
    """Dot-pattern expansion of a surface, as a set of patterns (bitset)."""
    terms = {0}
    for k, cm in enumerate(comp_cmask):
        has_dot = dotted >> k & 1
        if cm == 0:
            if not has_dot:
                return 0
            continue
        if has_dot:
            local = {cm}
        else:
            local = set()
            sub = (cm - 1) & cm
            while True:
                local.add(sub)
                if sub == 0:
                    break
                sub = (sub - 1) & cm
        new = set()
        for x in terms:
            for t in local:
                new ^= {x | t}
        terms = new
    out = 0
    for t in terms:
        out ^= 1 << t
    return out


class LocalCategory:
    """Compositions and elementary saddles between local objects."""

    def __init__(self):
        self._comp: dict = {}

    def compose(self, a, b, c, m1: int, m2: int) -> int:
        key = (a, b, c, m1, m2)
        hit = self._comp.get(key)
        if hit is not None:
            return hit
        cab, nab, tab = circle_layout(a, b)
        cbc, nbc, tbc = circle_layout(b, c)
        cac, nac, tac = circle_layout(a, c)
        uf = UnionFind(tab + tbc)
        for p, q in b.pairs:
            uf.union(cab[p], tab + cbc[p])
        la, lb = len(a.loops), len(b.loops)
        for i in range(lb):
            uf.union(nab + la + i, tab + nbc + i)
        roots: dict = {}

        def comp(i):
            r = uf.find(i)
            if r not in roots:
                roots[r] = len(roots)
            return roots[r]

        lo = [comp(i) for i in range(tab)]
        hi = [comp(tab + i) for i in range(tbc)]
        cm = [0] * len(roots)
        seen_port = {}
        for p in sorted(cac):
            j = cac[p]
            if j not in seen_port:
                seen_port[j] = p
                cm[lo[cab[p]]] |= 1 << j
        for i in range(la):
            cm[lo[nab + i]] |= 1 << (nac + i)
        for i in range(len(c.loops)):
            cm[hi[nbc + lb + i]] |= 1 << (nac + la + i)
        cm = tuple(cm)
        out = 0
        for x in iter_bits(m1):
            d1 = 0
            for k in iter_bits(x):
                d1 |= 1 << lo[k]
            for y in iter_bits(m2):
                d = d1
                for k in iter_bits(y):
                    d |= 1 << hi[k]
                out ^= evaluate_presence(cm, d)
        self._comp[key] = out
        return out


def elementary(t: LocalTangle, v, w) -> int:
    """Identity or single saddle ``v -> w`` in the dot-pattern basis."""
    a, b = t.state(v), t.state(w)
    pieces: dict = {}

    def piece(key):
        k = pieces.get(key)
        if k is None:
            k = pieces[key] = len(pieces)
        return k

    def piece_of_arc(j, k, bits):
        if v[j] != w[j]:
            return piece(("s", j))
        return piece((j, k))

    slot_piece = {}
    for j, c in enumerate(t.crossings):
        for s in range(4):
            if v[j] != w[j]:
                slot_piece[(j, s)] = piece(("s", j))
            else:
                k = 0 if s in SMOOTHINGS[v[j]][0] else 1
                slot_piece[(j, s)] = piece((j, k))
    for k in range(len(t.free_arcs)):
        piece(("f", k))
    uf = UnionFind(len(pieces) + 1)
    where: dict = {}
    port_piece = {}
    for j, c in enumerate(t.crossings):
        for s in range(4):
            p = c[s]
            if isinstance(p, int):
                port_piece[p] = slot_piece[(j, s)]
            else:
                where.setdefault(p, []).append(slot_piece[(j, s)])
    for k, (pa, pb, _) in enumerate(t.free_arcs):
        port_piece[pa] = pieces[("f", k)]
        port_piece[pb] = pieces[("f", k)]
    for p, lst in where.items():
        uf.union(lst[0], lst[1])
    cyc, nc, tot = circle_layout(a, b)
    roots: dict = {}

    def comp(i):
        r = uf.find(i)
        if r not in roots:
            roots[r] = len(roots)
        return roots[r]

    for i in range(len(pieces)):
        comp(i)
    cm = [0] * len(roots)
    done = set()
    for p in sorted(cyc):
        if cyc[p] in done:
            continue
        done.add(cyc[p])
        cm[comp(port_piece[p])] |= 1 << cyc[p]
    for i, (_, arcs) in enumerate(a.loops):
        j, k = arcs[0]
        cm[comp(piece_of_arc(j, k, v))] |= 1 << (nc + i)
    for i, (_, arcs) in enumerate(b.loops):
        j, k = arcs[0]
        cm[comp(piece_of_arc(j, k, w))] |= 1 << (nc + len(a.loops) + i)
    return evaluate_presence(tuple(cm), 0)


def _q_shift(t: LocalTangle, v) -> int:
    return sum(v) + t.n_plus - 2 * t.n_minus


def _h_shift(t: LocalTangle, v) -> int:
    return sum(v) - t.n_minus


def _degree_ok(t1, v, t2, w, a, b, h_step) -> list:
    """Dot patterns of degree zero for a map of homological step ``h_step``."""
    if _h_shift(t2, w) - _h_shift(t1, v) != h_step:
        return []
    _, nc, tot = circle_layout(a, b)
    nports = len(a.partner())
    out = []
    for m in range(1 << tot):
        deg = tot - nports // 2 - 2 * bin(m).count("1")
        num = deg + _q_shift(t2, w) - _q_shift(t1, v)
        if num >= 0 and num % 2 == 0:
            out.append(m)
    return out


def local_degree(t1, v, t2, w, m) -> int:
    a, b = t1.state(v), t2.state(w)
    _, nc, tot = circle_layout(a, b)
    nports = len(a.partner())
    deg = tot - nports // 2 - 2 * bin(m).count("1")
    return (deg + _q_shift(t2, w) - _q_shift(t1, v)) // 2


_SOLVE_CACHE: dict = {}


def local_equivalence(t1: LocalTangle, t2: LocalTangle) -> dict:
    """A chain map ``[[t1]] -> [[t2]]`` of degree zero that is not null-homotopic.

    For tangles related by a Reidemeister move the degree-zero chain maps
    modulo homotopy form a one-dimensional F2 space, so the answer is the
    homotopy equivalence.  Returns ``{(v, w): pattern bitset}``.
    """
    key = (t1, t2)
    if key in _SOLVE_CACHE:
        return _SOLVE_CACHE[key]
    cat = LocalCategory()
    V1 = list(itertools.product((0, 1), repeat=t1.n))
    V2 = list(itertools.product((0, 1), repeat=t2.n))
    S1 = {v: t1.state(v) for v in V1}
    S2 = {w: t2.state(w) for w in V2}

    def succ(vs, v):
        return [v[:i] + (1,) + v[i + 1:] for i in range(len(v)) if v[i] == 0]

    def pred(vs, v):
        return [v[:i] + (0,) + v[i + 1:] for i in range(len(v)) if v[i] == 1]

    d1 = {(v, w): elementary(t1, v, w) for v in V1 for w in succ(V1, v)}
    d2 = {(v, w): elementary(t2, v, w) for v in V2 for w in succ(V2, v)}
    unknowns = []
    for v in V1:
        for w in V2:
            for m in _degree_ok(t1, v, t2, w, S1[v], S2[w], 0):
                unknowns.append((v, w, m))
    eq_index: dict = {}

    def eq_bits(v, w2, val):
        bits = 0
        for m in iter_bits(val):
            k = eq_index.setdefault((v, w2, m), len(eq_index))
            bits |= 1 << k
        return bits

    cols = []
    for v, w, m in unknowns:
        col = 0
        for w2 in succ(V2, w):
            col ^= eq_bits(v, w2, cat.compose(S1[v], S2[w], S2[w2], 1 << m, d2[(w, w2)]))
        for u in pred(V1, v):
            col ^= eq_bits(u, w, cat.compose(S1[u], S1[v], S2[w], d1[(u, v)], 1 << m))
        cols.append(col)
    null = nullspace_f2(cols)
    unk_index = {u: i for i, u in enumerate(unknowns)}
    span = SpanF2()
    for v in V1:
        for w in V2:
            for m in _degree_ok(t1, v, t2, w, S1[v], S2[w], -1):
                img = 0
                for w2 in succ(V2, w):
                    val = cat.compose(S1[v], S2[w], S2[w2], 1 << m, d2[(w, w2)])
                    for mm in iter_bits(val):
                        img ^= 1 << unk_index[(v, w2, mm)]
                for u in pred(V1, v):
                    val = cat.compose(S1[u], S1[v], S2[w], d1[(u, v)], 1 << m)
                    for mm in iter_bits(val):
                        img ^= 1 << unk_index[(u, w, mm)]
                span.add(img)
    chosen = None
    for z in null:
        if not span.contains(z):
            chosen = z
            break
    if chosen is None:
        raise IllegalMove("local tangles are not homotopy equivalent")
    out: dict = {}
    for i in iter_bits(chosen):
        v, w, m = unknowns[i]
        out[(v, w)] = out.get((v, w), 0) ^ (1 << m)
    _SOLVE_CACHE[key] = out
    return out


# ----------------------------------------------------------------------------
# Building the rewritten diagram


@dataclass
class Rewrite:
    before: SideView
    after: SideView
    ports: list


def rewrite(d: PlanarDiagram, local: set, internal: set, through: dict,
            new_crossings: list, new_arcs: list, port_of: dict | None = None,
            build=None) -> Rewrite:
    """Replace the tangle inside a disk.

    ``local`` are crossing indices of ``d`` inside the disk, ``internal``
    edges lying entirely inside it and ``through`` maps edges that cross the
    disk without meeting a local crossing to a pair of fresh port ids.  Ports
    at local crossing slots are numbered by the caller through ``port_of``
    (``(x, s) -> port``) or automatically.  ``build(ports)`` may be given
    instead of ``new_crossings``/``new_arcs`` to describe the new tangle once
    the port ids are known.  New crossings list ``("p", port)`` or
    ``("i", name)`` per slot plus a sign; new arcs are ``(port_in, port_out)``.
    """
    port_of = dict(port_of or {})
    next_port = [max(list(port_of.values()) + [p for pr in through.values() for p in pr] + [0]) + 1]

    def fresh():
        p = next_port[0]
        next_port[0] += 1
        return p

    chains: dict = {}
    cyclic = set(d.loops)
    for e in d.loops:
        if e in through:
            # a crossingless circle crossing the disk once
            pin, pout = through[e]
            chains[e] = [("o", e, 0), pin, ("i", "D", e), pout]
        else:
            chains[e] = [("o", e, 0)]
    edge_list = [e for e in d.edges() if e not in d.loops]
    for e in edge_list:
        xt, st = d.tail(e)
        xh, sh = d.head(e)
        tl, hl = xt in local, xh in local
        if e in internal:
            chains[e] = [("i", "D", e)]
        elif e in through:
            pin, pout = through[e]
            chains[e] = [("o", e, 0), pin, ("i", "D", e), pout, ("o", e, 1)]
        elif tl and hl:
            p1 = port_of.setdefault((xt, st), fresh())
            p2 = port_of.setdefault((xh, sh), fresh())
            chains[e] = [("i", "D", e, 0), p1, ("o", e, 0), p2, ("i", "D", e, 1)]
        elif tl:
            p = port_of.setdefault((xt, st), fresh())
            chains[e] = [("i", "D", e), p, ("o", e, 0)]
        elif hl:
            p = port_of.setdefault((xh, sh), fresh())
            chains[e] = [("o", e, 0), p, ("i", "D", e)]
        else:
            chains[e] = [("o", e, 0)]
    local_order = tuple(sorted(local))
    before = SideView(d, local_order, chains, cyclic)
    if build is not None:
        new_crossings, new_arcs = build(port_of)
    # -- assemble the new diagram by walking strands -------------------------
    outer_x = [x for x in range(d.n) if x not in local]
    new_index = {x: i for i, x in enumerate(outer_x)}
    n_out = len(outer_x)
    # port -> outer segment continuing outward, and where that segment ends
    after_port: dict = {}  # port where a strand leaves the disk -> outer seg
    before_port: dict = {}  # port where a strand enters the disk <- outer seg
    seg_end: dict = {}  # outer seg -> ("slot", x', s) | ("port", p)
    seg_edge: dict = {}
    for e, chain in chains.items():
        if e in cyclic:
            if e in through:
                seg = chain[0]
                seg_edge[seg] = e
                after_port[chain[3]] = seg
                before_port[chain[1]] = seg
                seg_end[seg] = ("port", chain[1])
            continue
        for i, tok in enumerate(chain):
            if isinstance(tok, int) or tok[0] != "o":
                continue
            seg_edge[tok] = e
            if i > 0:
                after_port[chain[i - 1]] = tok
            if i < len(chain) - 1:
                before_port[chain[i + 1]] = tok
                seg_end[tok] = ("port", chain[i + 1])
            else:
                xh, sh = d.head(e)
                seg_end[tok] = ("slot", new_index[xh], sh)
    t_in: dict = {}  # port entering the disk -> ("slot", x', s) | ("arc", k)
    t_out_slot: dict = {}
    internal_in: dict = {}
    for j, c in enumerate(new_crossings):
        ins, outs = _in_out(c[4])
        for s in range(4):
            kind, ref = c[s]
            xs = (n_out + j, s)
            if kind == "p":
                if s in ins:
                    t_in[ref] = ("slot",) + xs
                else:
                    t_out_slot[xs] = ref
            else:
                if s in ins:
                    internal_in[ref] = xs
    for k, (pa, pb) in enumerate(new_arcs):
        t_in[pa] = ("arc", k)
    new_xs = [list(d.crossings[x][:4]) + [d.crossings[x][4]] for x in outer_x]
    new_xs += [[None] * 4 + [c[4]] for c in new_crossings]
    labels_used = set(e for e in d.edges())
    next_label = [max(labels_used | {0}) + 1]

    def new_label():
        lab = next_label[0]
        next_label[0] += 1
        return lab

    after_chains: dict = {}
    visited_segs = set()

    def walk_from_port(p, tokens):
        """Continue outward from a port where a strand leaves the disk."""
        while True:
            seg = after_port[p]
            tokens.append(p)
            tokens.append(seg)
            visited_segs.add(seg)
            kind, *rest = seg_end[seg]
            if kind == "slot":
                return ("slot", rest[0], rest[1])
            q = rest[0]
            tokens.append(q)
            nxt = t_in.get(q)
            if nxt is None:
                raise IllegalMove(f"port {q} has no continuation in the new tangle")
            if nxt[0] == "slot":
                tokens.append(("i", "T", "p", q))
                return nxt
            k = nxt[1]
            tokens.append(("i", "T", "arc", k))
            visited_segs.add(("i", "T", "arc", k))
            p = new_arcs[k][1]

    def walk(start_tokens, start):
        """Walk from an out-slot; returns (tokens, end slot)."""
        tokens = list(start_tokens)
        kind = start[0]
        if kind == "outer":
            seg = start[1]
            tokens.append(seg)
            visited_segs.add(seg)
            k2, *rest = seg_end[seg]
            if k2 == "slot":
                return tokens, ("slot", rest[0], rest[1])
            q = rest[0]
            tokens.append(q)
            nxt = t_in.get(q)
            if nxt is None:
                raise IllegalMove(f"port {q} has no continuation in the new tangle")
            if nxt[0] == "slot":
                tokens.append(("i", "T", "p", q))
                return tokens, nxt
            k = nxt[1]
            tokens.append(("i", "T", "arc", k))
            visited_segs.add(("i", "T", "arc", k))
            return tokens, walk_from_port(new_arcs[k][1], tokens)
        if kind == "port":
            tokens.append(("i", "T", "p", start[1]))
            return tokens, walk_from_port(start[1], tokens)
        raise AssertionError

    starts = []
    for i, x in enumerate(outer_x):
        c = d.crossings[x]
        _, outs = _in_out(c[4])
        for s in outs:
            e = c[s]
            starts.append(((i, s), ("outer", chains[e][0]), e))
    for j, c in enumerate(new_crossings):
        _, outs = _in_out(c[4])
        for s in outs:
            kind, ref = c[s]
            xs = (n_out + j, s)
            if kind == "p":
                starts.append((xs, ("port", ref), None))
            else:
                starts.append((xs, ("internal", ref), None))
    for xs, start, e in starts:
        if start[0] == "internal":
            name = start[1]
            tokens = [("i", "T", name)]
            end = ("slot",) + internal_in[name]
        else:
            tokens, end = walk([], start)
        outer_tokens = [t for t in tokens if not isinstance(t, int) and t[0] == "o"]
        label = seg_edge[outer_tokens[0]] if outer_tokens else new_label()
        if label in after_chains:
            label = new_label()
        after_chains[label] = tokens
        new_xs[xs[0]][xs[1]] = label
        new_xs[end[1]][end[2]] = label
    # free loops created by the rewrite
    new_loops = [e for e in d.loops if e not in through]
    for e, chain in chains.items():
        if e in cyclic:
            continue
        for tok in chain:
            if not isinstance(tok, int) and tok[0] == "o" and tok not in visited_segs:
                # an outer segment running port to port with no crossing:
                # follow it round to build a crossingless loop
                p_start = None
                for p, sg in after_port.items():
                    if sg == tok:
                        p_start = p
                tokens: list = []
                walk_from_port_loop(p_start, tokens, after_port, seg_end, t_in,
                                    new_arcs, visited_segs)
                outer_tokens = [t for t in tokens if not isinstance(t, int) and t[0] == "o"]
                label = min(seg_edge[t] for t in outer_tokens)
                after_chains[label] = tokens
                new_loops.append(label)
    for e in new_loops:
        after_chains.setdefault(e, [("o", e, 0)])
    bp = d.basepoint
    if bp in d.loops and bp not in through:
        new_bp = bp
    elif bp in d.loops:
        new_bp = next(lab for lab, toks in after_chains.items() if ("o", bp, 0) in toks)
    else:
        first_outer = next((t for t in chains[bp] if not isinstance(t, int) and t[0] == "o"), None)
        if first_outer is None:
            raise BasepointViolation("the basepoint lies inside the rewritten disk")
        new_bp = next(lab for lab, toks in after_chains.items() if first_outer in toks)
    d2 = PlanarDiagram(tuple(tuple(c) for c in new_xs), basepoint=new_bp, loops=tuple(new_loops))
    d2.validate()
    cyc_after = set(new_loops)
    local_after = tuple(range(n_out, n_out + len(new_crossings)))
    after = SideView(d2, local_after, after_chains, cyc_after)
    return Rewrite(before, after, sorted(set(before.port_segs)))


def walk_from_port_loop(p, tokens, after_port, seg_end, t_in, new_arcs, visited):
    start = p
    while True:
        seg = after_port[p]
        tokens.append(p)
        tokens.append(seg)
        visited.add(seg)
        kind, *rest = seg_end[seg]
        if kind != "port":
            raise IllegalMove("a crossingless loop cannot meet a crossing")
        q = rest[0]
        tokens.append(q)
        nxt = t_in[q]
        if nxt[0] != "arc":
            raise IllegalMove("a crossingless loop cannot meet a crossing")
        k = nxt[1]
        tokens.append(("i", "T", "arc", k))
        visited.add(("i", "T", "arc", k))
        p = new_arcs[k][1]
        if p == start:
            # drop the duplicated starting port so the chain is cyclic
            return


# ----------------------------------------------------------------------------
# Gluing a local map with the identity and evaluating the TQFT


def _tqft_component(src_labels, n_tgt, dots, genus, hbits=HBITS):
    """Image of one connected surface; returns {target label tuple: poly}.

    ``hbits`` is the value of ``H`` (packed); pass 0 for Khovanov's algebra.
    """
    c1, cx = 1, 0  # element c1*1 + cx*X
    for lab in src_labels:
        if lab == X_LABEL:
            c1, cx = 0, c1 ^ ring_mul_bits(cx, hbits)
    for _ in range(dots):
        c1, cx = 0, c1 ^ ring_mul_bits(cx, hbits)
    for _ in range(genus):
        c1, cx = ring_mul_bits(c1, hbits), ring_mul_bits(cx, hbits)
    if n_tgt == 0:
        return {(): cx} if cx else {}
    out: dict = {}
    if cx:
        out[(X_LABEL,) * n_tgt] = cx
    if c1:
        for U in range(1, 1 << n_tgt):
            labs = tuple(UNIT_LABEL if U >> i & 1 else X_LABEL for i in range(n_tgt))
            coeff = c1
            for _ in range(bin(U).count("1") - 1):
                coeff = ring_mul_bits(coeff, hbits)
            out[labs] = out.get(labs, 0) ^ coeff
    return {k: v for k, v in out.items() if v}


def glue_map(rw: Rewrite, fmap: dict, src: CubeComplex, tgt: CubeComplex,
             hbits: int = HBITS) -> dict:
    """Sparse matrix ``{src id: {tgt id: poly}}`` of local map + identity."""
    A, B = rw.before, rw.after
    T1, T2 = A.local_tangle(), B.local_tangle()
    outer_n = A.diagram.n - len(A.local)
    a_outer = [x for x in range(A.diagram.n) if x not in A.local_set]
    by_v: dict = {}
    for (v, w), m in fmap.items():
        by_v.setdefault(v, []).append((w, m))
    circ_cache: dict = {}
    out: dict = {}
    for (vertex, labels), gid in src.index.items():
        u = tuple(vertex[x] for x in a_outer)
        v = tuple(vertex[x] for x in A.local)
        if v not in by_v:
            continue
        for w, masks in by_v[v]:
            vertex2 = u + w
            key = (vertex, vertex2)
            plan = circ_cache.get(key)
            if plan is None:
                plan = circ_cache[key] = _surface_plan(A, B, T1, T2, vertex, vertex2, v, w,
                                                       src, tgt)
            src_circles, tgt_circles, plan_by_mask = plan
            for m in iter_bits(masks):
                comps, kpow = plan_by_mask(m)
                if kpow and not hbits:
                    continue
                terms = {(): 1 << kpow}
                for S, nT, T_idx, dots, genus in comps:
                    res = _tqft_component([labels[i] for i in S], nT, dots, genus, hbits)
                    new = {}
                    for k1, c1 in terms.items():
                        for k2, c2 in res.items():
                            kk = k1 + tuple(zip(T_idx, k2))
                            new[kk] = new.get(kk, 0) ^ ring_mul_bits(c1, c2)
                    terms = {k: c for k, c in new.items() if c}
                    if not terms:
                        break
                for assign, coeff in terms.items():
                    labs = [None] * len(tgt_circles)
                    for i, lab in assign:
                        labs[i] = lab
                    tid = tgt.index.get((vertex2, tuple(labs)))
                    if tid is None:
                        # the basepoint circle would carry 1: impossible for a
                        # module map, so treat as an internal error
                        raise AssertionError("map leaves the reduced subcomplex")
                    row = out.setdefault(gid, {})
                    v2 = row.get(tid, 0) ^ coeff
                    if v2:
                        row[tid] = v2
                    else:
                        row.pop(tid, None)
    return out


def _surface_plan(A: SideView, B: SideView, T1, T2, vertex, vertex2, v, w, src, tgt):
    segA = A.segment_circles(vertex)
    segB = B.segment_circles(vertex2)
    rA = src.resolutions[vertex]
    rB = tgt.resolutions[vertex2]

    def circle_roots(side, segmap, circles):
        roots = []
        for c in circles:
            seg = next(t for t in side.chains[c[0]] if not isinstance(t, int))
            roots.append(segmap[seg])
        return roots

    src_roots = circle_roots(A, segA, rA.circles)
    tgt_roots = circle_roots(B, segB, rB.circles)
    # outer pieces: union-find over outer segments through outer crossings
    outer_segs = sorted({s for s in A.seg_ends if A.is_outer(s)}, key=repr)
    oidx = {s: i for i, s in enumerate(outer_segs)}
    uf = UnionFind(len(outer_segs))
    for x in range(A.diagram.n):
        if x in A.local_set:
            continue
        for i, j in SMOOTHINGS[vertex[x]]:
            uf.union(oidx[A.slot_seg(x, i)], oidx[A.slot_seg(x, j)])
    o_root = {s: uf.find(oidx[s]) for s in outer_segs}
    o_pieces = sorted(set(o_root.values()))
    o_piece_index = {r: i for i, r in enumerate(o_pieces)}
    o_ports: dict = {}
    for p, (a, b) in A.port_segs.items():
        seg = a if A.is_outer(a) else b
        o_ports.setdefault(o_root[seg], []).append(p)
    sa, sb = T1.state(v), T2.state(w)
    cyc, nc, tot = circle_layout(sa, sb)
    n_o = len(o_pieces)
    n_pieces = n_o + tot
    # source circle -> piece
    src_piece = []
    for c, root in zip(rA.circles, src_roots):
        segs = [s for e in c for s in A.chains[e] if not isinstance(s, int)]
        outer = next((s for s in segs if A.is_outer(s)), None)
        if outer is not None:
            src_piece.append(o_piece_index[o_root[outer]])
        else:
            pts = set(s for s in segs)
            i = next(i for i, (lp, _) in enumerate(sa.loops) if lp & pts)
            src_piece.append(n_o + nc + i)
    tgt_piece = []
    for c, root in zip(rB.circles, tgt_roots):
        segs = [s for e in c for s in B.chains[e] if not isinstance(s, int)]
        outer = next((s for s in segs if B.is_outer(s)), None)
        if outer is not None:
            tgt_piece.append(o_piece_index[o_root[outer]])
        else:
            pts = set(s for s in segs)
            i = next(i for i, (lp, _) in enumerate(sb.loops) if lp & pts)
            tgt_piece.append(n_o + nc + len(sa.loops) + i)
    uf2 = UnionFind(n_pieces)
    gluings = 0
    for r, ports in o_ports.items():
        for p in ports:
            uf2.union(o_piece_index[r], n_o + cyc[p])
            gluings += 1
    chi_piece = []
    for r in o_pieces:
        chi_piece.append(1 if o_ports.get(r) else 0)
    chi_piece += [1] * tot
    roots: dict = {}
    for i in range(n_pieces):
        roots.setdefault(uf2.find(i), len(roots))
    ncomp = len(roots)
    comp_of = [roots[uf2.find(i)] for i in range(n_pieces)]
    chi = [0] * ncomp
    for i in range(n_pieces):
        chi[comp_of[i]] += chi_piece[i]
    for r, ports in o_ports.items():
        chi[comp_of[o_piece_index[r]]] -= len(ports)
    S = [[] for _ in range(ncomp)]
    Tt = [[] for _ in range(ncomp)]
    for i, pc in enumerate(src_piece):
        S[comp_of[pc]].append(i)
    for i, pc in enumerate(tgt_piece):
        Tt[comp_of[pc]].append(i)
    genus = []
    for k in range(ncomp):
        g2 = 2 - chi[k] - len(S[k]) - len(Tt[k])
        if g2 < 0 or g2 % 2:
            raise AssertionError("inconsistent surface while gluing a local map")
        genus.append(g2 // 2)

    def by_mask(m):
        dots = [0] * ncomp
        for i in iter_bits(m):
            dots[comp_of[n_o + i]] += 1
        comps = [(S[k], len(Tt[k]), Tt[k], dots[k], genus[k]) for k in range(ncomp)]
        return comps, local_degree(T1, v, T2, w, m)

    return rA.circles, rB.circles, by_mask
