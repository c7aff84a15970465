"""Dotted cobordisms between crossingless matchings, reduced over F2[H].

Objects are perfect matchings of a finite set of boundary points, interned to
small ints.  A morphism ``a -> c`` is an F2[H]-combination of dotted disks
bounding the cycles of ``a`` and ``c`` glued along the boundary; each cycle
carries at most one dot (two dots equal ``H`` times one).  Over F2 with
homogeneous maps the power of ``H`` is fixed by the gradings, so a morphism is
stored as an int whose bit ``m`` says whether the dot pattern ``m`` occurs.

Two boundary points (``bp1`` and ``bp2``) mark the two ends of the cut
basepoint edge.  A dot on a surface component touching either one equals
``H``, which is how the reduced theory enters.
"""
from __future__ import annotations

IDENTITY = 1  # bit 0: the undotted pattern


def iter_bits(v: int):
    while v:
        low = v & -v
        yield low.bit_length() - 1
        v ^= low


class UnionFind:
    __slots__ = ("p",)

    def __init__(self, n: int):
        self.p = list(range(n))

    def find(self, x: int) -> int:
        p = self.p
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if ra < rb:
                ra, rb = rb, ra
            self.p[ra] = rb


class CobordismAlgebra:
    """Object table plus cached cycle structures and compositions."""

    def __init__(self, bp_points=()):
        self.bp_points = frozenset(bp_points)
        self._ids: dict[tuple, int] = {}
        self.pairs: list[tuple] = []
        self.partner: list[dict] = []
        self._cycles: dict = {}
        self._compose_struct: dict = {}
        self._compose: dict = {}
        self._eval: dict = {}

    # -- objects ---------------------------------------------------------
    def intern(self, pairs) -> int:
        key = tuple(sorted((p, q) if p < q else (q, p) for p, q in pairs))
        oid = self._ids.get(key)
        if oid is None:
            oid = len(self.pairs)
            self._ids[key] = oid
            self.pairs.append(key)
            partner = {}
            for p, q in key:
                partner[p] = q
                partner[q] = p
            self.partner.append(partner)
        return oid

    # -- cycle structure of two matchings on the same boundary -----------
    def cycles(self, a: int, c: int):
        """``(cycle_of_point, n_cycles, bp_mask, reps)`` for ``a`` and ``c``.

        Cycles are numbered by their smallest boundary point.
        """
        key = (a, c)
        hit = self._cycles.get(key)
        if hit is not None:
            return hit
        pa, pc = self.partner[a], self.partner[c]
        cyc: dict = {}
        reps = []
        bp_mask = 0
        for p in sorted(pa):
            if p in cyc:
                continue
            idx = len(reps)
            reps.append(p)
            q = p
            while True:
                cyc[q] = idx
                r = pa[q]
                cyc[r] = idx
                q = pc[r]
                if q == p:
                    break
        for p in self.bp_points:
            if p in cyc:
                bp_mask |= 1 << cyc[p]
        hit = (cyc, len(reps), bp_mask, reps)
        self._cycles[key] = hit
        return hit

    # -- evaluation of a surface given its components ---------------------
    def evaluate(self, comp_cmask: tuple, bp_mask: int, dotted: int) -> int:
        """Reduce a union of components to the dot-pattern basis.

        ``comp_cmask[k]`` is the set of boundary cycles of component ``k``
        (0 for a closed component); ``dotted`` marks components carrying at
        least one dot.  Handles and repeated dots only contribute powers of H.
        """
        key = (comp_cmask, bp_mask, dotted)
        hit = self._eval.get(key)
        if hit is not None:
            return hit
        terms = {0}
        for k, cm in enumerate(comp_cmask):
            has_dot = dotted >> k & 1
            if cm == 0:
                if not has_dot:
                    self._eval[key] = 0
                    return 0
                continue
            if has_dot:
                local = {cm & ~bp_mask}
            else:
                # neck cutting: every proper sub-pattern of dots, with the
                # undotted cycles forming a nonempty set
                local = set()
                sub = (cm - 1) & cm
                while True:
                    local ^= {sub & ~bp_mask}
                    if sub == 0:
                        break
                    sub = (sub - 1) & cm
            if len(local) == 1:
                (t,) = local
                terms = {x | t for x in terms}
            else:
                new = set()
                for x in terms:
                    for t in local:
                        new ^= {x | t}
                terms = new
            if not terms:
                break
        out = 0
        for t in terms:
            out ^= 1 << t
        self._eval[key] = out
        return out

    # -- composition -------------------------------------------------------
    def _cstruct(self, a: int, b: int, c: int):
        key = (a, b, c)
        hit = self._compose_struct.get(key)
        if hit is not None:
            return hit
        cab, n1, _, _ = self.cycles(a, b)
        cbc, n2, _, _ = self.cycles(b, c)
        cac, n3, bp_mask, reps = self.cycles(a, c)
        uf = UnionFind(n1 + n2)
        for p, q in self.pairs[b]:
            uf.union(cab[p], n1 + cbc[p])
        roots = {}
        comp_of = []
        for i in range(n1 + n2):
            r = uf.find(i)
            if r not in roots:
                roots[r] = len(roots)
            comp_of.append(roots[r])
        cm = [0] * len(roots)
        for j, p in enumerate(reps):
            cm[comp_of[cab[p]]] |= 1 << j
        hit = ([1 << comp_of[i] for i in range(n1)],
               [1 << comp_of[n1 + i] for i in range(n2)],
               tuple(cm), bp_mask)
        self._compose_struct[key] = hit
        return hit

    def compose(self, a: int, b: int, c: int, m1: int, m2: int) -> int:
        """Composite of ``m1: a -> b`` followed by ``m2: b -> c``."""
        key = (a, b, c, m1, m2)
        hit = self._compose.get(key)
        if hit is not None:
            return hit
        lo, hi, cm, bp_mask = self._cstruct(a, b, c)
        out = 0
        for i in iter_bits(m1):
            d1 = 0
            for k in iter_bits(i):
                d1 |= lo[k]
            for j in iter_bits(m2):
                d = d1
                for k in iter_bits(j):
                    d |= hi[k]
                out ^= self.evaluate(cm, bp_mask, d)
        if len(self._compose) > 2_000_000:
            self._compose.clear()
        self._compose[key] = out
        return out

    def clear_caches(self) -> None:
        self._compose.clear()
        self._compose_struct.clear()
        self._eval.clear()


# Slots of a crossing are numbered counterclockwise 0..3; the 0-smoothing
# joins slots 0-1 and 2-3, the 1-smoothing joins 0-3 and 1-2.
SMOOTHINGS = (((0, 1), (2, 3)), ((0, 3), (1, 2)))
SADDLE = "saddle"


class CrossingGluer:
    """Tensor a tangle complex with one crossing, delooping closed loops."""

    def __init__(self, alg: CobordismAlgebra, boundary: frozenset, points: tuple):
        self.alg = alg
        self.points = points
        counts: dict = {}
        for p in points:
            counts[p] = counts.get(p, 0) + 1
        self.kinks = [p for p, k in counts.items() if k == 2]
        self.shared = [p for p, k in counts.items() if k == 1 and p in boundary]
        self.new_boundary = (boundary - set(self.shared)) | {
            p for p, k in counts.items() if k == 1 and p not in boundary
        }
        self.slot_of = {}
        for i, p in enumerate(points):
            self.slot_of.setdefault(p, []).append(i)
        self._obj: dict = {}
        self._struct: dict = {}
        self._mor: dict = {}

    def glue_object(self, a: int, bit: int):
        """``(new_object, loops)``; each loop is the smallest arc index on it."""
        key = (a, bit)
        hit = self._obj.get(key)
        if hit is not None:
            return hit
        alg = self.alg
        pts = self.points
        pa = alg.partner[a]
        nodes = {}

        def node(p):
            v = nodes.get(p)
            if v is None:
                v = nodes[p] = len(nodes)
            return v

        for p in pa:
            node(p)
        for p in pts:
            node(p)
        uf = UnionFind(len(nodes))
        for p, q in alg.pairs[a]:
            uf.union(nodes[p], nodes[q])
        arcs = SMOOTHINGS[bit]
        for i, j in arcs:
            uf.union(nodes[pts[i]], nodes[pts[j]])
        ends: dict = {}
        for p in self.new_boundary:
            ends.setdefault(uf.find(nodes[p]), []).append(p)
        pairs = [tuple(v) for v in ends.values()]
        loops = []
        for k, (i, j) in enumerate(arcs):
            r = uf.find(nodes[pts[i]])
            if r not in ends and r not in loops:
                loops.append(r)
        # translate loop roots into the index of their first arc
        loop_arcs = []
        seen = set()
        for k, (i, j) in enumerate(arcs):
            r = uf.find(nodes[pts[i]])
            if r in loops and r not in seen:
                seen.add(r)
                loop_arcs.append(k)
        hit = (alg.intern(pairs), tuple(loop_arcs))
        self._obj[key] = hit
        return hit

    def _piece_of_slot(self, kind, slot):
        if kind == SADDLE:
            return 0
        for k, arc in enumerate(SMOOTHINGS[kind]):
            if slot in arc:
                return k
        raise AssertionError

    def structure(self, a: int, c: int, kind):
        key = (a, c, kind)
        hit = self._struct.get(key)
        if hit is not None:
            return hit
        alg = self.alg
        bs, bt = (0, 1) if kind == SADDLE else (kind, kind)
        a2, sl = self.glue_object(a, bs)
        c2, tl = self.glue_object(c, bt)
        cac, nm, _, _ = alg.cycles(a, c)
        nn = 1 if kind == SADDLE else 2
        uf = UnionFind(nm + nn)
        for p in self.shared:
            uf.union(cac[p], nm + self._piece_of_slot(kind, self.slot_of[p][0]))
        for p in self.kinks:
            i, j = self.slot_of[p]
            uf.union(nm + self._piece_of_slot(kind, i), nm + self._piece_of_slot(kind, j))
        roots: dict = {}

        def comp(i):
            r = uf.find(i)
            v = roots.get(r)
            if v is None:
                v = roots[r] = len(roots)
            return v

        m_comp = [1 << comp(i) for i in range(nm)]
        n_comp = [comp(nm + i) for i in range(nn)]
        c2cyc, n2, bp_mask, reps = alg.cycles(a2, c2)
        cm = [0] * len(roots)
        for j, p in enumerate(reps):
            if p in cac:
                k = comp(cac[p])
            else:
                k = comp(nm + self._piece_of_slot(kind, self.slot_of[p][0]))
            cm[k] |= 1 << j
        cm += [0] * (len(roots) - len(cm))
        src_loop = [1 << n_comp[0 if kind == SADDLE else k] for k in sl]
        tgt_loop = [1 << n_comp[0 if kind == SADDLE else k] for k in tl]
        hit = (a2, c2, m_comp, tuple(cm), bp_mask, src_loop, tgt_loop)
        self._struct[key] = hit
        return hit

    def glue_morphism(self, a: int, c: int, kind, m: int):
        """Glue ``m: a -> c`` with the identity or saddle on the crossing.

        Returns ``(a2, c2, n_src_loops, n_tgt_loops, table)`` where
        ``table[(s, t)]`` is the morphism between delooped summands; ``s`` and
        ``t`` are bitmasks of loop labels with bit set meaning ``X``.
        """
        key = (a, c, kind, m)
        hit = self._mor.get(key)
        if hit is not None:
            return hit
        a2, c2, m_comp, cm, bp_mask, sl, tl = self.structure(a, c, kind)
        ev = self.alg.evaluate
        base = []
        for i in iter_bits(m):
            d = 0
            for k in iter_bits(i):
                d |= m_comp[k]
            base.append(d)
        ns, nt = len(sl), len(tl)
        table = {}
        for s in range(1 << ns):
            sd = 0
            for k in range(ns):
                if s >> k & 1:
                    sd |= sl[k]
            for t in range(1 << nt):
                # a target loop labelled 1 is capped by (dotted cap + H cap)
                ones = [k for k in range(nt) if not t >> k & 1]
                val = 0
                for d0 in base:
                    for sub in range(1 << len(ones)):
                        d = d0 | sd
                        for j, k in enumerate(ones):
                            if sub >> j & 1:
                                d |= tl[k]
                        val ^= ev(cm, bp_mask, d)
                if val:
                    table[(s, t)] = val
        hit = (a2, c2, ns, nt, table)
        self._mor[key] = hit
        return hit
