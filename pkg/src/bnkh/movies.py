"""Movies of knot diagrams and the chain maps of the cobordisms they describe.

A movie is a start diagram plus a list of elementary moves.  Saddles,
births and deaths act by the Frobenius algebra on the circles they touch;
Reidemeister moves act by the local homotopy equivalences of
:mod:`bnkh.local`, glued with the identity outside a small disk.

Move records (JSON objects):

``{"type": "saddle", "edges": [e1, e2]}``
    band between two edges bordering a common face (antiparallel there);
    ``[e, e]`` splits a small circle off edge ``e``; free circles merge freely.
``{"type": "birth"}`` / ``{"type": "death", "edges": [loop]}``
``{"type": "r1+", "edges": [e], "sign": 1, "side": "left"}``
``{"type": "r1-", "edges": [kink_edge]}``
``{"type": "r2+", "edges": [over_edge, under_edge]}``
``{"type": "r2-", "edges": [e1, e2]}`` (the two edges of a bigon face)
``{"type": "r3", "edges": [e1, e2, e3]}`` (the three edges of a triangle face)
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .codec import PlanarDiagram, _in_out, dt_to_diagram, parse_dt
from .cube import CubeComplex, build_reduced_complex
from .errors import BasepointViolation, IllegalMove, InvalidDiagram, NotACycle
from .homology import Coordinates, decompose_tracked
from .linalg import SpanF2
from .local import HBITS, Rewrite, _tqft_component, glue_map, local_equivalence, rewrite
from .tqft import X_LABEL, RingElement, poly_str, ring_mul_bits

MOVE_TYPES = ("saddle", "birth", "death", "r1+", "r1-", "r2+", "r2-", "r3")


@dataclass(frozen=True)
class Move:
    type: str
    edges: tuple = ()
    sign: int = 1
    side: str = "left"

    @classmethod
    def from_json(cls, data: dict) -> "Move":
        t = str(data.get("type", "")).lower()
        if t not in MOVE_TYPES:
            raise IllegalMove(f"unknown move type {data.get('type')!r}")
        sign = data.get("sign", 1)
        if isinstance(sign, str):
            sign = -1 if sign.strip().startswith("-") else 1
        side = str(data.get("side", "left")).lower()
        if side not in ("left", "right"):
            raise IllegalMove(f"side must be left or right, got {side!r}")
        return cls(t, tuple(int(e) for e in data.get("edges", ())), int(sign), side)

    def to_json(self) -> dict:
        out = {"type": self.type, "edges": list(self.edges)}
        if self.type == "r1+":
            out["sign"] = self.sign
            out["side"] = self.side
        return out


@dataclass
class Step:
    """One elementary cobordism between consecutive frames."""

    move: Move
    before: PlanarDiagram
    after: PlanarDiagram
    chi: int
    rewrite: Rewrite | None = None
    src_edges: tuple = ()
    tgt_edges: tuple = ()

    def matrix(self, src: CubeComplex, tgt: CubeComplex, hbits: int = HBITS) -> dict:
        if self.rewrite is not None:
            fmap = local_equivalence(self.rewrite.before.local_tangle(),
                                     self.rewrite.after.local_tangle())
            return glue_map(self.rewrite, fmap, src, tgt, hbits)
        return frobenius_map(src, tgt, self.src_edges, self.tgt_edges, hbits)


# ----------------------------------------------------------------------------
# Direct maps for saddles, births and deaths


def frobenius_map(src: CubeComplex, tgt: CubeComplex, src_edges, tgt_edges,
                  hbits: int = HBITS) -> dict:
    """Map on the cubes of diagrams with the same crossings.

    The circles meeting ``src_edges`` (resp. ``tgt_edges``) form one
    connected planar surface; every other circle is carried identically.
    """
    out: dict = {}
    src_edges, tgt_edges = set(src_edges), set(tgt_edges)
    plans: dict = {}
    for (vertex, labels), gid in src.index.items():
        plan = plans.get(vertex)
        if plan is None:
            ra, rb = src.resolutions[vertex], tgt.resolutions[vertex]
            S = [i for i, c in enumerate(ra.circles) if src_edges & set(c)]
            T = [i for i, c in enumerate(rb.circles) if tgt_edges & set(c)]
            where = {}
            for i, c in enumerate(rb.circles):
                for e in c:
                    where[e] = i
            ident = [(i, where[c[0]]) for i, c in enumerate(ra.circles) if i not in S]
            plan = plans[vertex] = (S, T, ident, len(rb.circles))
        S, T, ident, nt = plan
        res = _tqft_component([labels[i] for i in S], len(T), 0, 0, hbits)
        for labs_t, coeff in res.items():
            labs = [None] * nt
            for i, j in ident:
                labs[j] = labels[i]
            for i, lab in zip(T, labs_t):
                labs[i] = lab
            tid = tgt.index.get((vertex, tuple(labs)))
            if tid is None:
                raise AssertionError("map leaves the reduced subcomplex")
            row = out.setdefault(gid, {})
            v = row.get(tid, 0) ^ coeff
            if v:
                row[tid] = v
            else:
                row.pop(tid, None)
    return out


# ----------------------------------------------------------------------------
# Applying moves


def _face_with(d: PlanarDiagram, edges, size=None):
    for face in d.faces():
        if size is not None and len(face) != size:
            continue
        fe = [d.crossings[x][s] for x, s in face]
        if all(e in fe for e in edges):
            return face
    return None


def _forward(d: PlanarDiagram, dart) -> bool:
    x, s = dart
    return d.tail(d.crossings[x][s]) == (x, s)


def _fresh_label(d: PlanarDiagram) -> int:
    return max(d.edges(), default=0) + 1


def _check_edges(d: PlanarDiagram, edges):
    have = set(d.edges())
    for e in edges:
        if e not in have:
            raise IllegalMove(f"edge {e} is not in the diagram")


def apply_move(d: PlanarDiagram, move: Move) -> Step:
    """Perform ``move`` on ``d`` and return the elementary step."""
    t = move.type
    if t == "birth":
        lab = move.edges[0] if move.edges else _fresh_label(d)
        if lab in d.edges():
            raise IllegalMove(f"label {lab} is already used")
        d2 = PlanarDiagram(d.crossings, basepoint=d.basepoint, loops=d.loops + (lab,))
        return Step(move, d, d2, 1, src_edges=(), tgt_edges=(lab,))
    _check_edges(d, move.edges)
    if t == "death":
        (lab,) = move.edges
        if lab not in d.loops:
            raise IllegalMove("only a crossingless circle can die")
        if lab == d.basepoint:
            raise BasepointViolation("the basepoint circle cannot die")
        loops = tuple(e for e in d.loops if e != lab)
        d2 = PlanarDiagram(d.crossings, basepoint=d.basepoint, loops=loops)
        return Step(move, d, d2, 1, src_edges=(lab,), tgt_edges=())
    if t == "saddle":
        return _saddle(d, move)
    if t == "r1+":
        return _r1_plus(d, move)
    if t == "r1-":
        return _r1_minus(d, move)
    if t == "r2+":
        return _r2_plus(d, move)
    if t == "r2-":
        return _r2_minus(d, move)
    if t == "r3":
        return _r3(d, move)
    raise IllegalMove(f"unknown move {t}")


def _saddle(d: PlanarDiagram, move: Move) -> Step:
    if len(move.edges) != 2:
        raise IllegalMove("a saddle needs two edges")
    e1, e2 = move.edges
    loops = set(d.loops)
    bp = d.basepoint
    if e1 == e2:
        lab = _fresh_label(d)
        d2 = PlanarDiagram(d.crossings, basepoint=bp, loops=d.loops + (lab,))
        return Step(move, d, d2, -1, src_edges=(e1,), tgt_edges=(e1, lab))
    if e1 in loops or e2 in loops:
        gone, keep = (e1, e2) if e1 in loops else (e2, e1)
        new_bp = keep if bp == gone else bp
        d2 = PlanarDiagram(d.crossings, basepoint=new_bp,
                           loops=tuple(e for e in d.loops if e != gone))
        return Step(move, d, d2, -1, src_edges=(e1, e2), tgt_edges=(keep,))
    face = None
    for f in d.faces():
        darts = {d.crossings[x][s]: (x, s) for x, s in f}
        if e1 in darts and e2 in darts:
            if _forward(d, darts[e1]) == _forward(d, darts[e2]):
                face = f
                break
    if face is None:
        raise IllegalMove(f"edges {e1} and {e2} do not bound a common face with opposite orientations")
    (x1, s1), (x2, s2) = d.head(e1), d.head(e2)
    xs = [list(c) for c in d.crossings]
    xs[x1][s1] = e2
    xs[x2][s2] = e1
    d2 = PlanarDiagram(tuple(tuple(c) for c in xs), basepoint=bp, loops=d.loops)
    d2.validate()
    return Step(move, d, d2, -1, src_edges=(e1, e2), tgt_edges=(e1, e2))


def _r_step(move, d, rw: Rewrite) -> Step:
    return Step(move, d, rw.after.diagram, 0, rewrite=rw)


def _r1_plus(d: PlanarDiagram, move: Move) -> Step:
    (e,) = move.edges
    pin, pout, k = ("p", 1), ("p", 2), ("i", "k")
    if move.side == "left":
        slots = (pin, pout, k, k) if move.sign > 0 else (k, pin, pout, k)
    else:
        slots = (pin, k, k, pout) if move.sign < 0 else (k, k, pout, pin)
    rw = rewrite(d, set(), set(), {e: (1, 2)}, [slots + (move.sign,)], [])
    return _r_step(move, d, rw)


def _r1_minus(d: PlanarDiagram, move: Move) -> Step:
    (k,) = move.edges
    if k in d.loops:
        raise IllegalMove("edge is a crossingless circle")
    (xt, st), (xh, sh) = d.tail(k), d.head(k)
    if xt != xh or (st - sh) % 4 not in (1, 3):
        raise IllegalMove(f"edge {k} is not the loop of a kink")
    x = xt
    ins, outs = _in_out(d.crossings[x][4])
    s_in = next(s for s in ins if s != sh)
    s_out = next(s for s in outs if s != st)

    def build(port_of):
        return [], [(port_of[(x, s_in)], port_of[(x, s_out)])]

    rw = rewrite(d, {x}, {k}, {}, None, None, build=build)
    return _r_step(move, d, rw)


def _r2_plus(d: PlanarDiagram, move: Move) -> Step:
    e1, e2 = move.edges
    if e1 == e2:
        raise IllegalMove("R2 needs two distinct edges")
    loops = set(d.loops)
    if e1 in loops or e2 in loops:
        # a crossingless circle can be placed in any face, oriented
        # counterclockwise, so only the other edge's direction matters
        d1 = d2 = 1
        if e1 not in loops:
            d1 = 1 if _forward(d, _some_dart(d, e1)) else -1
        if e2 not in loops:
            d2 = -1 if _forward(d, _some_dart(d, e2)) else 1
    else:
        face = None
        for f in d.faces():
            darts = {}
            for x, s in f:
                darts.setdefault(d.crossings[x][s], (x, s))
            if e1 in darts and e2 in darts:
                face = (darts[e1], darts[e2])
                break
        if face is None:
            raise IllegalMove(f"edges {e1} and {e2} do not share a face")
        d1 = -1 if _forward(d, face[0]) else 1
        d2 = 1 if _forward(d, face[1]) else -1
    E, N, W, S = "E", "N", "W", "S"
    ccw = [E, N, W, S]
    opp = {E: W, W: E, N: S, S: N}
    first1 = 1 if d1 > 0 else 2
    first2 = 1 if d2 > 0 else 2
    crossings = []
    for pos in (1, 2):
        down = pos == first1
        in1 = N if down else S
        in2 = W if d2 > 0 else E
        lab = {}
        lab[in1] = ("p", 1) if pos == first1 else ("i", "m1")
        lab[opp[in1]] = ("i", "m1") if pos == first1 else ("p", 2)
        lab[in2] = ("p", 3) if pos == first2 else ("i", "m2")
        lab[opp[in2]] = ("i", "m2") if pos == first2 else ("p", 4)
        i0 = ccw.index(in2)
        order = ccw[i0:] + ccw[:i0]
        sign = 1 if order[3] == in1 else -1
        crossings.append(tuple(lab[o] for o in order) + (sign,))
    rw = rewrite(d, set(), set(), {e1: (1, 2), e2: (3, 4)}, crossings, [])
    return _r_step(move, d, rw)


def _some_dart(d: PlanarDiagram, e):
    for f in d.faces():
        for x, s in f:
            if d.crossings[x][s] == e:
                return (x, s)
    raise IllegalMove(f"edge {e} is not in the diagram")


def _strand_through(d: PlanarDiagram, e):
    """Slots where the strand of edge ``e`` enters its tail and leaves its head."""
    (xt, st), (xh, sh) = d.tail(e), d.head(e)
    return (xt, (st + 2) % 4), (xh, (sh + 2) % 4)


def _is_over(d: PlanarDiagram, x: int, s: int) -> bool:
    return s % 2 == 1


def _r2_minus(d: PlanarDiagram, move: Move) -> Step:
    f1, f2 = move.edges
    if f1 == f2 or f1 in d.loops or f2 in d.loops:
        raise IllegalMove("R2 needs two distinct edges between crossings")
    if _face_with(d, (f1, f2), size=2) is None:
        raise IllegalMove(f"edges {f1} and {f2} do not bound a bigon")
    (xt1, st1), (xh1, sh1) = d.tail(f1), d.head(f1)
    (xt2, _), (xh2, _) = d.tail(f2), d.head(f2)
    X = {xt1, xh1}
    if len(X) != 2 or {xt2, xh2} != X:
        raise IllegalMove("bigon edges must join the same two crossings")
    if _is_over(d, xt1, st1) != _is_over(d, xh1, sh1):
        raise IllegalMove("the bigon is alternating; R2 does not apply")
    (a_in, a_out), (b_in, b_out) = _strand_through(d, f1), _strand_through(d, f2)

    def build(port_of):
        return [], [(port_of[a_in], port_of[a_out]), (port_of[b_in], port_of[b_out])]

    rw = rewrite(d, X, {f1, f2}, {}, None, None, build=build)
    return _r_step(move, d, rw)


def _r3(d: PlanarDiagram, move: Move) -> Step:
    fs = move.edges
    if len(set(fs)) != 3 or any(f in d.loops for f in fs):
        raise IllegalMove("R3 needs three distinct edges between crossings")
    if _face_with(d, fs, size=3) is None:
        raise IllegalMove(f"edges {fs} do not bound a triangle")
    X = set()
    for f in fs:
        X.update((d.tail(f)[0], d.head(f)[0]))
    if len(X) != 3:
        raise IllegalMove("triangle must have three distinct crossings")
    overs = []
    for f in fs:
        (xt, st), (xh, sh) = d.tail(f), d.head(f)
        overs.append(int(_is_over(d, xt, st)) + int(_is_over(d, xh, sh)))
    if sorted(overs) != [0, 1, 2]:
        raise IllegalMove("the triangle is alternating; R3 does not apply")
    local = sorted(X)

    def build(port_of):
        new = []
        for x in local:
            c = d.crossings[x]
            lab = [None] * 4
            for i, f in enumerate(fs):
                (xt, st), (xh, sh) = d.tail(f), d.head(f)
                enter, leave = _strand_through(d, f)
                if x == xh:
                    # after the move the strand of f meets x first
                    lab[sh] = ("p", port_of[enter])
                    lab[(sh + 2) % 4] = ("i", f"m{i}")
                elif x == xt:
                    lab[(st + 2) % 4] = ("i", f"m{i}")
                    lab[st] = ("p", port_of[leave])
            new.append(tuple(lab) + (c[4],))
        return new, []

    rw = rewrite(d, set(local), set(fs), {}, None, None, build=build)
    return _r_step(move, d, rw)


# ----------------------------------------------------------------------------
# Movies


def _diagram_from(data) -> PlanarDiagram:
    if isinstance(data, PlanarDiagram):
        return data
    if isinstance(data, str):
        return dt_to_diagram(parse_dt(data))
    if isinstance(data, dict):
        if "dt" in data:
            d = dt_to_diagram(parse_dt(data["dt"]))
            if data.get("basepoint") is not None:
                d = d.with_basepoint(int(data["basepoint"]))
            return d
        return PlanarDiagram.from_json(data)
    raise InvalidDiagram("cannot read a start diagram from this value")


@dataclass
class Movie:
    start: PlanarDiagram
    moves: list = field(default_factory=list)

    def __post_init__(self):
        self.start = _diagram_from(self.start)
        self.moves = [m if isinstance(m, Move) else Move.from_json(m) for m in self.moves]
        self._steps = None

    @classmethod
    def from_json(cls, data) -> "Movie":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(data["start"], list(data.get("moves", [])))

    @classmethod
    def load(cls, path: str) -> "Movie":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))

    def to_json(self) -> dict:
        return {"start": self.start.to_json(), "moves": [m.to_json() for m in self.moves]}

    @property
    def steps(self) -> list:
        if self._steps is None:
            steps = []
            d = self.start
            for m in self.moves:
                st = apply_move(d, m)
                steps.append(st)
                d = st.after
            self._steps = steps
        return self._steps

    @property
    def end(self) -> PlanarDiagram:
        return self.steps[-1].after if self.moves else self.start

    def frames(self) -> list:
        return [self.start] + [s.after for s in self.steps]

    def euler_characteristic(self) -> int:
        return sum(s.chi for s in self.steps)

    def basepoint_track(self) -> list:
        """Basepoint edge of every frame."""
        return [f.basepoint for f in self.frames()]

    def stabilized(self, at: int | None = None, edge: int | None = None) -> "Movie":
        """Insert a tube (split a small circle off and merge it back)."""
        at = len(self.moves) if at is None else at
        frame = self.frames()[at]
        if edge is None:
            edge = frame.basepoint if frame.basepoint not in frame.loops or not frame.n else frame.edges()[0]
        lab = _fresh_label(frame)
        tube = [Move("saddle", (edge, edge)), Move("saddle", (lab, edge))]
        return Movie(self.start, self.moves[:at] + tube + self.moves[at:])


class ChainMap:
    """Composite of elementary maps between reduced cube complexes."""

    def __init__(self, complexes: list, matrices: list, h_power: int = 0):
        self.complexes = complexes
        self.matrices = matrices
        self.h_power = h_power

    @property
    def source(self) -> CubeComplex:
        return self.complexes[0]

    @property
    def target(self) -> CubeComplex:
        return self.complexes[-1]

    def apply(self, vec: dict) -> dict:
        for mat in self.matrices:
            vec = apply_matrix(mat, vec)
        if self.h_power:
            vec = {g: ring_mul_bits(c, 1 << self.h_power) for g, c in vec.items()}
        return vec

    def composed(self) -> dict:
        out = {}
        for g in range(len(self.source)):
            img = self.apply({g: 1})
            if img:
                out[g] = img
        return out


def apply_matrix(mat: dict, vec: dict) -> dict:
    out: dict = {}
    for g, c in vec.items():
        for t, e in mat.get(g, {}).items():
            v = out.get(t, 0) ^ ring_mul_bits(c, e)
            if v:
                out[t] = v
            else:
                out.pop(t, None)
    return out


def movie_chain_map(m: Movie, max_generators: int = 200_000, khovanov: bool = False) -> ChainMap:
    """Chain map of the cobordism, frame by frame on full reduced cubes.

    With ``khovanov=True`` every elementary map is built from the ``H = 0``
    structure constants (the maps then only make sense on the complexes
    with ``H`` set to zero).
    """
    frames = m.frames()
    cxs = [build_reduced_complex(f, max_generators=max_generators) for f in frames]
    hbits = 0 if khovanov else HBITS
    mats = [st.matrix(cxs[i], cxs[i + 1], hbits) for i, st in enumerate(m.steps)]
    return ChainMap(cxs, mats)


@dataclass
class InducedClass:
    """A homogeneous cycle in a reduced cube complex."""

    chain: dict
    h: int
    q: int
    complex: CubeComplex | None = None

    @classmethod
    def of(cls, cx, chain: dict, h: int | None = None, q: int | None = None) -> "InducedClass":
        chain = {g: c for g, c in chain.items() if c}
        if chain:
            g0 = next(iter(chain))
            h = cx.grades[g0][0]
            q = cx.grades[g0][1] - 2 * (chain[g0].bit_length() - 1)
        return cls(chain, h if h is not None else 0, q if q is not None else 0, cx)

    def is_zero(self) -> bool:
        return not self.chain or (self.complex is not None and is_boundary(self.complex, self.chain))

    def to_json(self) -> dict:
        labels = self.complex.labels if self.complex is not None else None
        terms = []
        for g, c in sorted(self.chain.items()):
            entry = {"generator": g, "coefficient": poly_str(c)}
            if labels:
                vertex, labs = labels[g]
                entry["vertex"] = list(vertex)
                entry["labels"] = ["x" if x == X_LABEL else "1" for x in labs]
            terms.append(entry)
        return {"h": self.h, "q": self.q, "chain": terms}


def stabilize_map(f, times: int = 1):
    """``H^times`` times a chain map or an induced class (internal tubes)."""
    if times < 0:
        raise ValueError("stabilization count must be nonnegative")
    if isinstance(f, ChainMap):
        return ChainMap(f.complexes, f.matrices, f.h_power + times)
    if isinstance(f, InducedClass):
        h = 1 << times
        chain = {g: ring_mul_bits(c, h) for g, c in f.chain.items()}
        return InducedClass(chain, f.h, f.q - 2 * times, f.complex)
    raise TypeError("stabilize_map takes a ChainMap or an InducedClass")


# ----------------------------------------------------------------------------
# Homology classes


def graded_basis(cx, h: int, q: int) -> list:
    """F2 basis ``(generator, k)`` of the piece of ``cx`` in bidegree ``(h, q)``.

    ``(g, k)`` stands for ``H^k g``, present when ``q_g - 2k = q``, ``k >= 0``.
    """
    out = []
    for g, (gh, gq) in enumerate(cx.grades):
        if gh == h and gq >= q and (gq - q) % 2 == 0:
            out.append((g, (gq - q) // 2))
    return out


def _as_bits(vec: dict, index: dict, q: int, grades) -> int:
    bits = 0
    for g, c in vec.items():
        e = c
        while e:
            k = e.bit_length() - 1
            e ^= 1 << k
            if grades[g][1] - 2 * k != q:
                raise NotACycle("chain is not homogeneous")
            bits ^= 1 << index[(g, k)]
    return bits


def is_boundary(cx, vec: dict) -> bool:
    """Whether a homogeneous chain lies in the image of the differential."""
    if not vec:
        return True
    g0 = next(iter(vec))
    h = cx.grades[g0][0]
    q = cx.grades[g0][1] - 2 * (vec[g0].bit_length() - 1)
    tgt = graded_basis(cx, h, q)
    index = {b: i for i, b in enumerate(tgt)}
    span = SpanF2()
    for g, k in graded_basis(cx, h - 1, q):
        img = apply_matrix({g: cx.diff.get(g, {})}, {g: 1 << k})
        span.add(_as_bits(img, index, q, cx.grades))
    return span.contains(_as_bits(vec, index, q, cx.grades))


def is_cycle(cx, vec: dict) -> bool:
    return not apply_matrix(cx.diff, vec)


def homology_classes(cx, h: int, q: int) -> list:
    """Cycles in bidegree ``(h, q)`` spanning homology there (as chains)."""
    basis = graded_basis(cx, h, q)
    if not basis:
        return []
    tgt = graded_basis(cx, h + 1, q)
    index = {b: i for i, b in enumerate(tgt)}
    cols = []
    for g, k in basis:
        img = apply_matrix({g: cx.diff.get(g, {})}, {g: 1 << k})
        cols.append(_as_bits(img, index, q, cx.grades) if img else 0)
    from .linalg import nullspace_f2

    bindex = {b: i for i, b in enumerate(basis)}
    span = SpanF2()
    for g, k in graded_basis(cx, h - 1, q):
        img = apply_matrix({g: cx.diff.get(g, {})}, {g: 1 << k})
        span.add(_as_bits(img, bindex, q, cx.grades) if img else 0)
    out = []
    for combo in nullspace_f2(cols):
        bits = 0
        vec: dict = {}
        i = 0
        c = combo
        while c:
            if c & 1:
                g, k = basis[i]
                vec[g] = vec.get(g, 0) ^ (1 << k)
                bits ^= 1 << i
            c >>= 1
            i += 1
        if span.add(bits):
            out.append({g: v for g, v in vec.items() if v})
    return out


def maps_agree_on_homology(f: ChainMap, g: ChainMap) -> bool:
    """Whether two chain maps with the same ends induce the same map."""
    src, tgt = f.source, g.target
    degs = sorted(set(src.grades))
    hs = sorted({h for h, _ in degs})
    qmin = min(q for _, q in degs)
    qmax = max(q for _, q in degs)
    for h in hs:
        for q in range(qmin, qmax + 1):
            if (q - qmin) % 2:
                continue
            for z in homology_classes(src, h, q):
                diff = f.apply(z)
                for t, c in g.apply(z).items():
                    v = diff.get(t, 0) ^ c
                    if v:
                        diff[t] = v
                    else:
                        diff.pop(t, None)
                if any(not is_boundary(tgt, part) for part in homogeneous_parts(tgt, diff)):
                    return False
    return True


def homogeneous_parts(cx, vec: dict) -> list:
    """Split a chain into its pieces of constant quantum degree."""
    parts: dict = {}
    for g, c in vec.items():
        e = c
        while e:
            k = e.bit_length() - 1
            e ^= 1 << k
            part = parts.setdefault(cx.grades[g][1] - 2 * k, {})
            part[g] = part.get(g, 0) ^ (1 << k)
    return [p for _, p in sorted(parts.items())]


def induces_isomorphism(mat: dict, src, tgt) -> bool:
    """Whether a degree-preserving chain map is an isomorphism on homology.

    Compares dimensions bidegree by bidegree and checks that the images of
    a homology basis stay independent modulo boundaries.
    """
    degs = set(src.grades) | set(tgt.grades)
    if not degs:
        return True
    qs = [q for _, q in degs]
    for h in sorted({h for h, _ in degs}):
        for q in range(min(qs), max(qs) + 1):
            zs = homology_classes(src, h, q)
            if len(zs) != len(homology_classes(tgt, h, q)):
                return False
            if not zs:
                continue
            index = {b: i for i, b in enumerate(graded_basis(tgt, h, q))}
            span = SpanF2()
            for g, k in graded_basis(tgt, h - 1, q):
                img = apply_matrix({g: tgt.diff.get(g, {})}, {g: 1 << k})
                if img:
                    span.add(_as_bits(img, index, q, tgt.grades))
            for z in zs:
                img = apply_matrix(mat, z)
                if not img or not span.add(_as_bits(img, index, q, tgt.grades)):
                    return False
    return True


def is_chain_map(mat: dict, src, tgt) -> bool:
    """``d f = f d`` checked generator by generator."""
    for g in range(len(src)):
        a = apply_matrix(tgt.diff, apply_matrix(mat, {g: 1}))
        for t, c in apply_matrix(mat, apply_matrix(src.diff, {g: 1})).items():
            v = a.get(t, 0) ^ c
            if v:
                a[t] = v
            else:
                a.pop(t, None)
        if a:
            return False
    return True


def unknot_generator(cx) -> dict:
    """A cycle representing the tower generator of an unknot diagram."""
    classes = homology_classes(cx, 0, 0)
    for z in classes:
        if not is_boundary(cx, z):
            return z
    raise NotACycle("no tower class in degree (0, 0); is the diagram an unknot?")


def induced_class(m: Movie, xi: dict | None = None) -> InducedClass:
    """Image of the unknot's tower generator under the movie's map."""
    f = movie_chain_map(m)
    if xi is None:
        xi = unknot_generator(f.source)
    img = f.apply(xi)
    return InducedClass.of(f.target, img, 0, m.euler_characteristic())


def class_coordinates(cx, chain) -> tuple:
    """Decomposition of ``cx`` and the coordinates of a homogeneous cycle."""
    if isinstance(chain, InducedClass):
        chain = chain.chain
    if not is_cycle(cx, chain):
        raise NotACycle("chain is not a cycle")
    if not chain:
        dec, _ = decompose_tracked(cx)
        return dec, Coordinates(0, 0, False)
    dec, (coords,) = decompose_tracked(cx, [chain])
    return dec, coords


def evaluate_class_pairing(m: Movie, phi) -> RingElement:
    """Push a cycle through a movie ending at an unknot; read off ``H^k``.

    The end diagram's homology is ``F2[H]`` on the tower class, so the image
    is ``c * H^k`` times it for ``c`` in F2.
    """
    f = movie_chain_map(m)
    if isinstance(phi, InducedClass):
        phi = phi.chain
    phi = {g: c for g, c in phi.items() if c}
    if not is_cycle(f.source, phi):
        raise NotACycle("the chain to evaluate is not a cycle")
    img = f.apply(phi)
    cx = f.target
    if not img:
        return RingElement(0)
    g0 = next(iter(img))
    q = cx.grades[g0][1] - 2 * (img[g0].bit_length() - 1)
    if cx.grades[g0][0] != 0 or q > 0 or q % 2:
        return RingElement(0) if is_boundary(cx, img) else _raise_not_unknot()
    xi = unknot_generator(cx)
    k = -q // 2
    shifted = {g: ring_mul_bits(c, 1 << k) for g, c in xi.items()}
    diff = dict(img)
    for t, c in shifted.items():
        v = diff.get(t, 0) ^ c
        if v:
            diff[t] = v
        else:
            diff.pop(t, None)
    if not diff or is_boundary(cx, diff):
        return RingElement(1 << k)
    if is_boundary(cx, img):
        return RingElement(0)
    return _raise_not_unknot()


def _raise_not_unknot():
    raise NotACycle("image is not a multiple of the unknot class")
