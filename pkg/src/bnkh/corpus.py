"""Generated test material: braid-closure knots and random movies."""
from __future__ import annotations

import itertools
import random

from .codec import PlanarDiagram
from .errors import BasepointViolation, IllegalMove
from .movies import Move, Movie, apply_move


def braid_closure(word, strands: int) -> PlanarDiagram:
    """Closure of a braid word; ``i`` is the generator between strands i, i+1.

    Strands run upwards; positive letters give positive crossings.
    """
    cur = list(range(1, strands + 1))
    nxt = strands + 1
    crossings = []
    for letter in word:
        i = abs(letter) - 1
        if not 0 <= i < strands - 1 or letter == 0:
            raise ValueError(f"letter {letter} does not fit {strands} strands")
        bl, br = cur[i], cur[i + 1]
        tl, tr = nxt, nxt + 1
        nxt += 2
        if letter > 0:
            crossings.append([br, tr, tl, bl, 1])
        else:
            crossings.append([bl, br, tr, tl, -1])
        cur[i], cur[i + 1] = tl, tr
    close = {cur[p]: p + 1 for p in range(strands)}
    loops = []
    for p in range(strands):
        if cur[p] == p + 1:
            loops.append(p + 1)
    out = []
    for c in crossings:
        out.append(tuple(close.get(e, e) for e in c[:4]) + (c[4],))
    d = PlanarDiagram(tuple(out), loops=tuple(loops))
    return d.normalized().validate()


def _permutation(word, strands):
    perm = list(range(strands))
    for letter in word:
        i = abs(letter) - 1
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
    return perm


def is_knot_word(word, strands: int) -> bool:
    perm = _permutation(word, strands)
    seen, p = 0, 0
    while True:
        p = perm[p]
        seen += 1
        if p == 0:
            break
    return seen == strands


def random_knot(rng: random.Random, max_crossings: int = 7, min_crossings: int = 3) -> PlanarDiagram:
    """A knot diagram closing a random braid word."""
    while True:
        strands = rng.choice((2, 3, 3, 4))
        length = rng.randint(max(min_crossings, strands - 1), max_crossings)
        word = [rng.choice((1, -1)) * rng.randint(1, strands - 1) for _ in range(length)]
        if is_knot_word(word, strands):
            return braid_closure(word, strands)


def knot_corpus(count: int, max_crossings: int = 9, seed: int = 0) -> list:
    rng = random.Random(seed)
    return [random_knot(rng, max_crossings) for _ in range(count)]


def legal_moves(d: PlanarDiagram, kinds=("r1-", "r2+", "r2-", "r3")) -> list:
    """Every Reidemeister move of the given kinds that applies to ``d``."""
    edges = [e for e in d.edges() if e not in d.loops]
    cands = []
    if "r1-" in kinds:
        cands += [Move("r1-", (e,)) for e in edges]
    if "r2+" in kinds:
        cands += [Move("r2+", (a, b)) for a, b in itertools.permutations(edges, 2)]
    if "r2-" in kinds:
        cands += [Move("r2-", (a, b)) for a, b in itertools.combinations(edges, 2)]
    if "r3" in kinds:
        cands += [Move("r3", t) for t in itertools.combinations(edges, 3)]
    if "r1+" in kinds:
        cands += [Move("r1+", (e,), s, side) for e in edges for s in (1, -1)
                  for side in ("left", "right")]
    out = []
    for m in cands:
        try:
            apply_move(d, m)
        except (IllegalMove, BasepointViolation):
            continue
        out.append(m)
    return out


def random_reidemeister_walk(rng: random.Random, d: PlanarDiagram, steps: int,
                             max_crossings: int = 9) -> list:
    """Random Reidemeister moves keeping at most ``max_crossings`` crossings."""
    moves = []
    for _ in range(steps):
        kinds = ("r1-", "r2-", "r3") if d.n + 2 > max_crossings else ("r1-", "r2+", "r2-", "r3", "r1+")
        if d.n + 1 > max_crossings:
            kinds = tuple(k for k in kinds if k != "r1+")
        options = legal_moves(d, kinds)
        if not options:
            break
        r3 = [m for m in options if m.type == "r3"]
        m = rng.choice(r3) if r3 and rng.random() < 0.5 else rng.choice(options)
        moves.append(m)
        d = apply_move(d, m).after
    return moves


def random_movie(rng: random.Random, d: PlanarDiagram, length: int = 4,
                 max_crossings: int = 7, genus_rate: float = 0.0) -> Movie:
    """A random movie from ``d`` to a knot diagram.

    Mixes Reidemeister moves with two cobordism patterns that return to a
    knot: a birth followed by a merging saddle, and a split saddle followed
    by the death of the new circle.  With ``genus_rate > 0`` it also adds
    pairs of bands between crossing edges (a split into a two-component
    link and a merge back), each lowering the Euler characteristic by 2.
    """
    moves = []
    cur = d
    for _ in range(length):
        r = rng.random()
        if r < genus_rate:
            chunk = _band_pair(rng, cur)
            if chunk is None:
                continue
        elif r < 0.25:
            lab = max(cur.edges()) + 1
            e = rng.choice([x for x in cur.edges() if x not in cur.loops] or cur.edges())
            chunk = [Move("birth", (lab,)), Move("saddle", (lab, e))]
        elif r < 0.5:
            e = rng.choice([x for x in cur.edges() if x not in cur.loops] or cur.edges())
            lab = max(cur.edges()) + 1
            chunk = [Move("saddle", (e, e)), Move("death", (lab,))]
        else:
            chunk = random_reidemeister_walk(rng, cur, 1, max_crossings)
        for m in chunk:
            cur = apply_move(cur, m).after
        moves.extend(chunk)
    return Movie(d, moves)


def saddles(d: PlanarDiagram) -> list:
    """Every legal saddle between two distinct edges of crossings."""
    edges = [e for e in d.edges() if e not in d.loops]
    out = []
    for a, b in itertools.combinations(edges, 2):
        m = Move("saddle", (a, b))
        try:
            apply_move(d, m)
        except IllegalMove:
            continue
        out.append(m)
    return out


def _band_pair(rng, d):
    first = saddles(d)
    rng.shuffle(first)
    for m1 in first:
        mid = apply_move(d, m1).after
        if len(mid.components()) != 2:
            continue
        back = [m for m in saddles(mid) if len(apply_move(mid, m).after.components()) == 1]
        if back:
            return [m1, rng.choice(back)]
    return None
