"""Dense F2 linear algebra on Python-int bit rows."""
from __future__ import annotations


def rank_f2(rows) -> int:
    pivots: dict[int, int] = {}
    r = 0
    for v in rows:
        while v:
            top = v.bit_length() - 1
            p = pivots.get(top)
            if p is None:
                pivots[top] = v
                r += 1
                break
            v ^= p
    return r


class SpanF2:
    """Incrementally built row space with membership tests and coordinates."""

    def __init__(self):
        self.pivots: dict[int, tuple[int, int]] = {}  # top bit -> (row, combo)
        self.count = 0

    def add(self, v: int) -> bool:
        combo = 1 << self.count
        self.count += 1
        while v:
            top = v.bit_length() - 1
            p = self.pivots.get(top)
            if p is None:
                self.pivots[top] = (v, combo)
                return True
            v ^= p[0]
            combo ^= p[1]
        return False

    def reduce(self, v: int) -> tuple[int, int]:
        """Return ``(remainder, combo)`` with ``v = remainder + sum(combo rows)``."""
        combo = 0
        while v:
            top = v.bit_length() - 1
            p = self.pivots.get(top)
            if p is None:
                return v, combo
            v ^= p[0]
            combo ^= p[1]
        return 0, combo

    def contains(self, v: int) -> bool:
        return self.reduce(v)[0] == 0


def solve_f2(columns: list[int], target: int):
    """Find a subset of ``columns`` XOR-ing to ``target``; bitmask or None."""
    span = SpanF2()
    for c in columns:
        span.add(c)
    rem, combo = span.reduce(target)
    return combo if rem == 0 else None


def nullspace_f2(columns: list[int]) -> list[int]:
    """Basis (as index bitmasks) of linear relations among ``columns``."""
    pivots: dict[int, tuple[int, int]] = {}
    out = []
    for i, v in enumerate(columns):
        combo = 1 << i
        while v:
            top = v.bit_length() - 1
            p = pivots.get(top)
            if p is None:
                pivots[top] = (v, combo)
                break
            v ^= p[0]
            combo ^= p[1]
        if v == 0:
            out.append(combo)
    return out
