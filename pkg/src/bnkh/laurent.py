"""Exact matrices over the Laurent ring Z[t, t^-1] with the bar involution.

Polynomials are immutable maps from exponent to integer coefficient.  All
arithmetic uses Python integers, so results are exact.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterable, Sequence

from .errors import NonInvertibleBasisChange, NotDualPair


@dataclass(frozen=True)
class LaurentPoly:
    terms: tuple[tuple[int, int], ...] = ()  # sorted (exponent, nonzero coefficient)

    @classmethod
    def from_dict(cls, d) -> "LaurentPoly":
        acc: dict[int, int] = {}
        for e, c in dict(d).items():
            e = int(e)
            acc[e] = acc.get(e, 0) + int(c)
        return cls(tuple(sorted((e, c) for e, c in acc.items() if c)))

    @classmethod
    def const(cls, c: int) -> "LaurentPoly":
        return cls(((0, c),)) if c else cls()

    @classmethod
    def mono(cls, c: int, e: int) -> "LaurentPoly":
        return cls(((e, c),)) if c else cls()

    def as_dict(self) -> dict[int, int]:
        return dict(self.terms)

    def to_json(self) -> dict:
        return {str(e): c for e, c in self.terms}

    def __add__(self, other) -> "LaurentPoly":
        other = _coerce(other)
        d = self.as_dict()
        for e, c in other.terms:
            d[e] = d.get(e, 0) + c
        return LaurentPoly.from_dict(d)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other) -> "LaurentPoly":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "LaurentPoly":
        return _coerce(other) - self

    def __mul__(self, other) -> "LaurentPoly":
        other = _coerce(other)
        d: dict[int, int] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                d[e1 + e2] = d.get(e1 + e2, 0) + c1 * c2
        return LaurentPoly.from_dict(d)

    __rmul__ = __mul__

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_unit(self) -> bool:
        """Units of Z[t, t^-1] are exactly the monomials with coefficient +-1."""
        return len(self.terms) == 1 and abs(self.terms[0][1]) == 1

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms, key=lambda ec: -ec[0]):
            mag = abs(c)
            if e == 0:
                body = str(mag)
            else:
                var = "t" if e == 1 else f"t^{e}"
                body = var if mag == 1 else f"{mag}{var}"
            parts.append(("-" if c < 0 else "+") + body)
        s = "".join(parts)
        return s[1:] if s.startswith("+") else s


def _coerce(x) -> LaurentPoly:
    if isinstance(x, LaurentPoly):
        return x
    if isinstance(x, int):
        return LaurentPoly.const(x)
    raise TypeError(f"cannot use {type(x).__name__} as a Laurent polynomial")


ZERO = LaurentPoly()
ONE = LaurentPoly.const(1)
T = LaurentPoly.mono(1, 1)
TINV = LaurentPoly.mono(1, -1)


def bar(p: LaurentPoly) -> LaurentPoly:
    """The involution t -> t^-1."""
    return LaurentPoly(tuple(sorted((-e, c) for e, c in p.terms)))


_TERM = re.compile(r"([+-]?)\s*(\d*)\s*(\*?\s*t(?:\^\s*\(?\s*(-?\d+)\s*\)?)?)?")


def parse_poly(text: str) -> LaurentPoly:
    """Parse strings like ``t^-1-2+t`` or ``-3+t+3t^-1``."""
    s = text.replace(" ", "").replace("−", "-").replace("⁻¹", "^-1")
    if s in ("", "0"):
        return ZERO
    d: dict[int, int] = {}
    pos = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse Laurent polynomial {text!r} at {s[pos:]!r}")
        sign, num, var, exp = m.groups()
        if not num and not var:
            raise ValueError(f"cannot parse Laurent polynomial {text!r}")
        c = int(num) if num else 1
        if sign == "-":
            c = -c
        e = 0 if not var else (int(exp) if exp is not None else 1)
        d[e] = d.get(e, 0) + c
        pos = m.end()
    return LaurentPoly.from_dict(d)


@dataclass(frozen=True)
class LaurentMatrix:
    rows: tuple[tuple[LaurentPoly, ...], ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        n = len(self.rows)
        if any(len(r) != n for r in self.rows):
            raise ValueError("matrix must be square")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], labels=None) -> "LaurentMatrix":
        conv = []
        for r in rows:
            conv.append(tuple(_entry(x) for x in r))
        return cls(tuple(conv), tuple(labels) if labels else None)

    @classmethod
    def identity(cls, n: int) -> "LaurentMatrix":
        return cls(tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij) -> LaurentPoly:
        i, j = ij
        return self.rows[i][j]

    def transpose(self) -> "LaurentMatrix":
        return LaurentMatrix(tuple(zip(*self.rows)) if self.rows else (), self.labels)

    def bar(self) -> "LaurentMatrix":
        return LaurentMatrix(tuple(tuple(bar(x) for x in r) for r in self.rows), self.labels)

    def __matmul__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        n = self.n
        if other.n != n:
            raise ValueError("dimension mismatch")
        cols = list(zip(*other.rows)) if n else []
        out = []
        for r in self.rows:
            row = []
            for c in cols:
                acc = ZERO
                for x, y in zip(r, c):
                    if x and y:
                        acc = acc + x * y
                row.append(acc)
            out.append(tuple(row))
        return LaurentMatrix(tuple(out))

    def is_hermitian(self) -> bool:
        return self == self.transpose().bar().with_labels(self.labels)

    def with_labels(self, labels) -> "LaurentMatrix":
        return LaurentMatrix(self.rows, tuple(labels) if labels else None)

    def det(self) -> LaurentPoly:
        return determinant(self)

    def submatrix(self, keep: Sequence[int]) -> "LaurentMatrix":
        rows = tuple(tuple(self.rows[i][j] for j in keep) for i in keep)
        labels = tuple(self.labels[i] for i in keep) if self.labels else None
        return LaurentMatrix(rows, labels)

    def to_json(self) -> list:
        return [[x.to_json() for x in r] for r in self.rows]

    def __str__(self) -> str:
        cells = [[str(x) for x in r] for r in self.rows]
        if not cells:
            return "[]"
        w = max(len(c) for r in cells for c in r)
        return "\n".join("[ " + "  ".join(c.rjust(w) for c in r) + " ]" for r in cells)


def _entry(x) -> LaurentPoly:
    if isinstance(x, LaurentPoly):
        return x
    if isinstance(x, int):
        return LaurentPoly.const(x)
    if isinstance(x, str):
        return parse_poly(x)
    if isinstance(x, dict):
        return LaurentPoly.from_dict(x)
    raise TypeError(f"unsupported matrix entry {x!r}")


def determinant(m: LaurentMatrix) -> LaurentPoly:
    """Laplace expansion along rows with memoized minors (exact)."""
    n = m.n
    rows = m.rows

    @lru_cache(maxsize=None)
    def minor(i: int, cols: int) -> LaurentPoly:
        if i == n:
            return ONE
        acc = ZERO
        sign = 1
        for j in range(n):
            if cols >> j & 1:
                x = rows[i][j]
                if x:
                    sub = minor(i + 1, cols & ~(1 << j))
                    if sub:
                        acc = acc + (x * sub if sign > 0 else -(x * sub))
                sign = -sign
        return acc

    return minor(0, (1 << n) - 1)


def congruence(Q: LaurentMatrix, P: LaurentMatrix) -> LaurentMatrix:
    """Gram matrix in the basis given by the columns of ``P``: ``P^T Q bar(P)``."""
    if Q.n != P.n:
        raise ValueError("dimension mismatch")
    if not determinant(P).is_unit():
        raise NonInvertibleBasisChange(f"det P = {determinant(P)} is not a unit")
    return P.transpose() @ Q @ P.bar()


def cancel_hyperbolic_pairs(Q: LaurentMatrix, pairs: Iterable[tuple[int, int]]) -> LaurentMatrix:
    """Split off dual pairs ``(i, j)`` and return the form on the other indices.

    Each ``i`` must pair by a unit with ``j`` and with nothing else; the
    retained block is then unchanged by the splitting.  Indices are 0-based.
    """
    pairs = [tuple(p) for p in pairs]
    drop = set()
    for i, j in pairs:
        if not Q[i, j].is_unit():
            raise NotDualPair(f"entry ({i}, {j}) = {Q[i, j]} is not a unit")
        for k in range(Q.n):
            if k == j:
                continue
            if Q[i, k] or Q[k, i]:
                raise NotDualPair(f"basis element {i} also pairs with {k}")
        drop.update((i, j))
    keep = [k for k in range(Q.n) if k not in drop]
    return Q.submatrix(keep)


def forms_equal(A: LaurentMatrix, B: LaurentMatrix) -> bool:
    return A.n == B.n and A.rows == B.rows


def load_matrix(path_or_data, labels=None) -> LaurentMatrix:
    if isinstance(path_or_data, (list, tuple, dict)):
        data = path_or_data
    else:
        with open(path_or_data, encoding="utf-8") as fh:
            data = json.load(fh)
    if isinstance(data, dict):
        labels = data.get("labels", labels)
        data = data["rows"]
    return LaurentMatrix.from_rows(data, labels)


def fixture(name: str) -> LaurentMatrix:
    """Matrices shipped with the package: q0, q0_prime, p, p_prime, and results."""
    ref = resources.files("bnkh") / "data" / f"{name}.json"
    return load_matrix(json.loads(ref.read_text(encoding="utf-8")))
