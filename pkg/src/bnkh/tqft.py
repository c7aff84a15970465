"""Coefficient ring F2[H], the Bar-Natan Frobenius algebra and bigraded complexes.

Polynomials in H over F2 are packed into Python ints (bit ``i`` is the
coefficient of ``H**i``).  Complexes are stored sparsely, keyed by source
generator, with entries given as packed polynomials.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .errors import IdentityViolation

# H has bidegree (0, -2).
H_QDEG = -2


# ----------------------------------------------------------------------------
# F2[H]


@dataclass(frozen=True, order=True)
class RingElement:
    """Polynomial in H with coefficients in F2, canonically bit-packed."""

    bits: int = 0

    @classmethod
    def monomial(cls, k: int) -> "RingElement":
        return cls(1 << k)

    def __add__(self, other: "RingElement") -> "RingElement":
        return RingElement(self.bits ^ other.bits)

    __sub__ = __add__

    def __mul__(self, other: "RingElement") -> "RingElement":
        return RingElement(ring_mul_bits(self.bits, other.bits))

    def __bool__(self) -> bool:
        return self.bits != 0

    def degree(self) -> int:
        return self.bits.bit_length() - 1

    def is_monomial(self) -> bool:
        return self.bits != 0 and self.bits & (self.bits - 1) == 0

    def truncate(self, n: int) -> "RingElement":
        return RingElement(self.bits & ((1 << n) - 1))

    def __str__(self) -> str:
        return poly_str(self.bits)


def ring_mul_bits(a: int, b: int) -> int:
    """Carry-less product of two packed polynomials."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def ring_mul(a: RingElement, b: RingElement) -> RingElement:
    return a * b


def poly_str(bits: int) -> str:
    if bits == 0:
        return "0"
    terms = []
    k = 0
    while bits:
        if bits & 1:
            terms.append("1" if k == 0 else ("H" if k == 1 else f"H^{k}"))
        bits >>= 1
        k += 1
    return "+".join(terms)


ZERO = RingElement(0)
ONE = RingElement(1)
H = RingElement(2)


# ----------------------------------------------------------------------------
# Bar-Natan algebra A = F2[H]{1, X}

UNIT_LABEL = 0  # the element 1, q-degree +1
X_LABEL = 1  # the element X, q-degree -1
LABEL_QDEG = (1, -1)

Tensor = dict  # tuple of labels -> packed polynomial


def _add_into(acc: dict, key, coeff: int) -> None:
    v = acc.get(key, 0) ^ coeff
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


class BNAlgebra:
    """Structure maps of the Frobenius algebra F2[H][X]/(X^2 - HX).

    ``h`` is the value substituted for H; ``h=0`` gives the Khovanov algebra.
    """

    def __init__(self, h: int = H.bits):
        self.h = h

    def mult(self, a: int, b: int) -> Tensor:
        if a == UNIT_LABEL:
            return {(b,): 1}
        if b == UNIT_LABEL:
            return {(a,): 1}
        return {(X_LABEL,): self.h} if self.h else {}

    def comult(self, a: int) -> Tensor:
        if a == X_LABEL:
            return {(X_LABEL, X_LABEL): 1}
        out = {(UNIT_LABEL, X_LABEL): 1, (X_LABEL, UNIT_LABEL): 1}
        if self.h:
            out[(UNIT_LABEL, UNIT_LABEL)] = self.h
        return out

    def unit(self) -> Tensor:
        return {(UNIT_LABEL,): 1}

    def counit(self, a: int) -> Tensor:
        return {(): 1} if a == X_LABEL else {}

    # -- tensor-power machinery for the axiom checks ---------------------
    def apply(self, f: Callable[..., Tensor], arity: int, pos: int, t: Tensor) -> Tensor:
        """Apply ``f`` (taking ``arity`` labels) at tensor slot ``pos``."""
        out: Tensor = {}
        for key, c in t.items():
            head, mid, tail = key[:pos], key[pos:pos + arity], key[pos + arity:]
            for k2, c2 in f(*mid).items():
                _add_into(out, head + k2 + tail, ring_mul_bits(c, c2))
        return out


def _truncated(t: Tensor, n: int) -> Tensor:
    mask = (1 << n) - 1
    return {k: v & mask for k, v in t.items() if v & mask}


@dataclass
class FrobeniusReport:
    truncation: int
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(passed for _, passed in self.checks)


def verify_frobenius(N: int = 2, algebra: BNAlgebra | None = None) -> FrobeniusReport:
    """Check the Frobenius axioms and the genus relation in F2[H]/H^N.

    Every identity is evaluated on all basis tensors.  The first failing axiom
    raises :class:`IdentityViolation` carrying its name.
    """
    if N < 2:
        raise ValueError("truncation order must be at least 2")
    A = algebra or BNAlgebra()
    report = FrobeniusReport(N)
    labels = (UNIT_LABEL, X_LABEL)

    def check(name, lhs, rhs):
        ok = _truncated(lhs, N) == _truncated(rhs, N)
        report.checks.append((name, ok))
        if not ok:
            raise IdentityViolation(f"{name} fails in F2[H]/H^{N}")

    for a, b, c in itertools.product(labels, repeat=3):
        t = {(a, b, c): 1}
        check("associativity",
              A.apply(A.mult, 2, 0, A.apply(A.mult, 2, 0, t)),
              A.apply(A.mult, 2, 0, A.apply(A.mult, 2, 1, t)))
    for a, b in itertools.product(labels, repeat=2):
        check("commutativity", A.mult(a, b), A.mult(b, a))
        t = {(a, b): 1}
        lhs = A.apply(A.comult, 1, 0, A.apply(A.mult, 2, 0, t))
        mid = A.apply(A.mult, 2, 0, A.apply(A.comult, 1, 1, t))
        rhs = A.apply(A.mult, 2, 1, A.apply(A.comult, 1, 0, t))
        check("frobenius relation (left)", lhs, mid)
        check("frobenius relation (right)", lhs, rhs)
    for a in labels:
        t = {(a,): 1}
        d = A.apply(A.comult, 1, 0, t)
        check("coassociativity", A.apply(A.comult, 1, 0, d), A.apply(A.comult, 1, 1, d))
        check("cocommutativity", d, {(k[1], k[0]): v for k, v in d.items()})
        check("counit law", A.apply(A.counit, 1, 1, d), t)
        u = A.apply(lambda: A.unit(), 0, 0, t)
        check("unit law", A.apply(A.mult, 2, 0, u), t)
        check("genus relation m.delta = H", A.apply(A.mult, 2, 0, d),
              {k: ring_mul_bits(v, A.h) for k, v in t.items() if ring_mul_bits(v, A.h)})
    return report


# ----------------------------------------------------------------------------
# Bigraded complexes


@dataclass
class BigradedComplex:
    """Free F2[H]-module with a differential of bidegree (1, 0).

    ``grades[i]`` is the bigrading ``(h, q)`` of generator ``i``;
    ``diff[i]`` maps target ids to packed-polynomial coefficients.
    """

    grades: list[tuple[int, int]] = field(default_factory=list)
    diff: dict[int, dict[int, int]] = field(default_factory=dict)
    labels: list | None = None

    def __len__(self) -> int:
        return len(self.grades)

    def add_generator(self, h: int, q: int, label=None) -> int:
        self.grades.append((h, q))
        if self.labels is not None:
            self.labels.append(label)
        return len(self.grades) - 1

    def add_entry(self, src: int, tgt: int, coeff: int) -> None:
        row = self.diff.setdefault(src, {})
        _add_into(row, tgt, coeff)
        if not row:
            del self.diff[src]

    def entries(self) -> Iterable[tuple[int, int, int]]:
        for s, row in self.diff.items():
            for t, c in row.items():
                yield s, t, c

    def homogeneous_support(self) -> dict[int, set[int]]:
        """Differential as presence sets; exponents follow from gradings."""
        return {s: set(row) for s, row in self.diff.items() if row}

    @classmethod
    def from_support(cls, grades, support: dict[int, Iterable[int]]) -> "BigradedComplex":
        c = cls(list(grades))
        for s, targets in support.items():
            qs = grades[s][1]
            for t in targets:
                m = (grades[t][1] - qs) // 2
                c.diff.setdefault(s, {})[t] = 1 << m
        return c

    def apply(self, chain: dict[int, int]) -> dict[int, int]:
        out: dict[int, int] = {}
        for g, c in chain.items():
            for t, e in self.diff.get(g, {}).items():
                _add_into(out, t, ring_mul_bits(c, e))
        return out

    def specialize(self, h_value: int = 0) -> "BigradedComplex":
        """Substitute ``H = h_value`` (0 or 1) in every entry."""
        c = BigradedComplex(list(self.grades))
        for s, t, e in self.entries():
            v = (e & 1) if h_value == 0 else bin(e).count("1") & 1
            if v:
                c.diff.setdefault(s, {})[t] = 1
        return c

    # -- serialization --------------------------------------------------
    def to_json(self) -> dict:
        triples = []
        for s, t, e in sorted(self.entries()):
            for k in range(e.bit_length()):
                if e >> k & 1:
                    triples.append([t, s, k])
        return {
            "version": 1,
            "generators": [list(g) for g in self.grades],
            "differential": triples,
        }

    @classmethod
    def from_json(cls, data: dict) -> "BigradedComplex":
        c = cls([tuple(g) for g in data["generators"]])
        for row, col, k in data["differential"]:
            c.add_entry(col, row, 1 << k)
        return c

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))


@dataclass
class ComplexReport:
    d_squared_failures: list = field(default_factory=list)
    homogeneity_failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.d_squared_failures and not self.homogeneity_failures


def verify_complex(c: BigradedComplex) -> ComplexReport:
    """Check d^2 = 0 and that every entry is H^((q_t - q_s)/2), h_t = h_s + 1."""
    rep = ComplexReport()
    for s, t, e in c.entries():
        hs, qs = c.grades[s]
        ht, qt = c.grades[t]
        diff = qt - qs
        ok = ht == hs + 1 and diff >= 0 and diff % 2 == 0 and e == 1 << (diff // 2)
        if not ok:
            rep.homogeneity_failures.append((s, t, poly_str(e)))
    for s in list(c.diff):
        dd = c.apply(c.apply({s: 1}))
        if dd:
            rep.d_squared_failures.append((s, sorted(dd)))
    return rep
