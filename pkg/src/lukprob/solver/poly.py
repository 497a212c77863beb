"""Sparse polynomials with rational coefficients.

A polynomial is a mapping from monomials to coefficients, where a monomial
is a sorted tuple of variable names (repetition encodes powers and the empty
tuple is the constant monomial).  Instances are immutable and hashable.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping


class Poly:
    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[tuple, Fraction] | None = None):
        clean = {}
        for mono, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                key = tuple(sorted(mono))
                clean[key] = clean.get(key, 0) + c
        self.terms = {k: v for k, v in clean.items() if v}
        self._hash = None

    # constructors

    @classmethod
    def const(cls, c) -> "Poly":
        return cls({(): c})

    @classmethod
    def var(cls, name: str) -> "Poly":
        return cls({(name,): 1})

    @classmethod
    def lift(cls, x) -> "Poly":
        if isinstance(x, Poly):
            return x
        if isinstance(x, str):
            return cls.var(x)
        return cls.const(x)

    # arithmetic

    def __add__(self, other):
        other = Poly.lift(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-Poly.lift(other))

    def __rsub__(self, other):
        return Poly.lift(other) - self

    def __mul__(self, other):
        other = Poly.lift(other)
        out: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(sorted(k1 + k2))
                out[k] = out.get(k, 0) + v1 * v2
        return Poly(out)

    __rmul__ = __mul__

    # inspection

    def __eq__(self, other):
        if not isinstance(other, Poly):
            try:
                other = Poly.lift(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self):
        return f"Poly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms, key=lambda m: (len(m), m)):
            c = self.terms[mono]
            body = "*".join(mono)
            if not mono:
                txt = str(abs(c))
            elif abs(c) == 1:
                txt = body
            else:
                txt = f"{abs(c)}*{body}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, txt))
        head = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        return " ".join([head] + [f"{s} {t}" for s, t in parts[1:]])

    @property
    def variables(self) -> frozenset:
        return frozenset(v for mono in self.terms for v in mono)

    @property
    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    @property
    def is_linear(self) -> bool:
        return self.degree <= 1

    @property
    def is_constant(self) -> bool:
        return self.degree == 0

    @property
    def constant(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def linear_part(self) -> dict[str, Fraction]:
        """Coefficients of degree-one monomials."""
        return {m[0]: c for m, c in self.terms.items() if len(m) == 1}

    def nonlinear_monomials(self) -> list[tuple]:
        return [m for m in self.terms if len(m) > 1]

    def evaluate(self, assign: Mapping[str, Fraction]) -> Fraction:
        total = Fraction(0)
        for mono, c in self.terms.items():
            t = c
            for v in mono:
                t *= assign[v]
            total += t
        return total

    def substitute(self, assign: Mapping[str, Fraction]) -> "Poly":
        """Replace the given variables by constants."""
        out: dict = {}
        for mono, c in self.terms.items():
            rest = []
            for v in mono:
                if v in assign:
                    c = c * Fraction(assign[v])
                else:
                    rest.append(v)
            k = tuple(rest)
            out[k] = out.get(k, 0) + c
        return Poly(out)


def as_poly(x) -> Poly:
    return Poly.lift(x)
