"""Exact truth degrees I_M(φ, w) on finite models.

Derived connectives are expanded first, then the primitive clauses are
applied bottom-up.  Values are ``Fraction`` throughout; boxes take the
minimum over successors (1 over an empty successor set) and agents absent
from the model denote empty relations.
"""

from __future__ import annotations

from fractions import Fraction

from .syntax import (Bot, Box, Const, Formula, Half, Imp, Neg, PImp, Pr, Prod,
                     Top, children, expand_derived, subformulas)

ONE = Fraction(1)
ZERO = Fraction(0)
HALF = Fraction(1, 2)


def luk_imp(a: Fraction, b: Fraction) -> Fraction:
    return min(ONE, 1 - a + b)


def prod_imp(a: Fraction, b: Fraction) -> Fraction:
    return ONE if a <= b else b / a


class Interpretation:
    """Memoised evaluator for one model: (world, formula) -> value."""

    def __init__(self, model):
        self.model = model
        self._expanded: dict = {}
        self._slot: dict = {}  # formula -> index into _tables
        self._tables: list = []  # per formula: world -> value

    def primitive(self, f: Formula) -> Formula:
        g = self._expanded.get(f)
        if g is None:
            g = self._expanded[f] = expand_derived(f)
        return g

    def _table(self, f: Formula) -> dict:
        k = self._slot.get(f)
        if k is None:
            k = self._slot[f] = len(self._tables)
            self._tables.append({})
        return self._tables[k]

    def value(self, w, f: Formula) -> Fraction:
        self.model.check_world(w)
        g = self.primitive(f)
        table = self._table(g)
        if w not in table:
            self._fill(g, [w])
        return table[w]

    def values(self, f: Formula) -> dict:
        g = self.primitive(f)
        self._fill(g, self.model.worlds)
        table = self._table(g)
        return {w: table[w] for w in self.model.worlds}

    def _fill(self, g: Formula, worlds) -> None:
        # formulas are hashed once per node here; the world loops use tables only
        order = list(dict.fromkeys(subformulas(g)))
        tab = {node: self._table(node) for node in order}
        needed = {g: set(worlds)}
        for node in reversed(order):
            ws = needed.get(node)
            if not ws:
                continue
            if isinstance(node, Box):
                succ = set()
                for w in ws:
                    succ.update(self.model.successors(node.agent, w))
                needed.setdefault(node.arg, set()).update(succ)
            elif isinstance(node, Neg):
                needed.setdefault(node.arg, set()).update(ws)
            elif isinstance(node, (Imp, Prod, PImp)):
                needed.setdefault(node.left, set()).update(ws)
                needed.setdefault(node.right, set()).update(ws)
        m = self.model
        for node in order:
            table = tab[node]
            kids = tuple(tab[k] for k in children(node))
            for w in needed.get(node, ()):
                if w not in table:
                    table[w] = self._clause(node, w, kids, m)

    @staticmethod
    def _clause(node, w, kids, m) -> Fraction:
        if isinstance(node, Pr):
            return Fraction(m.prob(w, node.term))
        if isinstance(node, Half):
            return HALF
        if isinstance(node, Const):
            return node.value
        if isinstance(node, Top):
            return ONE
        if isinstance(node, Bot):
            return ZERO
        if isinstance(node, Neg):
            return 1 - kids[0][w]
        if isinstance(node, Box):
            arg = kids[0]
            return min((arg[u] for u in m.successors(node.agent, w)), default=ONE)
        a, b = kids[0][w], kids[1][w]
        if isinstance(node, Imp):
            return luk_imp(a, b)
        if isinstance(node, Prod):
            return a * b
        if isinstance(node, PImp):
            return prod_imp(a, b)
        raise TypeError(f"not a primitive formula: {node!r}")


def evaluate(m, w, f: Formula) -> Fraction:
    """Truth degree of ``f`` at world ``w`` of model ``m``."""
    return Interpretation(m).value(w, f)


def evaluate_all(m, f: Formula) -> dict:
    """Truth degree of ``f`` at every world, computed bottom-up once."""
    return Interpretation(m).values(f)
