"""Exact rational linear programming for constraint systems.

The simplex runs on a fraction-free integer tableau (see ``kernels``) with
Bland's rule, two phases and exact ratio tests.  Strict rows ``a < b`` are
handled by a shared slack ε: every strict row becomes ``a + ε <= b``, ε is
maximised subject to ε <= 1, and the system is feasible iff the optimum is
positive.  The search stops as soon as ε is basic with a positive value.

Coherence blocks enter the LP with one column per incidence signature:
weight columns with identical incidence are interchangeable, so a single
representative carries the group's mass in the witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from . import kernels
from .system import EQ, LT, ConstraintSystem, Feasibility, Status


class NonlinearSystem(ValueError):
    pass


@dataclass
class LPSolution:
    status: str  # optimal | infeasible | unbounded
    values: list | None = None
    objective: Fraction | None = None
    pivots: int = 0


def _int_row(coeffs: dict, rhs: Fraction, ncols: int):
    den = lcm(*(c.denominator for c in coeffs.values()), rhs.denominator)
    row = [0] * (ncols + 1)
    for j, c in coeffs.items():
        row[j] = int(c * den)
    row[ncols] = int(rhs * den)
    return row


def simplex(rows, senses, ncols, objective=None, stop=None) -> LPSolution:
    """Maximise ``objective`` over ``{y >= 0 : rows}``.

    ``rows`` are ``(coeffs, rhs)`` pairs with ``coeffs`` a dict column ->
    Fraction; ``senses`` are ``'<='`` or ``'='``.  ``objective`` is a dict
    column -> Fraction (or None for a pure feasibility problem).  ``stop``
    is called with the current basic values after each pivot of phase two
    and may end the search early by returning True.
    """
    m = len(rows)
    n_slack = sum(1 for s in senses if s == "<=")
    width = ncols + n_slack
    # artificial columns are appended per row that has no unit slack
    built, basis, needs_art = [], [], []
    s = ncols
    for (coeffs, rhs), sense in zip(rows, senses):
        rhs = Fraction(rhs)
        row = _int_row({j: Fraction(c) for j, c in coeffs.items()}, rhs, ncols)
        row = row[:ncols] + [0] * n_slack + [row[ncols]]
        slack = None
        if sense == "<=":
            slack = s
            row[s] = 1
            s += 1
        if row[-1] < 0:
            row = [-a for a in row]
        built.append(row)
        if slack is not None and row[slack] > 0:
            basis.append(slack)
            needs_art.append(False)
        else:
            basis.append(None)
            needs_art.append(True)
    n_art = sum(needs_art)
    total = width + n_art
    tab = []
    a = width
    art_cols = set()
    for k, row in enumerate(built):
        full = row[:width] + [0] * n_art + [row[-1]]
        if needs_art[k]:
            full[a] = 1
            basis[k] = a
            art_cols.add(a)
            a += 1
        tab.append(full)
    dens = [0] * m

    # phase-two objective row, kept up to date during phase one
    obj = [0] * (total + 1)
    oden = 1
    if objective:
        oden = lcm(*(Fraction(c).denominator for c in objective.values()))
        for j, c in objective.items():
            obj[j] = -int(Fraction(c) * oden)
    tab.append(obj)
    dens.append(oden)
    OBJ2 = m
    pivots = 0

    def basic_values():
        vals = [Fraction(0)] * total
        for k in range(len(basis)):
            vals[basis[k]] = Fraction(tab[k][-1], tab[k][basis[k]])
        return vals

    def run(objrow, banned, stopper):
        nonlocal pivots
        while True:
            o = tab[objrow]
            enter = next((j for j in range(total) if o[j] < 0 and j not in banned), None)
            if enter is None:
                return "optimal"
            best, leave = None, None
            for k in range(len(basis)):
                t = tab[k][enter]
                if t > 0:
                    num = tab[k][-1]
                    if best is None:
                        best, leave = (num, t), k
                        continue
                    bn, bt = best
                    lhs, rhs_ = num * bt, bn * t
                    if lhs < rhs_ or (lhs == rhs_ and basis[k] < basis[leave]):
                        best, leave = (num, t), k
            if leave is None:
                return "unbounded"
            kernels.pivot(tab, dens, leave, enter)
            basis[leave] = enter
            pivots += 1
            if stopper is not None and stopper(basic_values()):
                return "stopped"

    if n_art:
        ph1 = [0] * (total + 1)
        for j in art_cols:
            ph1[j] = 1
        tab.append(ph1)
        dens.append(1)
        OBJ1 = len(tab) - 1
        for k in range(m):
            if basis[k] in art_cols:
                kernels.pivot(tab, dens, k, basis[k])
        run(OBJ1, frozenset(), None)
        if tab[OBJ1][-1] != 0:
            return LPSolution("infeasible", pivots=pivots)
        tab.pop()
        dens.pop()
        # drive remaining artificials out of the basis; drop redundant rows
        k = 0
        while k < len(basis):
            if basis[k] in art_cols:
                row = tab[k]
                j = next((j for j in range(width) if row[j]), None)
                if j is None:
                    del tab[k], dens[k], basis[k]
                    OBJ2 -= 1
                    continue
                if row[j] < 0:
                    tab[k] = [-x for x in row]
                kernels.pivot(tab, dens, k, j)
                basis[k] = j
                pivots += 1
            k += 1
    banned = frozenset(art_cols)
    if stop is not None and stop(basic_values()):
        status = "stopped"
    elif objective:
        status = run(OBJ2, banned, stop)
    else:
        status = "optimal"
    if status == "unbounded":
        return LPSolution("unbounded", pivots=pivots)
    vals = basic_values()[:ncols]
    value = Fraction(tab[OBJ2][-1], dens[OBJ2]) if objective else None
    return LPSolution("optimal", vals, value, pivots)


class _Layout:
    """Column layout of a linear constraint system in shifted variables."""

    def __init__(self, sys: ConstraintSystem, strict: str):
        if not sys.linear:
            raise NonlinearSystem("lp requires a linear system")
        self.sys = sys
        self.cols: dict[str, int] = {}
        self.lo: dict[str, Fraction] = {}
        for v, (lo, _hi) in sys.bounds.items():
            self.cols[v] = len(self.cols)
            self.lo[v] = lo
        self.groups = []  # (block, representative column index in block, lp col)
        for b in sys.blocks:
            for sig, members in b.groups():
                self.groups.append((b, sig, members[0], len(self.cols) + len(self.groups)))
        n = len(self.cols) + len(self.groups)
        self.eps = None
        if strict == "slack" and sys.has_strict:
            self.eps = n
            n += 1
        self.ncols = n
        self.rows, self.senses = [], []
        for r in sys.rows:
            d = r.diff
            coeffs = {}
            rhs = -d.constant
            for v, c in d.linear_part().items():
                coeffs[self.cols[v]] = c
                rhs -= c * self.lo[v]
            if r.rel == LT and self.eps is not None:
                coeffs[self.eps] = Fraction(1)
            self._add(coeffs, rhs, "=" if r.rel == EQ else "<=")
        for v, (lo, hi) in sys.bounds.items():
            if hi is not None:
                self._add({self.cols[v]: Fraction(1)}, hi - lo, "<=")
        by_block: dict[int, list] = {}
        for b, sig, rep, col in self.groups:
            by_block.setdefault(id(b), []).append((sig, col))
        for b in sys.blocks:
            gs = by_block[id(b)]
            self._add({col: Fraction(1) for _s, col in gs}, Fraction(1), "=")
            for i, x in enumerate(b.value_vars):
                coeffs = {col: Fraction(1) for sig, col in gs if sig[i]}
                coeffs[self.cols[x]] = coeffs.get(self.cols[x], 0) - 1
                self._add(coeffs, self.lo[x], "=")
        if self.eps is not None:
            self._add({self.eps: Fraction(1)}, Fraction(1), "<=")

    def _add(self, coeffs, rhs, sense):
        coeffs = {j: c for j, c in coeffs.items() if c}
        self.rows.append((coeffs, rhs))
        self.senses.append(sense)

    def witness(self, vals) -> dict:
        out = {v: self.lo[v] + vals[j] for v, j in self.cols.items()}
        for b, _sig, rep, col in self.groups:
            if vals[col]:
                out[b.weight_var(rep)] = vals[col]
        return out


class InternalError(RuntimeError):
    pass


def lp_feasible(sys: ConstraintSystem) -> Feasibility:
    """Exact feasibility of a linear system with strict rows."""
    lay = _Layout(sys, "slack")
    if lay.eps is None:
        sol = simplex(lay.rows, lay.senses, lay.ncols)
    else:
        eps = lay.eps
        sol = simplex(lay.rows, lay.senses, lay.ncols, {eps: Fraction(1)},
                      stop=lambda vals: vals[eps] > 0)
    if sol.status == "infeasible":
        return Feasibility(Status.INFEASIBLE, reason="phase one optimum is negative")
    if lay.eps is not None and sol.values[lay.eps] <= 0:
        return Feasibility(Status.INFEASIBLE, reason="strict rows force slack 0")
    w = lay.witness(sol.values)
    bad = sys.violations(w)
    if bad:
        raise InternalError(f"LP witness fails exact re-check: {bad[:3]}")
    return Feasibility(Status.FEASIBLE, witness=w)


def lp_optimize(sys: ConstraintSystem, objective: dict, maximize: bool = True):
    """Optimum of a linear objective (variable -> coefficient) over ``sys``.

    Strict rows are relaxed to non-strict ones, so the value returned is the
    supremum (or infimum) over the closure.  Returns ``(value, witness)`` or
    ``None`` when the relaxation is infeasible.
    """
    lay = _Layout(sys, "relax")
    sign = 1 if maximize else -1
    obj = {}
    offset = Fraction(0)
    for v, c in objective.items():
        c = Fraction(c)
        obj[lay.cols[v]] = obj.get(lay.cols[v], 0) + sign * c
        offset += c * lay.lo[v]
    obj = {j: c for j, c in obj.items() if c}
    sol = simplex(lay.rows, lay.senses, lay.ncols, obj or None)
    if sol.status == "infeasible":
        return None
    if sol.status == "unbounded":
        raise ValueError("objective is unbounded")
    val = (sign * sol.objective if obj else 0) + offset
    return val, lay.witness(sol.values)
