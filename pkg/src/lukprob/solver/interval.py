"""Incomplete feasibility backend for bilinear systems.

Boxes over the variables that occur in nonlinear monomials are explored
depth first.  Each box is

1. pruned by exact rational interval evaluation of every row;
2. pruned by an LP relaxation in which each product ``x*y`` (or ``x*x``) is
   replaced by a fresh variable bounded by its McCormick envelope, after
   the box has been tightened by optimising each product variable over that
   relaxation;
3. probed for an exact witness: a set of variables covering every product
   is fixed (to the relaxation's values, then to the box midpoint), which
   leaves a linear system for the exact LP, and any solution is re-checked
   against the original rows;
4. otherwise split at the midpoint of its widest product variable.

Boxes narrower than ``precision`` are given up on, and so is the search
when the node budget or time limit runs out; either way the answer is
UNKNOWN unless some other box produced a witness.
"""

from __future__ import annotations

import time
from fractions import Fraction

from .lp import lp_feasible, lp_optimize
from .poly import Poly
from .system import LE, LT, ConstraintSystem, Feasibility, Status

DEFAULT_PRECISION = Fraction(1, 2 ** 12)
DEFAULT_NODES = 400


def _imul(a, b):
    ps = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return min(ps), max(ps)


def _ipow2(a):
    lo, hi = a
    if lo >= 0:
        return lo * lo, hi * hi
    if hi <= 0:
        return hi * hi, lo * lo
    return Fraction(0), max(lo * lo, hi * hi)


def interval_eval(p: Poly, box: dict) -> tuple[Fraction, Fraction]:
    lo = hi = Fraction(0)
    for mono, c in p.terms.items():
        iv = (Fraction(1), Fraction(1))
        k = 0
        while k < len(mono):
            v = mono[k]
            if k + 1 < len(mono) and mono[k + 1] == v:
                iv = _imul(iv, _ipow2(box[v]))
                k += 2
            else:
                iv = _imul(iv, box[v])
                k += 1
        a, b = c * iv[0], c * iv[1]
        lo += min(a, b)
        hi += max(a, b)
    return lo, hi


def _excluded(row, box) -> bool:
    lo, hi = interval_eval(row.diff, box)
    if row.rel == LE:
        return lo > 0
    if row.rel == LT:
        return lo >= 0
    return lo > 0 or hi < 0


def _bounds_of(sys: ConstraintSystem, v: str):
    lo, hi = sys.bounds[v]
    return lo, (hi if hi is not None else Fraction(10 ** 6))


def _product_name(mono: tuple) -> str:
    return "w__" + "__".join(mono)


def relaxation(sys: ConstraintSystem, box: dict) -> tuple[ConstraintSystem, dict]:
    """McCormick relaxation of ``sys`` over ``box`` (product -> new variable)."""
    out = ConstraintSystem()
    for v, (lo, hi) in sys.bounds.items():
        out.add_var(v, *box.get(v, (lo, hi)))
    names = {}
    for r in sys.rows:
        for mono in r.diff.nonlinear_monomials():
            if mono not in names:
                names[mono] = _product_name(mono)
    for mono, w in names.items():
        x, y = mono
        (xl, xh), (yl, yh) = box[x], box[y]
        lo, hi = _imul((xl, xh), (yl, yh)) if x != y else _ipow2((xl, xh))
        out.add_var(w, lo, hi)
        X, Y, W = Poly.var(x), Poly.var(y), Poly.var(w)
        out.add_row(yl * X + xl * Y - xl * yl, LE, W)
        out.add_row(yh * X + xh * Y - xh * yh, LE, W)
        out.add_row(W, LE, yl * X + xh * Y - xh * yl)
        out.add_row(W, LE, yh * X + xl * Y - xl * yh)
    for r in sys.rows:
        out.rows.append(type(r)(_linearize(r.left, names), r.rel, _linearize(r.right, names), r.label))
    out.blocks = list(sys.blocks)
    return out, names


def _linearize(p: Poly, names: dict) -> Poly:
    terms = {}
    for mono, c in p.terms.items():
        key = (names[mono],) if len(mono) > 1 else mono
        terms[key] = terms.get(key, 0) + c
    return Poly(terms)


def _covers(monos) -> list[list[str]]:
    """Two variable sets, each meeting every product monomial."""
    out = []
    for prefer_second in (False, True):
        cover: list[str] = []
        for mono in monos:
            if any(v in cover for v in mono):
                continue
            cover.append(mono[-1] if prefer_second else mono[0])
        if cover not in out:
            out.append(cover)
    return out


def _try_fix(sys: ConstraintSystem, fixed: dict):
    sub = ConstraintSystem()
    for v, (lo, hi) in sys.bounds.items():
        if v in fixed:
            val = fixed[v]
            if val < lo or (hi is not None and val > hi):
                return None
            sub.add_var(v, val, val)
        else:
            sub.add_var(v, lo, hi)
    for r in sys.rows:
        sub.rows.append(type(r)(r.left.substitute(fixed), r.rel, r.right.substitute(fixed), r.label))
    sub.blocks = list(sys.blocks)
    if not sub.linear:
        return None
    res = lp_feasible(sub)
    if res.feasible and sys.check(res.witness):
        return res.witness
    return None


def poly_feasible(sys: ConstraintSystem, precision: Fraction = DEFAULT_PRECISION,
                  budget: int = DEFAULT_NODES, time_limit: float | None = None) -> Feasibility:
    """Exact-witness or exact-refutation search for a bilinear system."""
    if sys.linear:
        return lp_feasible(sys)
    for r in sys.rows:
        if r.diff.degree > 2:
            return Feasibility(Status.UNKNOWN, reason="degree above two is not supported")
    monos = []
    for r in sys.rows:
        for mono in r.diff.nonlinear_monomials():
            if mono not in monos:
                monos.append(mono)
    pvars = []
    for mono in monos:
        for v in mono:
            if v not in pvars:
                pvars.append(v)
    covers = _covers(monos)
    start = time.monotonic()
    stack = [{v: _bounds_of(sys, v) for v in sys.bounds}]
    nodes = 0
    gave_up = None
    while stack:
        box = stack.pop()
        nodes += 1
        if nodes > budget:
            gave_up = f"node budget {budget} exhausted"
            break
        if time_limit is not None and time.monotonic() - start > time_limit:
            gave_up = "time limit reached"
            break
        if any(_excluded(r, box) for r in sys.rows):
            continue
        rel, _ = relaxation(sys, box)
        res = lp_feasible(rel)
        if not res.feasible:
            continue
        split_box = box
        box = _tighten(rel, box, pvars)
        if box is None:
            continue
        rel, _ = relaxation(sys, box)
        res = lp_feasible(rel)
        if not res.feasible:
            continue
        sources = (
            res.witness,
            {v: x.limit_denominator(64) for v, x in res.witness.items()},
            {v: (lo + hi) / 2 for v, (lo, hi) in split_box.items()},
        )
        for source in sources:
            for cover in covers:
                witness = _try_fix(sys, {v: source[v] for v in cover})
                if witness is not None:
                    return Feasibility(Status.FEASIBLE, witness=witness)
        # split on the dyadic grid of the untightened box, restricted to the tightened one
        v = max(pvars, key=lambda v: box[v][1] - box[v][0])
        lo, hi = box[v]
        if hi - lo < precision:
            gave_up = f"box narrower than {precision} left undecided"
            continue
        mid = _dyadic_mid(split_box[v], (lo, hi))
        left, right = dict(box), dict(box)
        left[v] = (lo, mid)
        right[v] = (mid, hi)
        stack.append(right)
        stack.append(left)
    if gave_up is None:
        return Feasibility(Status.INFEASIBLE, reason="every box excluded")
    return Feasibility(Status.UNKNOWN, reason=gave_up)


def _dyadic_mid(outer, inner) -> Fraction:
    """A dyadic point of ``outer`` inside ``inner``, as central as possible."""
    lo, hi = outer
    a, b = inner
    for _ in range(64):
        mid = (lo + hi) / 2
        if a < mid < b:
            return mid
        if mid <= a:
            lo = mid
        else:
            hi = mid
    return (a + b) / 2


def _tighten(rel: ConstraintSystem, box: dict, pvars) -> dict | None:
    """Shrink each product variable's range to its optimum over the relaxation."""
    out = dict(box)
    for v in pvars:
        lo_opt = lp_optimize(rel, {v: 1}, maximize=False)
        if lo_opt is None:
            return None
        hi_opt = lp_optimize(rel, {v: 1}, maximize=True)
        lo, hi = out[v]
        out[v] = (max(lo, lo_opt[0]), min(hi, hi_opt[0]))
        if out[v][0] > out[v][1]:
            return None
    return out
