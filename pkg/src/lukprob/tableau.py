"""Constraint tableaux for entailment over finitely branching frames.

A branch holds formulaic constraints ``w : φ ≤ i`` / ``w : φ ≥ i`` (with
``i`` a polynomial bound), numerical rows over constraint variables and
relational terms ``w R_a w'``.  Rules decompose formulaic constraints until
only probabilistic atoms and constants remain; each atom at a label becomes
a variable ``x__<label>__<hash>``, and the atoms of each label are tied
together by a probability-coherence block.  A saturated branch is open iff
its constraint system is feasible, and a feasible solution is turned into a
canonical countermodel that is re-checked formula by formula.

Rule summary (``j`` fresh, ``i`` the bound):

* ``¬ψ ≤ i``  → ``ψ ≥ 1-i``; ``¬ψ ≥ i`` → ``ψ ≤ 1-i``
* ``φ→χ ≥ i`` → ``φ ≤ 1-i+j``, ``χ ≥ j``
* ``φ→χ ≤ i`` → ``i ≥ 1``  |  ``φ ≥ 1-i+j``, ``χ ≤ j``, ``j ≤ i``
* ``φ•χ ∇ i`` → ``φ ∇ j₁``, ``χ ∇ j₂``, ``j₁·j₂ ∇ i``
* ``φ→_Πχ ≥ i`` → ``φ ≤ j₁``, ``χ ≥ j₂``, ``i·j₁ ≤ j₂``
* ``φ→_Πχ ≤ i`` → ``i ≥ 1``  |  ``φ ≥ j₁``, ``χ ≤ j₂``, ``j₂ < j₁``, ``j₂ ≤ i·j₁``
* ``□_aψ ≤ i`` → ``i ≥ 1``  |  ``i < 1``, fresh ``w'`` with ``w R_a w'`` and
  ``w' : ψ ≤ i`` (the split is skipped when ``i`` is a constant)
* ``□_aψ ≥ i`` → ``u : ψ ≥ i`` for every ``w R_a u`` (now and later)

Constant sides replace ``j₁``/``j₂`` directly.  When ``χ`` is the constant
0 (as in Δ), the ``≥`` rule splits into ``i ≤ 0 | φ ≤ 0`` so that Δ stays
linear.  Every composite constraint also records the range row ``i ≤ 1``
(for ``≥``) or ``i ≥ 0`` (for ``≤``), as formula values lie in [0, 1].
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .model import CanonicalModel, model_to_dict, rational_str, to_dot
from .modelcheck import evaluate
from .solver import (LE, LT, ConstraintSystem, Feasibility, Poly, Row, Status,
                     build_coherence, export_smtlib, lp_feasible, poly_feasible)
from .solver.system import DEFAULT_BASIS_CAP
from .syntax import (Box, Formula, Imp, Neg, PImp, Pr, Prod, analyze,
                     constant_value, expand_derived, formula_str, print_term, variables)

GE = ">="


class BudgetExceeded(RuntimeError):
    pass


class FragmentError(ValueError):
    pass


class InternalInconsistency(RuntimeError):
    pass


@dataclass(frozen=True)
class Label:
    name: str
    depth: int
    parent: str | None = None
    agent: str | None = None


@dataclass(frozen=True)
class FC:
    """Formulaic constraint ``label : formula rel bound`` with rel ``<=`` or ``>=``."""

    label: str
    formula: Formula
    rel: str
    bound: Poly

    def __str__(self):
        return f"{self.label} : {formula_str(self.formula)} {self.rel} {self.bound}"


@dataclass(frozen=True)
class RT:
    src: str
    agent: str
    dst: str


@dataclass(frozen=True)
class Budget:
    branches: int = 20000
    seconds: float = 120.0
    labels: int = 2000


@dataclass
class EntailmentQuery:
    premises: tuple
    conclusion: Formula
    frame: str = "fb"  # fb | any

    def __post_init__(self):
        self.premises = tuple(self.premises)
        if self.frame not in ("fb", "any"):
            raise ValueError(f"unknown frame mode {self.frame!r}")
        if self.frame == "any" and not analyze([*self.premises, self.conclusion]).fragment.additive:
            raise FragmentError("arbitrary frames require the additive fragment (no * or ~>)")


def atom_var(label: str, term) -> str:
    digest = hashlib.sha1(print_term(term).encode()).hexdigest()[:8]
    return f"x__{label}__{digest}"


@dataclass
class Branch:
    fcs: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    rts: list = field(default_factory=list)
    labels: dict = field(default_factory=dict)
    atoms: dict = field(default_factory=dict)  # label -> {term: var}
    next_fc: int = 0
    branching: list = field(default_factory=list)
    boxes_le: list = field(default_factory=list)
    box_ge: dict = field(default_factory=dict)  # (label, agent) -> [(ψ, bound)]
    const_bounds: dict = field(default_factory=dict)
    bound_vars: dict = field(default_factory=dict)
    closed: bool = False
    reason: str = ""

    def copy(self) -> "Branch":
        return Branch(
            list(self.fcs), list(self.rows), list(self.rts), dict(self.labels),
            {w: dict(a) for w, a in self.atoms.items()}, self.next_fc,
            list(self.branching), list(self.boxes_le),
            {k: list(v) for k, v in self.box_ge.items()}, dict(self.const_bounds),
            dict(self.bound_vars),
        )

    @property
    def label_names(self) -> list[str]:
        return list(self.labels)

    def successors(self, w, agent) -> list[str]:
        return [r.dst for r in self.rts if r.src == w and r.agent == agent]

    def __str__(self):
        out = [str(f) for f in self.fcs]
        out += [f"{r.src} R_{r.agent} {r.dst}" for r in self.rts]
        out += [str(r) for r in self.rows]
        return "\n".join(out)


class Tableau:
    """Saturation engine for one query (depth-first, deterministic)."""

    def __init__(self, query: EntailmentQuery, budget: Budget = Budget(), prune: bool = True,
                 coherence: bool = True, basis_cap: int = DEFAULT_BASIS_CAP):
        self.query = query
        self.budget = budget
        self.prune = prune
        self.coherence = coherence
        self.basis_cap = basis_cap
        self._j = 0
        self._w = 0
        self.stats = {"saturated": 0, "closed": 0, "splits": 0, "lp_prunes": 0, "labels": 0,
                      "max_depth": 0}
        self._start = None

    # ---- fresh names

    def fresh_var(self) -> Poly:
        self._j += 1
        return Poly.var(f"j{self._j}")

    def fresh_label(self, b: Branch, parent: str | None, agent: str | None) -> str:
        name = f"w{self._w}"
        self._w += 1
        depth = 0 if parent is None else b.labels[parent].depth + 1
        b.labels[name] = Label(name, depth, parent, agent)
        self.stats["labels"] = max(self.stats["labels"], len(b.labels))
        self.stats["max_depth"] = max(self.stats["max_depth"], depth)
        if len(b.labels) > self.budget.labels:
            raise BudgetExceeded(f"more than {self.budget.labels} labels on a branch")
        return name

    # ---- adding constraints

    def add_row(self, b: Branch, left, rel: str, right, note: str = "") -> None:
        row = Row(Poly.lift(left), rel, Poly.lift(right), note)
        d = row.diff
        if d.is_constant:
            if not row.holds({}):
                b.closed, b.reason = True, f"constant row {row} fails"
            return
        b.rows.append(row)

    def add_fc(self, b: Branch, label: str, formula: Formula, rel: str, bound) -> None:
        bound = Poly.lift(bound)
        for v in bound.variables:
            b.bound_vars.setdefault(v, None)
        if bound.is_constant:
            key = (label, formula)
            lo, hi = b.const_bounds.get(key, (Fraction(0), Fraction(1)))
            c = bound.constant
            if rel == GE:
                lo = max(lo, c)
            else:
                hi = min(hi, c)
            if lo > hi:
                b.closed, b.reason = True, f"{label}: {formula_str(formula)} needs {lo} <= v <= {hi}"
                return
            b.const_bounds[key] = (lo, hi)
        b.fcs.append(FC(label, formula, rel, bound))

    def _require(self, b, rel, lhs, rhs):
        """Row ``lhs rel rhs`` where rel is ``<=`` or ``>=`` (formula side left)."""
        if rel == GE:
            self.add_row(b, rhs, LE, lhs)
        else:
            self.add_row(b, lhs, LE, rhs)

    def _side(self, b, label, formula, rel):
        """Value stand-in for a product argument: the constant itself or a fresh j."""
        c = constant_value(formula)
        if c is not None:
            return Poly.const(c), []
        j = self.fresh_var()
        return j, [("fc", label, formula, rel, j)]

    # ---- rules

    def apply(self, b: Branch, fc: FC) -> None:
        w, f, rel, i = fc.label, fc.formula, fc.rel, fc.bound
        if isinstance(f, Pr):
            atoms = b.atoms.setdefault(w, {})
            x = atoms.get(f.term)
            if x is None:
                x = atoms[f.term] = atom_var(w, f.term)
            self._require(b, rel, Poly.var(x), i)
            return
        c = constant_value(f)
        if c is not None:
            self._require(b, rel, Poly.const(c), i)
            return
        if isinstance(f, Neg):
            self.add_fc(b, w, f.arg, LE if rel == GE else GE, 1 - i)
            return
        # range of the bound for composite formulas
        if rel == GE:
            self.add_row(b, i, LE, 1)
        else:
            self.add_row(b, 0, LE, i)
        if b.closed:
            return
        if isinstance(f, Box):
            if rel == LE:
                b.boxes_le.append(fc)
            else:
                b.box_ge.setdefault((w, f.agent), []).append((f.arg, i))
                for u in b.successors(w, f.agent):
                    self.add_fc(b, u, f.arg, GE, i)
            return
        if isinstance(f, Imp):
            if rel == GE:
                j = self.fresh_var()
                self.add_fc(b, w, f.left, LE, 1 - i + j)
                self.add_fc(b, w, f.right, GE, j)
            else:
                b.branching.append(fc)
            return
        if isinstance(f, Prod):
            j1, e1 = self._side(b, w, f.left, rel)
            j2, e2 = self._side(b, w, f.right, rel)
            self._emit(b, e1 + e2)
            self._require(b, rel, j1 * j2, i)
            return
        if isinstance(f, PImp):
            if rel == LE or constant_value(f.right) == 0:
                b.branching.append(fc)
                return
            j1, e1 = self._side(b, w, f.left, LE)
            j2, e2 = self._side(b, w, f.right, GE)
            self._emit(b, e1 + e2)
            self.add_row(b, i * j1, LE, j2)
            return
        raise TypeError(f"not a primitive formula: {f!r}")

    def _emit(self, b, items):
        for item in items:
            if b.closed:
                return
            if item[0] == "fc":
                self.add_fc(b, *item[1:])
            else:
                self.add_row(b, *item[1:])

    def alternatives(self, b: Branch, fc: FC) -> list[list]:
        w, f, i = fc.label, fc.formula, fc.bound
        if isinstance(f, Imp):
            j = self.fresh_var()
            return [
                [("row", 1, LE, i)],
                [("fc", w, f.left, GE, 1 - i + j), ("fc", w, f.right, LE, j), ("row", j, LE, i)],
            ]
        if isinstance(f, PImp) and fc.rel == GE:
            # χ is the constant 0: i·φ ≤ 0
            return [[("row", i, LE, 0)], [("fc", w, f.left, LE, 0)]]
        if isinstance(f, PImp):
            j1, e1 = self._side(b, w, f.left, GE)
            j2, e2 = self._side(b, w, f.right, LE)
            second = e1 + e2 + [("row", j2, LT, j1)]
            if j2 != 0:
                second.append(("row", j2, LE, i * j1))
            return [[("row", 1, LE, i)], second]
        raise TypeError(f"no branching rule for {fc}")

    def expand_box(self, b: Branch, fc: FC) -> None:
        f = fc.formula
        w2 = self.fresh_label(b, fc.label, f.agent)
        b.rts.append(RT(fc.label, f.agent, w2))
        self.add_fc(b, w2, f.arg, LE, fc.bound)
        for psi, bound in b.box_ge.get((fc.label, f.agent), []):
            self.add_fc(b, w2, psi, GE, bound)

    # ---- systems

    def system(self, b: Branch, linear_only: bool = False) -> ConstraintSystem:
        return branch_system(b, coherence=self.coherence, linear_only=linear_only,
                             basis_cap=self.basis_cap)

    def _relaxation_feasible(self, b: Branch) -> bool:
        return lp_feasible(self.system(b, linear_only=True)).feasible

    # ---- driver

    def root(self) -> Branch:
        b = Branch()
        w0 = self.fresh_label(b, None, None)
        for p in self.query.premises:
            self.add_fc(b, w0, expand_derived(p), GE, 1)
        d = Poly.var("d")
        self.add_fc(b, w0, expand_derived(self.query.conclusion), LE, d)
        self.add_row(b, d, LT, 1, "conclusion bound")
        return b

    def _check_budget(self):
        if time.monotonic() - self._start > self.budget.seconds:
            raise BudgetExceeded(f"time limit of {self.budget.seconds}s exceeded")
        if self.stats["saturated"] + self.stats["closed"] > self.budget.branches:
            raise BudgetExceeded(f"more than {self.budget.branches} branches")

    def _advance(self, b: Branch):
        """Run ``b`` to its next split: None if saturated, else the children."""
        while True:
            while b.next_fc < len(b.fcs):
                fc = b.fcs[b.next_fc]
                b.next_fc += 1
                self.apply(b, fc)
                if b.closed:
                    return []
            if b.branching:
                fc = b.branching.pop(0)
                if self.prune:
                    self.stats["lp_prunes"] += 1
                    if not self._relaxation_feasible(b):
                        b.closed, b.reason = True, "linear relaxation infeasible"
                        return []
                self.stats["splits"] += 1
                kids = []
                for alt in self.alternatives(b, fc):
                    kid = b.copy()
                    self._emit(kid, alt)
                    if kid.closed:
                        self.stats["closed"] += 1
                    else:
                        kids.append(kid)
                return kids
            if b.boxes_le:
                fc = b.boxes_le.pop(0)
                if not fc.bound.is_constant:
                    # a variable bound may reach 1, where no witness is needed
                    self.stats["splits"] += 1
                    kids = []
                    for need_witness in (False, True):
                        kid = b.copy()
                        if need_witness:
                            self.add_row(kid, fc.bound, LT, 1)
                            if not kid.closed:
                                self.expand_box(kid, fc)
                        else:
                            self.add_row(kid, 1, LE, fc.bound)
                        if kid.closed:
                            self.stats["closed"] += 1
                        else:
                            kids.append(kid)
                    return kids
                if fc.bound.constant >= 1:
                    continue
                self.expand_box(b, fc)
                if b.closed:
                    return []
                continue
            return None

    def saturate(self):
        """Yield saturated open branches in depth-first order."""
        self._start = time.monotonic()
        root = self.root()
        stack = [] if root.closed else [root]
        if root.closed:
            self.stats["closed"] += 1
        while stack:
            self._check_budget()
            b = stack.pop()
            kids = self._advance(b)
            if kids is None:
                self.stats["saturated"] += 1
                yield b
            elif not kids:
                self.stats["closed"] += 1
            else:
                stack.extend(reversed(kids))


def saturate(query: EntailmentQuery, budget: Budget = Budget()):
    """Saturated open branches of the tableau for ``query`` (streamed)."""
    return Tableau(query, budget).saturate()


def branch_system(b: Branch, coherence: bool = True, linear_only: bool = False,
                  basis_cap: int = DEFAULT_BASIS_CAP) -> ConstraintSystem:
    """Constraint system of a branch: its rows plus one coherence block per label."""
    sys = ConstraintSystem()
    if "d" in b.bound_vars:
        sys.add_var("d")
    for w, atoms in b.atoms.items():
        for x in atoms.values():
            sys.add_var(x)
    for r in b.rows:
        if linear_only and not r.is_linear:
            continue
        sys.add_row(r.left, r.rel, r.right, r.label)
    for v in b.bound_vars:
        sys.add_var(v)
    if coherence:
        for w, atoms in b.atoms.items():
            terms = list(atoms)
            sys.add_block(build_coherence(w, terms, [atoms[t] for t in terms], cap=basis_cap))
    return sys


# ---------------------------------------------------------------- verdicts


@dataclass
class Verdict:
    status: str  # VALID | NOT_VALID | UNKNOWN
    countermodel: CanonicalModel | None = None
    solution: dict | None = None
    labels: dict | None = None
    reason: str = ""
    conclusion_value: Fraction | None = None
    stats: dict = field(default_factory=dict)
    exports: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.status == "VALID"

    def countermodel_dict(self) -> dict:
        doc = model_to_dict(self.countermodel)
        doc["labels"] = dict(self.labels)
        doc["solution"] = {v: rational_str(x) for v, x in sorted(self.solution.items())}
        return doc

    def dot(self) -> str:
        return to_dot(self.countermodel)


def extract_countermodel(b: Branch, solution: dict, props) -> CanonicalModel:
    """Canonical model realising a feasible branch under ``solution``."""
    props = tuple(props)
    index = {p: k for k, p in enumerate(props)}
    rels: dict = {}
    for r in b.rts:
        rels.setdefault(r.agent, set()).add((r.src, r.dst))
    weights = {}
    for w in b.labels:
        atoms = b.atoms.get(w)
        if not atoms:
            weights[w] = {0: Fraction(1)}
            continue
        block = build_coherence(w, list(atoms), list(atoms.values()), cap=len(props) + 1)
        acc: dict[int, Fraction] = {}
        for c in range(block.n_columns):
            x = solution.get(block.weight_var(c), 0)
            if x:
                mask = sum(1 << index[p] for p in block.column_props(c))
                acc[mask] = acc.get(mask, 0) + x
        weights[w] = acc
    return CanonicalModel(tuple(b.labels), props, rels, weights)


def verify_realisation(m, b: Branch, solution: dict) -> list[str]:
    """Formulaic constraints of ``b`` that ``m`` fails to realise under ``solution``."""
    bad = []
    env = dict(solution)
    for v in b.bound_vars:
        env.setdefault(v, Fraction(0))
    for fc in b.fcs:
        val = evaluate(m, fc.label, fc.formula)
        bound = fc.bound.evaluate(env)
        ok = val <= bound if fc.rel == LE else val >= bound
        if not ok:
            bad.append(f"{fc} (value {val}, bound {bound})")
    return bad


def _solve(sys: ConstraintSystem, backend: str, precision, poly_budget) -> Feasibility:
    if sys.linear:
        return lp_feasible(sys)
    relax = sys.copy()
    relax.rows = [r for r in sys.rows if r.is_linear]
    if not lp_feasible(relax).feasible:
        return Feasibility(Status.INFEASIBLE, reason="linear part infeasible")
    if backend == "interval":
        kw = {"budget": poly_budget}
        if precision is not None:
            kw["precision"] = precision
        return poly_feasible(sys, **kw)
    return Feasibility(Status.UNKNOWN, reason=f"nonlinear system left to backend {backend!r}")


def decide(query: EntailmentQuery, backend: str = "interval", budget: Budget = Budget(),
           coherence: bool = True, basis_cap: int = DEFAULT_BASIS_CAP, precision=None,
           poly_budget: int = 200, raise_on_budget: bool = False) -> Verdict:
    """VALID, NOT_VALID with a verified countermodel, or UNKNOWN."""
    if backend not in ("lp", "interval", "export-only"):
        raise ValueError(f"unknown backend {backend!r}")
    if query.frame == "any" and not analyze([*query.premises, query.conclusion]).fragment.additive:
        raise FragmentError("arbitrary frames require the additive fragment (no * or ~>)")
    tab = Tableau(query, budget, coherence=coherence, basis_cap=basis_cap)
    props = sorted(set().union(*(variables(f) for f in (*query.premises, query.conclusion))))
    unknown = []
    exports = []
    start = time.monotonic()
    try:
        for b in tab.saturate():
            sys = tab.system(b)
            res = _solve(sys, backend, precision, poly_budget)
            if res.status is Status.UNKNOWN:
                unknown.append(res.reason)
                exports.append(export_smtlib(sys))
                continue
            if res.infeasible:
                continue
            verdict = _refutation(query, b, res.witness, props, coherence, tab, start)
            verdict.exports = [export_smtlib(sys)]
            return verdict
    except BudgetExceeded as e:
        if raise_on_budget:
            raise
        return Verdict("UNKNOWN", reason=f"resource-cap: {e}", stats=_stats(tab, start),
                       exports=exports)
    if unknown:
        return Verdict("UNKNOWN", reason=f"nonlinear-incomplete: {unknown[0]}",
                       stats=_stats(tab, start), exports=exports)
    return Verdict("VALID", stats=_stats(tab, start))


def _stats(tab: Tableau, start) -> dict:
    out = dict(tab.stats)
    out["seconds"] = round(time.monotonic() - start, 6)
    return out


def _refutation(query, b, witness, props, coherence, tab, start) -> Verdict:
    if coherence:
        m = extract_countermodel(b, witness, props)
    else:
        from .reductions import lbox_bridge
        from .model import LBoxModel
        values = {}
        for w in b.labels:
            values[w] = {t.name: witness[x] for t, x in b.atoms.get(w, {}).items()}
        rels: dict = {}
        for r in b.rts:
            rels.setdefault(r.agent, set()).add((r.src, r.dst))
        m = lbox_bridge(LBoxModel(tuple(b.labels), rels, values), props)
    bad = verify_realisation(m, b, witness)
    root = "w0"
    prem = [evaluate(m, root, p) for p in query.premises]
    concl = evaluate(m, root, query.conclusion)
    if any(v != 1 for v in prem) or concl >= 1:
        bad.append(f"root values: premises {prem}, conclusion {concl}")
    if bad:
        raise InternalInconsistency("countermodel fails re-check: " + "; ".join(bad[:3]))
    return Verdict("NOT_VALID", countermodel=m, solution=dict(witness),
                   labels={w: w for w in b.labels}, conclusion_value=concl,
                   stats=_stats(tab, start))


def prove(conclusion: Formula, premises=(), frame: str = "fb", **kw) -> Verdict:
    """Shorthand for :func:`decide` on ``premises ⊨ conclusion``."""
    return decide(EntailmentQuery(tuple(premises), conclusion, frame), **kw)
