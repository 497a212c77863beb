"""Brute-force references used to cross-check the prover.

* :func:`search_countermodel` looks for a small canonical model with atom
  weights on a grid {0, 1/D, ..., 1}: exhaustively when the space is small,
  otherwise by seeded random sampling.  Only model checking is used.
* :func:`classical_k_decide` is a textbook two-valued tableau for the modal
  logic K, returning a tree countermodel for non-theorems.
* :func:`differential_run` compares a prover against the search on a
  random corpus and reports discrepancies.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .model import CanonicalModel
from .modelcheck import Interpretation
from .reductions import CBox, CImp, CNeg, CVar, classical_vars, print_classical
from .syntax import (Box, Compl, Delta, Dia, Equiv, Imp, Max, Meet, Min, Neg, OPlus,
                     OTimes, PImp, Pr, Prod, Var, agents, const, formula_str, variables)
from .tableau import EntailmentQuery, InternalInconsistency, decide


class BudgetExceeded(RuntimeError):
    pass


# ---------------------------------------------------------------- grid search


@dataclass(frozen=True)
class SearchSpace:
    max_worlds: int = 2
    grid: int = 4  # D
    seed: int = 0
    samples: int = 400
    exhaustive_limit: int = 4000
    max_agents: int = 2


def _compositions(total: int, parts: int):
    """All ways of writing ``total`` as an ordered sum of ``parts`` naturals."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _count_compositions(total: int, parts: int) -> int:
    from math import comb
    return comb(total + parts - 1, parts - 1)


def _weights(comp, grid):
    return {y: Fraction(k, grid) for y, k in enumerate(comp) if k}


def _is_countermodel(m, q: EntailmentQuery, root: str = "w0") -> bool:
    it = Interpretation(m)
    if any(it.value(root, p) != 1 for p in q.premises):
        return False
    return it.value(root, q.conclusion) < 1


def _relation_patterns(worlds, ags):
    pairs = [(a, b) for a in worlds for b in worlds]
    per_agent = [list(product((False, True), repeat=len(pairs))) for _ in ags]
    for choice in product(*per_agent):
        yield {ag: {p for p, on in zip(pairs, bits) if on} for ag, bits in zip(ags, choice)}


def search_countermodel(q: EntailmentQuery, s: SearchSpace = SearchSpace()):
    """A verified countermodel on the grid, or None (which proves nothing)."""
    fs = [*q.premises, q.conclusion]
    props = tuple(sorted(set().union(*(variables(f) for f in fs))))
    ags = sorted(set().union(*(agents(f) for f in fs)))[: s.max_agents]
    n_atoms = 1 << len(props)
    dists = _count_compositions(s.grid, n_atoms)
    # exhaustive over small spaces, world count ascending
    for k in range(1, s.max_worlds + 1):
        worlds = tuple(f"w{i}" for i in range(k))
        size = dists ** k * 2 ** (k * k * len(ags))
        if size > s.exhaustive_limit:
            break
        comps = list(_compositions(s.grid, n_atoms))
        for rel in _relation_patterns(worlds, ags):
            for choice in product(comps, repeat=k):
                m = CanonicalModel(worlds, props, rel,
                                   {w: _weights(c, s.grid) for w, c in zip(worlds, choice)})
                if _is_countermodel(m, q):
                    return m
    rng = random.Random(s.seed)
    for _ in range(s.samples):
        m = random_canonical_model(rng, props, ags, rng.randint(1, s.max_worlds), s.grid)
        if _is_countermodel(m, q):
            return m
    return None


def random_canonical_model(rng: random.Random, props, ags, n_worlds: int, grid: int,
                           edge_prob: float = 0.5) -> CanonicalModel:
    worlds = tuple(f"w{i}" for i in range(n_worlds))
    n_atoms = 1 << len(props)
    rel = {a: {(u, v) for u in worlds for v in worlds if rng.random() < edge_prob} for a in ags}
    weights = {}
    for w in worlds:
        support = rng.sample(range(n_atoms), k=min(n_atoms, rng.randint(1, 3)))
        cuts = sorted(rng.randint(0, grid) for _ in range(len(support) - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [grid])]
        acc: dict[int, Fraction] = {}
        for y, k in zip(support, parts):
            if k:
                acc[y] = acc.get(y, 0) + Fraction(k, grid)
        weights[w] = acc
    return CanonicalModel(worlds, tuple(props), rel, weights)


# ---------------------------------------------------------------- classical K


@dataclass
class KModel:
    worlds: list
    relations: dict  # agent -> set of pairs
    valuation: dict  # world -> set of true vars
    root: str = "k0"

    def holds(self, w, f) -> bool:
        if isinstance(f, CVar):
            return f.name in self.valuation.get(w, set())
        if isinstance(f, CNeg):
            return not self.holds(w, f.arg)
        if isinstance(f, CImp):
            return (not self.holds(w, f.left)) or self.holds(w, f.right)
        if isinstance(f, CBox):
            return all(self.holds(v, f.arg) for (u, v) in self.relations.get(f.agent, ()) if u == w)
        raise TypeError(f"not a classical formula: {f!r}")


def _k_sat(signed: list):
    """Tree model ``(true_vars, [(agent, subtree), ...])`` satisfying ``signed``, or None."""
    todo = list(signed)
    lits: dict[str, bool] = {}
    boxes_t, boxes_f = [], []
    while todo:
        sign, f = todo.pop()
        if isinstance(f, CVar):
            if lits.get(f.name, sign) != sign:
                return None
            lits[f.name] = sign
        elif isinstance(f, CNeg):
            todo.append((not sign, f.arg))
        elif isinstance(f, CBox):
            (boxes_t if sign else boxes_f).append(f)
        elif sign:
            done = [(val, CVar(n)) for n, val in lits.items()]
            done += [(True, b) for b in boxes_t] + [(False, b) for b in boxes_f]
            for alt in ((False, f.left), (True, f.right)):
                tree = _k_sat(done + todo + [alt])
                if tree is not None:
                    return tree
            return None
        else:
            todo.append((True, f.left))
            todo.append((False, f.right))
    kids = []
    for fb in boxes_f:
        succ = [(False, fb.arg)] + [(True, tb.arg) for tb in boxes_t if tb.agent == fb.agent]
        sub = _k_sat(succ)
        if sub is None:
            return None
        kids.append((fb.agent, sub))
    return {n for n, val in lits.items() if val}, kids


def _tree_model(tree) -> KModel:
    model = KModel([], {}, {}, "k0")

    def place(node):
        w = f"k{len(model.worlds)}"
        model.worlds.append(w)
        model.valuation[w] = set(node[0])
        for agent, sub in node[1]:
            v = place(sub)
            model.relations.setdefault(agent, set()).add((w, v))
        return w

    place(tree)
    return model


def classical_k_decide(f):
    """``("valid", None)`` or ``("countermodel", KModel)`` for a classical formula."""
    tree = _k_sat([(False, f)])
    if tree is None:
        return "valid", None
    model = _tree_model(tree)
    if model.holds("k0", f):
        raise AssertionError("K tableau produced a non-countermodel")
    return "countermodel", model


def project_classical(m, props, root: str) -> KModel:
    """Read a model as classical: p holds at w iff Δ Pr(p) has value 1 there."""
    it = Interpretation(m)
    val = {w: {p for p in props if it.value(w, Delta(Pr(Var(p)))) == 1} for w in m.worlds}
    return KModel(list(m.worlds), {a: set(ps) for a, ps in m.relations.items()}, val, root)


# ---------------------------------------------------------------- random corpora


@dataclass(frozen=True)
class CorpusSpec:
    count: int = 300
    depth: int = 2
    n_vars: int = 3
    n_agents: int = 2
    denominators: int = 4
    fragment: str = "L_ADD"  # L_ADD | FULL (one product connective)
    max_premises: int = 1
    seed: int = 0
    size: int = 4  # connective budget per formula


def random_term(rng: random.Random, props, size: int = 2):
    if size <= 0 or rng.random() < 0.4:
        v = Var(rng.choice(props))
        return Compl(v) if rng.random() < 0.25 else v
    left = random_term(rng, props, size - 1)
    right = random_term(rng, props, size - 1)
    t = Meet(left, right)
    return Compl(t) if rng.random() < 0.3 else t


def random_formula(rng: random.Random, spec: CorpusSpec, depth: int | None = None,
                   size: int | None = None):
    """Random L_ADD formula with modal depth and connective budget bounds."""
    depth = spec.depth if depth is None else depth
    size = spec.size if size is None else size
    props = [f"p{k}" for k in range(spec.n_vars)]
    ags = [chr(ord("a") + k) for k in range(spec.n_agents)]
    if size <= 0 or rng.random() < 0.2:
        if rng.random() < 0.15:
            d = rng.randint(2, spec.denominators)
            return const(Fraction(rng.randint(1, d - 1), d))
        return Pr(random_term(rng, props))
    # no Δ: it expands through →_Π and would leave the additive fragment
    kinds = ["neg", "imp", "imp", "oplus", "otimes", "max", "min", "equiv"]
    if depth > 0:
        kinds += ["box", "box", "dia"]
    kind = rng.choice(kinds)
    if kind == "neg":
        return Neg(random_formula(rng, spec, depth, size - 1))
    if kind in ("box", "dia"):
        sub = random_formula(rng, spec, depth - 1, size - 1)
        return (Box if kind == "box" else Dia)(rng.choice(ags), sub)
    half = (size - 1) // 2
    a = random_formula(rng, spec, depth, half)
    b = random_formula(rng, spec, depth, size - 1 - half)
    return {"imp": Imp, "oplus": OPlus, "otimes": OTimes, "max": Max, "min": Min,
            "equiv": Equiv}[kind](a, b)


def _valid_template(rng, spec):
    """A query built from a known validity schema."""
    sub = lambda: random_formula(rng, spec, depth=max(0, spec.depth - 1), size=2)
    props = [f"p{k}" for k in range(spec.n_vars)]
    ags = [chr(ord("a") + k) for k in range(spec.n_agents)]
    a, b = Var(rng.choice(props)), Var(rng.choice(props))
    ag = rng.choice(ags)
    phi, chi = sub(), sub()
    choices = [
        Imp(phi, phi),
        Imp(Pr(Meet(a, b)), Pr(a)),
        Imp(OTimes(phi, chi), phi),
        Imp(Box(ag, Imp(phi, chi)), Imp(Box(ag, phi), Box(ag, chi))),
        Imp(Pr(Compl(Meet(Compl(a), Compl(b)))), OPlus(Pr(a), Pr(b))),
        Equiv(Pr(Compl(a)), Neg(Pr(a))),
        Imp(Min(phi, chi), Max(phi, chi)),
        Imp(Box(ag, Min(phi, chi)), Box(ag, phi)),
    ]
    return rng.choice(choices)


def random_query(rng: random.Random, spec: CorpusSpec) -> EntailmentQuery:
    n_prem = rng.randint(0, spec.max_premises)
    prem = tuple(random_formula(rng, spec) for _ in range(n_prem))
    if rng.random() < 0.3:
        concl = _valid_template(rng, spec)
    else:
        concl = random_formula(rng, spec)
    if spec.fragment == "FULL":
        concl = _with_product(rng, spec, concl)
        return EntailmentQuery((), concl, "fb")
    return EntailmentQuery(prem, concl, "fb")


def _with_product(rng, spec, base):
    """Wrap in exactly one * or ~> connective (depth stays bounded by spec.depth)."""
    props = [f"p{k}" for k in range(spec.n_vars)]
    other = random_formula(rng, spec, depth=min(spec.depth, 1), size=1)
    op = rng.choice([Prod, PImp])
    pair = (base, other) if rng.random() < 0.5 else (other, base)
    f = op(*pair)
    wrap = rng.choice(["none", "imp", "imp_rev"])
    extra = Pr(Var(rng.choice(props)))
    if wrap == "imp":
        return Imp(f, extra)
    if wrap == "imp_rev":
        return Imp(extra, f)
    return f


def random_corpus(spec: CorpusSpec) -> list[EntailmentQuery]:
    rng = random.Random(spec.seed)
    return [random_query(rng, spec) for _ in range(spec.count)]


# ---------------------------------------------------------------- differential harness


@dataclass
class InstanceResult:
    query: EntailmentQuery
    verdict: str
    oracle_found: bool
    seconds: float
    problem: str = ""


@dataclass
class DifferentialReport:
    results: list = field(default_factory=list)
    prover_seconds: float = 0.0
    oracle_seconds: float = 0.0

    @property
    def discrepancies(self) -> list:
        return [r for r in self.results if r.problem]

    def count(self, verdict: str) -> int:
        return sum(1 for r in self.results if r.verdict == verdict)

    @property
    def ok(self) -> bool:
        return not self.discrepancies

    def text(self) -> str:
        lines = [
            f"instances: {len(self.results)}",
            f"VALID: {self.count('VALID')}",
            f"NOT_VALID: {self.count('NOT_VALID')}",
            f"UNKNOWN: {self.count('UNKNOWN')}",
            f"oracle countermodels: {sum(r.oracle_found for r in self.results)}",
            f"discrepancies: {len(self.discrepancies)}",
            f"prover seconds: {self.prover_seconds:.3f}",
            f"oracle seconds: {self.oracle_seconds:.3f}",
        ]
        for r in self.discrepancies:
            prem = "; ".join(formula_str(p) for p in r.query.premises)
            lines.append(f"  {r.problem}: [{prem}] |= {formula_str(r.query.conclusion)}")
        return "\n".join(lines) + "\n"


def differential_run(queries, prover=decide, space: SearchSpace = SearchSpace()) -> DifferentialReport:
    """Prover verdicts against grid search on every query."""
    report = DifferentialReport()
    for k, q in enumerate(queries):
        t0 = time.monotonic()
        problem = ""
        try:
            v = prover(q)
            verdict = v.status
        except InternalInconsistency as e:
            verdict, problem = "ERROR", f"countermodel re-check failed ({e})"
        t1 = time.monotonic()
        found = search_countermodel(q, SearchSpace(space.max_worlds, space.grid, space.seed + k,
                                                   space.samples, space.exhaustive_limit,
                                                   space.max_agents)) is not None
        t2 = time.monotonic()
        if verdict == "VALID" and found:
            problem = "prover VALID but oracle found a countermodel"
        report.prover_seconds += t1 - t0
        report.oracle_seconds += t2 - t1
        report.results.append(InstanceResult(q, verdict, found, t1 - t0, problem))
    return report


__all__ = [
    "BudgetExceeded", "CorpusSpec", "DifferentialReport", "KModel", "SearchSpace",
    "classical_k_decide", "differential_run", "print_classical", "project_classical",
    "random_canonical_model", "random_corpus", "random_formula", "random_query",
    "search_countermodel", "classical_vars",
]
