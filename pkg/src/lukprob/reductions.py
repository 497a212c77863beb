"""Translations between models and between formula sets.

* :func:`canonicalize` moves a model onto the canonical event algebra
  2^(2^P) over a finite prop set P, preserving every value over P.
* :func:`lbox_bridge` realises a value assignment v(p, w) for ``Pr(p)``
  atoms by a product measure with the given marginals.
* :func:`eliminate_constants` replaces rational constants by fresh atoms
  ``Pr(q_m)`` pinned to m/n by side formulas, preserving satisfiability.
* :func:`delta_embed` maps classical modal formulas into the language by
  reading each variable p as ``Δ Pr(p)``.
* :class:`MarkovChain`, :func:`markov_to_frame` and :func:`path_value`
  encode discrete-time Markov chains as frames and paths as formulas.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as cartesian
from math import lcm
from pathlib import Path

from .model import (CanonicalModel, FormatError, LBoxModel, ProbModel,
                    ValidationError, Violation, rational)
from .modelcheck import evaluate
from .syntax import (Bot, Box, Compl, Const, Delta, Equiv, Formula, Half, Imp, Meet,
                     Neg, OPlus, ParseError, Pr, Top, Var, agents, children, constant_value,
                     length, macro_expand, modal_depth, rebuild, state_prop, subformulas,
                     tokenize, variables)

# ---------------------------------------------------------------- canonical models


def literal_meet(props, subset) -> Meet | Var | Compl:
    """⋀_{p ∈ subset} p ∧ ⋀_{q ∉ subset} ∼q over ``props`` (in order)."""
    lits = [Var(p) if p in subset else Compl(Var(p)) for p in props]
    t = lits[0]
    for lit in lits[1:]:
        t = Meet(t, lit)
    return t


def canonicalize(m, scope_props=None) -> CanonicalModel:
    """Canonical model over ``scope_props`` with the same values as ``m``."""
    props = tuple(scope_props if scope_props is not None else m.props)
    weights = {}
    if isinstance(m, ProbModel):
        for w in m.worlds:
            acc: dict[int, Fraction] = {}
            for u, x in m.measures.get(w, {}).items():
                mask = sum(1 << k for k, p in enumerate(props) if u in m.valuation.get(p, ()))
                acc[mask] = acc.get(mask, 0) + x
            weights[w] = acc
    elif isinstance(m, CanonicalModel):
        src = {p: k for k, p in enumerate(m.props)}
        for w in m.worlds:
            acc = {}
            for y, x in m.atom_weights.get(w, {}).items():
                mask = sum(1 << k for k, p in enumerate(props) if p in src and y >> src[p] & 1)
                acc[mask] = acc.get(mask, 0) + x
            weights[w] = acc
    else:
        for w in m.worlds:
            acc = {}
            if not props:
                acc[0] = Fraction(1)
            else:
                for mask in range(1 << len(props)):
                    subset = {p for k, p in enumerate(props) if mask >> k & 1}
                    x = m.prob(w, literal_meet(props, subset))
                    if x:
                        acc[mask] = x
            weights[w] = acc
    return CanonicalModel(tuple(m.worlds), props, dict(m.relations), weights)


def lbox_bridge(v: LBoxModel, props=None) -> CanonicalModel:
    """Canonical model in which ``Pr(p)`` at w has value v(p, w).

    Each world gets the product measure whose marginals are the given
    values, i.e. the tracked props are independent events.
    """
    props = tuple(props if props is not None else v.props)
    weights = {}
    for w in v.worlds:
        vals = [Fraction(v.values.get(w, {}).get(p, 0)) for p in props]
        acc: dict[int, Fraction] = {0: Fraction(1)}
        for k, x in enumerate(vals):
            nxt: dict[int, Fraction] = {}
            for mask, mass in acc.items():
                if x:
                    nxt[mask | 1 << k] = nxt.get(mask | 1 << k, 0) + mass * x
                if x != 1:
                    nxt[mask] = nxt.get(mask, 0) + mass * (1 - x)
            acc = nxt
        weights[w] = acc
    return CanonicalModel(tuple(v.worlds), props, dict(v.relations), weights)


# ---------------------------------------------------------------- constants


class MultiModalBlowup(UserWarning):
    pass


@dataclass
class ConstantEliminationResult:
    translated: list
    side: list
    fresh: dict = field(default_factory=dict)  # "q" and m -> variable name
    denominator: int = 1
    size_before: int = 0
    size_after: int = 0

    @property
    def formulas(self) -> list:
        return self.translated + self.side

    @property
    def changed(self) -> bool:
        return bool(self.side)


def _constants(f: Formula) -> set[Fraction]:
    return {c for g in subformulas(f) if (c := constant_value(g)) is not None
            and isinstance(g, (Half, Const)) and 0 < c < 1}


def _oplus_chain(atom: Formula, k: int) -> Formula:
    f = atom
    for _ in range(k - 1):
        f = OPlus(atom, f)
    return f


def _fresh_names(taken: set, n: int) -> tuple[str, dict]:
    base = "q"
    while base in taken or any(f"{base}{m}" in taken for m in range(1, n)):
        base += "_"
    return base, {m: f"{base}{m}" for m in range(1, n)}


def _agent_sequences(ags: list, depth: int):
    for k in range(depth + 1):
        yield from cartesian(ags, repeat=k)


def _boxed(seq, f: Formula) -> Formula:
    for a in reversed(seq):
        f = Box(a, f)
    return f


def eliminate_constants(gamma) -> ConstantEliminationResult:
    """Constant-free formula set that is satisfiable iff ``gamma`` is."""
    gamma = list(gamma)
    size_before = sum(length(f) for f in gamma)
    consts = set().union(*(_constants(f) for f in gamma)) if gamma else set()
    if all(c.denominator == 1 for c in consts):
        out = [_strip_crisp(f) for f in gamma]
        return ConstantEliminationResult(out, [], {}, 1, size_before, sum(length(f) for f in out))
    n = lcm(*(c.denominator for c in consts))
    taken = set().union(*(variables(f) for f in gamma))
    base, qs = _fresh_names(taken, n)
    depth = max(modal_depth(f) for f in gamma)
    ags = sorted(set().union(*(agents(f) for f in gamma)))
    if len(ags) > 1:
        warnings.warn(f"side formulas over {len(ags)} agents grow as {len(ags)}^depth",
                      MultiModalBlowup, stacklevel=2)
    numerators = sorted({int(c * n) for c in consts})
    q = Pr(Var(base))

    def rewrite(f: Formula) -> Formula:
        c = constant_value(f)
        if isinstance(f, (Half, Const)):
            if c == 0:
                return Bot()
            if c == 1:
                return Top()
            return Pr(Var(qs[int(c * n)]))
        return rebuild(f, tuple(rewrite(k) for k in children(f)))

    translated = [rewrite(f) for f in gamma]
    core = [Equiv(_oplus_chain(q, n - 1), Neg(q))]
    for m in numerators:
        core.append(Equiv(Pr(Var(qs[m])), _oplus_chain(q, m)))
    seqs = list(_agent_sequences(ags, depth)) if ags else [()]
    side = [_boxed(seq, g) for seq in seqs for g in core]
    fresh = {"q": base, **{m: qs[m] for m in numerators}}
    size_after = sum(length(f) for f in translated + side)
    return ConstantEliminationResult(translated, side, fresh, n, size_before, size_after)


def _strip_crisp(f: Formula) -> Formula:
    if isinstance(f, Const):
        return Top() if f.value == 1 else Bot()
    return rebuild(f, tuple(_strip_crisp(k) for k in children(f)))


# ---------------------------------------------------------------- classical K


@dataclass(frozen=True)
class CVar:
    name: str


@dataclass(frozen=True)
class CNeg:
    arg: object


@dataclass(frozen=True)
class CImp:
    left: object
    right: object


@dataclass(frozen=True)
class CBox:
    agent: str
    arg: object


def c_and(a, b):
    return CNeg(CImp(a, CNeg(b)))


def c_or(a, b):
    return CImp(CNeg(a), b)


def c_dia(agent, a):
    return CNeg(CBox(agent, CNeg(a)))


class _CParser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def accept(self, *ops):
        if self.tok.kind == "op" and self.tok.text in ops:
            self.i += 1
            return self.toks[self.i - 1]
        return None

    def expect(self, op):
        if not self.accept(op):
            raise ParseError(self.tok.pos, [op])

    def imp(self):
        f = self.disj()
        if self.accept("->"):
            return CImp(f, self.imp())
        return f

    def disj(self):
        f = self.conj()
        while self.accept("|"):
            f = c_or(f, self.conj())
        return f

    def conj(self):
        f = self.unary()
        while self.accept("&"):
            f = c_and(f, self.unary())
        return f

    def agent(self):
        t = self.tok
        if t.kind in ("ident", "num"):
            self.i += 1
            return t.text
        raise ParseError(t.pos, ["agent name"])

    def unary(self):
        if self.accept("!", "~"):
            return CNeg(self.unary())
        if self.accept("["):
            a = self.agent()
            self.expect("]")
            return CBox(a, self.unary())
        if self.accept("<"):
            a = self.agent()
            self.expect(">")
            return c_dia(a, self.unary())
        if self.accept("("):
            f = self.imp()
            self.expect(")")
            return f
        if self.tok.kind == "ident":
            self.i += 1
            return CVar(self.toks[self.i - 1].text)
        raise ParseError(self.tok.pos, ["variable", "!", "[", "<", "("])


def parse_classical(text: str):
    """Classical modal formula over ``!``, ``->``, ``[a]`` (``&``, ``|``, ``<a>`` as sugar)."""
    p = _CParser(text)
    f = p.imp()
    if p.tok.kind != "end":
        raise ParseError(p.tok.pos, ["end of input"])
    return f


def print_classical(f, level: int = 0) -> str:
    if isinstance(f, CVar):
        return f.name
    if isinstance(f, CNeg):
        return "!" + print_classical(f.arg, 2)
    if isinstance(f, CBox):
        return f"[{f.agent}]" + print_classical(f.arg, 2)
    s = f"{print_classical(f.left, 1)} -> {print_classical(f.right, 0)}"
    return f"({s})" if level > 0 else s


def classical_vars(f) -> set:
    if isinstance(f, CVar):
        return {f.name}
    if isinstance(f, (CNeg, CBox)):
        return classical_vars(f.arg)
    return classical_vars(f.left) | classical_vars(f.right)


def delta_embed(f) -> Formula:
    """Replace each variable p by ``Δ Pr(p)``, keeping the modal structure."""
    if isinstance(f, str):
        f = parse_classical(f)
    if isinstance(f, CVar):
        return Delta(Pr(Var(f.name)))
    if isinstance(f, CNeg):
        return Neg(delta_embed(f.arg))
    if isinstance(f, CImp):
        return Imp(delta_embed(f.left), delta_embed(f.right))
    if isinstance(f, CBox):
        return Box(f.agent, delta_embed(f.arg))
    raise TypeError(f"not a classical formula: {f!r}")


# ---------------------------------------------------------------- Markov chains


class UnknownState(ValueError):
    def __init__(self, state):
        super().__init__(f"unknown chain state {state}")
        self.state = state


@dataclass(frozen=True)
class MarkovChain:
    """States 1..n, start distribution q and transition matrix p (exact)."""

    start: tuple
    transition: tuple

    def __post_init__(self):
        object.__setattr__(self, "start", tuple(Fraction(x) for x in self.start))
        object.__setattr__(self, "transition",
                           tuple(tuple(Fraction(x) for x in row) for row in self.transition))
        bad = []
        n = len(self.start)
        if n == 0:
            bad.append(Violation("range", "states", "a chain needs at least one state"))
        if len(self.transition) != n or any(len(r) != n for r in self.transition):
            raise FormatError("transition must be an n x n matrix")
        for k, x in enumerate(self.start):
            if not 0 <= x <= 1:
                bad.append(Violation("range", f"start[{k}]", f"{x} outside [0, 1]"))
        if sum(self.start) != 1:
            bad.append(Violation("total", "start", f"sums to {sum(self.start)}"))
        for i, row in enumerate(self.transition):
            for j, x in enumerate(row):
                if not 0 <= x <= 1:
                    bad.append(Violation("range", f"transition[{i}][{j}]", f"{x} outside [0, 1]"))
            if sum(row) != 1:
                bad.append(Violation("total", f"transition[{i}]", f"sums to {sum(row)}"))
        if bad:
            raise ValidationError(bad)

    @property
    def n(self) -> int:
        return len(self.start)

    def q(self, i: int) -> Fraction:
        return self.start[i - 1]

    def p(self, i: int, j: int) -> Fraction:
        return self.transition[i - 1][j - 1]

    def path_probability(self, path) -> Fraction:
        path = [int(s) for s in path]
        for s in path:
            if not 1 <= s <= self.n:
                raise UnknownState(s)
        out = self.q(path[0])
        for a, b in zip(path, path[1:]):
            out *= self.p(a, b)
        return out


def load_chain(document) -> MarkovChain:
    """Chain from a path, JSON text or dict with ``states``, ``start``, ``transition``."""
    if isinstance(document, dict):
        doc = document
    else:
        text = document
        if isinstance(document, Path) or not str(document).lstrip().startswith("{"):
            text = Path(document).read_text()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise FormatError(f"invalid JSON: {e}") from None
    try:
        n = int(doc["states"])
        start = [rational(x) for x in doc["start"]]
        trans = [[rational(x) for x in row] for row in doc["transition"]]
    except (KeyError, TypeError) as e:
        raise FormatError(f"chain document needs states/start/transition: {e}") from None
    if len(start) != n:
        raise FormatError(f"start has {len(start)} entries for {n} states")
    return MarkovChain(start, trans)


def markov_to_frame(c: MarkovChain) -> ProbModel:
    """Frame with worlds 0..n: agent k leads every world to k; world 0 starts."""
    worlds = [str(i) for i in range(c.n + 1)]
    relations = {str(k): {(w, str(k)) for w in worlds} for k in range(1, c.n + 1)}
    valuation = {state_prop(i): {str(i)} for i in range(1, c.n + 1)}
    measures = {"0": {str(i): c.q(i) for i in range(1, c.n + 1)}}
    for i in range(1, c.n + 1):
        measures[str(i)] = {str(j): c.p(i, j) for j in range(1, c.n + 1)}
    return ProbModel(worlds, [state_prop(i) for i in range(1, c.n + 1)], relations,
                     valuation, measures)


def path_value(c: MarkovChain, path) -> tuple[Formula, Fraction]:
    """Path formula and its value at world 0 (equal to the path probability)."""
    path = [int(s) for s in path]
    if not path:
        raise ValueError("a path needs at least one state")
    for s in path:
        if not 1 <= s <= c.n:
            raise UnknownState(s)
    f = macro_expand("Path", *path)
    return f, evaluate(markov_to_frame(c), "0", f)
