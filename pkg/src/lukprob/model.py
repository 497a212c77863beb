"""Finite probabilistic Kripke models with exact rational measures.

Four concrete representations share one small protocol (``worlds``,
``successors(agent, w)``, ``prob(w, term)``) so the model checker can
evaluate formulas on any of them:

``ProbModel``
    events are sets of worlds (S = 2^W) and each world carries atom weights
    on worlds.
``CanonicalModel``
    events live in 2^(2^P); an atom is a subset of the proposition list P,
    stored as a bitmask (bit ``k`` set iff ``props[k]`` is in the subset).
``SIModel``
    sample space independent of W with an optional list of measurable
    events, so partial algebras can be represented.
``LBoxModel``
    plain value assignments v(p, w) for atoms ``Pr(p)`` of bare variables.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping

from .syntax import BoolTerm, Compl, Join, Meet, Var, holds, term_vars


class ModelError(ValueError):
    pass


class FormatError(ModelError):
    pass


class ValidationError(ModelError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(f"{v.path}: {v.message}" for v in self.violations))


class UnknownProp(ModelError):
    pass


class UnknownWorld(ModelError):
    pass


class UndefinedMeasure(ModelError):
    pass


@dataclass(frozen=True)
class Violation:
    kind: str  # range | total | reference | additivity
    path: str
    message: str


def rational(text) -> Fraction:
    """Parse a rational string ``"m/n"`` (or an int) exactly."""
    if isinstance(text, bool):
        raise FormatError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise FormatError(f"rationals must be strings 'm/n', got {text!r}")
    num, slash, den = text.strip().partition("/")
    try:
        value = Fraction(int(num), int(den)) if slash else Fraction(int(num))
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"bad rational {text!r}") from None
    if slash and int(den) <= 0:
        raise FormatError(f"bad rational {text!r}: denominator must be positive")
    return value


def rational_str(v: Fraction) -> str:
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"


def _successor_map(relations):
    succ: dict = {}
    for agent, pairs in relations.items():
        table = succ.setdefault(agent, {})
        for a, b in sorted(pairs):
            table.setdefault(a, []).append(b)
    return {a: {w: tuple(ws) for w, ws in t.items()} for a, t in succ.items()}


class _Frame:
    """Shared Kripke-frame behaviour: world lookup and successor lists."""

    def _init_frame(self):
        object.__setattr__(self, "_succ", _successor_map(self.relations))
        object.__setattr__(self, "_world_set", frozenset(self.worlds))

    def check_world(self, w):
        if w not in self._world_set:
            raise UnknownWorld(w)

    def successors(self, agent: str, w) -> tuple:
        return self._succ.get(agent, {}).get(w, ())

    @property
    def agents(self) -> frozenset:
        return frozenset(self.relations)


@dataclass(frozen=True, eq=False)
class ProbModel(_Frame):
    worlds: tuple
    props: tuple
    relations: Mapping[str, frozenset]
    valuation: Mapping[str, frozenset]
    measures: Mapping[str, Mapping[str, Fraction]]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "worlds", tuple(self.worlds))
        object.__setattr__(self, "props", tuple(self.props))
        object.__setattr__(self, "relations",
                           {a: frozenset(map(tuple, ps)) for a, ps in self.relations.items()})
        object.__setattr__(self, "valuation",
                           {p: frozenset(ws) for p, ws in self.valuation.items()})
        object.__setattr__(self, "measures",
                           {w: {u: Fraction(x) for u, x in m.items() if x != 0}
                            for w, m in self.measures.items()})
        self._init_frame()

    def extension(self, term: BoolTerm) -> frozenset:
        key = ("ext", term)
        if key in self._cache:
            return self._cache[key]
        if isinstance(term, Var):
            if term.name not in self.valuation and term.name not in self.props:
                raise UnknownProp(term.name)
            out = self.valuation.get(term.name, frozenset())
        elif isinstance(term, Compl):
            out = self._world_set - self.extension(term.arg)
        elif isinstance(term, Meet):
            out = self.extension(term.left) & self.extension(term.right)
        elif isinstance(term, Join):
            out = self.extension(term.left) | self.extension(term.right)
        else:
            raise TypeError(f"not a Boolean term: {term!r}")
        self._cache[key] = out
        return out

    def prob(self, w, term: BoolTerm) -> Fraction:
        self.check_world(w)
        ext = self.extension(term)
        return sum((x for u, x in self.measures.get(w, {}).items() if u in ext), Fraction(0))


@dataclass(frozen=True, eq=False)
class CanonicalModel(_Frame):
    worlds: tuple
    props: tuple
    relations: Mapping[str, frozenset]
    atom_weights: Mapping[str, Mapping[int, Fraction]]

    def __post_init__(self):
        object.__setattr__(self, "worlds", tuple(self.worlds))
        object.__setattr__(self, "props", tuple(self.props))
        object.__setattr__(self, "relations",
                           {a: frozenset(map(tuple, ps)) for a, ps in self.relations.items()})
        object.__setattr__(self, "atom_weights",
                           {w: {int(y): Fraction(x) for y, x in m.items() if x != 0}
                            for w, m in self.atom_weights.items()})
        object.__setattr__(self, "_index", {p: k for k, p in enumerate(self.props)})
        self._init_frame()

    def subset(self, mask: int) -> frozenset:
        return frozenset(p for k, p in enumerate(self.props) if mask >> k & 1)

    def mask(self, subset) -> int:
        out = 0
        for p in subset:
            if p not in self._index:
                raise UnknownProp(p)
            out |= 1 << self._index[p]
        return out

    def _check_term(self, term):
        missing = term_vars(term) - self._index.keys()
        if missing:
            raise UnknownProp(sorted(missing)[0])

    def extension(self, term: BoolTerm) -> frozenset:
        """Atoms (bitmasks) of 2^(2^P) lying inside the event of ``term``."""
        self._check_term(term)
        return frozenset(y for y in range(1 << len(self.props)) if holds(term, self.subset(y)))

    def prob(self, w, term: BoolTerm) -> Fraction:
        self.check_world(w)
        self._check_term(term)
        return sum((x for y, x in self.atom_weights.get(w, {}).items()
                    if holds(term, self.subset(y))), Fraction(0))


@dataclass(frozen=True, eq=False)
class SIModel(_Frame):
    """Sample-independent model over a finite sample space ``points``.

    ``weights[w]`` assigns mass to sample points; ``measurable`` (optional)
    lists the events of the Boolean algebra, and probabilities of events
    outside it are undefined.
    """

    worlds: tuple
    props: tuple
    relations: Mapping[str, frozenset]
    points: tuple
    valuation: Mapping[str, frozenset]
    weights: Mapping[str, Mapping[object, Fraction]]
    measurable: frozenset | None = None

    def __post_init__(self):
        object.__setattr__(self, "worlds", tuple(self.worlds))
        object.__setattr__(self, "props", tuple(self.props))
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "relations",
                           {a: frozenset(map(tuple, ps)) for a, ps in self.relations.items()})
        object.__setattr__(self, "valuation",
                           {p: frozenset(x) for p, x in self.valuation.items()})
        if self.measurable is not None:
            object.__setattr__(self, "measurable", frozenset(map(frozenset, self.measurable)))
        self._init_frame()

    def extension(self, term: BoolTerm) -> frozenset:
        if isinstance(term, Var):
            if term.name not in self.props:
                raise UnknownProp(term.name)
            return self.valuation.get(term.name, frozenset())
        if isinstance(term, Compl):
            return frozenset(self.points) - self.extension(term.arg)
        if isinstance(term, Meet):
            return self.extension(term.left) & self.extension(term.right)
        return self.extension(term.left) | self.extension(term.right)

    def measure_event(self, w, event: frozenset) -> Fraction:
        if self.measurable is not None and event and event not in self.measurable:
            raise UndefinedMeasure(f"event {sorted(map(str, event))} is not measurable")
        return sum((Fraction(x) for pt, x in self.weights.get(w, {}).items() if pt in event),
                   Fraction(0))

    def prob(self, w, term: BoolTerm) -> Fraction:
        self.check_world(w)
        return self.measure_event(w, self.extension(term))


@dataclass(frozen=True, eq=False)
class LBoxModel(_Frame):
    """Kripke frame plus values v(p, w) read directly as ``Pr(p)``."""

    worlds: tuple
    relations: Mapping[str, frozenset]
    values: Mapping[str, Mapping[str, Fraction]]

    def __post_init__(self):
        object.__setattr__(self, "worlds", tuple(self.worlds))
        object.__setattr__(self, "relations",
                           {a: frozenset(map(tuple, ps)) for a, ps in self.relations.items()})
        object.__setattr__(self, "values",
                           {w: {p: Fraction(x) for p, x in m.items()} for w, m in self.values.items()})
        self._init_frame()

    @property
    def props(self) -> tuple:
        return tuple(sorted({p for m in self.values.values() for p in m}))

    def prob(self, w, term: BoolTerm) -> Fraction:
        self.check_world(w)
        if not isinstance(term, Var):
            raise ModelError("value-assignment models only interpret Pr(p) for variables p")
        return self.values.get(w, {}).get(term.name, Fraction(0))


# ---------------------------------------------------------------- operations


def event_extension(m, t: BoolTerm) -> frozenset:
    return m.extension(t)


def measure_of(m, w, t: BoolTerm) -> Fraction:
    return m.prob(w, t)


def _frame_violations(m) -> list[Violation]:
    out = []
    worlds = set(m.worlds)
    if not worlds:
        out.append(Violation("reference", "worlds", "a model needs at least one world"))
    for agent, pairs in sorted(m.relations.items()):
        for k, (a, b) in enumerate(sorted(pairs)):
            for end in (a, b):
                if end not in worlds:
                    out.append(Violation("reference", f"relations.{agent}[{k}]",
                                         f"undeclared world {end!r}"))
    return out


def _weight_violations(path, weights, allowed=None) -> list[Violation]:
    out = []
    total = Fraction(0)
    for key, x in weights.items():
        if allowed is not None and key not in allowed:
            out.append(Violation("reference", f"{path}.{key}", f"undeclared {key!r}"))
        if not 0 <= x <= 1:
            out.append(Violation("range", f"{path}.{key}", f"weight {x} outside [0, 1]"))
        total += x
    if total != 1:
        out.append(Violation("total", path, f"weights sum to {total}, not 1"))
    return out


def validate(m) -> list[Violation]:
    """All invariant violations of a model (empty list when the model is sound)."""
    out = _frame_violations(m)
    if isinstance(m, ProbModel):
        worlds = set(m.worlds)
        for p, ws in sorted(m.valuation.items()):
            if p not in m.props:
                out.append(Violation("reference", f"valuation.{p}", f"undeclared prop {p!r}"))
            for u in sorted(ws - worlds):
                out.append(Violation("reference", f"valuation.{p}", f"undeclared world {u!r}"))
        for w in m.worlds:
            out += _weight_violations(f"measures.{w}", m.measures.get(w, {}), worlds)
        for w in m.measures:
            if w not in worlds:
                out.append(Violation("reference", f"measures.{w}", f"undeclared world {w!r}"))
        if not out:
            out += _additivity_sample(m)
    elif isinstance(m, CanonicalModel):
        n = 1 << len(m.props)
        for w in m.worlds:
            out += _weight_violations(f"atomWeights.{w}", m.atom_weights.get(w, {}), range(n))
    elif isinstance(m, SIModel):
        for w in m.worlds:
            out += _weight_violations(f"weights.{w}", m.weights.get(w, {}), set(m.points))
    elif isinstance(m, LBoxModel):
        for w, vals in m.values.items():
            for p, x in vals.items():
                if not 0 <= x <= 1:
                    out.append(Violation("range", f"values.{w}.{p}", f"value {x} outside [0, 1]"))
    return out


def _additivity_sample(m: ProbModel, samples: int = 8) -> list[Violation]:
    # disjoint event pairs drawn from the propositional algebra
    rng = random.Random(0)
    out = []
    props = list(m.props)
    if not props:
        return out
    for _ in range(samples):
        p = Var(rng.choice(props))
        q = Var(rng.choice(props))
        a, b = Meet(p, q), Meet(p, Compl(q))
        for w in m.worlds:
            if m.prob(w, a) + m.prob(w, b) != m.prob(w, p):
                out.append(Violation("additivity", f"measures.{w}", f"not additive on {p.name}"))
    return out


# ---------------------------------------------------------------- file I/O


def _relations_from(doc, worlds_key="relations"):
    rels = doc.get(worlds_key, {})
    if not isinstance(rels, dict):
        raise FormatError("relations must be an object agent -> [[from, to], ...]")
    out = {}
    for agent, pairs in rels.items():
        if not isinstance(pairs, list) or not all(
                isinstance(p, list) and len(p) == 2 for p in pairs):
            raise FormatError(f"relations.{agent} must be a list of [from, to] pairs")
        out[str(agent)] = frozenset((str(a), str(b)) for a, b in pairs)
    return out


def model_from_dict(doc: dict, check: bool = True):
    """Build a model from its JSON object form (see :func:`model_to_dict`)."""
    if not isinstance(doc, dict):
        raise FormatError("model document must be a JSON object")
    try:
        worlds = [str(w) for w in doc["worlds"]]
        props = [str(p) for p in doc.get("props", [])]
    except (KeyError, TypeError):
        raise FormatError("model document needs a 'worlds' array") from None
    relations = _relations_from(doc)
    if doc.get("algebra") == "canonical":
        index = {p: k for k, p in enumerate(props)}
        atoms = []
        for a in doc.get("atoms", []):
            if not isinstance(a, list):
                raise FormatError("atoms must be arrays of prop names")
            try:
                atoms.append(sum(1 << index[str(p)] for p in set(a)))
            except KeyError as e:
                raise ValidationError([Violation("reference", "atoms", f"undeclared prop {e}")])
        weights = {}
        for w, row in doc.get("atomWeights", {}).items():
            if not isinstance(row, list) or len(row) != len(atoms):
                raise FormatError(f"atomWeights.{w} must list one rational per atom")
            acc: dict[int, Fraction] = {}
            for y, x in zip(atoms, row):
                acc[y] = acc.get(y, Fraction(0)) + rational(x)
            weights[str(w)] = acc
        m = CanonicalModel(worlds, props, relations, weights)
        bad = [Violation("reference", f"atomWeights.{w}", f"undeclared world {w!r}")
               for w in weights if w not in worlds]
    else:
        valuation = {str(p): frozenset(map(str, ws)) for p, ws in doc.get("valuation", {}).items()}
        measures = {str(w): {str(u): rational(x) for u, x in row.items()}
                    for w, row in doc.get("measures", {}).items()}
        m = ProbModel(worlds, props, relations, valuation, measures)
        bad = []
    if check:
        bad = bad + validate(m)
        if bad:
            raise ValidationError(bad)
    return m


def load_model(document):
    """Load and validate a model from a path, a JSON string or a dict."""
    if isinstance(document, dict):
        return model_from_dict(document)
    text = document
    if isinstance(document, Path) or (isinstance(document, str) and not document.lstrip().startswith("{")):
        text = Path(document).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid JSON: {e}") from None
    return model_from_dict(doc)


def model_to_dict(m) -> dict:
    rel = {a: sorted([list(p) for p in pairs]) for a, pairs in sorted(m.relations.items())}
    if isinstance(m, CanonicalModel):
        used = sorted({y for ws in m.atom_weights.values() for y in ws}, reverse=True)
        return {
            "algebra": "canonical",
            "worlds": list(m.worlds),
            "props": list(m.props),
            "relations": rel,
            "atoms": [sorted(m.subset(y), key=m.props.index) for y in used],
            "atomWeights": {w: [rational_str(m.atom_weights.get(w, {}).get(y, 0)) for y in used]
                            for w in m.worlds},
        }
    if isinstance(m, ProbModel):
        return {
            "worlds": list(m.worlds),
            "props": list(m.props),
            "relations": rel,
            "valuation": {p: sorted(m.valuation.get(p, ()), key=m.worlds.index) for p in m.props},
            "measures": {w: {u: rational_str(m.measures[w][u])
                             for u in m.worlds if u in m.measures.get(w, {})}
                         for w in m.worlds},
        }
    raise TypeError(f"cannot serialise {type(m).__name__}")


def dump_model(m, path=None) -> str:
    text = json.dumps(model_to_dict(m), indent=2)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def to_dot(m) -> str:
    """Graphviz rendering: worlds annotated with their weights, labelled edges."""
    lines = ["digraph model {", "  node [shape=box];"]
    for w in m.worlds:
        if isinstance(m, CanonicalModel):
            ws = m.atom_weights.get(w, {})
            desc = ", ".join(f"{{{','.join(sorted(m.subset(y)))}}}:{x}" for y, x in sorted(ws.items()))
        elif isinstance(m, ProbModel):
            desc = ", ".join(f"{u}:{x}" for u, x in m.measures.get(w, {}).items())
        else:
            desc = ""
        lines.append(f'  "{w}" [label="{w}\\n{desc}"];')
    for agent, pairs in sorted(m.relations.items()):
        for a, b in sorted(pairs):
            lines.append(f'  "{a}" -> "{b}" [label="{agent}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def example1() -> ProbModel:
    """The bundled robot-warehouse fixture."""
    return load_model(Path(__file__).with_name("data") / "example1.json")
