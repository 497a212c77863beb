"""Formulas of the modal probabilistic Łukasiewicz-product language.

Two layers of syntax live here:

* Boolean event terms (``Var``, ``Compl``, ``Meet`` and the ``Join`` sugar)
  which may only occur inside ``Pr(...)``;
* formulas built from probabilistic atoms, the constant 1/2, rational
  constants, Łukasiewicz and product connectives and labelled boxes.

Derived connectives (``Delta``, ``Dia``, ``OPlus``, ``OTimes``, ``Max``,
``Min``, ``Equiv``) are kept as nodes so that formulas print the way they
were written; :func:`expand_derived` rewrites them into primitives.

Concrete ASCII grammar, tightest binding first::

    prefix   !φ  D φ  [a]φ  <a>φ
    *        product
    (+) (.)  strong disjunction / conjunction
    & |      min / max
    -> ~>    Łukasiewicz / product implication (right associative)
    <->      equivalence

Boolean terms use ``~``, ``/\\`` and ``\\/``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Iterator, Union


class ParseError(ValueError):
    """Malformed formula text; ``position`` is a 1-based column."""

    def __init__(self, position: int, expected: Iterable[str], message: str = ""):
        self.position = position
        self.expected = tuple(expected)
        msg = message or f"expected {' or '.join(repr(e) for e in self.expected)}"
        super().__init__(f"column {position}: {msg}")


class RangeError(ValueError):
    """A rational constant outside [0, 1]."""


class UnknownMacro(ValueError):
    pass


class ArityError(ValueError):
    pass


# ---------------------------------------------------------------- Boolean terms


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Compl:
    arg: "BoolTerm"


@dataclass(frozen=True)
class Meet:
    left: "BoolTerm"
    right: "BoolTerm"


@dataclass(frozen=True)
class Join:
    """Sugar for ``~(~left /\\ ~right)``."""

    left: "BoolTerm"
    right: "BoolTerm"


BoolTerm = Union[Var, Compl, Meet, Join]


def term_vars(t: BoolTerm) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, Compl):
        return term_vars(t.arg)
    return term_vars(t.left) | term_vars(t.right)


def desugar_term(t: BoolTerm) -> BoolTerm:
    if isinstance(t, Var):
        return t
    if isinstance(t, Compl):
        return Compl(desugar_term(t.arg))
    if isinstance(t, Meet):
        return Meet(desugar_term(t.left), desugar_term(t.right))
    return Compl(Meet(Compl(desugar_term(t.left)), Compl(desugar_term(t.right))))


def holds(t: BoolTerm, true_vars) -> bool:
    """Classical truth of ``t`` when exactly ``true_vars`` are true."""
    if isinstance(t, Var):
        return t.name in true_vars
    if isinstance(t, Compl):
        return not holds(t.arg, true_vars)
    if isinstance(t, Meet):
        return holds(t.left, true_vars) and holds(t.right, true_vars)
    return holds(t.left, true_vars) or holds(t.right, true_vars)


def truth_table(t: BoolTerm, columns: dict[str, int], full: int) -> int:
    """Bit-parallel evaluation: ``columns[p]`` is the set of assignments
    (as a bitmask) making ``p`` true, ``full`` the mask of all assignments."""
    if isinstance(t, Var):
        return columns.get(t.name, 0)
    if isinstance(t, Compl):
        return full & ~truth_table(t.arg, columns, full)
    left = truth_table(t.left, columns, full)
    right = truth_table(t.right, columns, full)
    return left & right if isinstance(t, Meet) else left | right


# ---------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Pr:
    term: BoolTerm


@dataclass(frozen=True)
class Half:
    pass


@dataclass(frozen=True)
class Const:
    """Rational constant other than 1/2 (which is :class:`Half`)."""

    value: Fraction

    def __post_init__(self):
        v = Fraction(self.value)
        if not 0 <= v <= 1:
            raise RangeError(f"constant {v} outside [0, 1]")
        if v == Fraction(1, 2):
            raise ValueError("the constant 1/2 is Half()")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "Formula"


@dataclass(frozen=True)
class Imp:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Prod:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class PImp:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Box:
    agent: str
    arg: "Formula"


# derived connectives


@dataclass(frozen=True)
class Delta:
    arg: "Formula"


@dataclass(frozen=True)
class Dia:
    agent: str
    arg: "Formula"


@dataclass(frozen=True)
class OPlus:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class OTimes:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Max:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Min:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Equiv:
    left: "Formula"
    right: "Formula"


Formula = Union[Pr, Half, Const, Top, Bot, Neg, Imp, Prod, PImp, Box,
                Delta, Dia, OPlus, OTimes, Max, Min, Equiv]

CONSTANTS = (Half, Const, Top, Bot)
UNARY = (Neg, Delta)
MODAL = (Box, Dia)
BINARY = (Imp, Prod, PImp, OPlus, OTimes, Max, Min, Equiv)
PRIMITIVE = (Pr, Half, Const, Top, Bot, Neg, Imp, Prod, PImp, Box)


def const(value) -> Formula:
    """Constant node for a rational in [0, 1]; 1/2 becomes :class:`Half`."""
    v = Fraction(value)
    return Half() if v == Fraction(1, 2) else Const(v)


def constant_value(f: Formula) -> Fraction | None:
    if isinstance(f, Half):
        return Fraction(1, 2)
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Top):
        return Fraction(1)
    if isinstance(f, Bot):
        return Fraction(0)
    return None


def children(f: Formula) -> tuple:
    if isinstance(f, (Neg, Delta, Box, Dia)):
        return (f.arg,)
    if isinstance(f, BINARY):
        return (f.left, f.right)
    return ()


def rebuild(f: Formula, kids: tuple) -> Formula:
    if isinstance(f, (Neg, Delta)):
        return type(f)(kids[0])
    if isinstance(f, (Box, Dia)):
        return type(f)(f.agent, kids[0])
    if isinstance(f, BINARY):
        return type(f)(kids[0], kids[1])
    return f


def subformulas(f: Formula) -> Iterator[Formula]:
    """Distinct subformulas in post-order (children before parents)."""
    seen = set()
    stack = [(f, False)]
    while stack:
        node, done = stack.pop()
        if done:
            if node not in seen:
                seen.add(node)
                yield node
            continue
        if node in seen:
            continue
        stack.append((node, True))
        for kid in reversed(children(node)):
            stack.append((kid, False))


def prob_atoms(f: Formula) -> list[Pr]:
    return [g for g in subformulas(f) if isinstance(g, Pr)]


# ---------------------------------------------------------------- expansion


def expand_derived(f: Formula) -> Formula:
    """Rewrite derived connectives into primitive ones (value-preserving)."""
    if isinstance(f, (Pr, Half, Const, Top, Bot)):
        return f
    if isinstance(f, Neg):
        return Neg(expand_derived(f.arg))
    if isinstance(f, Box):
        return Box(f.agent, expand_derived(f.arg))
    if isinstance(f, Dia):
        return Neg(Box(f.agent, Neg(expand_derived(f.arg))))
    if isinstance(f, Delta):
        return PImp(Neg(expand_derived(f.arg)), Bot())
    a, b = expand_derived(f.left), expand_derived(f.right)
    if isinstance(f, (Imp, Prod, PImp)):
        return type(f)(a, b)
    if isinstance(f, OPlus):
        return _oplus(a, b)
    if isinstance(f, OTimes):
        return _otimes(a, b)
    if isinstance(f, Max):
        return Imp(Imp(a, b), b)
    if isinstance(f, Min):
        return Neg(Imp(Imp(Neg(a), Neg(b)), Neg(b)))
    if isinstance(f, Equiv):
        return _otimes(Imp(a, b), Imp(b, a))
    raise TypeError(f"not a formula: {f!r}")


def _oplus(a, b):
    return Imp(Neg(a), b)


def _otimes(a, b):
    return Neg(_oplus(Neg(a), Neg(b)))


def is_primitive(f: Formula) -> bool:
    return all(isinstance(g, PRIMITIVE) for g in subformulas(f))


# ---------------------------------------------------------------- analysis


class Fragment(enum.Enum):
    FULL = "FULL"
    L_ADD = "L_ADD"
    L_BOX = "L_BOX"
    L_ADD_BOX = "L_ADD∩L_BOX"

    @property
    def additive(self) -> bool:
        return self in (Fragment.L_ADD, Fragment.L_ADD_BOX)

    @property
    def lbox(self) -> bool:
        return self in (Fragment.L_BOX, Fragment.L_ADD_BOX)


@dataclass(frozen=True)
class FormulaStats:
    modal_depth: int
    length: int
    variables: frozenset
    agents: frozenset
    fragment: Fragment


def modal_depth(f: Formula) -> int:
    if isinstance(f, (Box, Dia)):
        return 1 + modal_depth(f.arg)
    return max((modal_depth(k) for k in children(f)), default=0)


def term_length(t: BoolTerm) -> int:
    if isinstance(t, Var):
        return 1
    if isinstance(t, Compl):
        return 1 + term_length(t.arg)
    return 1 + term_length(t.left) + term_length(t.right)


def length(f: Formula) -> int:
    """Number of symbol occurrences (parentheses not counted)."""
    if isinstance(f, Pr):
        return 1 + term_length(f.term)
    return 1 + sum(length(k) for k in children(f))


def variables(f: Formula) -> frozenset:
    out = frozenset()
    for g in subformulas(f):
        if isinstance(g, Pr):
            out |= term_vars(g.term)
    return out


def agents(f: Formula) -> frozenset:
    return frozenset(g.agent for g in subformulas(f) if isinstance(g, (Box, Dia)))


def fragment(f: Formula) -> Fragment:
    nodes = list(subformulas(expand_derived(f)))
    additive = not any(isinstance(g, (Prod, PImp)) for g in nodes)
    lbox = all(isinstance(g.term, Var) for g in nodes if isinstance(g, Pr))
    if additive and lbox:
        return Fragment.L_ADD_BOX
    if additive:
        return Fragment.L_ADD
    if lbox:
        return Fragment.L_BOX
    return Fragment.FULL


def analyze(f) -> FormulaStats:
    """Depth, length, variables, agents and fragment of a formula or a set."""
    fs = [f] if not isinstance(f, (list, tuple, set, frozenset)) else list(f)
    frags = [fragment(g) for g in fs]
    additive = all(fr.additive for fr in frags)
    lbox = all(fr.lbox for fr in frags)
    frag = (Fragment.L_ADD_BOX if additive and lbox else Fragment.L_ADD if additive
            else Fragment.L_BOX if lbox else Fragment.FULL)
    return FormulaStats(
        modal_depth=max((modal_depth(g) for g in fs), default=0),
        length=sum(length(g) for g in fs),
        variables=reduce(frozenset.union, (variables(g) for g in fs), frozenset()),
        agents=reduce(frozenset.union, (agents(g) for g in fs), frozenset()),
        fragment=frag,
    )


# ---------------------------------------------------------------- macros


def state_prop(i: int) -> str:
    """Proposition marking Markov state ``i``."""
    return f"s{i}"


def _as_term(t) -> BoolTerm:
    if isinstance(t, str):
        return parse_term(t)
    return t


MACRO_ARITY = {"Cert": 2, "NoDec": 2, "NoInc": 2, "L": 2, "CondPr": 2}


def macro_expand(name: str, *args) -> Formula:
    """Formula abbreviated by a named macro.

    ``Cert(a, α)``, ``NoDec(a, α)``, ``NoInc(a, α)``, ``L(q, α)``,
    ``CondPr(α, β)`` (probability of α given β) and ``Path(i0, ..., im)``.
    Boolean arguments may be terms or term strings.
    """
    if name == "Path":
        if not args:
            raise ArityError("Path needs at least one state")
        states = [int(s) for s in args]
        f: Formula = Pr(Var(state_prop(states[-1])))
        for prev, cur in zip(reversed(states[:-1]), reversed(states[1:])):
            f = Prod(Pr(Var(state_prop(prev))), Dia(str(prev), f))
        return f
    if name not in MACRO_ARITY:
        raise UnknownMacro(name)
    if len(args) != MACRO_ARITY[name]:
        raise ArityError(f"{name} takes {MACRO_ARITY[name]} arguments, got {len(args)}")
    if name == "CondPr":
        alpha, beta = _as_term(args[0]), _as_term(args[1])
        return PImp(Pr(beta), Pr(Meet(alpha, beta)))
    if name == "L":
        q = Fraction(args[0])
        if not 0 <= q <= 1:
            raise RangeError(f"threshold {q} outside [0, 1]")
        return Delta(Imp(const(q), Pr(_as_term(args[1]))))
    agent, atom = str(args[0]), Pr(_as_term(args[1]))
    if name == "Cert":
        return Equiv(Box(agent, atom), Dia(agent, atom))
    if name == "NoDec":
        return Imp(atom, Box(agent, atom))
    return Imp(Dia(agent, atom), atom)


# ---------------------------------------------------------------- tokenizer

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:/\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><->|->|~>|\(\+\)|\(\.\)|/\\|\\/|[()\[\]<>!~*&|,])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # num, ident, op, end
    text: str
    pos: int   # 1-based column


def tokenize(text: str) -> list[Token]:
    out, i = [], 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise ParseError(i + 1, ["a token"], f"unexpected character {text[i]!r}")
        if m.lastgroup != "ws":
            out.append(Token(m.lastgroup, m.group(), i + 1))
        i = m.end()
    out.append(Token("end", "", len(text) + 1))
    return out


class _Parser:
    KEYWORDS = {"Pr", "T", "F", "D", "Path"} | set(MACRO_ARITY)

    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def accept(self, *texts) -> Token | None:
        if self.tok.kind == "op" and self.tok.text in texts:
            return self.next()
        return None

    def expect(self, text: str) -> Token:
        if self.tok.kind == "op" and self.tok.text == text:
            return self.next()
        raise ParseError(self.tok.pos, [text])

    def finish(self):
        if self.tok.kind != "end":
            raise ParseError(self.tok.pos, ["end of input"])

    # formulas, loosest first
    def equiv(self) -> Formula:
        f = self.imp()
        while self.accept("<->"):
            f = Equiv(f, self.imp())
        return f

    def imp(self) -> Formula:
        f = self.lattice()
        t = self.accept("->", "~>")
        if t is None:
            return f
        return (Imp if t.text == "->" else PImp)(f, self.imp())

    def lattice(self) -> Formula:
        f = self.strong()
        while (t := self.accept("&", "|")):
            f = (Min if t.text == "&" else Max)(f, self.strong())
        return f

    def strong(self) -> Formula:
        f = self.product()
        while (t := self.accept("(+)", "(.)")):
            f = (OPlus if t.text == "(+)" else OTimes)(f, self.product())
        return f

    def product(self) -> Formula:
        f = self.prefix()
        while self.accept("*"):
            f = Prod(f, self.prefix())
        return f

    def prefix(self) -> Formula:
        if self.accept("!"):
            return Neg(self.prefix())
        if self.tok.kind == "ident" and self.tok.text == "D":
            self.next()
            return Delta(self.prefix())
        if self.accept("["):
            a = self.agent()
            self.expect("]")
            return Box(a, self.prefix())
        if self.accept("<"):
            a = self.agent()
            self.expect(">")
            return Dia(a, self.prefix())
        return self.atom()

    def agent(self) -> str:
        t = self.tok
        if t.kind == "ident" or (t.kind == "num" and "/" not in t.text):
            return self.next().text
        raise ParseError(t.pos, ["agent name"])

    def number(self) -> Fraction:
        t = self.tok
        if t.kind != "num":
            raise ParseError(t.pos, ["rational constant"])
        self.next()
        num, _, den = t.text.partition("/")
        if den and int(den) == 0:
            raise ParseError(t.pos, ["nonzero denominator"])
        v = Fraction(int(num), int(den or 1))
        if not 0 <= v <= 1:
            raise RangeError(f"column {t.pos}: constant {t.text} outside [0, 1]")
        return v

    def atom(self) -> Formula:
        t = self.tok
        if t.kind == "num":
            return const(self.number())
        if self.accept("("):
            f = self.equiv()
            self.expect(")")
            return f
        if t.kind == "ident":
            if t.text == "Pr":
                self.next()
                self.expect("(")
                term = self.bool_join()
                self.expect(")")
                return Pr(term)
            if t.text == "T":
                self.next()
                return Top()
            if t.text == "F":
                self.next()
                return Bot()
            if t.text in MACRO_ARITY or t.text == "Path":
                return self.macro()
            if self.toks[self.i + 1].text == "(":
                raise UnknownMacro(f"column {t.pos}: unknown macro {t.text!r}")
        raise ParseError(t.pos, ["Pr", "constant", "T", "F", "(", "!", "D", "[", "<"])

    def macro(self) -> Formula:
        name = self.next().text
        self.expect("(")
        args = []
        if name == "Path":
            args.append(self.state())
            while self.accept(","):
                args.append(self.state())
        else:
            while True:
                if name == "L" and not args:
                    args.append(self.number())
                elif name in ("Cert", "NoDec", "NoInc") and not args:
                    args.append(self.agent())
                else:
                    args.append(self.bool_join())
                if not self.accept(","):
                    break
        self.expect(")")
        return macro_expand(name, *args)

    def state(self) -> int:
        t = self.tok
        if t.kind != "num" or "/" in t.text:
            raise ParseError(t.pos, ["state index"])
        self.next()
        return int(t.text)

    # Boolean terms
    def bool_join(self) -> BoolTerm:
        t = self.bool_meet()
        while self.accept("\\/"):
            t = Join(t, self.bool_meet())
        return t

    def bool_meet(self) -> BoolTerm:
        t = self.bool_prefix()
        while self.accept("/\\"):
            t = Meet(t, self.bool_prefix())
        return t

    def bool_prefix(self) -> BoolTerm:
        if self.accept("~"):
            return Compl(self.bool_prefix())
        if self.accept("("):
            t = self.bool_join()
            self.expect(")")
            return t
        if self.tok.kind == "ident":
            return Var(self.next().text)
        raise ParseError(self.tok.pos, ["variable", "~", "("])


def parse(text: str) -> Formula:
    """Parse formula text into an AST (macros are expanded on the fly)."""
    p = _Parser(text)
    f = p.equiv()
    p.finish()
    return f


def parse_term(text: str) -> BoolTerm:
    p = _Parser(text)
    t = p.bool_join()
    p.finish()
    return t


# ---------------------------------------------------------------- printer

_LEVEL = {Equiv: 1, Imp: 2, PImp: 2, Max: 3, Min: 3, OPlus: 4, OTimes: 4, Prod: 5}
_SYMBOL = {Equiv: "<->", Imp: "->", PImp: "~>", Max: "|", Min: "&",
           OPlus: "(+)", OTimes: "(.)", Prod: "*"}
_PREFIX = 6


def print_term(t: BoolTerm, level: int = 0) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Compl):
        return "~" + print_term(t.arg, 3)
    mine = 2 if isinstance(t, Meet) else 1
    op = " /\\ " if isinstance(t, Meet) else " \\/ "
    s = print_term(t.left, mine) + op + print_term(t.right, mine + 1)
    return f"({s})" if mine < level else s


def _fraction_text(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def print_formula(f: Formula, level: int = 0) -> str:
    """Text form with minimal parentheses; ``parse`` inverts it."""
    if isinstance(f, Pr):
        return f"Pr({print_term(f.term)})"
    if isinstance(f, Half):
        return "1/2"
    if isinstance(f, Const):
        return _fraction_text(f.value)
    if isinstance(f, Top):
        return "T"
    if isinstance(f, Bot):
        return "F"
    if isinstance(f, Neg):
        return "!" + print_formula(f.arg, _PREFIX)
    if isinstance(f, Delta):
        return "D " + print_formula(f.arg, _PREFIX)
    if isinstance(f, Box):
        return f"[{f.agent}]" + print_formula(f.arg, _PREFIX)
    if isinstance(f, Dia):
        return f"<{f.agent}>" + print_formula(f.arg, _PREFIX)
    mine = _LEVEL[type(f)]
    if mine == 2:
        left, right = mine + 1, mine
    else:
        left, right = mine, mine + 1
    s = f"{print_formula(f.left, left)} {_SYMBOL[type(f)]} {print_formula(f.right, right)}"
    return f"({s})" if mine < level else s


def formula_str(f: Formula) -> str:
    return print_formula(f)
