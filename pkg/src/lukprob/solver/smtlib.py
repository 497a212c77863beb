"""SMT-LIB 2 (QF_NRA) export of constraint systems, plus a small reader.

The writer is deterministic: declarations follow variable creation order
(coherence weights after all other variables, block by block), bounds come
next, then one assertion per row.  The reader parses the subset the writer
emits so that exported text can be re-checked against a witness.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Mapping

from .poly import Poly
from .system import EQ, LE, LT, ConstraintSystem

_SIMPLE = re.compile(r"^[A-Za-z_~!@$%^&*+=<>.?/-][A-Za-z0-9_~!@$%^&*+=<>.?/-]*$")


def symbol(name: str) -> str:
    return name if _SIMPLE.match(name) else f"|{name}|"


def number(c: Fraction) -> str:
    c = Fraction(c)
    mag = abs(c)
    txt = str(mag.numerator) if mag.denominator == 1 else f"(/ {mag.numerator} {mag.denominator})"
    return f"(- {txt})" if c < 0 else txt


def term(p: Poly) -> str:
    parts = []
    for mono in sorted(p.terms, key=lambda m: (len(m), m)):
        c = p.terms[mono]
        if not mono:
            parts.append(number(c))
            continue
        factors = [symbol(v) for v in mono]
        if c != 1:
            factors.insert(0, number(c))
        parts.append(factors[0] if len(factors) == 1 else f"(* {' '.join(factors)})")
    if not parts:
        return "0"
    return parts[0] if len(parts) == 1 else f"(+ {' '.join(parts)})"


_OP = {LE: "<=", LT: "<", EQ: "="}


def export_smtlib(sys: ConstraintSystem) -> str:
    lines = ["(set-option :produce-models true)", "(set-logic QF_NRA)"]
    names = list(sys.bounds)
    for b in sys.blocks:
        names += b.weight_vars
    for v in names:
        lines.append(f"(declare-fun {symbol(v)} () Real)")
    for v, (lo, hi) in sys.bounds.items():
        lines.append(f"(assert (<= {number(lo)} {symbol(v)}))")
        if hi is not None:
            lines.append(f"(assert (<= {symbol(v)} {number(hi)}))")
    for b in sys.blocks:
        for u in b.weight_vars:
            lines.append(f"(assert (<= 0 {symbol(u)}))")
    for r in sys.rows:
        lines.append(f"(assert ({_OP[r.rel]} {term(r.left)} {term(r.right)}))")
    for b in sys.blocks:
        for r in b.rows():
            lines.append(f"(assert (= {term(r.left)} {term(r.right)}))")
    lines += ["(check-sat)", "(get-model)"]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- reader

_TOK = re.compile(r"\s*(?:(\()|(\))|(\|[^|]*\|)|([^\s()|]+))")


def parse_sexprs(text: str) -> list:
    """Parse s-expressions into nested lists of atom strings."""
    text = "\n".join(line.split(";", 1)[0] for line in text.splitlines())
    stack: list[list] = [[]]
    pos = 0
    while pos < len(text):
        m = _TOK.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip():
                raise ValueError(f"bad s-expression at offset {pos}")
            break
        pos = m.end()
        if m.group(1):
            stack.append([])
        elif m.group(2):
            if len(stack) == 1:
                raise ValueError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            atom = m.group(3) or m.group(4)
            stack[-1].append(atom[1:-1] if atom.startswith("|") else atom)
    if len(stack) != 1:
        raise ValueError("unbalanced '('")
    return stack[0]


def parse_smtlib(text: str) -> dict:
    """Declarations and assertions of an exported problem."""
    decls, asserts, logic = [], [], None
    for cmd in parse_sexprs(text):
        if not isinstance(cmd, list) or not cmd:
            raise ValueError(f"unexpected top-level item {cmd!r}")
        head = cmd[0]
        if head == "declare-fun":
            if cmd[2] != [] or cmd[3] != "Real":
                raise ValueError(f"unsupported declaration {cmd!r}")
            decls.append(cmd[1])
        elif head == "assert":
            asserts.append(cmd[1])
        elif head == "set-logic":
            logic = cmd[1]
    return {"logic": logic, "declarations": decls, "assertions": asserts}


def eval_sexpr(e, assign: Mapping[str, Fraction]):
    if isinstance(e, str):
        if re.fullmatch(r"\d+", e):
            return Fraction(int(e))
        if re.fullmatch(r"\d+\.\d+", e):
            return Fraction(e)
        return Fraction(assign[e])
    op, *args = e
    vals = [eval_sexpr(a, assign) for a in args]
    if op == "+":
        return sum(vals, Fraction(0))
    if op == "*":
        out = Fraction(1)
        for v in vals:
            out *= v
        return out
    if op == "-":
        return -vals[0] if len(vals) == 1 else vals[0] - sum(vals[1:], Fraction(0))
    if op == "/":
        return vals[0] / vals[1]
    if op in ("<=", "<", "=", ">=", ">"):
        pairs = list(zip(vals, vals[1:]))
        check = {"<=": lambda a, b: a <= b, "<": lambda a, b: a < b, "=": lambda a, b: a == b,
                 ">=": lambda a, b: a >= b, ">": lambda a, b: a > b}[op]
        return all(check(a, b) for a, b in pairs)
    if op == "and":
        return all(vals)
    raise ValueError(f"unsupported operator {op!r}")


def assertions_hold(text: str, assign: Mapping[str, Fraction]) -> bool:
    """Evaluate every assertion of exported text under ``assign``.

    Unassigned declared variables read as 0 (unused coherence weights).
    """
    doc = parse_smtlib(text)
    full = {v: Fraction(0) for v in doc["declarations"]}
    full.update(assign)
    return all(eval_sexpr(a, full) for a in doc["assertions"])
