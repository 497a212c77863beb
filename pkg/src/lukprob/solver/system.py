"""Constraint systems: bounded variables, polynomial rows, coherence blocks."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from ..syntax import BoolTerm, print_term, term_vars, truth_table
from .poly import Poly, as_poly

LE, LT, EQ = "<=", "<", "="
RELATIONS = (LE, LT, EQ)

DEFAULT_BASIS_CAP = 12


class BasisTooLarge(ValueError):
    def __init__(self, m: int, cap: int):
        self.m, self.cap = m, cap
        super().__init__(f"coherence basis of {m} props exceeds the cap of {cap}")


@dataclass(frozen=True)
class Row:
    """``left rel right`` with ``rel`` one of ``<=``, ``<``, ``=``."""

    left: Poly
    rel: str
    right: Poly
    label: str = ""

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")
        object.__setattr__(self, "left", as_poly(self.left))
        object.__setattr__(self, "right", as_poly(self.right))

    @property
    def diff(self) -> Poly:
        return self.left - self.right

    @property
    def variables(self) -> frozenset:
        return self.left.variables | self.right.variables

    @property
    def is_linear(self) -> bool:
        return self.left.is_linear and self.right.is_linear

    def holds(self, assign: Mapping[str, Fraction]) -> bool:
        d = self.diff.evaluate(assign)
        return d <= 0 if self.rel == LE else d < 0 if self.rel == LT else d == 0

    def __str__(self):
        return f"{self.left} {self.rel} {self.right}"


def column_bits(e: Sequence[int]) -> str:
    return "".join(map(str, e))


@dataclass(frozen=True)
class CoherenceBlock:
    """Probability-coherence columns for the atoms of one world.

    Columns are the classical assignments e ∈ {0,1}^m to the basis props,
    ordered lexicographically from all-ones down to all-zeros with the first
    prop most significant ({pq, p, q, ∅} for basis (p, q)).  ``incidence[i]``
    is a bitmask over column indices: bit c is set iff column c satisfies
    atom i.  Column weights ``u_e`` are non-negative, sum to 1 and
    ``Σ_e incidence[i][e]·u_e = value_vars[i]``.
    """

    label: str
    atoms: tuple
    value_vars: tuple
    basis: tuple
    incidence: tuple

    @property
    def m(self) -> int:
        return len(self.basis)

    @property
    def n_columns(self) -> int:
        return 1 << self.m

    def column(self, c: int) -> tuple:
        m = self.m
        return tuple(1 - (c >> (m - 1 - k) & 1) for k in range(m))

    @property
    def columns(self) -> list[tuple]:
        return [self.column(c) for c in range(self.n_columns)]

    def column_props(self, c: int) -> frozenset:
        return frozenset(p for p, bit in zip(self.basis, self.column(c)) if bit)

    def weight_var(self, c: int) -> str:
        return f"u__{self.label}__{column_bits(self.column(c))}"

    @property
    def weight_vars(self) -> list[str]:
        return [self.weight_var(c) for c in range(self.n_columns)]

    def a(self, i: int, c: int) -> int:
        return self.incidence[i] >> c & 1

    def signature(self, c: int) -> tuple:
        return tuple(inc >> c & 1 for inc in self.incidence)

    def groups(self) -> list[tuple[tuple, list[int]]]:
        """Columns grouped by incidence signature, in first-column order."""
        out: dict[tuple, list[int]] = {}
        for c in range(self.n_columns):
            out.setdefault(self.signature(c), []).append(c)
        return list(out.items())

    def rows(self) -> list[Row]:
        """Materialised linear rows of the block over all weight variables."""
        us = self.weight_vars
        total = Poly({(u,): 1 for u in us})
        out = [Row(total, EQ, Poly.const(1), f"coherence {self.label}: total")]
        for i, x in enumerate(self.value_vars):
            lhs = Poly({(us[c],): 1 for c in range(self.n_columns) if self.a(i, c)})
            out.append(Row(lhs, EQ, Poly.var(x), f"coherence {self.label}: {print_term(self.atoms[i])}"))
        return out

    def check(self, assign: Mapping[str, Fraction]) -> list[str]:
        bad = []
        for c, u in enumerate(self.weight_vars):
            if assign.get(u, 0) < 0:
                bad.append(f"{u} negative")
        bad += [r.label for r in self.rows() if not r.holds(_Defaulting(assign))]
        return bad


class _Defaulting(dict):
    """Assignment view in which unassigned weight variables read as 0."""

    def __init__(self, base):
        super().__init__(base)

    def __missing__(self, key):
        if key.startswith("u__"):
            return Fraction(0)
        raise KeyError(key)


def build_coherence(label: str, atoms: Sequence[BoolTerm], value_vars: Sequence[str],
                    cap: int = DEFAULT_BASIS_CAP, basis: Sequence[str] | None = None) -> CoherenceBlock:
    """Coherence block for ``atoms`` whose probabilities are ``value_vars``."""
    if len(atoms) != len(value_vars):
        raise ValueError("one value variable per atom is required")
    if basis is None:
        seen: dict[str, None] = {}
        for t in atoms:
            for p in sorted(term_vars(t)):
                seen.setdefault(p, None)
        basis = tuple(seen)
    basis = tuple(basis)
    m = len(basis)
    if m > cap:
        raise BasisTooLarge(m, cap)
    n = 1 << m
    masks = {}
    for k, p in enumerate(basis):
        # column c gives prop k the bit 1 - ((c >> (m-1-k)) & 1)
        masks[p] = sum(1 << c for c in range(n) if not (c >> (m - 1 - k) & 1))
    full = (1 << n) - 1
    incidence = tuple(truth_table(t, masks, full) for t in atoms)
    return CoherenceBlock(label, tuple(atoms), tuple(value_vars), basis, incidence)


class Status(enum.Enum):
    FEASIBLE = "FEASIBLE"
    INFEASIBLE = "INFEASIBLE"
    UNKNOWN = "UNKNOWN"


@dataclass
class Feasibility:
    status: Status
    witness: dict | None = None
    certificate: object = None
    reason: str = ""

    @property
    def feasible(self) -> bool:
        return self.status is Status.FEASIBLE

    @property
    def infeasible(self) -> bool:
        return self.status is Status.INFEASIBLE


@dataclass
class ConstraintSystem:
    """Variables with box bounds, polynomial rows and coherence blocks.

    Variables default to the domain [0, 1]; ``hi=None`` leaves a variable
    unbounded above.  Declaration order is preserved and is the order used
    by solvers and by the SMT-LIB writer.
    """

    bounds: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    blocks: list = field(default_factory=list)

    def add_var(self, name: str, lo=0, hi=1) -> str:
        if name not in self.bounds:
            self.bounds[name] = (Fraction(lo), None if hi is None else Fraction(hi))
        return name

    def add_row(self, left, rel: str, right, label: str = "") -> Row:
        row = Row(as_poly(left), rel, as_poly(right), label)
        for v in sorted(row.variables, key=_creation_key(row)):
            self.add_var(v)
        self.rows.append(row)
        return row

    def add_block(self, block: CoherenceBlock) -> CoherenceBlock:
        for x in block.value_vars:
            self.add_var(x)
        self.blocks.append(block)
        return block

    @property
    def variables(self) -> list[str]:
        return list(self.bounds)

    @property
    def linear(self) -> bool:
        return all(r.is_linear for r in self.rows)

    @property
    def has_strict(self) -> bool:
        return any(r.rel == LT for r in self.rows)

    def all_rows(self) -> list[Row]:
        out = list(self.rows)
        for b in self.blocks:
            out += b.rows()
        return out

    def violations(self, assign: Mapping[str, Fraction]) -> list[str]:
        """Human-readable list of rows or bounds that ``assign`` violates."""
        bad = []
        for v, (lo, hi) in self.bounds.items():
            if v not in assign:
                bad.append(f"{v} unassigned")
                continue
            x = assign[v]
            if x < lo or (hi is not None and x > hi):
                bad.append(f"{v} = {x} outside bounds")
        if bad:
            return bad
        for r in self.rows:
            if not r.holds(assign):
                bad.append(f"row {r.label or r} fails")
        for b in self.blocks:
            bad += b.check(assign)
        return bad

    def check(self, assign: Mapping[str, Fraction]) -> bool:
        return not self.violations(assign)

    def copy(self) -> "ConstraintSystem":
        return ConstraintSystem(dict(self.bounds), list(self.rows), list(self.blocks))

    def __str__(self):
        lines = [f"{v} in [{lo}, {'inf' if hi is None else hi}]" for v, (lo, hi) in self.bounds.items()]
        lines += [str(r) for r in self.rows]
        for b in self.blocks:
            lines.append(f"coherence {b.label}: basis {list(b.basis)}, "
                         f"atoms {[print_term(t) for t in b.atoms]} = {list(b.value_vars)}")
        return "\n".join(lines)


def _creation_key(row: Row):
    # variables in order of first appearance: left side then right side
    order = {}
    for p in (row.left, row.right):
        for mono in sorted(p.terms, key=lambda m: (len(m), m)):
            for v in mono:
                order.setdefault(v, len(order))
    return lambda v: order[v]
