"""Hypothesis strategies shared by the test modules."""

from fractions import Fraction

from hypothesis import strategies as st

from lukprob.model import ProbModel
from lukprob.syntax import (Bot, Box, Compl, Const, Delta, Dia, Equiv, Half, Imp, Join, Max, Meet,
                            Min, Neg, OPlus, OTimes, PImp, Pr, Prod, Top, Var)

PROPS = ("p", "q", "r")
AGENTS = ("a", "b")

rationals = st.builds(Fraction, st.integers(0, 12), st.integers(1, 12)).filter(
    lambda x: x <= 1 and x != Fraction(1, 2))

terms = st.recursive(
    st.sampled_from(PROPS).map(Var),
    lambda sub: st.one_of(
        sub.map(Compl),
        st.builds(Meet, sub, sub),
        st.builds(Join, sub, sub),
    ),
    max_leaves=4,
)

_leaves = st.one_of(
    terms.map(Pr),
    st.just(Half()),
    rationals.map(Const),
    st.just(Top()),
    st.just(Bot()),
)

_BINARY = (Imp, Prod, PImp, OPlus, OTimes, Max, Min, Equiv)


def _extend(sub):
    return st.one_of(
        sub.map(Neg),
        sub.map(Delta),
        st.builds(Box, st.sampled_from(AGENTS), sub),
        st.builds(Dia, st.sampled_from(AGENTS), sub),
        st.builds(lambda op, a, b: op(a, b), st.sampled_from(_BINARY), sub, sub),
    )


formulas = st.recursive(_leaves, _extend, max_leaves=8)


@st.composite
def prob_models(draw, max_worlds: int = 4):
    """Finite models with random relations, valuations and grid weights."""
    n = draw(st.integers(1, max_worlds))
    worlds = tuple(f"w{k}" for k in range(n))
    relations = {
        a: frozenset((u, v) for u in worlds for v in worlds if draw(st.booleans()))
        for a in AGENTS
    }
    valuation = {p: frozenset(w for w in worlds if draw(st.booleans())) for p in PROPS}
    measures = {}
    for w in worlds:
        raw = [draw(st.integers(0, 4)) for _ in worlds]
        if sum(raw) == 0:
            raw[draw(st.integers(0, n - 1))] = 1
        total = sum(raw)
        measures[w] = {u: Fraction(k, total) for u, k in zip(worlds, raw) if k}
    return ProbModel(worlds, PROPS, relations, valuation, measures)
