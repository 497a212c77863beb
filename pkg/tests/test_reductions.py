import random
import warnings
from fractions import Fraction
from itertools import product

import pytest

from lukprob.model import LBoxModel, ProbModel, SIModel, UndefinedMeasure, ValidationError
from lukprob.modelcheck import evaluate
from lukprob.reductions import (CBox, CImp, CVar, MarkovChain, MultiModalBlowup, UnknownState,
                                canonicalize, delta_embed, eliminate_constants, lbox_bridge,
                                load_chain, markov_to_frame, parse_classical, path_value)
from lukprob.syntax import (Bot, Box, Const, Delta, Equiv, Half, Imp, Pr, Prod, Dia, Var,
                            analyze, parse, subformulas)
from lukprob.tableau import EntailmentQuery, decide

F = Fraction
P, Q = Pr(Var("p")), Pr(Var("q"))


def satisfiable(gamma) -> bool:
    return decide(EntailmentQuery(tuple(gamma), Bot())).status == "NOT_VALID"


class TestCanonicalize:
    def test_quarter_weights(self):
        si = SIModel(("w",), ("p", "q"), {}, ("a", "b", "c", "d"),
                     {"p": {"a", "b"}, "q": {"a", "c"}},
                     {"w": {pt: F(1, 4) for pt in "abcd"}})
        c = canonicalize(si, ("p", "q"))
        # bit k of a mask is prop k: 3 = {p, q}, 1 = {p}, 2 = {q}, 0 = {}
        assert c.atom_weights["w"] == {3: F(1, 4), 1: F(1, 4), 2: F(1, 4), 0: F(1, 4)}

    def test_certain_prop(self):
        m = ProbModel(("w",), ("p",), {}, {"p": {"w"}}, {"w": {"w": 1}})
        assert canonicalize(m, ("p",)).atom_weights["w"] == {1: 1}

    def test_undefined_measure(self):
        si = SIModel(("w",), ("p",), {}, ("a", "b"), {"p": {"a"}}, {"w": {"a": 1}},
                     measurable=[{"a", "b"}])
        with pytest.raises(UndefinedMeasure):
            canonicalize(si, ("p",))

    def test_si_values_transfer(self):
        si = SIModel(("w", "v"), ("p", "q"), {"a": {("w", "v")}}, (1, 2, 3),
                     {"p": {1, 2}, "q": {2, 3}},
                     {"w": {1: F(1, 3), 2: F(1, 3), 3: F(1, 3)}, "v": {2: 1}})
        c = canonicalize(si)
        f = parse(r"Pr(p /\ ~q) -> [a]Pr(q) * Pr(p \/ q)")
        for g in subformulas(f):
            for w in ("w", "v"):
                assert evaluate(si, w, g) == evaluate(c, w, g)


class TestLBoxBridge:
    def test_singleton_value(self):
        c = lbox_bridge(LBoxModel(("w",), {}, {"w": {"p": F(3, 10)}}))
        assert evaluate(c, "w", P) == F(3, 10)

    def test_zero_values(self):
        c = lbox_bridge(LBoxModel(("w",), {}, {"w": {"p": 0, "q": 0}}))
        assert c.atom_weights["w"] == {0: 1}

    def test_overlapping_certainties(self):
        c = lbox_bridge(LBoxModel(("w",), {}, {"w": {"p": 1, "q": 1}}))
        assert evaluate(c, "w", P) == 1 and evaluate(c, "w", Q) == 1
        assert evaluate(c, "w", parse(r"Pr(p /\ q)")) == 1

    def test_independent_marginals(self):
        c = lbox_bridge(LBoxModel(("w",), {}, {"w": {"p": F(1, 3), "q": F(3, 4)}}))
        assert evaluate(c, "w", parse(r"Pr(p /\ q)")) == F(1, 4)

    def test_lbox_values_agree(self):
        rng = random.Random(5)
        worlds = ("u", "v", "w")
        for _ in range(20):
            vals = {w: {p: F(rng.randint(0, 4), 4) for p in "pq"} for w in worlds}
            rels = {"a": {(x, y) for x in worlds for y in worlds if rng.random() < 0.4}}
            v = LBoxModel(worlds, rels, vals)
            c = lbox_bridge(v, ("p", "q"))
            f = parse("[a](Pr(p) * Pr(q)) -> Pr(q) ~> <a>Pr(p)")
            for w in worlds:
                assert evaluate(c, w, f) == evaluate(v, w, f)

    def test_lbox_verdicts_agree(self):
        for text in ("[a]Pr(p) -> Pr(p)", "Pr(p) * Pr(q) -> Pr(p)", "[a](Pr(p) -> Pr(q)) -> "
                     "[a]Pr(p) -> [a]Pr(q)", "Pr(p) -> Pr(p) * Pr(p)"):
            q = EntailmentQuery((), parse(text))
            assert analyze(q.conclusion).fragment.lbox
            assert decide(q).status == decide(q, coherence=False).status


class TestConstantElimination:
    def test_three_quarters(self):
        res = eliminate_constants([parse("3/4 -> Pr(p)")])
        assert res.denominator == 4
        q3 = Pr(Var(res.fresh[3]))
        assert res.translated == [Imp(q3, P)]
        assert len(res.side) == 2  # 1/4(q) and 3/4(q3), depth 0 so no boxes
        assert not any(isinstance(g, (Const, Half)) for f in res.formulas for g in subformulas(f))
        assert {res.fresh["q"], res.fresh[3]}.isdisjoint({"p"})

    def test_side_formulas_pin_values(self):
        res = eliminate_constants([parse("3/4 -> Pr(p)")])
        q, q3 = res.fresh["q"], res.fresh[3]
        m = ProbModel(("w", "a", "b", "c", "d"), ("p", q, q3), {},
                      {"p": {"a"}, q: {"a"}, q3: {"b", "c", "d"}},
                      {"w": {x: F(1, 4) for x in "abcd"}, **{x: {x: 1} for x in "abcd"}})
        assert all(evaluate(m, "w", f) == 1 for f in res.side)
        bad = ProbModel(("w", "a", "b"), ("p", q, q3), {}, {q: {"a"}, q3: {"b"}},
                        {"w": {"a": F(1, 2), "b": F(1, 2)}, "a": {"a": 1}, "b": {"b": 1}})
        assert not all(evaluate(bad, "w", f) == 1 for f in res.side)

    def test_half(self):
        res = eliminate_constants([Equiv(Half(), P)])
        assert res.denominator == 2
        assert res.translated == [Equiv(Pr(Var(res.fresh[1])), P)]
        assert satisfiable([Equiv(Half(), P)]) == satisfiable(res.formulas)

    def test_constant_free_identity(self):
        gamma = [parse("Pr(p) -> [a]Pr(q)")]
        res = eliminate_constants(gamma)
        assert res.formulas == gamma and not res.changed

    def test_fresh_names_avoid_clashes(self):
        res = eliminate_constants([parse("1/3 -> Pr(q) & Pr(q1)")])
        assert res.fresh["q"] not in ("q", "q1")

    def test_boxed_side_formulas(self):
        res = eliminate_constants([parse("[a][a](1/3 -> Pr(p))")])
        boxed = [f for f in res.side if isinstance(f, Box)]
        assert len(res.side) == 3 * 2 and len(boxed) == 4

    def test_multimodal_warning(self):
        with pytest.warns(MultiModalBlowup):
            eliminate_constants([parse("[a][b](1/3 -> Pr(p))")])

    def test_mono_modal_no_warning(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            eliminate_constants([parse("[a](1/3 -> Pr(p))")])

    @pytest.mark.parametrize("gamma", [
        ["3/4 -> Pr(p)"], ["Pr(p) -> 1/3", "2/3 -> Pr(p)"], ["Pr(p) <-> 1/3", "Pr(p) <-> 2/5"],
        ["[a](Pr(p) -> 1/4)", "<a>(3/4 -> Pr(p))"],
    ])
    def test_equisatisfiable(self, gamma):
        fs = [parse(g) for g in gamma]
        assert satisfiable(fs) == satisfiable(eliminate_constants(fs).formulas)


class TestDeltaEmbed:
    def test_k_axiom(self):
        f = delta_embed(parse_classical("[a](p -> q) -> ([a]p -> [a]q)"))
        dp, dq = Delta(P), Delta(Q)
        assert f == Imp(Box("a", Imp(dp, dq)), Imp(Box("a", dp), Box("a", dq)))

    def test_atom(self):
        assert delta_embed(CVar("p")) == Delta(P)

    def test_structure(self):
        assert parse_classical("p -> [a]p") == CImp(CVar("p"), CBox("a", CVar("p")))
        assert delta_embed("p -> [a]p") == Imp(Delta(P), Box("a", Delta(P)))


CHAIN = {"states": 2, "start": ["1/2", "1/2"], "transition": [["3/10", "7/10"], ["3/5", "2/5"]]}


class TestMarkov:
    def test_frame(self):
        m = markov_to_frame(load_chain(CHAIN))
        assert m.worlds == ("0", "1", "2")
        assert m.prob("0", Var("s1")) == F(1, 2)
        assert all(m.successors("2", w) == ("2",) for w in m.worlds)

    def test_single_state(self):
        c = MarkovChain(("1",), (("1",),))
        assert path_value(c, [1, 1, 1])[1] == 1

    def test_paths(self):
        c = load_chain(CHAIN)
        f, v = path_value(c, [1, 2])
        assert f == Prod(Pr(Var("s1")), Dia("1", Pr(Var("s2"))))
        assert v == F(7, 20)
        assert path_value(c, [1])[1] == F(1, 2)
        assert path_value(c, [1, 2, 1])[1] == F(21, 100)

    def test_unknown_state(self):
        with pytest.raises(UnknownState):
            path_value(load_chain(CHAIN), [1, 3])

    def test_invalid_chain(self):
        with pytest.raises(ValidationError):
            load_chain({"states": 1, "start": ["1/2"], "transition": [["1"]]})

    def test_random_chains_exhaustive(self):
        rng = random.Random(11)
        for _ in range(6):
            n = rng.randint(1, 4)
            def dist():
                raw = [rng.randint(0, 5) for _ in range(n)]
                raw[rng.randrange(n)] += 1
                return [F(k, sum(raw)) for k in raw]
            c = MarkovChain(dist(), [dist() for _ in range(n)])
            for length in range(1, 4):
                for path in product(range(1, n + 1), repeat=length):
                    expected = c.q(path[0])
                    for a, b in zip(path, path[1:]):
                        expected *= c.p(a, b)
                    assert path_value(c, path)[1] == expected
