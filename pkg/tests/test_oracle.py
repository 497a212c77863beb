import random
from fractions import Fraction

from lukprob.modelcheck import evaluate
from lukprob.oracle import (CorpusSpec, SearchSpace, classical_k_decide, differential_run,
                            project_classical, random_canonical_model, random_corpus,
                            search_countermodel)
from lukprob.reductions import CBox, CImp, CVar, delta_embed, parse_classical
from lukprob.syntax import analyze, modal_depth, parse
from lukprob.tableau import EntailmentQuery, Verdict, decide

F = Fraction


def query(conclusion, *premises):
    return EntailmentQuery(tuple(parse(p) for p in premises), parse(conclusion))


class TestSearch:
    def test_finds_single_world_countermodel(self):
        q = query(r"Pr(p) -> Pr(p /\ q)")
        m = search_countermodel(q, SearchSpace(max_worlds=1, grid=1))
        assert m is not None and m.worlds == ("w0",)
        assert evaluate(m, "w0", q.conclusion) < 1

    def test_valid_formula_has_none(self):
        assert search_countermodel(query(r"Pr(p /\ q) -> Pr(p)")) is None

    def test_modal_countermodel_needs_two_worlds(self):
        q = EntailmentQuery((), delta_embed("p -> [a]p"))
        assert search_countermodel(q, SearchSpace(max_worlds=1, grid=1)) is None
        m = search_countermodel(q, SearchSpace(max_worlds=2, grid=1))
        assert m is not None and len(m.worlds) == 2

    def test_premises_respected(self):
        q = query("Pr(q)", "Pr(p)", "Pr(p) -> Pr(q)")
        assert search_countermodel(q, SearchSpace(grid=4)) is None

    def test_random_sampling_deterministic(self):
        q = query("[a][b](Pr(p) -> Pr(q))")
        s = SearchSpace(max_worlds=3, grid=4, exhaustive_limit=0, samples=50, seed=9)
        a, b = search_countermodel(q, s), search_countermodel(q, s)
        assert (a is None) == (b is None)
        if a is not None:
            assert a.atom_weights == b.atom_weights and a.relations == b.relations

    def test_random_models_are_measures(self):
        rng = random.Random(1)
        for _ in range(50):
            m = random_canonical_model(rng, ("p", "q"), ("a",), rng.randint(1, 3), 6)
            for w in m.worlds:
                assert sum(m.atom_weights[w].values()) == 1


class TestClassicalK:
    def test_k_axiom(self):
        assert classical_k_decide(parse_classical("[a](p -> q) -> ([a]p -> [a]q)")) == ("valid", None)

    def test_p_implies_box_p(self):
        status, m = classical_k_decide(parse_classical("p -> [a]p"))
        assert status == "countermodel"
        assert "p" in m.valuation["k0"]
        (succ,) = [v for (u, v) in m.relations["a"] if u == "k0"]
        assert "p" not in m.valuation[succ]

    def test_box_p_implies_p(self):
        status, m = classical_k_decide(CImp(CBox("a", CVar("p")), CVar("p")))
        assert status == "countermodel" and not m.holds("k0", CVar("p"))

    def test_agents_are_separate(self):
        assert classical_k_decide(parse_classical("[a]p -> [b]p"))[0] == "countermodel"
        assert classical_k_decide(parse_classical("[a](p -> p)"))[0] == "valid"

    def test_agrees_with_delta_embedding(self):
        for text in ("[a](p -> q) -> ([a]p -> [a]q)", "p -> [a]p", "[a]p -> p",
                     "[a]~p -> ~[a]p", "~[a]~(p -> p)", "[a][b]p -> [a][b](q -> p)"):
            f = parse_classical(text)
            k_status, _ = classical_k_decide(f)
            v = decide(EntailmentQuery((), delta_embed(f)))
            assert (v.status == "VALID") == (k_status == "valid")
            if v.status == "NOT_VALID":
                km = project_classical(v.countermodel, v.countermodel.props, "w0")
                assert not km.holds("w0", f)


class TestCorpus:
    def test_deterministic(self):
        spec = CorpusSpec(count=20, seed=4)
        assert random_corpus(spec) == random_corpus(spec)

    def test_bounds(self):
        spec = CorpusSpec(count=60, depth=2, n_vars=3, n_agents=2, denominators=4)
        for q in random_corpus(spec):
            for f in (*q.premises, q.conclusion):
                assert modal_depth(f) <= 2
                assert analyze(f).fragment.name != "FULL"

    def test_full_fragment_has_product(self):
        spec = CorpusSpec(count=30, fragment="FULL", seed=2)
        for q in random_corpus(spec):
            assert not analyze(q.conclusion).fragment.additive


class TestDifferential:
    def test_empty(self):
        r = differential_run([])
        assert r.ok and r.results == []
        assert "instances: 0" in r.text()

    def test_small_corpus_consistent(self):
        r = differential_run(random_corpus(CorpusSpec(count=15, seed=6)))
        assert r.ok
        assert r.count("VALID") + r.count("NOT_VALID") + r.count("UNKNOWN") == 15

    def test_detects_unsound_prover(self):
        always_valid = lambda q: Verdict("VALID")
        r = differential_run([query(r"Pr(p) -> Pr(p /\ q)")], prover=always_valid)
        assert not r.ok
        assert "oracle found a countermodel" in r.text()
