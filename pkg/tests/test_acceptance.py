"""The ten acceptance criteria, each timed and reported as one PASS/FAIL line.

The lines are printed as each criterion finishes (visible with ``-s``) and
repeated in an "acceptance criteria" section of the pytest summary.
"""

import functools
import math
import random
import statistics
import time
from fractions import Fraction
from itertools import product

from hypothesis import given, settings

from lukprob.model import CanonicalModel, example1
from lukprob.modelcheck import Interpretation, evaluate, evaluate_all
from lukprob.oracle import (CorpusSpec, SearchSpace, classical_k_decide, differential_run,
                            project_classical, random_corpus, random_formula, search_countermodel)
from lukprob.reductions import (MarkovChain, delta_embed, eliminate_constants, markov_to_frame,
                                parse_classical, path_value)
from lukprob.solver import ConstraintSystem, build_coherence, lp_feasible
from lukprob.solver.smtlib import assertions_hold, export_smtlib, parse_smtlib
from lukprob.syntax import (Bot, Box, Compl, Const, Delta, Dia, Equiv, Half, Imp, Max, Meet, Min,
                            Neg, OPlus, OTimes, Pr, Var, analyze, children, const, modal_depth,
                            parse, rebuild, subformulas)
from lukprob.tableau import EntailmentQuery, Tableau, decide

import acceptance_report
from strategies import AGENTS, formulas, prob_models

F = Fraction


def report(line: str) -> None:
    print("\n" + line)
    acceptance_report.LINES.append(line)


def criterion(number: int, title: str, limit: float):
    """Time the wrapped check and print one PASS/FAIL line for it."""
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                note = fn(*args, **kwargs)
            except BaseException:
                took = time.perf_counter() - t0
                report(f"C{number} FAIL {title} ({took:.2f}s, limit {limit:g}s)")
                raise
            took = time.perf_counter() - t0
            ok = took < limit
            extra = f" [{note}]" if note else ""
            report(f"C{number} {'PASS' if ok else 'FAIL'} {title} ({took:.2f}s, limit {limit:g}s)"
                   f"{extra}")
            assert ok, f"criterion {number} took {took:.2f}s, limit {limit}s"
        return run
    return wrap


# ---------------------------------------------------------------- C1


@criterion(1, "worked example values", 1)
def test_c1_example_values():
    m = example1()
    atom = parse(r"Pr(~S /\ I)")
    imp = parse(r"Pr(~S /\ I) -> [a]Pr(~S /\ I)")
    equiv = parse(r"Pr(~S /\ I) <-> [a]Pr(~S /\ I)")
    assert evaluate(m, "s_L", atom) == F(4, 5)
    assert evaluate(m, "s_notL", atom) == F(1, 5)
    assert evaluate(m, "s_L", imp) == F(2, 5)
    assert evaluate(m, "s_notL", imp) == 1
    assert evaluate(m, "s_L", equiv) == F(2, 5)
    assert evaluate(m, "s_notL", equiv) == F(2, 5)


# ---------------------------------------------------------------- C2


@criterion(2, "connective identities on 1000 random pairs", 30)
def test_c2_identity_suite():
    seen = []

    @settings(max_examples=1000, deadline=None, database=None, derandomize=True)
    @given(prob_models(max_worlds=3), formulas, formulas)
    def check(m, f, g):
        seen.append(1)
        it = Interpretation(m)
        for w in m.worlds:
            a, b = it.value(w, f), it.value(w, g)
            assert 0 <= a <= 1 and 0 <= b <= 1
            assert it.value(w, OPlus(f, g)) == min(F(1), a + b)
            assert it.value(w, OTimes(f, g)) == max(F(0), a + b - 1)
            assert it.value(w, Max(f, g)) == max(a, b)
            assert it.value(w, Min(f, g)) == min(a, b)
            assert it.value(w, Equiv(f, g)) == 1 - abs(a - b)
            assert it.value(w, Imp(f, g)) == min(F(1), 1 - a + b)
            assert it.value(w, Neg(Neg(f))) == a
            assert it.value(w, Delta(f)) == (1 if a == 1 else 0)
            for ag in AGENTS:
                succ = m.successors(ag, w)
                box, dia = it.value(w, Box(ag, f)), it.value(w, Dia(ag, f))
                if not succ:
                    assert box == 1 and dia == 0
                else:
                    assert box == min(it.value(u, f) for u in succ)
                    assert dia == max(it.value(u, f) for u in succ)

    check()
    assert len(seen) >= 1000
    return f"{len(seen)} pairs"


# ---------------------------------------------------------------- C3


@criterion(3, "measure validities and a verified refutation", 10)
def test_c3_measure_validities():
    for text in (r"Pr(p /\ q) -> Pr(p)", r"Pr(p \/ q) -> (Pr(p) (+) Pr(q))",
                 r"(Pr(p) (.) Pr(q)) -> Pr(p /\ q)", r"Pr(~p) <-> !Pr(p)"):
        assert decide(EntailmentQuery((), parse(text))).status == "VALID", text
    q = EntailmentQuery((), parse(r"Pr(p) -> Pr(p /\ q)"))
    v = decide(q)
    assert v.status == "NOT_VALID"
    assert evaluate(v.countermodel, "w0", q.conclusion) < 1
    assert evaluate(v.countermodel, "w0", q.conclusion) == v.conclusion_value


# ---------------------------------------------------------------- C4

K_VALID = [
    "[a](p -> q) -> ([a]p -> [a]q)",
    "p -> p",
    "[a](p -> p)",
    "[a]p -> [a](q -> p)",
    "[a](p -> q) -> ([a](q -> r) -> [a](p -> r))",
    "~~p -> p",
    "[a]~~p -> [a]p",
    "[b](p -> q) -> (~[b]~p -> ~[b]~q)",
    "[a][b](p -> q) -> ([a][b]p -> [a][b]q)",
    "[a]~p -> [a](p -> q)",
    "((p -> q) -> p) -> p",
    "~[a]~p -> ([a]q -> ~[a]~(p -> ~(p -> ~q)))",
]
K_INVALID = [
    "p -> [a]p",
    "[a]p -> p",
    "[a]p -> [b]p",
    "~[a]~(p -> p)",
    "[a]p -> [a][a]p",
    "~[a]~p -> [a]p",
]


@criterion(4, "delta embedding agrees with classical K on 12 + 6 formulas", 60)
def test_c4_delta_embedding():
    for text in K_VALID + K_INVALID:
        f = parse_classical(text)
        k_status, _ = classical_k_decide(f)
        assert k_status == ("valid" if text in K_VALID else "countermodel"), text
        v = decide(EntailmentQuery((), delta_embed(f)))
        assert (v.status == "VALID") == (k_status == "valid"), text
        if v.status == "NOT_VALID":
            m = v.countermodel
            for p in m.props:
                assert set(evaluate_all(m, Delta(Pr(Var(p)))).values()) <= {0, 1}
            assert not project_classical(m, m.props, "w0").holds("w0", f), text


# ---------------------------------------------------------------- C5


@criterion(5, "differential run on 300 L_ADD queries", 300)
def test_c5_differential():
    spec = CorpusSpec(count=300, depth=2, n_vars=3, n_agents=2, denominators=4, seed=0)
    corpus = random_corpus(spec)
    for q in corpus:
        assert analyze([*q.premises, q.conclusion]).fragment.additive
        assert max(modal_depth(f) for f in (*q.premises, q.conclusion)) <= 2
    checked = []

    def prover(q):
        v = decide(q)
        if v.status == "NOT_VALID":
            m = v.countermodel
            assert all(evaluate(m, "w0", p) == 1 for p in q.premises)
            assert evaluate(m, "w0", q.conclusion) < 1
            checked.append(1)
        return v

    report = differential_run(corpus, prover=prover, space=SearchSpace(max_worlds=2, grid=4))
    assert report.ok, report.text()
    assert report.count("UNKNOWN") == 0
    assert len(checked) == report.count("NOT_VALID")
    return (f"VALID {report.count('VALID')}, NOT_VALID {report.count('NOT_VALID')}, "
            f"oracle witnesses {sum(r.oracle_found for r in report.results)}")


# ---------------------------------------------------------------- C6


def _random_term(rng, props, size):
    if size <= 0 or rng.random() < 0.35:
        v = Var(rng.choice(props))
        return Compl(v) if rng.random() < 0.3 else v
    t = Meet(_random_term(rng, props, size - 1), _random_term(rng, props, size - 1))
    return Compl(t) if rng.random() < 0.3 else t


def _coherence_system(atoms, values):
    names = [f"x{i}" for i in range(len(atoms))]
    s = ConstraintSystem()
    for name, val in zip(names, values):
        s.add_var(name, val, val)
    block = build_coherence("w", atoms, names, cap=12)
    s.add_block(block)
    return s, block


@criterion(6, "coherence LP on 100 measures and 100 Frechet violations", 60)
def test_c6_coherence():
    rng = random.Random(6)
    supports = []
    for _ in range(100):
        props = [f"p{k}" for k in range(rng.randint(1, 10))]
        atoms = [Var(p) for p in props]
        atoms += [_random_term(rng, props, 3) for _ in range(rng.randint(0, 4))]
        # a sparse measure on full valuations, as a canonical model would carry
        grid = rng.randint(1, 12)
        cuts = sorted(rng.randint(0, grid) for _ in range(rng.randint(0, 4)))
        masses = [b - a for a, b in zip([0] + cuts, cuts + [grid])]
        weights = {}
        for k in masses:
            if k:
                mask = rng.getrandbits(len(props))
                weights[mask] = weights.get(mask, 0) + F(k, grid)
        m = CanonicalModel(("w",), tuple(props), {}, {"w": weights})
        values = [evaluate(m, "w", Pr(t)) for t in atoms]
        s, block = _coherence_system(atoms, values)
        res = lp_feasible(s)
        assert res.feasible
        support = sum(1 for u in block.weight_vars if res.witness.get(u, 0))
        assert support <= len(atoms) + 1  # one row per atom plus the normalisation row
        supports.append(support)
    for _ in range(100):
        props = [f"p{k}" for k in range(rng.randint(2, 10))]
        a, b = rng.sample(props, 2)
        pa, pb = F(rng.randint(0, 10), 10), F(rng.randint(0, 10), 10)
        lo, hi = max(F(0), pa + pb - 1), min(pa, pb)
        outside = [F(k, 20) for k in range(21) if not lo <= F(k, 20) <= hi]
        pab = rng.choice(outside)
        atoms = [Var(p) for p in props] + [Meet(Var(a), Var(b))]
        values = [F(rng.randint(0, 10), 10) for _ in props] + [pab]
        values[props.index(a)], values[props.index(b)] = pa, pb
        s, _ = _coherence_system(atoms, values)
        assert lp_feasible(s).infeasible
    return f"max support {max(supports)}"


# ---------------------------------------------------------------- C7

CHAIN3 = MarkovChain((F(1, 2), F(1, 3), F(1, 6)),
                     ((F(1, 10), F(3, 5), F(3, 10)),
                      (F(1, 4), F(1, 4), F(1, 2)),
                      (F(2, 3), 0, F(1, 3))))


@criterion(7, "Markov path values on 9 + 27 paths", 10)
def test_c7_markov_paths():
    q = [F(1, 2), F(1, 3), F(1, 6)]
    p = [[F(1, 10), F(3, 5), F(3, 10)], [F(1, 4), F(1, 4), F(1, 2)], [F(2, 3), F(0), F(1, 3)]]
    frame = markov_to_frame(CHAIN3)
    count = 0
    for n_states in (2, 3):
        for path in product((1, 2, 3), repeat=n_states):
            expected = q[path[0] - 1]
            for i, j in zip(path, path[1:]):
                expected *= p[i - 1][j - 1]
            f, value = path_value(CHAIN3, path)
            assert value == expected
            assert evaluate(frame, "0", f) == expected
            count += 1
    assert count == 36


# ---------------------------------------------------------------- C8


def _constant_instance(rng):
    """One or two mono-modal formulas whose constants share a denominator d <= 6."""
    d = rng.randint(2, 6)
    spec = CorpusSpec(depth=rng.randint(0, 2), n_vars=2, n_agents=1, denominators=2, size=3)

    def redraw(f):
        if isinstance(f, (Const, Half)):
            return const(F(rng.randint(1, d - 1), d))
        return rebuild(f, tuple(redraw(k) for k in children(f)))

    gamma = [redraw(random_formula(rng, spec)) for _ in range(rng.randint(1, 2))]
    gamma[0] = Imp(const(F(rng.randint(1, d - 1), d)), gamma[0])
    return gamma


def _sat(gamma) -> str:
    return decide(EntailmentQuery(tuple(gamma), Bot())).status


@criterion(8, "constant elimination on 50 mono-modal instances", 300)
def test_c8_constant_elimination():
    rng = random.Random(8)
    points = []
    for _ in range(50):
        gamma = _constant_instance(rng)
        assert len(analyze(gamma).agents) <= 1
        res = eliminate_constants(gamma)
        assert res.changed
        assert not any(isinstance(g, (Const, Half)) for f in res.formulas
                       for g in subformulas(f))
        before, after = _sat(gamma), _sat(res.formulas)
        assert before == after and before != "UNKNOWN", gamma
        ell, n = res.size_before, res.denominator
        d = max(modal_depth(f) for f in gamma)
        x = max(ell, n)
        # translated part at most doubles; d + 1 boxed copies of at most n side formulas
        assert res.size_after <= 2 * ell + (d + 1) * n * (3 * n + d + 2)
        assert res.size_after <= ((d + 1) * (d + 5) + 2) * x * x
        points.append((x, res.size_after))
    fit = statistics.linear_regression([math.log(x) for x, _ in points],
                                       [math.log(s) for _, s in points])
    k = math.ceil(fit.slope * 10) / 10
    c = max(s / x ** k for x, s in points)
    assert k <= 2
    return f"size_after <= {c:.2f} * max(l, n)^{k:.1f}"


# ---------------------------------------------------------------- C9


@criterion(9, "nonlinear queries against the oracle with SMT-LIB round trips", 300)
def test_c9_nonlinear():
    spec = CorpusSpec(count=30, depth=1, n_vars=3, n_agents=2, fragment="FULL", seed=9)
    corpus = random_corpus(spec)
    unknown = exported = 0
    for q in corpus:
        assert not analyze(q.conclusion).fragment.additive
        assert modal_depth(q.conclusion) <= 1
        v = decide(q)
        found = search_countermodel(q, SearchSpace(max_worlds=2, grid=4))
        if found is not None:
            assert v.status != "VALID"
        if v.status == "UNKNOWN":
            unknown += 1
        if v.status == "NOT_VALID":
            assert evaluate(v.countermodel, "w0", q.conclusion) < 1
            assert assertions_hold(v.exports[0], v.solution)
        tab = Tableau(q)
        for b in tab.saturate():
            s = tab.system(b)
            text = export_smtlib(s)
            doc = parse_smtlib(text)
            declared = set(s.bounds) | {u for blk in s.blocks for u in blk.weight_vars}
            assert set(doc["declarations"]) == declared
            assert doc["logic"] == "QF_NRA"
            exported += 1
    rate = unknown / len(corpus)
    assert rate <= 0.2
    return f"UNKNOWN rate {rate:.0%}, {exported} systems exported"


# ---------------------------------------------------------------- C10


def _big_model(n_worlds: int, seed: int = 10) -> CanonicalModel:
    rng = random.Random(seed)
    worlds = tuple(f"w{i}" for i in range(n_worlds))
    rel = {a: {(w, worlds[rng.randrange(n_worlds)]) for w in worlds for _ in range(3)}
           for a in ("a", "b")}
    weights = {}
    for w in worlds:
        k = rng.randint(1, 4)
        weights[w] = {rng.randrange(8): F(1, 2), rng.randrange(8): F(1, 2)} if k > 2 else {
            rng.randrange(8): F(1)}
        if sum(weights[w].values()) != 1:  # both halves landed on one atom
            weights[w] = {next(iter(weights[w])): F(1)}
    return CanonicalModel(worlds, ("p", "q", "r"), rel, weights)


SCALING_FORMULA = parse(r"[a](Pr(p /\ q) -> <b>(Pr(r) (+) [a]Pr(~p))) <-> "
                        r"<b>[a](Pr(q \/ r) & !Pr(p)) (.) [b]Pr(r)")


def _timed_eval(n_worlds: int) -> float:
    m = _big_model(n_worlds)
    best = math.inf
    for _ in range(3):
        t0 = time.perf_counter()
        evaluate_all(m, SCALING_FORMULA)
        best = min(best, time.perf_counter() - t0)
    return best


@criterion(10, "model checking 1000 worlds at depth 3, doubling check", 10)
def test_c10_scaling():
    assert modal_depth(SCALING_FORMULA) == 3
    t1 = _timed_eval(1000)
    t2 = _timed_eval(2000)
    assert t1 < 1
    assert t2 <= 4 * t1
    return f"1000 worlds {t1 * 1000:.0f} ms, 2000 worlds {t2 * 1000:.0f} ms"
