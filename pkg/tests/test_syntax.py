from fractions import Fraction

import pytest
from hypothesis import given, settings

from lukprob.syntax import (ArityError, Bot, Box, Compl, Const, Delta, Dia, Equiv, Fragment,
                            Half, Imp, Join, Meet, Neg, OPlus, ParseError, PImp, Pr, Prod,
                            RangeError, UnknownMacro, Var, analyze, expand_derived, formula_str,
                            is_primitive, macro_expand, modal_depth, parse, parse_term,
                            subformulas, tokenize)

from strategies import formulas

P, Q, R = Pr(Var("p")), Pr(Var("q")), Pr(Var("r"))


class TestParse:
    def test_implication_with_box(self):
        f = parse(r"Pr(~S /\ I) -> [a]Pr(~S /\ I)")
        atom = Pr(Meet(Compl(Var("S")), Var("I")))
        assert f == Imp(atom, Box("a", atom))

    def test_half(self):
        assert parse("1/2") == Half()
        assert parse("2/4") == Half()

    def test_rational_constant(self):
        assert parse("3/4") == Const(Fraction(3, 4))

    def test_unbalanced_parenthesis(self):
        with pytest.raises(ParseError) as e:
            parse("Pr(p")
        assert e.value.position == 5
        assert ")" in e.value.expected

    def test_constant_out_of_range(self):
        with pytest.raises(RangeError):
            parse("5/4")

    def test_unknown_macro(self):
        with pytest.raises(UnknownMacro):
            parse("Foo(a, p)")

    def test_join_is_sugar(self):
        assert parse(r"Pr(p \/ q)") == Pr(Join(Var("p"), Var("q")))

    def test_precedence(self):
        assert parse("Pr(p) -> Pr(q) -> Pr(r)") == Imp(P, Imp(Q, R))
        assert parse("Pr(p) * Pr(q) (+) Pr(r)") == OPlus(Prod(P, Q), R)
        assert parse("!Pr(p) -> Pr(q)") == Imp(Neg(P), Q)
        assert parse("Pr(p) <-> Pr(q) -> Pr(r)") == Equiv(P, Imp(Q, R))
        assert parse("Pr(p) ~> Pr(q) ~> Pr(r)") == PImp(P, PImp(Q, R))

    def test_tokens_carry_columns(self):
        toks = tokenize("Pr(p) -> 1/3")
        assert [t.pos for t in toks] == [1, 3, 4, 5, 7, 10, 13]


class TestPrint:
    def test_examples(self):
        assert formula_str(Imp(P, P)) == "Pr(p) -> Pr(p)"
        assert formula_str(Box("a", Half())) == "[a]1/2"
        assert formula_str(Imp(P, Imp(Q, R))) == "Pr(p) -> Pr(q) -> Pr(r)"

    def test_left_nested_implication_keeps_parentheses(self):
        assert formula_str(Imp(Imp(P, Q), R)) == "(Pr(p) -> Pr(q)) -> Pr(r)"

    @settings(max_examples=1200, deadline=None)
    @given(formulas)
    def test_round_trip(self, f):
        assert parse(formula_str(f)) == f


class TestExpandDerived:
    def test_examples(self):
        assert expand_derived(Dia("a", P)) == Neg(Box("a", Neg(P)))
        assert expand_derived(Delta(P)) == PImp(Neg(P), Bot())
        assert expand_derived(OPlus(P, Q)) == Imp(Neg(P), Q)

    @settings(max_examples=300, deadline=None)
    @given(formulas)
    def test_idempotent_and_primitive(self, f):
        g = expand_derived(f)
        assert is_primitive(g)
        assert expand_derived(g) == g

    @settings(max_examples=300, deadline=None)
    @given(formulas)
    def test_preserves_modal_depth(self, f):
        assert modal_depth(expand_derived(f)) == modal_depth(f)


class TestAnalyze:
    def test_depth(self):
        assert analyze(parse("[a]Pr(p) -> Pr(q)")).modal_depth == 1

    def test_atom(self):
        st = analyze(parse("Pr(p)"))
        assert st.modal_depth == 0
        assert st.fragment == Fragment.L_ADD_BOX

    def test_product_leaves_additive_fragment(self):
        # every atom wraps a bare variable, so the formula stays in L_BOX
        st = analyze(parse("Pr(p) * [a]Pr(q)"))
        assert not st.fragment.additive
        assert st.fragment == Fragment.L_BOX

    def test_full(self):
        assert analyze(parse(r"Pr(p /\ q) * Pr(q)")).fragment == Fragment.FULL

    def test_set_of_formulas(self):
        st = analyze([parse("[a][b]Pr(p)"), parse("Pr(q)")])
        assert st.modal_depth == 2
        assert st.variables == {"p", "q"}
        assert st.agents == {"a", "b"}

    @settings(max_examples=300, deadline=None)
    @given(formulas)
    def test_fragment_monotone(self, f):
        """Replacing product nodes by Łukasiewicz ones lands in the additive fragment."""
        def strip(g):
            if isinstance(g, (Prod, PImp)):
                return Imp(strip(g.left), strip(g.right))
            if isinstance(g, Delta):
                return Neg(strip(g.arg))
            from lukprob.syntax import children, rebuild
            kids = children(g)
            return rebuild(g, tuple(strip(k) for k in kids)) if kids else g
        assert analyze(strip(f)).fragment.additive

    def test_subformulas_distinct(self):
        f = parse("Pr(p) -> Pr(p)")
        assert list(subformulas(f)) == [P, f]


class TestMacros:
    def test_cert(self):
        assert parse("Cert(a, p)") == Equiv(Box("a", P), Dia("a", P))

    def test_nodec(self):
        assert macro_expand("NoDec", "a", "p") == Imp(P, Box("a", P))

    def test_path(self):
        s1, s2, s3 = (Pr(Var(f"s{k}")) for k in (1, 2, 3))
        assert macro_expand("Path", 1, 2, 3) == Prod(s1, Dia("1", Prod(s2, Dia("2", s3))))
        assert parse("Path(1,2,3)") == macro_expand("Path", 1, 2, 3)

    def test_threshold(self):
        assert parse("L(7/10, p)") == Delta(Imp(Const(Fraction(7, 10)), P))

    def test_arity(self):
        with pytest.raises(ArityError):
            macro_expand("Cert", "a")
        with pytest.raises(UnknownMacro):
            macro_expand("Nope", "a", "p")

    def test_parse_term(self):
        assert parse_term(r"~p /\ q") == Meet(Compl(Var("p")), Var("q"))
