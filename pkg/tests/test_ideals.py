import itertools
from pathlib import Path

import pytest

from stkit.cas_check import CasSyntaxError, check_script
from stkit.graph import Dag, enumerate_dags
from stkit.ideals import (
    IdealPresentation,
    binomial_in_toric_kernel,
    binomial_sides,
    cas_identifiers,
    ci_generators,
    ci_ideal,
    export_cas,
    i_ci_ideal,
    in_toric_kernel,
    inv_ideal_generators,
    markov_statement_lists,
    model_invariant_generators,
    pred_generators,
    pred_star_generators,
    statement,
    toric_images,
)
from stkit.interventional import from_dag_targets
from stkit.io import load_fixture
from stkit.polynomial import PolynomialError, SymbolTable
from stkit.staged_tree import from_dag

from oracles import dsep_paths

CHAIN = Dag(3, [(1, 2), (2, 3)])
FOUR_CYCLE = Dag(4, [(1, 2), (1, 3), (2, 4), (3, 4)])
CHAIN_BINOMIALS = {"p000*p101 - p001*p100", "p010*p111 - p011*p110"}
SNAPSHOTS = Path(__file__).parent / "snapshots"


class TestPresentation:
    def test_dedup_and_sign(self):
        pres = IdealPresentation(["x", "y"])
        x, y = pres.table.var("x"), pres.table.var("y")
        assert pres.add(y - x, "a")
        assert not pres.add(x - y, "b")
        assert not pres.add(x - x, "c")
        assert pres.texts() == ["x - y"]

    def test_rejects_foreign(self):
        pres = IdealPresentation(["x"])
        with pytest.raises(PolynomialError):
            pres.add(SymbolTable(["x"]).var("x"), "t")
        with pytest.raises(PolynomialError):
            pres.add(pres.table.var("z"), "t")


class TestCI:
    def test_chain_statement(self):
        pres = ci_generators(statement({1}, {3}, {2}), [2, 2, 2])
        assert pres.canonical_set() == CHAIN_BINOMIALS

    def test_swap_symmetry(self):
        for A, B, C in [({1}, {3}, {2}), ({1}, {2, 3}, ()), ({2}, {1}, {3})]:
            a = ci_generators(statement(A, B, C), [2, 3, 2])
            b = ci_generators(statement(B, A, C), [2, 3, 2])
            assert a.canonical_set() == b.canonical_set()

    def test_count_with_ternary(self):
        pres = ci_generators(statement({1}, {3}, {2}), [3, 2, 2])
        # 3 choose 2 pairs of x1, 1 pair of x3, 2 values of x2
        assert len(pres) == 3 * 1 * 2

    def test_marginalized_statement(self):
        pres = ci_generators(statement({1}, {2}), [2, 2, 2])
        assert len(pres) == 1
        g = pres.generators[0]
        # each 2x2 marginal has two terms, so both products have four
        assert g.degree() == 2 and len(g) == 8

    def test_local_and_ordered(self):
        assert markov_statement_lists(CHAIN, "local") == [statement({3}, {1}, {2})]
        assert markov_statement_lists(CHAIN, "ordered", [1, 2, 3]) == [statement({3}, {1}, {2})]
        with pytest.raises(ValueError):
            markov_statement_lists(CHAIN, "weird")

    @pytest.mark.parametrize("d", [CHAIN, FOUR_CYCLE, Dag(3, [(1, 3), (2, 3)])])
    def test_global_statements_match_oracle(self, d):
        got = {(s.A, s.B, s.C) for s in markov_statement_lists(d, "global")}
        nodes = list(d.nodes)
        brute = set()
        for roles in itertools.product(range(4), repeat=d.n):
            A = frozenset(v for v, r in zip(nodes, roles) if r == 1)
            B = frozenset(v for v, r in zip(nodes, roles) if r == 2)
            C = frozenset(v for v, r in zip(nodes, roles) if r == 3)
            if A and B and min(A) < min(B) and dsep_paths(d, A, B, C):
                brute.add((A, B, C))
        assert got == brute

    def test_chain_global_singletons(self):
        singles = [s for s in markov_statement_lists(CHAIN, "global") if len(s.A) == len(s.B) == 1]
        assert singles == [statement({1}, {3}, {2})]

    def test_global_cap(self):
        with pytest.raises(ValueError):
            markov_statement_lists(Dag(7), "global")

    def test_global_ideal_of_chain(self):
        assert ci_ideal(CHAIN, "global").canonical_set() == CHAIN_BINOMIALS


class TestModelInvariants:
    def test_chain_tree(self):
        pres = model_invariant_generators(load_fixture("fig2-tree"))
        assert pres.canonical_set() == CHAIN_BINOMIALS
        assert len(pres.ring) == 8

    def test_from_dag_chain(self):
        assert model_invariant_generators(from_dag(CHAIN)).canonical_set() == CHAIN_BINOMIALS

    def test_singleton_stages_empty(self):
        from test_staged_tree import binary_tree_spec
        from stkit.staged_tree import validate

        assert len(model_invariant_generators(validate(binary_tree_spec(None)))) == 0

    def test_two_node_itree_links_subtrees(self):
        pres = model_invariant_generators(load_fixture("fig5-itree"))
        mixed = [g for g in pres.generators if {"^(0)" in s for s in g.symbols()} == {True, False}]
        assert mixed
        assert all(binomial_sides(g) for g in pres.generators)


class TestPred:
    def test_chain(self):
        assert pred_star_generators(CHAIN, [1, 2, 3]).canonical_set() == CHAIN_BINOMIALS
        assert pred_generators(CHAIN, [1, 2, 3]).canonical_set() == CHAIN_BINOMIALS

    def test_edgeless_pair(self):
        assert pred_star_generators(Dag(2)).canonical_set() == {"p00*p11 - p01*p10"}

    def test_complete_dag(self):
        assert len(pred_star_generators(Dag(3, [(1, 2), (1, 3), (2, 3)]))) == 0

    @pytest.mark.parametrize("n", [2, 3])
    def test_pred_star_equals_invariants_small(self, n):
        from stkit.graph import topological_orders

        for d in enumerate_dags(n):
            for pi in topological_orders(d):
                a = pred_star_generators(d, pi).canonical_set()
                b = model_invariant_generators(from_dag(d, pi)).canonical_set()
                assert a == b


class TestInterventionalIdeals:
    def test_inv_counts(self):
        inv = inv_ideal_generators(CHAIN, [[], [1]])
        assert len(inv) == 22
        full = i_ci_ideal(CHAIN, [[], [1]])
        assert len(full) == 26
        assert set(inv.texts()) <= set(full.texts())

    def test_observational_only(self):
        assert len(inv_ideal_generators(CHAIN, [[]])) == 0
        got = i_ci_ideal(CHAIN, [[]]).canonical_set()
        assert {g.replace(" ", "") for g in got} == {
            "p000^(0)*p101^(0)-p001^(0)*p100^(0)",
            "p010^(0)*p111^(0)-p011^(0)*p110^(0)",
        }


class TestToric:
    def test_chain_tree_leaf(self):
        tm = toric_images(load_fixture("fig2-tree"))
        assert tm.images["p110"].to_text() == "z*s2*s6*s9"

    def test_chain_tree_binomial(self):
        tm = toric_images(load_fixture("fig2-tree"))
        assert binomial_in_toric_kernel(tm, ["p000", "p101"], ["p100", "p001"])
        assert tm.image(["p000", "p101"]).to_text() == "z^2*s1*s2*s3*s5*s7*s8"
        assert binomial_in_toric_kernel(tm, "p010", "p010")
        assert not binomial_in_toric_kernel(tm, ["p000", "p111"], ["p100", "p011"])

    def test_balanced_invariants_in_kernel(self):
        it = from_dag_targets(CHAIN, [[], [1]])
        tm = toric_images(it)
        for g in model_invariant_generators(it).generators:
            sides = binomial_sides(g)
            if sides:
                assert binomial_in_toric_kernel(tm, *sides)
            else:
                assert in_toric_kernel(tm, g)

    def test_four_cycle_has_non_kernel_invariant(self):
        t = from_dag(FOUR_CYCLE)
        tm = toric_images(t)
        assert not all(in_toric_kernel(tm, g) for g in model_invariant_generators(t).generators)


class TestExport:
    def test_identifiers(self):
        ids = cas_identifiers(["p00^(1)", "f1[0]", "f10", "a[]"])
        assert ids["p00^(1)"] == "p00i1"
        assert ids["f1[0]"] == "f10" and ids["f10"] == "f10x2"
        assert ids["a[]"] == "a"

    @pytest.mark.parametrize("dialect", ["m2", "singular"])
    def test_chain_tree_script(self, dialect):
        text = export_cas(model_invariant_generators(load_fixture("fig2-tree")), dialect)
        sc = check_script(text, dialect)
        assert len(sc.rings["R"]) == 8
        assert list(sc.ideals.values()) == [2]

    @pytest.mark.parametrize("dialect", ["m2", "singular"])
    def test_toric_script(self, dialect):
        sc = check_script(export_cas(toric_images(from_dag(FOUR_CYCLE)), dialect), dialect)
        assert sc.maps["phi"][2] == 16 and sc.kernels

    def test_mini_parser_rejects_garbage(self):
        with pytest.raises(CasSyntaxError):
            check_script("R = QQ[x, y];\nI = ideal(x*q);\n", "m2")
        with pytest.raises(CasSyntaxError):
            check_script("ring R = 0, (x), dp;\nideal I = x+;\n", "singular")
        with pytest.raises(CasSyntaxError):
            check_script("R = QQ[x]", "m2")

    @pytest.mark.parametrize(
        "name,dialect",
        [(n, d) for n in ("four-cycle-toric", "i-ci-g1") for d in ("m2", "singular")],
    )
    def test_snapshots(self, name, dialect):
        obj = toric_images(from_dag(FOUR_CYCLE)) if name == "four-cycle-toric" else i_ci_ideal(CHAIN, [[], [1]])
        ext = "m2" if dialect == "m2" else "sing"
        want = (SNAPSHOTS / f"{name}.{ext}").read_text(encoding="utf-8")
        assert export_cas(obj, dialect) == want
