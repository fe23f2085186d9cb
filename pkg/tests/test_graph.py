import itertools

import pytest

from stkit.graph import (
    Dag,
    GraphError,
    TargetCollection,
    UGraph,
    ancestral_closure,
    d_separated,
    enumerate_dags,
    first_linear_extension,
    i_dag,
    is_chordal,
    is_linear_extension,
    is_peo,
    is_perfect,
    markov_equivalent,
    moralize,
    relatives,
    require_linear_extension,
    skeleton,
    topological_orders,
    v_structures,
)

from oracles import all_dags, dsep_paths, has_peo_brute, is_peo_brute

CHAIN = Dag(3, [(1, 2), (2, 3)])
REVERSED = Dag(3, [(3, 2), (2, 1)])
FORK = Dag(3, [(2, 1), (2, 3)])
COLLIDER = Dag(3, [(1, 3), (2, 3)])
FOUR_CYCLE = Dag(4, [(1, 2), (1, 3), (2, 4), (3, 4)])


class TestConstruction:
    def test_rejects_cycle(self):
        with pytest.raises(GraphError):
            Dag(3, [(1, 2), (2, 3), (3, 1)])

    def test_rejects_two_cycle_and_loops(self):
        with pytest.raises(GraphError):
            Dag(2, [(1, 2), (2, 1)])
        with pytest.raises(GraphError):
            Dag(2, [(1, 1)])
        with pytest.raises(GraphError):
            Dag(2, [(1, 2), (1, 2)])

    def test_rejects_out_of_range(self):
        with pytest.raises(GraphError):
            Dag(2, [(1, 3)])
        with pytest.raises(GraphError):
            Dag(2, [], cards=[2, 1])
        with pytest.raises(GraphError):
            Dag(2, [], cards=[2])

    def test_json_round_trip(self):
        d = Dag(3, [(1, 2)], cards=[3, 2, 4])
        assert Dag.from_json(d.to_json()) == d


class TestRelatives:
    def test_chain(self):
        assert relatives(CHAIN, 3, "ancestors") == {1, 2}
        assert relatives(CHAIN, 2, "parents") == {1}
        assert relatives(CHAIN, 1, "descendants") == {2, 3}
        assert relatives(CHAIN, 2, "children") == {3}

    def test_four_cycle_parents(self):
        assert relatives(FOUR_CYCLE, 4, "parents") == {2, 3}

    def test_nondescendants_contains_node(self):
        assert relatives(CHAIN, 2, "nondescendants") == {1, 2}

    def test_bad_kind(self):
        with pytest.raises(ValueError):
            relatives(CHAIN, 1, "cousins")


class TestOrders:
    def test_linear_extension(self):
        assert is_linear_extension(CHAIN, [1, 2, 3])
        assert not is_linear_extension(CHAIN, [3, 2, 1])

    def test_four_cycle_extensions(self):
        orders = set(topological_orders(FOUR_CYCLE))
        assert orders == {(1, 2, 3, 4), (1, 3, 2, 4)}
        # independent check: edge precedence over all permutations
        brute = {
            p for p in itertools.permutations(range(1, 5))
            if all(p.index(a) < p.index(b) for a, b in FOUR_CYCLE.edges)
        }
        assert orders == brute

    def test_require_defaults_to_identity(self):
        assert require_linear_extension(CHAIN, None) == (1, 2, 3)
        with pytest.raises(GraphError):
            require_linear_extension(CHAIN, [2, 1, 3])
        with pytest.raises(GraphError):
            require_linear_extension(REVERSED, None)

    def test_first_extension(self):
        assert first_linear_extension(REVERSED) == (3, 2, 1)


class TestPerfectAndChordal:
    def test_examples(self):
        assert is_perfect(CHAIN)
        assert not is_perfect(FOUR_CYCLE)
        assert is_perfect(Dag(3))
        assert not is_perfect(COLLIDER)

    def test_moralize(self):
        assert moralize(CHAIN).edge_list() == [(1, 2), (2, 3)]
        assert moralize(COLLIDER).edge_list() == [(1, 2), (1, 3), (2, 3)]
        assert sorted(moralize(FOUR_CYCLE).edge_list()) == [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4)]

    def test_chordal_small(self):
        ok, order = is_chordal(UGraph(3, [(1, 2), (2, 3), (1, 3)]))
        assert ok and is_peo(UGraph(3, [(1, 2), (2, 3), (1, 3)]), order)
        assert is_chordal(UGraph(4, [(1, 2), (2, 3), (3, 4), (4, 1)])) == (False, None)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_chordal_against_brute_force(self, n):
        nodes = list(range(1, n + 1))
        pairs = list(itertools.combinations(nodes, 2))
        for mask in range(1 << len(pairs)):
            es = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
            adj = {frozenset(e) for e in es}
            assert is_chordal(UGraph(n, es))[0] == has_peo_brute(nodes, adj)

    @pytest.mark.parametrize("n", [3, 4])
    def test_linear_extension_of_perfect_dag_is_peo(self, n):
        for d in enumerate_dags(n):
            if not is_perfect(d):
                continue
            adj = {frozenset(e) for e in d.edges}
            for pi in topological_orders(d):
                assert is_peo(skeleton(d), pi)
                assert is_peo_brute(list(d.nodes), adj, pi)
            assert is_chordal(skeleton(d))[0]

    def test_perfect_dag_skeleton_chordal_n5_sample(self):
        seen = 0
        for d in itertools.islice(enumerate_dags(5), 0, None, 97):
            if is_perfect(d):
                seen += 1
                nodes = list(d.nodes)
                assert is_peo_brute(nodes, {frozenset(e) for e in d.edges}, first_linear_extension(d))
        assert seen > 0


class TestDSeparation:
    def test_examples(self):
        assert d_separated(CHAIN, {1}, {3}, {2})
        assert not d_separated(CHAIN, {1}, {3})
        assert d_separated(COLLIDER, {1}, {2})
        assert not d_separated(COLLIDER, {1}, {2}, {3})
        assert d_separated(FOUR_CYCLE, {1}, {4}, {2, 3})

    def test_descendant_of_collider_opens(self):
        g = Dag(4, [(1, 3), (2, 3), (3, 4)])
        assert not d_separated(g, {1}, {2}, {4})

    def test_input_errors(self):
        with pytest.raises(GraphError):
            d_separated(CHAIN, {1}, {1}, {2})
        with pytest.raises(GraphError):
            d_separated(CHAIN, set(), {1})
        with pytest.raises(GraphError):
            d_separated(CHAIN, {1}, {9})

    @pytest.mark.parametrize("n", [3, 4])
    def test_against_path_oracle(self, n):
        nodes = list(range(1, n + 1))
        for d in enumerate_dags(n):
            for roles in itertools.product(range(4), repeat=n):
                A = {v for v, r in zip(nodes, roles) if r == 1}
                B = {v for v, r in zip(nodes, roles) if r == 2}
                C = {v for v, r in zip(nodes, roles) if r == 3}
                if A and B and len(A) == 1 and len(B) == 1:
                    assert d_separated(d, A, B, C) == dsep_paths(d, A, B, C), (d.edge_text(), A, B, C)


class TestMarkovEquivalence:
    def test_intro_graphs(self):
        for a, b in itertools.combinations([CHAIN, FORK, REVERSED], 2):
            assert markov_equivalent(a, b)

    def test_new_v_structure(self):
        assert not markov_equivalent(CHAIN, Dag(3, [(1, 2), (3, 2)]))
        assert markov_equivalent(CHAIN, CHAIN)

    def test_v_structures(self):
        assert v_structures(COLLIDER) == {(1, 3, 2)}
        assert v_structures(FOUR_CYCLE) == {(2, 4, 3)}


class TestInterventionGraph:
    def test_single_target(self):
        g = i_dag(CHAIN, [[], [1]])
        assert g.w_nodes == (None, 4)
        assert g.w_edges == {(4, 1)}
        assert g.graph.n == 4

    def test_observational_only(self):
        g = i_dag(CHAIN, [[]])
        assert g.graph == CHAIN

    def test_two_targets(self):
        g = i_dag(CHAIN, [[], [1], [2, 3]])
        assert g.w_edges == {(4, 1), (5, 2), (5, 3)}
        assert g.drop_w_nodes() == CHAIN

    def test_out_of_range(self):
        with pytest.raises(GraphError):
            i_dag(CHAIN, [[], [7]])

    def test_target_collection(self):
        tc = TargetCollection([[1], [], [1]])
        assert tc.observational_index() == 1
        assert len(tc.dedup()) == 2
        assert TargetCollection([[1]]).purely_interventional
        with pytest.raises(GraphError):
            TargetCollection([[1]]).observational_index()


class TestAncestralClosure:
    def test_examples(self):
        assert ancestral_closure(CHAIN, {1}) == {1}
        assert ancestral_closure(REVERSED, {1}) == {1, 2, 3}
        assert ancestral_closure(CHAIN, set()) == frozenset()


class TestEnumeration:
    @pytest.mark.parametrize("n,count", [(1, 1), (2, 3), (3, 25), (4, 543)])
    def test_counts(self, n, count):
        assert sum(1 for _ in enumerate_dags(n)) == count

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_matches_subset_oracle(self, n):
        assert {d.edges for d in enumerate_dags(n)} == set(all_dags(n))

    def test_cap(self):
        with pytest.raises(GraphError):
            list(enumerate_dags(6))
