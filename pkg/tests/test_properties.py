"""Randomized invariants over small DAGs."""

from fractions import Fraction

from hypothesis import given, settings, strategies as st

from stkit.graph import Dag, ancestral_closure, d_separated, first_linear_extension, i_dag, topological_orders
from stkit.interventional import from_dag_targets, parameterize_interventional, recover_parameters_interventional
from stkit.staged_tree import from_dag, parameterize, recover_parameters
from stkit.verify import sample_theta

from oracles import dsep_paths


@st.composite
def dags(draw, max_n=5):
    n = draw(st.integers(1, max_n))
    order = draw(st.permutations(range(1, n + 1)))
    edges = [
        (order[i], order[j])
        for i in range(n) for j in range(i + 1, n)
        if draw(st.booleans())
    ]
    cards = draw(st.lists(st.integers(2, 3), min_size=n, max_size=n))
    return Dag(n, edges, cards)


@st.composite
def dag_and_triple(draw):
    d = draw(dags())
    roles = draw(st.lists(st.integers(0, 3), min_size=d.n, max_size=d.n))
    A = {v for v, r in zip(d.nodes, roles) if r == 1}
    B = {v for v, r in zip(d.nodes, roles) if r == 2}
    C = {v for v, r in zip(d.nodes, roles) if r == 3}
    return d, A, B, C


@settings(max_examples=150, deadline=None)
@given(dag_and_triple())
def test_dsep_symmetric_and_matches_paths(case):
    d, A, B, C = case
    if not A or not B:
        return
    got = d_separated(d, A, B, C)
    assert got == d_separated(d, B, A, C)
    assert got == dsep_paths(d, A, B, C)


@settings(max_examples=100, deadline=None)
@given(dags(), st.data())
def test_ancestral_closure(d, data):
    S = set(data.draw(st.lists(st.sampled_from(list(d.nodes)), max_size=d.n)))
    T = S | set(data.draw(st.lists(st.sampled_from(list(d.nodes)), max_size=d.n)))
    cl = ancestral_closure(d, S)
    assert S <= cl
    assert ancestral_closure(d, cl) == cl
    assert cl <= ancestral_closure(d, T)


@settings(max_examples=100, deadline=None)
@given(dags(), st.data())
def test_i_dag_drops_back(d, data):
    targets = data.draw(st.lists(st.sets(st.sampled_from(list(d.nodes))), max_size=3))
    g = i_dag(d, [[]] + [sorted(t) for t in targets])
    assert g.drop_w_nodes() == d
    assert len(g.w_edges) == sum(len(t) for t in targets)


@settings(max_examples=40, deadline=None)
@given(dags(max_n=4), st.integers(0, 10**6))
def test_round_trip_and_extension_invariance(d, seed):
    orders = list(topological_orders(d))
    t = from_dag(d, orders[0])
    x = sample_theta(t, seed).assignment
    p = parameterize(t, x)
    assert sum(p.values()) == 1
    assert recover_parameters(t, p) == x
    # same labels under every extension, same distribution on matched outcomes
    t2 = from_dag(d, orders[-1])
    assert parameterize(t2, x) == p


@settings(max_examples=30, deadline=None)
@given(dags(max_n=3), st.data(), st.integers(0, 10**6))
def test_interventional_round_trip(d, data, seed):
    tgt = data.draw(st.sets(st.sampled_from(list(d.nodes)), min_size=1))
    it = from_dag_targets(d, [[], sorted(tgt)], first_linear_extension(d))
    x = sample_theta(it, seed).assignment
    vecs = parameterize_interventional(it, x)
    assert all(sum(v.values()) == 1 for v in vecs)
    below = {k: v for k, v in x.items() if not k.startswith("a[")}
    assert recover_parameters_interventional(it, vecs) == below
    assert all(isinstance(v, Fraction) for v in below.values())
