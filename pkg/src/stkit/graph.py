"""Directed and undirected graph algorithms for discrete DAG models.

Nodes are the integers 1..n.  All values are immutable once built.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

MAX_ENUM_NODES = 5


class GraphError(ValueError):
    pass


def _as_nodes(nodes: Iterable[int]) -> frozenset[int]:
    return frozenset(int(v) for v in nodes)


@dataclass(frozen=True)
class Dag:
    n: int
    edges: frozenset[tuple[int, int]]
    cards: tuple[int, ...]

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = (), cards: Sequence[int] | None = None):
        n = int(n)
        if n < 0:
            raise GraphError("node count must be non-negative")
        es = set()
        for e in edges:
            i, j = (int(x) for x in e)
            if not (1 <= i <= n and 1 <= j <= n):
                raise GraphError(f"edge {i}->{j} has an endpoint outside 1..{n}")
            if i == j:
                raise GraphError(f"self-loop at {i}")
            if (i, j) in es:
                raise GraphError(f"parallel edge {i}->{j}")
            if (j, i) in es:
                raise GraphError(f"edges {i}->{j} and {j}->{i} form a cycle")
            es.add((i, j))
        cards = tuple(int(d) for d in cards) if cards is not None else (2,) * n
        if len(cards) != n:
            raise GraphError(f"expected {n} cardinalities, got {len(cards)}")
        if any(d < 2 for d in cards):
            raise GraphError("every cardinality must be at least 2")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", frozenset(es))
        object.__setattr__(self, "cards", cards)
        if _topo_sort(n, self.edges) is None:
            raise GraphError(f"directed cycle in {self.edge_text()}")

    @property
    def nodes(self) -> range:
        return range(1, self.n + 1)

    def edge_text(self) -> str:
        return ", ".join(f"{i}->{j}" for i, j in sorted(self.edges))

    def __repr__(self) -> str:
        return f"Dag(n={self.n}, [{self.edge_text()}], cards={list(self.cards)})"

    def card(self, v: int) -> int:
        return self.cards[v - 1]

    @cached_property
    def _pa(self) -> dict[int, frozenset[int]]:
        pa = {v: set() for v in self.nodes}
        for i, j in self.edges:
            pa[j].add(i)
        return {v: frozenset(s) for v, s in pa.items()}

    @cached_property
    def _ch(self) -> dict[int, frozenset[int]]:
        ch = {v: set() for v in self.nodes}
        for i, j in self.edges:
            ch[i].add(j)
        return {v: frozenset(s) for v, s in ch.items()}

    def parents(self, v: int) -> frozenset[int]:
        self._check(v)
        return self._pa[v]

    def children(self, v: int) -> frozenset[int]:
        self._check(v)
        return self._ch[v]

    def ancestors(self, v: int) -> frozenset[int]:
        self._check(v)
        return _reach(v, self._pa)

    def descendants(self, v: int) -> frozenset[int]:
        self._check(v)
        return _reach(v, self._ch)

    def nondescendants(self, v: int) -> frozenset[int]:
        # includes v itself: everything outside de(v)
        return frozenset(self.nodes) - self.descendants(v)

    def adjacent(self, i: int, j: int) -> bool:
        return (i, j) in self.edges or (j, i) in self.edges

    def _check(self, v: int) -> None:
        if not (1 <= v <= self.n):
            raise GraphError(f"node {v} outside 1..{self.n}")

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in sorted(self.edges)], "cards": list(self.cards)}

    @classmethod
    def from_json(cls, obj: dict) -> "Dag":
        try:
            return cls(obj["n"], obj.get("edges", []), obj.get("cards"))
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed DAG description: {exc}") from exc


def _reach(v: int, nbrs: dict[int, frozenset[int]]) -> frozenset[int]:
    seen: set[int] = set()
    stack = list(nbrs[v])
    while stack:
        u = stack.pop()
        if u not in seen:
            seen.add(u)
            stack.extend(nbrs[u])
    return frozenset(seen)


def _topo_sort(n: int, edges: Iterable[tuple[int, int]]) -> list[int] | None:
    indeg = {v: 0 for v in range(1, n + 1)}
    ch: dict[int, list[int]] = {v: [] for v in range(1, n + 1)}
    for i, j in edges:
        indeg[j] += 1
        ch[i].append(j)
    ready = sorted(v for v, d in indeg.items() if d == 0)
    out = []
    while ready:
        v = ready.pop(0)
        out.append(v)
        for w in ch[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
        ready.sort()
    return out if len(out) == n else None


RELATIVE_KINDS = ("parents", "children", "ancestors", "descendants", "nondescendants")


def relatives(dag: Dag, v: int, kind: str) -> frozenset[int]:
    if kind not in RELATIVE_KINDS:
        raise GraphError(f"unknown relative kind {kind!r}")
    return getattr(dag, kind)(v)


def _check_perm(dag: Dag, pi: Sequence[int]) -> tuple[int, ...]:
    pi = tuple(int(x) for x in pi)
    if sorted(pi) != list(dag.nodes):
        raise GraphError(f"{list(pi)} is not a permutation of 1..{dag.n}")
    return pi


def is_linear_extension(dag: Dag, pi: Sequence[int]) -> bool:
    pi = _check_perm(dag, pi)
    pos = {v: k for k, v in enumerate(pi)}
    return all(pos[i] < pos[j] for i, j in dag.edges)


def require_linear_extension(dag: Dag, pi: Sequence[int] | None) -> tuple[int, ...]:
    """Validate ``pi`` (identity when omitted) as a linear extension of ``dag``."""
    if pi is None:
        pi = tuple(dag.nodes)
    pi = _check_perm(dag, pi)
    if not is_linear_extension(dag, pi):
        raise GraphError(f"{list(pi)} is not a linear extension of {dag.edge_text()}")
    return pi


def topological_orders(dag: Dag) -> Iterator[tuple[int, ...]]:
    """All linear extensions, in lexicographic order."""
    pa = {v: dag.parents(v) for v in dag.nodes}

    def rec(prefix: list[int], placed: set[int]):
        if len(prefix) == dag.n:
            yield tuple(prefix)
            return
        for v in dag.nodes:
            if v not in placed and pa[v] <= placed:
                prefix.append(v)
                placed.add(v)
                yield from rec(prefix, placed)
                placed.discard(v)
                prefix.pop()

    yield from rec([], set())


def first_linear_extension(dag: Dag) -> tuple[int, ...]:
    return next(topological_orders(dag))


def is_perfect(dag: Dag) -> bool:
    for v in dag.nodes:
        for i, j in itertools.combinations(sorted(dag.parents(v)), 2):
            if not dag.adjacent(i, j):
                return False
    return True


@dataclass(frozen=True)
class UGraph:
    n: int
    edges: frozenset[frozenset[int]] = field(default_factory=frozenset)

    def __init__(self, n: int, edges: Iterable[Iterable[int]] = ()):
        es = set()
        for e in edges:
            e = frozenset(int(x) for x in e)
            if len(e) != 2:
                raise GraphError("undirected edges join two distinct nodes")
            if not all(1 <= x <= n for x in e):
                raise GraphError("edge endpoint out of range")
            es.add(e)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "edges", frozenset(es))

    def neighbors(self, v: int) -> frozenset[int]:
        return frozenset(x for e in self.edges if v in e for x in e if x != v)

    def adjacent(self, i: int, j: int) -> bool:
        return frozenset((i, j)) in self.edges

    def edge_list(self) -> list[tuple[int, int]]:
        return sorted(tuple(sorted(e)) for e in self.edges)


def skeleton(dag: Dag) -> UGraph:
    return UGraph(dag.n, dag.edges)


def moralize(dag: Dag) -> UGraph:
    es = {frozenset(e) for e in dag.edges}
    for v in dag.nodes:
        for i, j in itertools.combinations(sorted(dag.parents(v)), 2):
            es.add(frozenset((i, j)))
    return UGraph(dag.n, es)


def is_peo(g: UGraph, order: Sequence[int]) -> bool:
    """True when every vertex's neighbours that precede it in ``order`` form a clique."""
    pos = {v: k for k, v in enumerate(order)}
    for v in order:
        earlier = [u for u in g.neighbors(v) if pos[u] < pos[v]]
        for a, b in itertools.combinations(earlier, 2):
            if not g.adjacent(a, b):
                return False
    return True


def is_chordal(g: UGraph) -> tuple[bool, tuple[int, ...] | None]:
    """Maximum cardinality search; the visit order is a PEO iff ``g`` is chordal."""
    weight = {v: 0 for v in range(1, g.n + 1)}
    order: list[int] = []
    while weight:
        v = max(sorted(weight), key=lambda u: weight[u])
        order.append(v)
        del weight[v]
        for u in g.neighbors(v):
            if u in weight:
                weight[u] += 1
    if is_peo(g, order):
        return True, tuple(order)
    return False, None


def _ancestral_set(dag: Dag, nodes: frozenset[int]) -> frozenset[int]:
    out = set(nodes)
    for v in nodes:
        out |= dag.ancestors(v)
    return frozenset(out)


def d_separated(dag: Dag, A: Iterable[int], B: Iterable[int], C: Iterable[int] = ()) -> bool:
    """Reachability (Bayes-ball) test for A and B being d-separated given C."""
    A, B, C = _as_nodes(A), _as_nodes(B), _as_nodes(C)
    if not A or not B:
        raise GraphError("A and B must be nonempty")
    if A & B or A & C or B & C:
        raise GraphError("A, B and C must be pairwise disjoint")
    for v in A | B | C:
        dag._check(v)
    return not (reachable(dag, A, C) & B)


def reachable(dag: Dag, sources: frozenset[int], C: frozenset[int]) -> frozenset[int]:
    """Nodes joined to some source by a path that is active given C."""
    an_c = _ancestral_set(dag, C)
    # direction: "up" means we arrived from a child, "down" from a parent
    todo = [(s, "up") for s in sources]
    seen: set[tuple[int, str]] = set()
    found: set[int] = set()
    while todo:
        v, d = todo.pop()
        if (v, d) in seen:
            continue
        seen.add((v, d))
        if v not in C:
            found.add(v)
        if d == "up" and v not in C:
            todo.extend((p, "up") for p in dag.parents(v))
            todo.extend((c, "down") for c in dag.children(v))
        elif d == "down":
            if v not in C:
                todo.extend((c, "down") for c in dag.children(v))
            if v in an_c:
                todo.extend((p, "up") for p in dag.parents(v))
    return frozenset(found)


def v_structures(dag: Dag) -> frozenset[tuple[int, int, int]]:
    out = set()
    for k in dag.nodes:
        for i, j in itertools.combinations(sorted(dag.parents(k)), 2):
            if not dag.adjacent(i, j):
                out.add((i, k, j))
    return frozenset(out)


def markov_equivalent(d1: Dag, d2: Dag) -> bool:
    if d1.n != d2.n:
        raise GraphError("DAGs must have the same node count")
    return skeleton(d1) == skeleton(d2) and v_structures(d1) == v_structures(d2)


def ancestral_closure(dag: Dag, S: Iterable[int]) -> frozenset[int]:
    S = _as_nodes(S)
    for v in S:
        dag._check(v)
    return _ancestral_set(dag, S)


@dataclass(frozen=True)
class TargetCollection:
    """Ordered (multi)set of intervention targets; the empty target is explicit."""

    members: tuple[frozenset[int], ...]

    def __init__(self, members: Iterable[Iterable[int]]):
        object.__setattr__(self, "members", tuple(_as_nodes(m) for m in members))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, k: int) -> frozenset[int]:
        return self.members[k]

    @property
    def purely_interventional(self) -> bool:
        return frozenset() not in self.members

    def observational_index(self) -> int:
        for k, m in enumerate(self.members):
            if not m:
                return k
        raise GraphError(
            "the target collection has no empty (observational) member; "
            "invariance statements and their ideals are only defined when it does"
        )

    def dedup(self) -> "TargetCollection":
        seen, out = set(), []
        for m in self.members:
            if m not in seen:
                seen.add(m)
                out.append(m)
        return TargetCollection(out)

    def check_range(self, n: int) -> None:
        for m in self.members:
            for v in m:
                if not 1 <= v <= n:
                    raise GraphError(f"target node {v} outside 1..{n}")

    def to_json(self) -> list[list[int]]:
        return [sorted(m) for m in self.members]


def as_targets(targets) -> TargetCollection:
    return targets if isinstance(targets, TargetCollection) else TargetCollection(targets)


@dataclass(frozen=True)
class IDag:
    base: Dag
    targets: TargetCollection
    # w_nodes[k] is the extra node for targets[k], or None when that target is empty
    w_nodes: tuple[int | None, ...]

    @property
    def w_edges(self) -> frozenset[tuple[int, int]]:
        return frozenset(
            (w, j) for w, t in zip(self.w_nodes, self.targets) if w is not None for j in t
        )

    @cached_property
    def graph(self) -> Dag:
        n = self.base.n + sum(w is not None for w in self.w_nodes)
        return Dag(n, self.base.edges | self.w_edges, self.base.cards + (2,) * (n - self.base.n))

    def drop_w_nodes(self) -> Dag:
        keep = [e for e in self.graph.edges if e[0] <= self.base.n and e[1] <= self.base.n]
        return Dag(self.base.n, keep, self.graph.cards[: self.base.n])


def i_dag(dag: Dag, targets) -> IDag:
    targets = as_targets(targets)
    targets.check_range(dag.n)
    ws: list[int | None] = []
    nxt = dag.n + 1
    for t in targets:
        if t:
            ws.append(nxt)
            nxt += 1
        else:
            ws.append(None)
    return IDag(dag, targets, tuple(ws))


def enumerate_dags(n: int, cards: Sequence[int] | None = None) -> Iterator[Dag]:
    """Every labeled DAG on n nodes once, in lexicographic order of sorted edge lists."""
    if n > MAX_ENUM_NODES:
        raise GraphError(f"enumeration is capped at n <= {MAX_ENUM_NODES}")
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    found = []
    for states in itertools.product((0, 1, 2), repeat=len(pairs)):
        es = [(i, j) if s == 1 else (j, i) for (i, j), s in zip(pairs, states) if s]
        if _topo_sort(n, es) is not None:
            found.append(tuple(sorted(es)))
    found.sort()
    for es in found:
        yield Dag(n, es, cards)
