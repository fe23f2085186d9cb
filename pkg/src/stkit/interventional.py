"""Interventional staged trees and the toricness criterion for interventional DAG models."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .graph import (
    Dag,
    GraphError,
    TargetCollection,
    ancestral_closure,
    as_targets,
    i_dag,
    is_perfect,
    reachable,
    require_linear_extension,
)
from .staged_tree import (
    ROOT,
    BalanceResult,
    Edge,
    StagedTree,
    TreeValidationError,
    _dag_tree_parts,
    _leaf_products,
    check_stage_coherence,
    check_theta,
    is_balanced,
    leaf_name,
    recover_parameters,
)


class IndexSet:
    """Set of vertices of the representative subtree, indexed in breadth-first order."""

    def __init__(self, indices: Iterable[int] = (), levels: Iterable[int] | None = None):
        self.indices = frozenset(int(i) for i in indices)
        self.levels = frozenset(int(k) for k in levels) if levels is not None else None

    def contains(self, index: int, level: int) -> bool:
        if self.levels is not None:
            return level in self.levels
        return index in self.indices

    def expand(self, level_of: Sequence[int]) -> frozenset[int]:
        return frozenset(i for i, lv in enumerate(level_of) if i and self.contains(i, lv))

    def to_json(self):
        if self.levels is not None:
            return {"levels": sorted(self.levels)}
        return sorted(self.indices)

    @classmethod
    def from_json(cls, obj) -> "IndexSet":
        if isinstance(obj, Mapping):
            return cls(levels=obj["levels"])
        return cls(obj)

    def __eq__(self, other) -> bool:
        return isinstance(other, IndexSet) and (self.indices, self.levels) == (other.indices, other.levels)

    def __repr__(self) -> str:
        return f"IndexSet({self.to_json()})"


class InterventionalTree:
    """A staged tree split at level ``k_star`` into isomorphic subtrees.

    Edges above the split carry action labels (keys of ``action_index_sets``);
    the subtrees below share labels exactly where no action on the path
    between them touches the receiving vertex.
    """

    def __init__(
        self,
        tree: StagedTree,
        k_star: int,
        action_index_sets: Mapping[str, IndexSet],
        dag: Dag | None = None,
        targets: TargetCollection | None = None,
        pi: Sequence[int] | None = None,
    ):
        self.tree = tree
        self.k_star = int(k_star)
        self.action_index_sets = dict(action_index_sets)
        self.dag = dag
        self.targets = targets
        self.pi = tuple(pi) if pi is not None else None
        self._validate()

    # validation ----------------------------------------------------------
    def _fail(self, cond: int, msg: str, witness=None):
        raise TreeValidationError(f"condition-{cond}", msg, witness)

    def _validate(self) -> None:
        T = self.tree
        A = set(self.action_index_sets)
        if self.k_star < 1:
            self._fail(1, "splitting level must be at least 1")
        used = set()
        for e in T.edges:
            above = T.depth[e.src] < self.k_star
            if above and e.label not in A:
                self._fail(1, f"edge {e.src}->{e.dst} sits above the split but {e.label} is not an action label", e)
            if not above and e.label in A:
                self._fail(1, f"action label {e.label} used below the split", e)
            if above:
                used.add(e.label)
        if used != A:
            self._fail(1, f"action labels {sorted(A - used)} never appear above the split")
        for v in T.bfs:
            if T.depth[v] < self.k_star and T.is_leaf(v):
                self._fail(1, f"leaf {v} lies above the split", v)

        self.subtree_roots = T.level(self.k_star)
        shapes = []
        self._iso: list[list[str]] = []
        for u in self.subtree_roots:
            order = [u]
            for v in order:
                order.extend(e.dst for e in T.children(v))
            self._iso.append(order)
            shapes.append(tuple(len(T.children(v)) for v in order))
        if len(set(shapes)) != 1:
            bad = self.subtree_roots[shapes.index(next(s for s in shapes if s != shapes[0]))]
            self._fail(2, f"subtree at {bad} is not isomorphic to the first subtree", bad)
        rep = self._iso[0]
        lvl = {rep[0]: 0}
        for v in rep:
            for e in T.children(v):
                lvl[e.dst] = lvl[v] + 1
        self.level_of = tuple(lvl[v] for v in rep)
        self._index = [{v: i for i, v in enumerate(order)} for order in self._iso]

        for order in self._iso:
            owner: dict[str, frozenset[str]] = {}
            for v in order:
                labs = T.floret_labels(v)
                for lab in labs:
                    if lab in owner and owner[lab] != labs:
                        self._fail(3, f"label {lab} has overlapping but unequal florets in subtree {order[0]}", (order[0], v))
                    owner[lab] = labs

        for a, b in itertools.combinations(range(len(self.subtree_roots)), 2):
            acts = self.path_actions(a, b)
            for i in range(1, len(rep)):
                ea = T.parent_edge(self._iso[a][i])
                eb = T.parent_edge(self._iso[b][i])
                differ = any(self.action_index_sets[s].contains(i, self.level_of[i]) for s in acts)
                if (ea.label == eb.label) == differ:
                    want = "differ" if differ else "coincide"
                    self._fail(
                        4,
                        f"labels into representative vertex {i} should {want} between subtrees "
                        f"{self.subtree_roots[a]} and {self.subtree_roots[b]} ({ea.label} vs {eb.label})",
                        (ea, eb),
                    )
        check_stage_coherence(T, T.stages)

    def path_actions(self, a: int, b: int) -> list[str]:
        """Action labels on the path joining subtree roots a and b."""
        T = self.tree
        pa = T.path_edges(self.subtree_roots[a])
        pb = T.path_edges(self.subtree_roots[b])
        k = 0
        while k < min(len(pa), len(pb)) and pa[k] == pb[k]:
            k += 1
        return [e.label for e in pa[k:]] + [e.label for e in pb[k:]]

    # accessors -----------------------------------------------------------
    @property
    def n_subtrees(self) -> int:
        return len(self.subtree_roots)

    def vertex_at(self, k: int, index: int) -> str:
        return self._iso[k][index]

    def representative_index(self, v: str) -> tuple[int, int]:
        for k, idx in enumerate(self._index):
            if v in idx:
                return k, idx[v]
        raise KeyError(v)

    def subtree(self, k: int) -> StagedTree:
        return self.tree.subtree(self.subtree_roots[k])

    def expanded_index_sets(self) -> dict[str, frozenset[int]]:
        return {a: s.expand(self.level_of) for a, s in self.action_index_sets.items()}

    def leaf_key(self, k: int, leaf: str) -> tuple[int, ...]:
        return self.tree.leaf_key(leaf, self.subtree_roots[k])

    def coordinate_names(self, k: int) -> list[str]:
        u = self.subtree_roots[k]
        return [leaf_name(self.tree.leaf_key(v, u), str(k)) for v in self.tree.leaves_below(u)]

    def to_json(self) -> dict:
        out = self.tree.to_json()
        out["k_star"] = self.k_star
        out["action_index_sets"] = {a: s.to_json() for a, s in self.action_index_sets.items()}
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> "InterventionalTree":
        if "k_star" not in obj or "action_index_sets" not in obj:
            raise TreeValidationError("schema", "interventional tree needs k_star and action_index_sets")
        tree = StagedTree.from_json(obj, check_stages=False)
        sets = {a: IndexSet.from_json(s) for a, s in obj["action_index_sets"].items()}
        return cls(tree, obj["k_star"], sets)

    def __eq__(self, other) -> bool:
        return isinstance(other, InterventionalTree) and self.to_json() == other.to_json()

    def __repr__(self) -> str:
        return f"InterventionalTree({self.n_subtrees} subtrees, k*={self.k_star}, {self.tree!r})"


def validate_interventional(spec) -> InterventionalTree:
    if isinstance(spec, InterventionalTree):
        spec = spec.to_json()
    return InterventionalTree.from_json(spec)


def _action_label(target: frozenset[int], seen: dict[frozenset[int], int], k: int) -> str:
    base = "a[" + ",".join(str(v) for v in sorted(target)) + "]"
    seen[target] = seen.get(target, 0) + 1
    return base if seen[target] == 1 else f"{base}^({k})"


def from_dag_targets(dag: Dag, targets, pi: Sequence[int] | None = None) -> InterventionalTree:
    """Glue one copy of the DAG's staged tree per target below a root of action edges."""
    pi = require_linear_extension(dag, pi)
    targets = as_targets(targets)
    if len(targets) == 0:
        raise GraphError("the target collection is empty")
    targets.check_range(dag.n)
    vertices = [ROOT]
    edges: list[Edge] = []
    sets: dict[str, IndexSet] = {}
    seen: dict[frozenset[int], int] = {}
    for k, tgt in enumerate(targets):
        a = _action_label(tgt, seen, k)
        top = f"v{k}"
        levels = [j + 1 for j, var in enumerate(pi) if var in tgt]
        sets[a] = IndexSet(levels=levels)
        edges.append(Edge(ROOT, top, a, k + 1))
        vs, es = _dag_tree_parts(
            dag, pi, lambda level, k=k, tgt=tgt: str(k) if pi[level - 1] in tgt else None, top + ":", top
        )
        vertices.extend(vs)
        edges.extend(es)
    tree = StagedTree(vertices, edges, None, pi)
    return InterventionalTree(tree, 1, sets, dag, targets, pi)


@dataclass(frozen=True)
class CriterionResult:
    holds: bool
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.holds


def criterion_check(dag: Dag, targets) -> CriterionResult:
    """Perfect DAG and the union of every two members ancestrally closed."""
    targets = as_targets(targets)
    targets.check_range(dag.n)
    if not is_perfect(dag):
        for v in dag.nodes:
            pa = sorted(dag.parents(v))
            for i, j in itertools.combinations(pa, 2):
                if not dag.adjacent(i, j):
                    return CriterionResult(False, ("not-perfect", v, (i, j)))
    members = list(targets)
    # distinct members only: a single subtree is balanced whenever the DAG is perfect
    for a, b in itertools.combinations(range(len(members)), 2):
        union = members[a] | members[b]
        closure = ancestral_closure(dag, union)
        if closure != union:
            return CriterionResult(False, ("not-ancestral", sorted(members[a]), sorted(members[b]), min(closure - union)))
    return CriterionResult(True)


def is_balanced_interventional(itree: InterventionalTree) -> BalanceResult:
    return is_balanced(itree.tree)


def parameterize_interventional(itree: InterventionalTree, x: Mapping[str, Fraction]) -> tuple[dict, ...]:
    T = itree.tree
    check_theta(T, x, [v for v in T.bfs if T.depth[v] >= itree.k_star])
    return tuple(_leaf_products(T, x, u) for u in itree.subtree_roots)


def recover_parameters_interventional(itree: InterventionalTree, vectors: Sequence[Mapping]) -> dict[str, Fraction]:
    if len(vectors) != itree.n_subtrees:
        raise ValueError(f"expected {itree.n_subtrees} vectors, got {len(vectors)}")
    out: dict[str, Fraction] = {}
    for k, vec in enumerate(vectors):
        got = recover_parameters(itree.tree, vec, itree.subtree_roots[k])
        for lab, val in got.items():
            if lab in out and out[lab] != val:
                raise ValueError(f"shared label {lab} recovered differently in subtree {k}")
            out[lab] = val
    return out


def interventional_assignment(vectors: Sequence[Mapping]) -> dict[str, Fraction]:
    """Map per-subtree leaf vectors to values of the p^(k) indeterminates."""
    out = {}
    for k, vec in enumerate(vectors):
        for key, val in vec.items():
            out[leaf_name(key, str(k))] = val
    return out


def i_markov_invariance_pairs(dag: Dag, targets, maximal: bool = True) -> dict[int, list[tuple[frozenset[int], frozenset[int]]]]:
    """Pairs (A, C) where C plus the other w-nodes d-separates A from w_I in the I-DAG.

    Keys are positions of nonempty targets.  With ``maximal`` (default) each C
    contributes only its largest A; since d-separation is compositional this
    largest set implies every smaller one.  Otherwise all nonempty subsets are listed.
    """
    targets = as_targets(targets)
    targets.observational_index()
    g = i_dag(dag, targets)
    G = g.graph
    ws = [w for w in g.w_nodes if w is not None]
    nodes = list(dag.nodes)
    out: dict[int, list] = {}
    for k, w in enumerate(g.w_nodes):
        if w is None:
            continue
        others = frozenset(x for x in ws if x != w)
        pairs = []
        for size in range(len(nodes) + 1):
            for C in itertools.combinations(nodes, size):
                C = frozenset(C)
                reach = reachable(G, frozenset([w]), C | others)
                amax = frozenset(v for v in nodes if v not in C and v not in reach)
                if not amax:
                    continue
                if maximal:
                    pairs.append((amax, C))
                else:
                    for r in range(1, len(amax) + 1):
                        for A in itertools.combinations(sorted(amax), r):
                            pairs.append((frozenset(A), C))
        pairs.sort(key=lambda p: (len(p[1]), sorted(p[1]), len(p[0]), sorted(p[0])))
        out[k] = pairs
    return out
