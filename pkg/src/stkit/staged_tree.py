"""Staged trees: validation, construction from DAGs, classification, balance,
parameterization and chain event graph quotients.
"""

from __future__ import annotations

import itertools
import re
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .graph import Dag, require_linear_extension
from .polynomial import SYMBOL_RE, Polynomial, SymbolTable

ROOT = "r"
SINK = "∞"

PALETTE = (
    "lightblue", "orange", "palegreen", "tomato", "plum", "gold", "cyan", "violet",
    "khaki", "salmon", "lightpink", "aquamarine", "tan", "lightcoral", "thistle", "wheat",
)


class TreeValidationError(ValueError):
    def __init__(self, kind: str, message: str, witness=None):
        super().__init__(f"{kind}: {message}")
        self.kind = kind
        self.witness = witness


class InconsistentParameters(ValueError):
    def __init__(self, stage_index: int, stage: Sequence[str], label: str):
        super().__init__(
            f"stage {stage_index} {list(stage)} gives label {label} different ratios; "
            "the vector is not on the model"
        )
        self.stage_index = stage_index
        self.stage = tuple(stage)
        self.label = label


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    label: str
    outcome: int  # 1-based position in the floret


def cond_label(v: int, x: int, context: Sequence[tuple[int, int]], sup: str | None = None) -> str:
    """Name of the conditional-probability symbol f(x_v | x_context)."""
    ctx = ",".join(f"{u}={y}" for u, y in context)
    name = f"f{v}[{x}|{ctx}]" if ctx else f"f{v}[{x}]"
    return name + (f"^({sup})" if sup is not None else "")


def leaf_name(key: Sequence[int], sup: str | None = None) -> str:
    sep = "" if all(x < 10 for x in key) else "_"
    return "p" + sep.join(str(x) for x in key) + (f"^({sup})" if sup is not None else "")


class StagedTree:
    """Rooted edge-labelled tree with a stage partition of its internal vertices.

    ``variables`` (optional) associates level k with variable ``variables[k-1]``;
    leaf coordinates are then indexed in natural variable order.
    """

    def __init__(
        self,
        vertices: Sequence[str],
        edges: Iterable[Edge],
        stages: Sequence[Sequence[str]] | None = None,
        variables: Sequence[int] | None = None,
        check_stages: bool = True,
    ):
        self.vertices = tuple(str(v) for v in vertices)
        self.edges = tuple(edges)
        self.variables = tuple(variables) if variables is not None else None
        self._check_structure()
        self._given_stages = [tuple(str(v) for v in s) for s in stages] if stages is not None else None
        self.stages = self._resolve_stages(check_stages)
        self.stage_of = {v: k for k, s in enumerate(self.stages) for v in s}

    # structure -----------------------------------------------------------
    def _check_structure(self) -> None:
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise TreeValidationError("structure", "duplicate vertex names")
        children: dict[str, list[Edge]] = {v: [] for v in self.vertices}
        parent: dict[str, Edge] = {}
        for e in self.edges:
            if not re.fullmatch(SYMBOL_RE, e.label):
                raise TreeValidationError("schema", f"label {e.label!r} is not a valid symbol name", e)
            if e.src not in vs or e.dst not in vs:
                raise TreeValidationError("structure", f"edge {e.src}->{e.dst} uses an unknown vertex", e)
            if e.dst in parent:
                raise TreeValidationError("structure", f"vertex {e.dst} has two parents", e)
            parent[e.dst] = e
            children[e.src].append(e)
        roots = [v for v in self.vertices if v not in parent]
        if len(roots) != 1:
            raise TreeValidationError("structure", f"expected exactly one root, found {roots}")
        self.root = roots[0]
        for v, es in children.items():
            es.sort(key=lambda e: e.outcome)
            if [e.outcome for e in es] != list(range(1, len(es) + 1)):
                raise TreeValidationError("structure", f"outcomes at {v} must be 1..{len(es)}", v)
            labels = [e.label for e in es]
            if len(set(labels)) != len(labels):
                raise TreeValidationError(
                    "floret-injectivity", f"two edges out of {v} share a label", v
                )
        self._children = {v: tuple(es) for v, es in children.items()}
        self._parent = parent
        order = [self.root]
        depth = {self.root: 0}
        for v in order:
            for e in self._children[v]:
                depth[e.dst] = depth[v] + 1
                order.append(e.dst)
        if len(order) != len(self.vertices):
            raise TreeValidationError("structure", "tree is disconnected or cyclic")
        self.bfs = tuple(order)
        self.depth = depth

    def _resolve_stages(self, check: bool) -> tuple[tuple[str, ...], ...]:
        internal = [v for v in self.bfs if self._children[v]]
        if self._given_stages is None:
            groups: OrderedDict[frozenset, list[str]] = OrderedDict()
            for v in internal:
                groups.setdefault(self.floret_labels(v), []).append(v)
            stages = [tuple(g) for g in groups.values()]
        else:
            seen: set[str] = set()
            stages = []
            for s in self._given_stages:
                for v in s:
                    if v not in self._children:
                        raise TreeValidationError("stages", f"unknown vertex {v} in a stage")
                    if not self._children[v]:
                        raise TreeValidationError("stages", f"leaf {v} cannot belong to a stage")
                    if v in seen:
                        raise TreeValidationError("stages", f"vertex {v} is in two stages")
                    seen.add(v)
                stages.append(tuple(s))
            stages.extend((v,) for v in internal if v not in seen)
        if check:
            check_stage_coherence(self, stages)
        return tuple(stages)

    # accessors -----------------------------------------------------------
    def children(self, v: str) -> tuple[Edge, ...]:
        return self._children[v]

    def parent_edge(self, v: str) -> Edge | None:
        return self._parent.get(v)

    def floret_labels(self, v: str) -> frozenset[str]:
        return frozenset(e.label for e in self._children[v])

    def is_leaf(self, v: str) -> bool:
        return not self._children[v]

    @cached_property
    def leaves(self) -> tuple[str, ...]:
        return tuple(v for v in self.bfs if not self._children[v])

    def level(self, k: int) -> tuple[str, ...]:
        return tuple(v for v in self.bfs if self.depth[v] == k)

    def path_edges(self, v: str, top: str | None = None) -> list[Edge]:
        top = self.root if top is None else top
        out = []
        while v != top:
            e = self._parent.get(v)
            if e is None:
                raise ValueError(f"{top} is not an ancestor")
            out.append(e)
            v = e.src
        return out[::-1]

    def path_outcomes(self, v: str, top: str | None = None) -> tuple[int, ...]:
        return tuple(e.outcome - 1 for e in self.path_edges(v, top))

    def leaf_key(self, leaf: str, top: str | None = None) -> tuple[int, ...]:
        """0-based outcome tuple of a leaf, in natural variable order when known."""
        path = self.path_outcomes(leaf, top)
        if self.variables is None:
            return path
        vals = dict(zip(self.variables, path))
        return tuple(vals[v] for v in sorted(self.variables))

    def leaves_below(self, v: str) -> list[str]:
        out, stack = [], [v]
        while stack:
            u = stack.pop()
            es = self._children[u]
            if not es:
                out.append(u)
            else:
                stack.extend(e.dst for e in reversed(es))
        return out

    @cached_property
    def labels(self) -> tuple[str, ...]:
        seen: OrderedDict[str, None] = OrderedDict()
        for v in self.bfs:
            for e in self._children[v]:
                seen.setdefault(e.label, None)
        return tuple(seen)

    @cached_property
    def symbols(self) -> SymbolTable:
        return SymbolTable(self.labels)

    def label_edges(self) -> dict[str, list[Edge]]:
        out: dict[str, list[Edge]] = {}
        for v in self.bfs:
            for e in self._children[v]:
                out.setdefault(e.label, []).append(e)
        return out

    # polynomials ---------------------------------------------------------
    @cached_property
    def _interp(self) -> dict[str, Polynomial]:
        T = self.symbols
        out: dict[str, Polynomial] = {}
        for v in reversed(self.bfs):
            es = self._children[v]
            if not es:
                out[v] = T.one()
            else:
                acc = T.zero()
                for e in es:
                    acc = acc + T.var(e.label) * out[e.dst]
                out[v] = acc
        return out

    def interpolating_polynomial(self, v: str) -> Polynomial:
        if v not in self._interp:
            raise KeyError(f"unknown vertex {v}")
        return self._interp[v]

    # serialization -------------------------------------------------------
    def to_json(self) -> dict:
        out = {
            "vertices": list(self.vertices),
            "edges": [
                {"from": e.src, "to": e.dst, "label": e.label, "outcome": e.outcome} for e in self.edges
            ],
            "stages": [list(s) for s in self.stages],
        }
        if self.variables is not None:
            out["variables"] = list(self.variables)
        return out

    @classmethod
    def from_json(cls, obj: Mapping, check_stages: bool = True) -> "StagedTree":
        try:
            edges = [Edge(str(e["from"]), str(e["to"]), str(e["label"]), int(e["outcome"])) for e in obj["edges"]]
            return cls(obj["vertices"], edges, obj.get("stages"), obj.get("variables"), check_stages)
        except (KeyError, TypeError) as exc:
            raise TreeValidationError("schema", f"malformed staged tree description: {exc}") from exc

    def subtree(self, v: str) -> "StagedTree":
        """The subtree rooted at v as a staged tree (stages restricted)."""
        keep, stack = [], [v]
        while stack:
            u = stack.pop(0)
            keep.append(u)
            stack.extend(e.dst for e in self._children[u])
        ks = set(keep)
        edges = [e for e in self.edges if e.src in ks and e.dst in ks]
        stages = [[u for u in s if u in ks] for s in self.stages]
        return StagedTree(keep, edges, [s for s in stages if s], self.variables)

    def __eq__(self, other) -> bool:
        return isinstance(other, StagedTree) and self.to_json() == other.to_json()

    def __repr__(self) -> str:
        return f"StagedTree({len(self.vertices)} vertices, {len(self.labels)} labels, {len(self.stages)} stages)"


def check_stage_coherence(tree: StagedTree, stages: Sequence[Sequence[str]]) -> None:
    owner: dict[str, int] = {}
    for k, s in enumerate(stages):
        ref = tree.floret_labels(s[0])
        for v in s[1:]:
            if tree.floret_labels(v) != ref:
                raise TreeValidationError(
                    "stage-mismatch", f"vertices {s[0]} and {v} share a stage but not a label set", (s[0], v)
                )
        for lab in ref:
            if lab in owner and owner[lab] != k:
                raise TreeValidationError(
                    "stage-overlap",
                    f"label {lab} appears in stages {owner[lab]} and {k}",
                    (owner[lab], k),
                )
            owner[lab] = k


def validate(spec) -> StagedTree:
    """Build a StagedTree from a JSON-like description or return a validated copy."""
    if isinstance(spec, StagedTree):
        return StagedTree.from_json(spec.to_json())
    return StagedTree.from_json(spec)


def _outcome_sep(dag: Dag) -> str:
    return "" if all(d <= 10 for d in dag.cards) else "."


def from_dag(dag: Dag, pi: Sequence[int] | None = None) -> StagedTree:
    """Staged tree of a discrete DAG model along the linear extension ``pi``."""
    pi = require_linear_extension(dag, pi)
    return _build_from_dag(dag, pi, lambda level: None)


def _build_from_dag(dag: Dag, pi, sup_for_level, prefix: str = "", top: str = ROOT) -> StagedTree:
    vertices, edges = _dag_tree_parts(dag, pi, sup_for_level, prefix, top)
    return StagedTree(vertices, edges, None, pi)


def _dag_tree_parts(dag: Dag, pi, sup_for_level, prefix: str, top: str):
    sep = _outcome_sep(dag)
    vertices = [top]
    edges: list[Edge] = []
    frontier: list[tuple[str, tuple[int, ...]]] = [(top, ())]
    for j, var in enumerate(pi):
        pa = sorted(dag.parents(var))
        pos = {v: k for k, v in enumerate(pi)}
        nxt = []
        for name, xs in frontier:
            ctx = [(u, xs[pos[u]]) for u in pa]
            for x in range(dag.card(var)):
                child_xs = xs + (x,)
                child = prefix + sep.join(str(y) for y in child_xs)
                vertices.append(child)
                edges.append(Edge(name, child, cond_label(var, x, ctx, sup_for_level(j + 1)), x + 1))
                nxt.append((child, child_xs))
        frontier = nxt
    return vertices, edges


@dataclass(frozen=True)
class TreeClassification:
    is_stratified: bool
    is_uniform: bool
    is_compatibly_labeled: bool
    is_dag_representable: bool
    # level k -> positions (1..k) along the path whose outcomes determine the stage
    contexts: dict[int, frozenset[int]] | None = None


def classify(tree: StagedTree, cards: Sequence[int] | None = None) -> TreeClassification:
    depths = {tree.depth[v] for v in tree.leaves}
    stratified = len(depths) == 1 and all(len({tree.depth[v] for v in s}) == 1 for s in tree.stages)
    height = depths.pop() if len(depths) == 1 else None
    uniform = stratified
    if uniform:
        for k in range(height):
            degs = {len(tree.children(v)) for v in tree.level(k)}
            if len(degs) != 1 or (cards is not None and k < len(cards) and degs != {cards[k]}):
                uniform = False
                break
    compat = all(
        [e.label for e in tree.children(v)] == [e.label for e in tree.children(s[0])]
        for s in tree.stages
        for v in s
    )
    contexts = None
    representable = stratified and uniform and compat
    if representable:
        contexts = {}
        for k in range(height):
            ctx = _find_context(tree, k)
            if ctx is None:
                representable = False
                contexts = None
                break
            contexts[k] = ctx
    return TreeClassification(stratified, uniform, compat, representable, contexts)


def _find_context(tree: StagedTree, k: int) -> frozenset[int] | None:
    lvl = tree.level(k)
    outcomes = {v: tree.path_outcomes(v) for v in lvl}
    actual = {frozenset(v for v in s) for s in tree.stages if tree.depth[s[0]] == k}
    for size in range(k + 1):
        for ctx in itertools.combinations(range(1, k + 1), size):
            groups: dict[tuple, set[str]] = {}
            for v in lvl:
                groups.setdefault(tuple(outcomes[v][j - 1] for j in ctx), set()).add(v)
            if {frozenset(g) for g in groups.values()} == actual:
                return frozenset(ctx)
    return None


def interpolating_polynomial(tree: StagedTree, v: str) -> Polynomial:
    return tree.interpolating_polynomial(v)


@dataclass(frozen=True)
class BalanceResult:
    balanced: bool
    witness: tuple | None = None  # (v, w, label_i, label_j)

    def __bool__(self) -> bool:
        return self.balanced


def stage_pair_checks(tree: StagedTree):
    """Yield (v, w, (a, va, wa), (b, vb, wb)) for every same-stage pair and label pair."""
    for s in tree.stages:
        for v, w in itertools.combinations(s, 2):
            cv = {e.label: e.dst for e in tree.children(v)}
            cw = {e.label: e.dst for e in tree.children(w)}
            labs = sorted(cv, key=tree.labels.index)
            for a, b in itertools.combinations(labs, 2):
                yield v, w, (a, cv[a], cw[a]), (b, cv[b], cw[b])


def is_balanced(tree: StagedTree) -> BalanceResult:
    t = tree.interpolating_polynomial
    for v, w, (a, va, wa), (b, vb, wb) in stage_pair_checks(tree):
        if t(va) * t(wb) != t(wa) * t(vb):
            return BalanceResult(False, (v, w, a, b))
    return BalanceResult(True)


def check_theta(tree: StagedTree, x: Mapping[str, Fraction], vertices: Iterable[str] | None = None) -> None:
    vertices = tree.bfs if vertices is None else vertices
    for v in vertices:
        es = tree.children(v)
        if not es:
            continue
        total = Fraction(0)
        for e in es:
            if e.label not in x:
                raise ValueError(f"no value for label {e.label}")
            val = Fraction(x[e.label])
            if val <= 0:
                raise ValueError(f"label {e.label} must be strictly positive")
            total += val
        if total != 1:
            raise ValueError(f"floret at {v} sums to {total}, not 1")


def parameterize(tree: StagedTree, x: Mapping[str, Fraction]) -> dict[tuple[int, ...], Fraction]:
    check_theta(tree, x)
    return _leaf_products(tree, x, tree.root)


def _leaf_products(tree: StagedTree, x, top: str) -> dict[tuple[int, ...], Fraction]:
    mass = {top: Fraction(1)}
    out: dict[tuple[int, ...], Fraction] = {}
    stack = [top]
    while stack:
        v = stack.pop(0)
        es = tree.children(v)
        if not es:
            out[tree.leaf_key(v, top)] = mass[v]
        for e in es:
            mass[e.dst] = mass[v] * Fraction(x[e.label])
            stack.append(e.dst)
    return dict(sorted(out.items()))


def recover_parameters(tree: StagedTree, p: Mapping[tuple[int, ...], Fraction], top: str | None = None) -> dict[str, Fraction]:
    top = tree.root if top is None else top
    below: dict[str, Fraction] = {}
    for v in reversed(tree.bfs):
        es = tree.children(v)
        if not es:
            key = tree.leaf_key(v, top) if _under(tree, v, top) else None
            if key is None:
                continue
            if key not in p:
                raise ValueError(f"missing coordinate {key}")
            val = Fraction(p[key])
            if val <= 0:
                raise ValueError(f"coordinate {key} is not strictly positive")
            below[v] = val
        elif all(e.dst in below for e in es):
            below[v] = sum((below[e.dst] for e in es), Fraction(0))
    if below.get(top) != 1:
        raise ValueError(f"coordinates sum to {below.get(top)}, not 1")
    out: dict[str, Fraction] = {}
    for v in tree.bfs:
        if v not in below:
            continue
        for e in tree.children(v):
            r = below[e.dst] / below[v]
            if e.label in out and out[e.label] != r:
                k = tree.stage_of[v]
                raise InconsistentParameters(k, tree.stages[k], e.label)
            out[e.label] = r
    return out


def _under(tree: StagedTree, v: str, top: str) -> bool:
    while v != top:
        e = tree.parent_edge(v)
        if e is None:
            return False
        v = e.src
    return True


# chain event graphs ---------------------------------------------------------

@dataclass
class CEG:
    nodes: list[str]
    # (src, dst, label, outcome, dashed)
    edges: list[tuple[str, str, str, int, bool]]
    node_stage: dict[str, int]
    members: dict[str, list[str]] = field(default_factory=dict)

    def undashed_count(self) -> int:
        return sum(1 for e in self.edges if not e[4])

    def to_dot(self, name: str = "ceg") -> str:
        lines = [f"digraph {name} {{", "  rankdir=LR;", '  node [shape=circle, style=filled, fillcolor=white];']
        for n in self.nodes:
            if n == SINK:
                lines.append(f'  "{n}" [label="{n}"];')
            else:
                color = PALETTE[self.node_stage[n] % len(PALETTE)]
                lines.append(f'  "{n}" [label="{n}", fillcolor="{color}"];')
        for src, dst, lab, _o, dashed in self.edges:
            style = ", style=dashed" if dashed else ""
            lines.append(f'  "{src}" -> "{dst}" [label="{lab}"{style}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def ceg_quotient(tree: StagedTree) -> CEG:
    """Merge vertices whose rooted subtrees are stage- and label-isomorphic."""
    fp: dict[str, object] = {}
    for v in reversed(tree.bfs):
        es = tree.children(v)
        if not es:
            fp[v] = SINK
        else:
            fp[v] = (tree.stage_of[v], tuple((e.label, fp[e.dst]) for e in es))
    rep: dict[object, str] = {}
    members: dict[str, list[str]] = {}
    for v in tree.bfs:
        if not tree.is_leaf(v):
            r = rep.setdefault(fp[v], v)
            members.setdefault(r, []).append(v)
    name = {v: (SINK if tree.is_leaf(v) else rep[fp[v]]) for v in tree.bfs}
    nodes = list(members) + [SINK]
    edges = []
    for r in members:
        es = tree.children(r)
        for e in es:
            edges.append((r, name[e.dst], e.label, e.outcome, e.outcome == len(es)))
    return CEG(nodes, edges, {r: tree.stage_of[r] for r in members}, members)


def tree_to_dot(tree: StagedTree, name: str = "stagedtree") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  node [shape=circle, style=filled, fillcolor=white];']
    for v in tree.bfs:
        if tree.is_leaf(v):
            lines.append(f'  "{v}";')
        else:
            color = PALETTE[tree.stage_of[v] % len(PALETTE)]
            lines.append(f'  "{v}" [fillcolor="{color}"];')
    for v in tree.bfs:
        for e in tree.children(v):
            lines.append(f'  "{e.src}" -> "{e.dst}" [label="{e.label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
