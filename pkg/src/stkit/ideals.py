"""Generators of conditional-independence, model-invariant and interventional ideals,
toric monomial maps, and export to Macaulay2 / Singular scripts.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .graph import (
    Dag,
    GraphError,
    as_targets,
    d_separated,
    require_linear_extension,
)
from .interventional import InterventionalTree, i_markov_invariance_pairs
from .polynomial import Polynomial, PolynomialError, SymbolTable
from .staged_tree import StagedTree, leaf_name

MAX_GLOBAL_NODES = 6


@dataclass(frozen=True)
class CIStatement:
    A: frozenset[int]
    B: frozenset[int]
    C: frozenset[int] = frozenset()

    def __str__(self) -> str:
        s = lambda S: ",".join(str(v) for v in sorted(S))
        return f"{s(self.A)} _||_ {s(self.B)}" + (f" | {s(self.C)}" if self.C else "")


def statement(A: Iterable[int], B: Iterable[int], C: Iterable[int] = ()) -> CIStatement:
    return CIStatement(frozenset(A), frozenset(B), frozenset(C))


class IdealPresentation:
    """Named polynomial ring plus a deduplicated list of sign-normalized generators."""

    def __init__(self, ring: Sequence[str], name: str = "J"):
        self.ring = tuple(ring)
        self.table = SymbolTable(self.ring)
        self.name = name
        self.generators: list[Polynomial] = []
        self.provenance: list[str] = []
        self._seen: set[Polynomial] = set()

    def add(self, poly: Polynomial, tag: str) -> bool:
        if poly.table is not self.table:
            raise PolynomialError("generator built over a foreign symbol table")
        if len(self.table) != len(self.ring):
            raise PolynomialError("generator uses an indeterminate outside the ring")
        if poly.is_zero():
            return False
        poly = poly.normalized()
        if poly in self._seen:
            return False
        self._seen.add(poly)
        self.generators.append(poly)
        self.provenance.append(tag)
        return True

    def extend(self, other: "IdealPresentation") -> None:
        for g, tag in zip(other.generators, other.provenance):
            self.add(self.table.parse(g.to_text()), tag)

    def texts(self) -> list[str]:
        return [g.to_text() for g in self.generators]

    def canonical_set(self) -> frozenset[str]:
        return frozenset(self.texts())

    def __len__(self) -> int:
        return len(self.generators)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "ring": list(self.ring),
            "generators": [{"poly": g.to_text(), "source": t} for g, t in zip(self.generators, self.provenance)],
        }

    def __repr__(self) -> str:
        return f"IdealPresentation({self.name}, {len(self.ring)} indeterminates, {len(self)} generators)"


# rings and marginals -----------------------------------------------------------

def outcome_space(cards: Sequence[int]) -> list[tuple[int, ...]]:
    return list(itertools.product(*(range(d) for d in cards)))


def joint_ring(cards: Sequence[int], sups: Sequence[str | None] = (None,)) -> list[str]:
    return [leaf_name(x, s) for s in sups for x in outcome_space(cards)]


class _Marginals:
    """Cached sums of joint indeterminates with some coordinates fixed."""

    def __init__(self, table: SymbolTable, cards: Sequence[int], sup: str | None):
        self.table, self.cards, self.sup = table, tuple(cards), sup
        self.space = outcome_space(cards)
        self._cache: dict = {}

    def __call__(self, fixed: Mapping[int, int]) -> Polynomial:
        key = tuple(sorted(fixed.items()))
        got = self._cache.get(key)
        if got is None:
            acc = self.table.zero()
            for x in self.space:
                if all(x[v - 1] == y for v, y in key):
                    acc = acc + self.table.var(leaf_name(x, self.sup))
            self._cache[key] = got = acc
        return got


def _assignments(nodes: Sequence[int], cards: Sequence[int]):
    nodes = sorted(nodes)
    for vals in itertools.product(*(range(cards[v - 1]) for v in nodes)):
        yield dict(zip(nodes, vals))


def _check_statement(st: CIStatement, n: int) -> None:
    if not st.A or not st.B:
        raise GraphError("A and B must be nonempty")
    if st.A & st.B or st.A & st.C or st.B & st.C:
        raise GraphError("A, B and C must be pairwise disjoint")
    for v in st.A | st.B | st.C:
        if not 1 <= v <= n:
            raise GraphError(f"node {v} outside 1..{n}")


def _emit_ci(pres: IdealPresentation, st: CIStatement, cards, variant: str, sup: str | None, marg=None) -> None:
    _check_statement(st, len(cards))
    marg = marg or _Marginals(pres.table, cards, sup)
    tag = f"{st} [{variant}]" + (f" ^({sup})" if sup is not None else "")
    xs_A = list(_assignments(st.A, cards))
    xs_B = list(_assignments(st.B, cards))
    for xc in _assignments(st.C, cards):
        for xb, xb2 in itertools.combinations(xs_B, 2):
            if variant == "full":
                for xa, xa2 in itertools.combinations(xs_A, 2):
                    g = marg({**xa, **xb, **xc}) * marg({**xa2, **xb2, **xc}) - marg({**xa, **xb2, **xc}) * marg(
                        {**xa2, **xb, **xc}
                    )
                    pres.add(g, tag)
            elif variant == "star":
                for xa in xs_A:
                    g = marg({**xa, **xb, **xc}) * marg({**xb2, **xc}) - marg({**xa, **xb2, **xc}) * marg({**xb, **xc})
                    pres.add(g, tag)
            else:
                raise ValueError(f"unknown variant {variant!r}")


def ci_generators(st: CIStatement, cards: Sequence[int], variant: str = "full", sup: str | None = None) -> IdealPresentation:
    """Quadrics of one conditional independence statement, marginals expanded."""
    pres = IdealPresentation(joint_ring(cards, (sup,)), "CI")
    _emit_ci(pres, st, cards, variant, sup)
    return pres


# Markov statements --------------------------------------------------------------

def markov_statement_lists(dag: Dag, kind: str, pi: Sequence[int] | None = None) -> list[CIStatement]:
    """Local, ordered (along pi) or global Markov statements with nonempty sides."""
    out: list[CIStatement] = []
    if kind == "local":
        for k in dag.nodes:
            rest = dag.nondescendants(k) - dag.parents(k) - {k}
            if rest:
                out.append(CIStatement(frozenset([k]), rest, dag.parents(k)))
    elif kind == "ordered":
        pi = require_linear_extension(dag, pi)
        for idx, k in enumerate(pi):
            rest = frozenset(pi[:idx]) - dag.parents(k)
            if rest:
                out.append(CIStatement(frozenset([k]), rest, dag.parents(k)))
    elif kind == "global":
        if dag.n > MAX_GLOBAL_NODES:
            raise GraphError(f"global statements are enumerated only for at most {MAX_GLOBAL_NODES} nodes")
        nodes = list(dag.nodes)
        # each node goes to A, B, C or nowhere; keep min(A) < min(B) to skip mirror images
        for roles in itertools.product(range(4), repeat=dag.n):
            A = frozenset(v for v, r in zip(nodes, roles) if r == 1)
            B = frozenset(v for v, r in zip(nodes, roles) if r == 2)
            C = frozenset(v for v, r in zip(nodes, roles) if r == 3)
            if A and B and min(A) < min(B) and d_separated(dag, A, B, C):
                out.append(CIStatement(A, B, C))
        out.sort(key=lambda s: (len(s.C), sorted(s.C), sorted(s.A), sorted(s.B)))
    else:
        raise ValueError(f"unknown statement kind {kind!r}")
    return out


def ci_ideal(dag: Dag, kind: str, pi: Sequence[int] | None = None, variant: str = "full", sup: str | None = None) -> IdealPresentation:
    pres = IdealPresentation(joint_ring(dag.cards, (sup,)), f"I_{kind}")
    marg = _Marginals(pres.table, dag.cards, sup)
    for st in markov_statement_lists(dag, kind, pi):
        _emit_ci(pres, st, dag.cards, variant, sup, marg)
    return pres


def pred_star_generators(dag: Dag, pi: Sequence[int] | None = None) -> IdealPresentation:
    """Star quadrics of the ordered Markov statements of ``pi``."""
    pres = ci_ideal(dag, "ordered", pi, variant="star")
    pres.name = "I_pred_star"
    return pres


def pred_generators(dag: Dag, pi: Sequence[int] | None = None) -> IdealPresentation:
    pres = ci_ideal(dag, "ordered", pi, variant="full")
    pres.name = "I_pred"
    return pres


# model invariants -----------------------------------------------------------------

def _tree_ring(tree: StagedTree, tops: Sequence[str], sups: Sequence[str | None]) -> tuple[list[str], dict[str, str]]:
    names, owner = [], {}
    for top, sup in zip(tops, sups):
        leaves = tree.leaves_below(top)
        keyed = sorted((tree.leaf_key(v, top), v) for v in leaves)
        for key, v in keyed:
            nm = leaf_name(key, sup)
            names.append(nm)
            owner[v] = nm
    return names, owner


def _vertex_sums(tree: StagedTree, table: SymbolTable, owner: Mapping[str, str]) -> dict[str, Polynomial]:
    sums: dict[str, Polynomial] = {}
    for v in reversed(tree.bfs):
        es = tree.children(v)
        if not es:
            if v in owner:
                sums[v] = table.var(owner[v])
        elif all(e.dst in sums for e in es):
            acc = table.zero()
            for e in es:
                acc = acc + sums[e.dst]
            sums[v] = acc
    return sums


def model_invariant_generators(tree: StagedTree | InterventionalTree) -> IdealPresentation:
    """Cross-multiplication binomials p[v]p[w'] - p[v']p[w] for same-stage v, w."""
    if isinstance(tree, InterventionalTree):
        itree, T = tree, tree.tree
        tops = list(itree.subtree_roots)
        sups = [str(k) for k in range(len(tops))]
        floor = itree.k_star
    else:
        itree, T = None, tree
        tops, sups, floor = [T.root], [None], 0
    ring, owner = _tree_ring(T, tops, sups)
    pres = IdealPresentation(ring, "I_M")
    P = _vertex_sums(T, pres.table, owner)
    for s in T.stages:
        if T.depth[s[0]] < floor:
            continue
        for v, w in itertools.combinations(s, 2):
            cv = {e.label: e.dst for e in T.children(v)}
            cw = {e.label: e.dst for e in T.children(w)}
            for lab in sorted(cv, key=T.labels.index):
                g = P[v] * P[cw[lab]] - P[cv[lab]] * P[w]
                pres.add(g, f"stage {s[0]}: {v}~{w} via {lab}")
    return pres


# interventional ideals -------------------------------------------------------------

def inv_ideal_generators(dag: Dag, targets) -> IdealPresentation:
    """Invariance quadrics p^(I)[xA,xC] p^(0)[xC] - p^(0)[xA,xC] p^(I)[xC]."""
    targets = as_targets(targets)
    e = targets.observational_index()
    sups = [str(k) for k in range(len(targets))]
    pres = IdealPresentation(joint_ring(dag.cards, sups), "Inv")
    margs = [_Marginals(pres.table, dag.cards, s) for s in sups]
    pairs = i_markov_invariance_pairs(dag, targets, maximal=False)
    for k, plist in pairs.items():
        for A, C in plist:
            tag = f"target {sorted(targets[k])}: A={sorted(A)} C={sorted(C)}"
            for xc in _assignments(C, dag.cards):
                for xa in _assignments(A, dag.cards):
                    g = margs[k]({**xa, **xc}) * margs[e](xc) - margs[e]({**xa, **xc}) * margs[k](xc)
                    pres.add(g, tag)
    return pres


def i_ci_ideal(dag: Dag, targets) -> IdealPresentation:
    """Invariance quadrics plus a copy of the global CI ideal for every target."""
    targets = as_targets(targets)
    pres = inv_ideal_generators(dag, targets)
    pres.name = "I_GI"
    stmts = markov_statement_lists(dag, "global")
    for k in range(len(targets)):
        marg = _Marginals(pres.table, dag.cards, str(k))
        for st in stmts:
            _emit_ci(pres, st, dag.cards, "full", str(k), marg)
    return pres


def per_target_global_ci(dag: Dag, targets) -> IdealPresentation:
    targets = as_targets(targets)
    sups = [str(k) for k in range(len(targets))]
    pres = IdealPresentation(joint_ring(dag.cards, sups), "I_glo_targets")
    stmts = markov_statement_lists(dag, "global")
    for s in sups:
        marg = _Marginals(pres.table, dag.cards, s)
        for st in stmts:
            _emit_ci(pres, st, dag.cards, "full", s, marg)
    return pres


# toric maps ---------------------------------------------------------------------------

@dataclass
class ToricMap:
    source: tuple[str, ...]
    target: SymbolTable
    images: dict[str, Polynomial]
    relations: list[Polynomial] = field(default_factory=list)

    def image(self, names: Iterable[str]) -> Polynomial:
        out = self.target.one()
        for nm in names:
            if nm not in self.images:
                raise PolynomialError(f"unknown indeterminate {nm}")
            out = out * self.images[nm]
        return out


def toric_images(tree: StagedTree | InterventionalTree) -> ToricMap:
    """Leaf indeterminate -> marker times the product of labels on its path."""
    if isinstance(tree, InterventionalTree):
        T = tree.tree
        tops = list(tree.subtree_roots)
        markers = [f"a_u{k}" for k in range(len(tops))]
        sups = [str(k) for k in range(len(tops))]
        floor = tree.k_star
    else:
        T, tops, markers, sups, floor = tree, [tree.root], ["z"], [None], 0
    ring, owner = _tree_ring(T, tops, sups)
    labels = [lab for lab in T.labels if any(T.depth[e.src] >= floor for e in T.label_edges()[lab])]
    target = SymbolTable(markers + labels)
    images = {}
    for top, mk in zip(tops, markers):
        for leaf in T.leaves_below(top):
            mono = [mk] + [e.label for e in T.path_edges(leaf, top)]
            images[owner[leaf]] = target.monomial(mono)
    rels, seen = [], set()
    for s in T.stages:
        if T.depth[s[0]] < floor or s in seen:
            continue
        seen.add(s)
        acc = target.const(-1)
        for e in T.children(s[0]):
            acc = acc + target.var(e.label)
        rels.append(acc)
    return ToricMap(tuple(sorted(images, key=ring.index)), target, images, rels)


def _monomial_names(tmap: ToricMap, mono) -> list[str]:
    if isinstance(mono, Polynomial):
        if len(mono) != 1 or mono.terms[0][1] != 1:
            raise PolynomialError("expected a monic monomial")
        return [mono.table.name(k) for k, e in mono.terms[0][0] for _ in range(e)]
    if isinstance(mono, str):
        return [mono]
    return list(mono)


def binomial_in_toric_kernel(tmap: ToricMap, lhs, rhs) -> bool:
    """lhs - rhs lies in the kernel iff both sides have the same image monomial."""
    return tmap.image(_monomial_names(tmap, lhs)) == tmap.image(_monomial_names(tmap, rhs))


def in_toric_kernel(tmap: ToricMap, poly: Polynomial) -> bool:
    """General membership: the image polynomial cancels to zero."""
    return poly.substitute(tmap.images, tmap.target).is_zero()


def binomial_sides(poly: Polynomial) -> tuple[list[str], list[str]] | None:
    """Split c*m1 - c*m2 into its two monomials, or None if not such a binomial."""
    if len(poly) != 2:
        return None
    (m1, c1), (m2, c2) = poly.terms
    if c1 != -c2:
        return None
    name = poly.table.name
    return [name(k) for k, e in m1 for _ in range(e)], [name(k) for k, e in m2 for _ in range(e)]


# export ------------------------------------------------------------------------------

def cas_identifiers(names: Sequence[str]) -> dict[str, str]:
    """Deterministic map from symbol names to plain alphanumeric identifiers."""
    out: dict[str, str] = {}
    used: set[str] = set()
    for nm in names:
        base = re.sub(r"[^A-Za-z0-9]", "", nm.replace("^(", "i"))
        if not base or not base[0].isalpha():
            base = "v" + base
        cand, k = base, 2
        while cand in used:
            cand = f"{base}x{k}"
            k += 1
        used.add(cand)
        out[nm] = cand
    return out


def _poly_cas(p: Polynomial, ids: Mapping[str, str]) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for idx, (m, c) in enumerate(p.terms):
        factors = [ids[p.table.name(k)] + (f"^{e}" if e > 1 else "") for k, e in m]
        a = abs(c)
        body = "*".join(([str(a)] if a != 1 or not factors else []) + factors)
        sign = "-" if c < 0 else "+"
        parts.append((("-" if c < 0 else "") + body) if idx == 0 else f" {sign} {body}")
    return "".join(parts)


def _legend(names: Sequence[str], ids: Mapping[str, str], comment: str) -> list[str]:
    return [f"{comment} {ids[n]} = {n}" for n in names if ids[n] != n]


def export_cas(obj: IdealPresentation | ToricMap, dialect: str = "m2") -> str:
    if dialect not in ("m2", "singular"):
        raise ValueError(f"unknown dialect {dialect!r}")
    if isinstance(obj, ToricMap):
        return _export_toric(obj, dialect)
    return _export_ideal(obj, dialect)


def _export_ideal(pres: IdealPresentation, dialect: str) -> str:
    ids = cas_identifiers(pres.ring)
    ring = ", ".join(ids[n] for n in pres.ring)
    gens = [_poly_cas(g, ids) for g in pres.generators]
    prod = "*".join(ids[n] for n in pres.ring)
    if dialect == "m2":
        lines = [f"-- {pres.name}: {len(pres.ring)} indeterminates, {len(gens)} generators"]
        lines += _legend(pres.ring, ids, "--")
        lines.append(f"R = QQ[{ring}];")
        if gens:
            lines.append("J = ideal(")
            lines += [f"  {g}," for g in gens[:-1]] + [f"  {gens[-1]}"]
            lines.append("  );")
        else:
            lines.append("J = ideal(0_R);")
        lines.append("-- saturation by the product of all indeterminates")
        lines.append("Jsat = saturate(J, product gens R);")
    else:
        lines = [f"// {pres.name}: {len(pres.ring)} indeterminates, {len(gens)} generators"]
        lines += _legend(pres.ring, ids, "//")
        lines.append(f"ring R = 0, ({ring}), dp;")
        if gens:
            lines.append("ideal J =")
            lines += [f"  {g}," for g in gens[:-1]] + [f"  {gens[-1]};"]
        else:
            lines.append("ideal J = 0;")
        lines.append("// saturation by the product of all indeterminates")
        lines.append('LIB "elim.lib";')
        lines.append(f"poly P = {prod};")
        lines.append("def Jsat = sat(J, P);")
    return "\n".join(lines) + "\n"


def _export_toric(tmap: ToricMap, dialect: str) -> str:
    src_ids = cas_identifiers(tmap.source)
    tgt_names = list(tmap.target.names)
    tgt_ids = cas_identifiers(tgt_names)
    clash = set(src_ids.values()) & set(tgt_ids.values())
    if clash:
        raise ValueError(f"source and target identifiers collide: {sorted(clash)}")
    src = ", ".join(src_ids[n] for n in tmap.source)
    tgt = ", ".join(tgt_ids[n] for n in tgt_names)
    imgs = [_poly_cas(tmap.images[n], tgt_ids) for n in tmap.source]
    if dialect == "m2":
        lines = [f"-- toric map: {len(tmap.source)} leaf indeterminates, {len(tgt_names)} parameters"]
        lines += _legend(tmap.source, src_ids, "--") + _legend(tgt_names, tgt_ids, "--")
        lines.append(f"R = QQ[{src}];")
        lines.append(f"S = QQ[{tgt}];")
        lines.append("phi = map(S, R, {")
        lines += [f"  {g}," for g in imgs[:-1]] + [f"  {imgs[-1]}"]
        lines.append("  });")
        lines.append("I = ker phi;")
    else:
        lines = [f"// toric map: {len(tmap.source)} leaf indeterminates, {len(tgt_names)} parameters"]
        lines += _legend(tmap.source, src_ids, "//") + _legend(tgt_names, tgt_ids, "//")
        lines.append(f"ring R = 0, ({src}), dp;")
        lines.append(f"ring S = 0, ({tgt}), dp;")
        lines.append("map phi = R,")
        lines += [f"  {g}," for g in imgs[:-1]] + [f"  {imgs[-1]};"]
        lines.append("ideal zero = 0;")
        lines.append("setring R;")
        lines.append("ideal I = preimage(S, phi, zero);")
    return "\n".join(lines) + "\n"
