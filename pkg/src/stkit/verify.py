"""Exact-arithmetic verification: parameter sampling, vanishing checks and sweeps."""

from __future__ import annotations

import itertools
import json
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence

from .graph import Dag, enumerate_dags, first_linear_extension, is_perfect, require_linear_extension
from .ideals import IdealPresentation
from .interventional import (
    InterventionalTree,
    criterion_check,
    from_dag_targets,
    interventional_assignment,
    is_balanced_interventional,
    parameterize_interventional,
)
from .staged_tree import StagedTree, from_dag, is_balanced, leaf_name, parameterize

# fixed seed for sampled sweeps
DEFAULT_SEED = 0xA16E0


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("STKIT_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class ThetaSample:
    assignment: dict[str, Fraction]
    seed: int
    tree: str = ""


def sample_theta(tree: StagedTree | InterventionalTree, seed: int) -> ThetaSample:
    """One integer draw in [1, 100] per label of each stage, normalized per floret."""
    T = tree.tree if isinstance(tree, InterventionalTree) else tree
    rng = random.Random(seed)
    x: dict[str, Fraction] = {}
    for s in T.stages:
        labs = [e.label for e in T.children(s[0])]
        draws = [rng.randint(1, 100) for _ in labs]
        total = sum(draws)
        for lab, d in zip(labs, draws):
            x[lab] = Fraction(d, total)
    return ThetaSample(x, seed, repr(tree))


def tree_point(tree: StagedTree | InterventionalTree, x: Mapping[str, Fraction]) -> dict[str, Fraction]:
    """Values of the leaf indeterminates at the parameterized point."""
    if isinstance(tree, InterventionalTree):
        return interventional_assignment(parameterize_interventional(tree, x))
    return {leaf_name(k): v for k, v in parameterize(tree, x).items()}


@dataclass
class SweepReport:
    universe: dict[str, Any]
    checked: int = 0
    passed: int = 0
    counterexamples: list[dict[str, Any]] = field(default_factory=list)
    records: list[dict[str, Any]] = field(default_factory=list)

    @property
    def failed(self) -> int:
        return self.checked - self.passed

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def record(self, case: dict[str, Any], good: bool) -> None:
        self.checked += 1
        self.passed += int(good)
        self.records.append({**case, "ok": good})
        if not good:
            self.counterexamples.append(case)

    def summary(self) -> dict[str, Any]:
        return {
            "summary": True,
            "universe": self.universe,
            "checked": self.checked,
            "passed": self.passed,
            "failed": self.failed,
        }

    def to_jsonl(self) -> str:
        lines = [json.dumps(r, sort_keys=True, default=str) for r in self.records]
        lines.append(json.dumps(self.summary(), sort_keys=True, default=str))
        return "\n".join(lines) + "\n"


def check_vanishing(pres: IdealPresentation, points: Sequence[Mapping[str, Fraction]]) -> SweepReport:
    report = SweepReport({"ideal": pres.name, "generators": len(pres), "points": len(points)})
    ring = set(pres.ring)
    for idx, pt in enumerate(points):
        missing = ring - set(pt)
        if missing:
            raise ValueError(f"point {idx} has no value for {sorted(missing)[:3]}")
        bad = None
        for g, tag in zip(pres.generators, pres.provenance):
            val = g.evaluate(pt)
            if val != 0:
                bad = {"generator": g.to_text(), "source": tag, "value": str(val)}
                break
        case = {"point": idx}
        if bad:
            case["witness"] = bad
        report.record(case, bad is None)
    return report


def sampled_points(tree, count: int, seed: int) -> list[dict[str, Fraction]]:
    return [tree_point(tree, sample_theta(tree, seed + k).assignment) for k in range(count)]


def perturb(point: Mapping[str, Fraction], name: str, factor: Fraction = Fraction(3, 2)) -> dict[str, Fraction]:
    """Scale one coordinate and renormalize; usually leaves the model."""
    out = dict(point)
    out[name] = out[name] * factor
    total = sum(out.values())
    return {k: v / total for k, v in out.items()}


def extension_invariance_check(dag: Dag, pi1: Sequence[int], pi2: Sequence[int], seed: int) -> bool:
    pi1 = require_linear_extension(dag, pi1)
    pi2 = require_linear_extension(dag, pi2)
    t1, t2 = from_dag(dag, pi1), from_dag(dag, pi2)
    x = sample_theta(t1, seed).assignment
    return parameterize(t1, x) == parameterize(t2, x)


# sweeps -------------------------------------------------------------------------

def target_family(n: int, max_nonempty: int = 3, include_empty: bool = True) -> list[list[frozenset[int]]]:
    subsets = [frozenset(s) for r in range(1, n + 1) for s in itertools.combinations(range(1, n + 1), r)]
    fams = []
    for r in range(0, max_nonempty + 1):
        for combo in itertools.combinations(subsets, r):
            fam = ([frozenset()] if include_empty else []) + list(combo)
            if fam:
                fams.append(fam)
    return fams


def _classification_case(args) -> dict[str, Any]:
    n, edges, cards, fam = args
    g = Dag(n, edges, cards)
    pi = first_linear_extension(g)
    it = from_dag_targets(g, fam, pi)
    bal = is_balanced_interventional(it)
    crit = criterion_check(g, fam)
    case = {
        "dag": g.to_json(),
        "targets": [sorted(t) for t in fam],
        "pi": list(pi),
        "balanced": bal.balanced,
        "criterion": crit.holds,
    }
    if bal.balanced != crit.holds:
        case["witness"] = {"balance": bal.witness, "criterion": crit.witness}
    return case


def _fan_out(fn: Callable, cases: list, workers: int | None) -> list:
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(cases) < 64:
        return [fn(c) for c in cases]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cases, chunksize=32))


def classification_sweep(
    n: int,
    cards: Sequence[int] | None = None,
    max_nonempty: int = 3,
    include_empty: bool = True,
    sample: int | None = None,
    seed: int = DEFAULT_SEED,
    workers: int | None = None,
) -> SweepReport:
    """Compare tree balance with the graphical criterion on every (G, I) case."""
    cards = tuple(cards) if cards is not None else (2,) * n
    fams = target_family(n, max_nonempty, include_empty)
    cases = [(n, tuple(sorted(g.edges)), cards, fam) for g in enumerate_dags(n, cards) for fam in fams]
    universe = {
        "kind": "classification",
        "n": n,
        "cards": list(cards),
        "max_nonempty_targets": max_nonempty,
        "include_empty": include_empty,
        "universe_size": len(cases),
    }
    if sample is not None and sample < len(cases):
        rng = random.Random(seed)
        cases = [cases[i] for i in sorted(rng.sample(range(len(cases)), sample))]
        universe.update({"sampled": sample, "seed": seed})
    report = SweepReport(universe)
    for case in _fan_out(_classification_case, cases, workers):
        report.record(case, case["balanced"] == case["criterion"])
    return report


def _balanced_perfect_case(args) -> dict[str, Any]:
    n, edges, cards = args
    g = Dag(n, edges, cards)
    pi = first_linear_extension(g)
    bal = is_balanced(from_dag(g, pi))
    case = {"dag": g.to_json(), "pi": list(pi), "balanced": bal.balanced, "perfect": is_perfect(g)}
    if bal.witness:
        case["witness"] = list(bal.witness)
    return case


def balanced_perfect_sweep(n: int, cards: Sequence[int] | None = None, workers: int | None = None) -> SweepReport:
    cards = tuple(cards) if cards is not None else (2,) * n
    cases = [(n, tuple(sorted(g.edges)), cards) for g in enumerate_dags(n, cards)]
    report = SweepReport({"kind": "balanced-perfect", "n": n, "cards": list(cards), "universe_size": len(cases)})
    for case in _fan_out(_balanced_perfect_case, cases, workers):
        report.record(case, case["balanced"] == case["perfect"])
    return report
