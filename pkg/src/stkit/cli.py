"""Command-line front end: ``stkit <verb> [options]``.

Exit status is 0 on success, 1 when a verification or sweep finds a
counterexample, and 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import ideals as ID
from .graph import Dag, GraphError, TargetCollection, d_separated, markov_equivalent
from .interventional import (
    InterventionalTree,
    criterion_check,
    from_dag_targets,
    i_markov_invariance_pairs,
)
from .io import InputError, dumps, load_model
from .polynomial import PolynomialError
from .staged_tree import TreeValidationError, ceg_quotient, from_dag, is_balanced, tree_to_dot
from .verify import (
    DEFAULT_SEED,
    balanced_perfect_sweep,
    check_vanishing,
    classification_sweep,
    sampled_points,
)

FAMILIES = (
    "model-invariants", "pred-star", "pred", "ci-local", "ci-global", "ci-ordered", "inv", "i-ci", "toric",
)


class UsageError(ValueError):
    pass


def _ints(text: str | None) -> list[int] | None:
    if text is None:
        return None
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _targets(text: str | None) -> TargetCollection | None:
    if text is None:
        return None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--targets must be JSON such as [[],[1]]: {exc}") from None
    if not isinstance(obj, list) or not all(isinstance(t, list) for t in obj):
        raise UsageError("--targets must be a JSON list of lists")
    return TargetCollection(obj)


def _dag(args) -> Dag:
    if not args.dag:
        raise UsageError("--dag is required")
    m = load_model(args.dag)
    if not isinstance(m, Dag):
        raise UsageError(f"{args.dag} does not describe a DAG")
    return m


def _tree_like(args):
    """Tree from --tree, or built from --dag (with --targets for interventional)."""
    if getattr(args, "tree", None):
        m = load_model(args.tree)
        if isinstance(m, Dag):
            raise UsageError(f"{args.tree} describes a DAG, not a tree")
        return m
    dag = _dag(args)
    tg = _targets(getattr(args, "targets", None))
    pi = _ints(getattr(args, "pi", None))
    return from_dag_targets(dag, tg, pi) if tg is not None else from_dag(dag, pi)


def _presentation(args):
    fam = args.family
    if fam in ("model-invariants", "toric"):
        t = _tree_like(args)
        return ID.toric_images(t) if fam == "toric" else ID.model_invariant_generators(t)
    dag = _dag(args)
    pi = _ints(args.pi)
    if fam == "pred-star":
        return ID.pred_star_generators(dag, pi)
    if fam == "pred":
        return ID.pred_generators(dag, pi)
    if fam.startswith("ci-"):
        return ID.ci_ideal(dag, fam[3:], pi)
    tg = _targets(args.targets)
    if tg is None:
        raise UsageError(f"--targets is required for family {fam}")
    return ID.inv_ideal_generators(dag, tg) if fam == "inv" else ID.i_ci_ideal(dag, tg)


def cmd_build_tree(args, out):
    out(dumps(from_dag(_dag(args), _ints(args.pi)).to_json()))
    return 0


def cmd_build_itree(args, out):
    tg = _targets(args.targets)
    if tg is None:
        raise UsageError("--targets is required")
    out(dumps(from_dag_targets(_dag(args), tg, _ints(args.pi)).to_json()))
    return 0


def cmd_check_balanced(args, out):
    t = _tree_like(args)
    res = is_balanced(t.tree if isinstance(t, InterventionalTree) else t)
    rec = {"balanced": res.balanced}
    if res.witness:
        rec["witness"] = list(res.witness)
    out(dumps(rec))
    return 0


def cmd_check_criterion(args, out):
    tg = _targets(args.targets)
    if tg is None:
        raise UsageError("--targets is required")
    res = criterion_check(_dag(args), tg)
    rec = {"criterion": res.holds}
    if res.witness:
        rec["witness"] = list(res.witness)
    out(dumps(rec))
    return 0


def cmd_dsep(args, out):
    dag = _dag(args)
    A, B, C = _ints(args.A), _ints(args.B), _ints(args.C) or []
    out(dumps({"A": A, "B": B, "C": C, "d_separated": d_separated(dag, A, B, C)}))
    return 0


def cmd_markov_equiv(args, out):
    d1, d2 = load_model(args.dag), load_model(args.other)
    out(dumps({"markov_equivalent": markov_equivalent(d1, d2)}))
    return 0


def cmd_imec_pairs(args, out):
    tg = _targets(args.targets)
    if tg is None:
        raise UsageError("--targets is required")
    pairs = i_markov_invariance_pairs(_dag(args), tg, maximal=not args.all)
    rec = [
        {"target": sorted(tg[k]), "pairs": [[sorted(A), sorted(C)] for A, C in plist]}
        for k, plist in pairs.items()
    ]
    out(dumps(rec))
    return 0


def cmd_gen_ideal(args, out):
    pres = _presentation(args)
    if isinstance(pres, ID.ToricMap):
        out(dumps({"source": list(pres.source), "images": {k: str(v) for k, v in pres.images.items()},
                   "relations": [str(r) for r in pres.relations]}))
    else:
        out(dumps(pres.to_json()))
    return 0


def cmd_export_cas(args, out):
    out(ID.export_cas(_presentation(args), args.format))
    return 0


def cmd_verify(args, out):
    t = _tree_like(args)
    points = sampled_points(t, args.samples, args.seed)
    pres = [ID.model_invariant_generators(t)]
    if getattr(args, "dag", None) and not getattr(args, "tree", None):
        dag = _dag(args)
        tg = _targets(args.targets)
        if tg is None:
            pres.append(ID.ci_ideal(dag, "global"))
        else:
            pres.append(ID.per_target_global_ci(dag, tg))
            if not tg.purely_interventional:
                pres.append(ID.i_ci_ideal(dag, tg))
    code = 0
    for p in pres:
        rep = check_vanishing(p, points)
        out(rep.to_jsonl())
        if not rep.ok:
            code = 1
    return code


def cmd_sweep(args, out):
    if args.kind == "balanced-perfect":
        rep = balanced_perfect_sweep(args.n)
    else:
        rep = classification_sweep(
            args.n, max_nonempty=args.max_targets, include_empty=not args.purely_interventional,
            sample=args.sample, seed=args.seed,
        )
    out(rep.to_jsonl())
    print(f"{rep.passed}/{rep.checked} cases agree", file=sys.stderr)
    return 0 if rep.ok else 1


def cmd_export_dot(args, out):
    t = _tree_like(args)
    T = t.tree if isinstance(t, InterventionalTree) else t
    out(ceg_quotient(T).to_dot() if args.ceg else tree_to_dot(T))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stkit", description="Staged trees, interventional DAG models and their ideals.")
    sub = p.add_subparsers(dest="verb", required=True)

    def add(name, fn, help_, dag=True, tree=False, targets=False, pi=True):
        sp = sub.add_parser(name, help=help_)
        if dag:
            sp.add_argument("--dag", help="DAG JSON file or fixture name")
        if tree:
            sp.add_argument("--tree", help="staged or interventional tree JSON file or fixture name")
        if targets:
            sp.add_argument("--targets", help='JSON list of targets, e.g. "[[],[1]]"')
        if pi:
            sp.add_argument("--pi", help="linear extension, e.g. 1,2,3")
        sp.set_defaults(func=fn)
        return sp

    add("build-tree", cmd_build_tree, "staged tree of a DAG")
    add("build-itree", cmd_build_itree, "interventional staged tree of a DAG and targets", targets=True)
    add("check-balanced", cmd_check_balanced, "decide balancedness", tree=True, targets=True)
    add("check-criterion", cmd_check_criterion, "graphical toricness criterion", targets=True, pi=False)
    sp = add("dsep", cmd_dsep, "d-separation query", pi=False)
    sp.add_argument("--A", required=True)
    sp.add_argument("--B", required=True)
    sp.add_argument("--C")
    sp = add("markov-equiv", cmd_markov_equiv, "compare two DAGs", pi=False)
    sp.add_argument("--other", required=True)
    sp = add("imec-pairs", cmd_imec_pairs, "invariance pairs (A, C) per target", targets=True, pi=False)
    sp.add_argument("--all", action="store_true", help="list non-maximal pairs too")
    sp = add("gen-ideal", cmd_gen_ideal, "emit ideal generators as JSON", tree=True, targets=True)
    sp.add_argument("--family", choices=FAMILIES, required=True)
    sp = add("export-cas", cmd_export_cas, "emit a Macaulay2 or Singular script", tree=True, targets=True)
    sp.add_argument("--family", choices=FAMILIES, required=True)
    sp.add_argument("--format", "--dialect", dest="format", choices=("m2", "singular"), default="m2")
    sp = add("verify", cmd_verify, "exact vanishing at sampled points", tree=True, targets=True)
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp = add("sweep", cmd_sweep, "equivalence sweeps over all small DAGs", dag=False, pi=False)
    sp.add_argument("--kind", choices=("balanced-perfect", "classification"), default="classification")
    sp.add_argument("--n", type=int, default=3)
    sp.add_argument("--max-targets", type=int, default=3)
    sp.add_argument("--purely-interventional", action="store_true")
    sp.add_argument("--sample", type=int)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp = add("export-dot", cmd_export_dot, "Graphviz DOT of a tree or its CEG", tree=True, targets=True)
    sp.add_argument("--ceg", action="store_true")
    return p


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout.write
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return args.func(args, out)
    except (UsageError, InputError, GraphError, TreeValidationError, PolynomialError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
