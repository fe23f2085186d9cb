"""JSON formats and the shipped fixture library."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .graph import Dag, GraphError, TargetCollection
from .interventional import InterventionalTree, from_dag_targets
from .staged_tree import StagedTree, TreeValidationError

FIXTURE_NAMES = (
    "chain3",
    "fig1-g2",
    "fig1-g3",
    "four-cycle",
    "fig2-tree",
    "fig5-itree",
    "multinet-guard",
    "multinet-guard-b-first",
)


class InputError(ValueError):
    pass


def model_from_json(obj: Mapping[str, Any]):
    """Dag, StagedTree or InterventionalTree, chosen by the keys present."""
    if not isinstance(obj, Mapping):
        raise InputError("expected a JSON object")
    try:
        if "dag" in obj and "targets" in obj:
            dag = Dag.from_json(obj["dag"])
            return from_dag_targets(dag, TargetCollection(obj["targets"]), obj.get("pi"))
        if "k_star" in obj:
            return InterventionalTree.from_json(obj)
        if "vertices" in obj:
            return StagedTree.from_json(obj)
        if "n" in obj:
            return Dag.from_json(obj)
    except (GraphError, TreeValidationError) as exc:
        raise InputError(str(exc)) from exc
    raise InputError("unrecognized model description")


def model_to_json(model) -> dict:
    if isinstance(model, (Dag, StagedTree, InterventionalTree)):
        return model.to_json()
    raise TypeError(f"cannot serialize {type(model).__name__}")


def fixture_json(name: str) -> dict:
    if name not in FIXTURE_NAMES:
        raise InputError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURE_NAMES)}")
    text = resources.files("stkit.fixtures").joinpath(f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)


def load_fixture(name: str):
    return model_from_json(fixture_json(name))


def read_json(source: str) -> dict:
    """Read a JSON file; a bare fixture name (with or without .json) also works."""
    p = Path(source)
    if p.is_file():
        try:
            return json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InputError(f"{source}: malformed JSON ({exc})") from exc
    stem = p.name[:-5] if p.name.endswith(".json") else p.name
    if stem in FIXTURE_NAMES:
        return fixture_json(stem)
    raise InputError(f"no such file or fixture: {source}")


def load_model(source: str):
    return model_from_json(read_json(source))


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, ensure_ascii=False) + "\n"
