"""Staged trees, interventional DAG models and their polynomial ideals."""

from .graph import Dag, TargetCollection, UGraph
from .interventional import InterventionalTree, criterion_check, from_dag_targets
from .polynomial import Polynomial, SymbolTable
from .staged_tree import StagedTree, from_dag, is_balanced

__all__ = [
    "Dag",
    "InterventionalTree",
    "Polynomial",
    "StagedTree",
    "SymbolTable",
    "TargetCollection",
    "UGraph",
    "criterion_check",
    "from_dag",
    "from_dag_targets",
    "is_balanced",
]
