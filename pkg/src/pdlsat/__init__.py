"""Satisfiability for propositional dynamic logic via a one-pass tableau."""

from .engine import (
    BudgetExceeded, Satisfiable, SolverConfig, Status, Unsatisfiable, is_sat, solve,
)
from .model import (
    KripkeModel, LabelledStructure, bounded_model_search, check_hintikka, extract_model, model_check,
)
from .syntax import ParseError, neg, nnf, parse, render

__all__ = [
    "BudgetExceeded", "KripkeModel", "LabelledStructure", "ParseError", "Satisfiable", "SolverConfig",
    "Status", "Unsatisfiable", "bounded_model_search", "check_hintikka", "extract_model", "is_sat",
    "model_check", "neg", "nnf", "parse", "render", "solve",
]
