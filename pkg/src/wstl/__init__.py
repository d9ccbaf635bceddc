"""Learn operand weights of weighted STL formulas from preferences, rankings and demonstrations."""

from .formula import FormulaNode, Kind, ParameterTable, Valuation, collect_parameters, parse, to_pnf, to_string
from .rct import Signal, build_rct, robustness, weighted_robustness
from .pruning import prune

__all__ = [
    "FormulaNode",
    "Kind",
    "ParameterTable",
    "Signal",
    "Valuation",
    "build_rct",
    "collect_parameters",
    "parse",
    "prune",
    "robustness",
    "to_pnf",
    "to_string",
    "weighted_robustness",
]
