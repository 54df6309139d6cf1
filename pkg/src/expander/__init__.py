"""Expander decomposition, trimming and pruning on undirected multigraphs."""

from .errors import (
    BudgetExceeded,
    ContractViolation,
    ExpanderError,
    ParameterError,
    SweepFailure,
    TrimFailure,
)
from .graph import Graph, Subdivision, conductance, connected_components, parse_phi

__all__ = [
    "BudgetExceeded",
    "ContractViolation",
    "ExpanderError",
    "Graph",
    "ParameterError",
    "Subdivision",
    "SweepFailure",
    "TrimFailure",
    "conductance",
    "connected_components",
    "parse_phi",
]
