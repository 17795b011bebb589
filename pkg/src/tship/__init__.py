"""Deterministic near-linear approximation of uncapacitated transshipment."""

from .approximator import Approximator, alpha_bound, build_approximator
from .boosting import SolveConfig, SolveReport, boost, route_residual, solve
from .errors import (
    DegenerateLayer,
    Disconnected,
    ImproperDemands,
    NonpositiveCost,
    NotConverged,
    ParallelEdgeOrLoop,
    ParseError,
    TooLarge,
    TooSmall,
    TshipError,
    ValidationError,
)
from .exact import OracleSolution, exact_opt, verify_sandwich
from .graph import Flow, Graph, Instance, dijkstra, flow_cost, is_routing, mst_route, residual, validate
from .layers import build_layers
from .tzoracle import build_oracle

__all__ = [
    "Approximator", "alpha_bound", "build_approximator",
    "SolveConfig", "SolveReport", "boost", "route_residual", "solve",
    "DegenerateLayer", "Disconnected", "ImproperDemands", "NonpositiveCost", "NotConverged",
    "ParallelEdgeOrLoop", "ParseError", "TooLarge", "TooSmall", "TshipError", "ValidationError",
    "OracleSolution", "exact_opt", "verify_sandwich",
    "Flow", "Graph", "Instance", "dijkstra", "flow_cost", "is_routing", "mst_route", "residual", "validate",
    "build_layers", "build_oracle",
]
