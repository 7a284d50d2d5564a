"""Gluing-equation deformation of ideal triangulations, ideal-point detection,
and SL(2,C) trace computations for punctured-torus bundles."""
from .deformation import (
    DegenerationReport,
    EquationSystem,
    Outcome,
    ShapeAssignment,
    SolverOptions,
    continue_filling,
    holonomy,
    solve_complete,
    tangent_nullity,
)
from .report import RunReport
from .roots import RootOfUnity, detect_root_of_unity
from .sl2 import Word, TracePolynomial, trace_reduce, make_fundamental_pair
from .triangulation import Triangulation, compute_edge_classes, load_triangulation, parse_triangulation
from .volume import bloch_wigner, volume

__version__ = "0.1.0"

__all__ = [
    "DegenerationReport",
    "EquationSystem",
    "Outcome",
    "ShapeAssignment",
    "SolverOptions",
    "continue_filling",
    "holonomy",
    "solve_complete",
    "tangent_nullity",
    "RunReport",
    "RootOfUnity",
    "detect_root_of_unity",
    "Word",
    "TracePolynomial",
    "trace_reduce",
    "make_fundamental_pair",
    "Triangulation",
    "compute_edge_classes",
    "load_triangulation",
    "parse_triangulation",
    "bloch_wigner",
    "volume",
]
