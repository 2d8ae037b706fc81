"""Exact-rational solvers for capacity-constrained edge packing over matroids."""

from .core import (Edge, Instance, Solution, classify, instance_from_json,
                   instance_to_json, is_feasible, load, perturb, rat,
                   scale_integral, validate)
from .matroids import (ContractLoopError, FreeMatroid, GraphicMatroid,
                       MatroidOracle, PartitionMatroid, SeparationCapExceeded,
                       SeparationResult, TransversalMatroid, UniformMatroid,
                       make_matroid)
from .lp import FractionalPoint, Infeasible, LpSubproblem, lp_value, solve_extreme

__all__ = [
    "Edge", "Instance", "Solution", "classify", "instance_from_json",
    "instance_to_json", "is_feasible", "load", "perturb", "rat",
    "scale_integral", "validate",
    "ContractLoopError", "FreeMatroid", "GraphicMatroid", "MatroidOracle",
    "PartitionMatroid", "SeparationCapExceeded", "SeparationResult",
    "TransversalMatroid", "UniformMatroid", "make_matroid",
    "FractionalPoint", "Infeasible", "LpSubproblem", "lp_value",
    "solve_extreme",
]

__version__ = "0.1.0"
