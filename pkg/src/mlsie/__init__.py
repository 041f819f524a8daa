"""Moving least squares approximation and discrete collocation for second-kind Fredholm equations."""

from .errors import MlsieError
from .fredholm import (
    CollocationSolution,
    FredholmProblem,
    apply_FN,
    assemble,
    operator_norm_FN,
    projection_interpolate,
    solve_collocation,
)
from .geometry import DomainBox, NeighborIndex, PointSet, fill_distance, generate_nodes, separation_distance
from .mls import MlsModel, ShapeEval, build_model
from .polybasis import PolyBasis, multi_indices
from .quadrature import QuadratureRule, box_rule, composite_trapezoid_1d, gauss_legendre_1d, integrate, tensor_rule
from .study import ConvergenceReport, StudyConfig, approximation_study, convergence_study, emit_report
from .weights import WeightSpec, weight_value

__version__ = "0.1.0"
