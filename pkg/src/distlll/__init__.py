"""Round-accounted LOCAL-model simulator for distributed Lovász Local Lemma
algorithms and the coloring pipelines built on them."""

from .colorings import (ColoringReport, ColoringResult, defective_coloring, frugal_coloring, list_coloring,
                        verify_coloring)
from .decomp import (NetworkDecomposition, ball_carve, ball_carve_distributed, shattered_decomposition,
                     validate_decomposition)
from .estimators import (BallCarvingDecomposer, DefectiveColoring, FrugalColoring, LLLSolver,
                         ListColoring)
from .exceptions import (CapacityError, DistLLLError, IncompleteAssignmentError, InfeasibleComponentError,
                         NonconvergenceError, ParameterError, ValidationError, VerificationError)
from .graph import Graph
from .lll import (Conjunction, EventSpec, LLLInstance, Multiplicity, PartialAssignment, Table, Threshold,
                  VariableSpec, check_criterion, cond_prob, violated_events)
from .runtime import NodeStream, RoundLedger, SeedContext
from .solvers import base_lll, bootstrap_lll, det_lll, moser_tardos, random_partial_setting, solve

__version__ = "0.1.0"

__all__ = [
    "BallCarvingDecomposer", "CapacityError", "ColoringReport", "ColoringResult", "Conjunction",
    "DefectiveColoring", "DistLLLError", "EventSpec", "FrugalColoring", "Graph", "IncompleteAssignmentError",
    "InfeasibleComponentError", "LLLInstance", "LLLSolver", "ListColoring", "Multiplicity",
    "NetworkDecomposition", "NodeStream", "NonconvergenceError", "ParameterError", "PartialAssignment",
    "RoundLedger", "SeedContext", "Table", "Threshold", "ValidationError", "VariableSpec",
    "VerificationError", "ball_carve", "ball_carve_distributed", "base_lll", "bootstrap_lll",
    "check_criterion", "cond_prob", "defective_coloring", "det_lll", "frugal_coloring", "list_coloring",
    "moser_tardos", "random_partial_setting", "shattered_decomposition", "solve", "validate_decomposition",
    "verify_coloring", "violated_events",
]
