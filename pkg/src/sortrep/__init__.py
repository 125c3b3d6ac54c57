"""Threshold-based multiple-criteria sorting with additive value functions:
model inference from assignment examples, robustness analysis over all
compatible models, and sixteen representative-model selection procedures.
"""

from .core import (
    Alternative,
    AssignmentExamples,
    Criterion,
    MarginalFunction,
    PerformanceTable,
    SortingModel,
    assign,
    comprehensive_value,
)
from .polytope import (
    CompatibleSet,
    IncompatibilityError,
    build_compatible_set,
    check_compatibility,
    chebyshev_center,
)
from .procedures import (
    ProcedureId,
    SelectionContext,
    SelectionResult,
    select_representative,
)
from .robust import NecessaryRelations, necessary_relations, necessary_weak
from .sampler import (
    Acceptabilities,
    ModelSample,
    compute_acceptabilities,
    har_sample,
)

__version__ = "0.1.0"

__all__ = [
    "Alternative",
    "AssignmentExamples",
    "Criterion",
    "MarginalFunction",
    "PerformanceTable",
    "SortingModel",
    "assign",
    "comprehensive_value",
    "CompatibleSet",
    "IncompatibilityError",
    "build_compatible_set",
    "check_compatibility",
    "chebyshev_center",
    "ProcedureId",
    "SelectionContext",
    "SelectionResult",
    "select_representative",
    "NecessaryRelations",
    "necessary_relations",
    "necessary_weak",
    "Acceptabilities",
    "ModelSample",
    "compute_acceptabilities",
    "har_sample",
    "__version__",
]
