"""kvvstream: layered-KVV hard instances for budget-limited streaming matching.

Generates the glued hypercube gadget graphs, verifies their structural
identities by exact counting and enumeration, and measures how budgeted
streaming algorithms fare against the analytic optimum and the
vertex-cover bound.
"""

from .params import (BlockLayout, ParamError, ToyParams, derive_params,
                     minimal_layout, params_from_config, validate)
from .hypercube import ConstraintSystem, Line, contains, count, line_cover, members, weight
from .instance import HardInstance, StreamedEdge, VertexId, load, sample_instance
from .fixtures import make_fixture
from .harness import BudgetedAlgorithm, ExperimentRecord, run
from .predecessor import analytic_ratios, witness_sets

__version__ = "0.1.0"

__all__ = [
    "BlockLayout", "BudgetedAlgorithm", "ConstraintSystem",
    "ExperimentRecord", "HardInstance", "Line", "ParamError", "StreamedEdge",
    "ToyParams", "VertexId", "analytic_ratios", "contains", "count",
    "derive_params", "line_cover", "load", "make_fixture", "members",
    "minimal_layout", "params_from_config", "run", "sample_instance",
    "validate", "weight", "witness_sets",
]
