"""Tripartite knowledge base linking workflow steps, kernels and hardware."""

from ._backend import BACKEND
from .coverage_sim import (
    UncoveragePoint,
    WorkloadParams,
    coverage,
    sample_kernel_count,
    select_kernel_preferential,
    simulate_uncoverage,
)
from .errors import KBError
from .graph import KnowledgeBase, Workflow, check_invariants
from .perfmodel import CostModel, Observation, predict, update
from .persistence import load, save
from .queries import (
    estimate_step_cost,
    list_decompositions,
    query_type1,
    query_type2,
    query_type3,
    recommend_hardware,
    resolve_decomposition,
)

__version__ = "0.1.0"
