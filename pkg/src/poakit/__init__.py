"""Exact price-of-anarchy analysis and distribution-rule design for resource allocation games."""

from .errors import (CapExceeded, HypothesisViolated, NoFiniteBound, NoPureNash, NumericOverflow, PoAError,
                     ValidationError, VerificationFailed, ZeroOptimalCost)
from .game import (ExplicitGame, brute_force_poa, enumerate_nash, fig1, footnote2, is_cce, is_nash,
                   optimal_cost, worst_cce_value)
from .poa import IndexTuple, PoAResult, enumerate_index_set, gamma_value, optimal_rules, poa_lp
from .resource_types import ResourceType, TypeSet, basis_types, make_type, type_set
from .smoothness import check_generalized_smooth, generalized_poa, robust_poa, theorem1_gap
from .worstcase import build_worst_case, extract_optimality_parameters, verify_worst_case

__version__ = "0.1.0"

__all__ = [
    "CapExceeded",
    "HypothesisViolated",
    "NoFiniteBound",
    "NoPureNash",
    "NumericOverflow",
    "PoAError",
    "ValidationError",
    "VerificationFailed",
    "ZeroOptimalCost",
    "ExplicitGame",
    "brute_force_poa",
    "enumerate_nash",
    "fig1",
    "footnote2",
    "is_cce",
    "is_nash",
    "optimal_cost",
    "worst_cce_value",
    "IndexTuple",
    "PoAResult",
    "enumerate_index_set",
    "gamma_value",
    "optimal_rules",
    "poa_lp",
    "ResourceType",
    "TypeSet",
    "basis_types",
    "make_type",
    "type_set",
    "check_generalized_smooth",
    "generalized_poa",
    "robust_poa",
    "theorem1_gap",
    "build_worst_case",
    "extract_optimality_parameters",
    "verify_worst_case",
]
