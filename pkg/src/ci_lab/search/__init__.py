"""Counterexample search for conditional-independence implications."""

from ci_lab.search.engine import (
    SearchConfig,
    SearchMode,
    exhaustive_grid_search,
    find_counterexample,
    largest_remainder_snap,
)
from ci_lab.search.query import (
    PRESETS,
    ImplicationQuery,
    conditional_to_marginal_query,
    holds,
    is_counterexample,
    tautology_query,
    transitivity_query,
    two_cause_deconfounder_query,
    verify,
)
from ci_lab.search.scoring import CompiledQuery, CompiledStatement, violation_score

__all__ = [
    "PRESETS",
    "CompiledQuery",
    "CompiledStatement",
    "ImplicationQuery",
    "SearchConfig",
    "SearchMode",
    "conditional_to_marginal_query",
    "exhaustive_grid_search",
    "find_counterexample",
    "holds",
    "is_counterexample",
    "largest_remainder_snap",
    "tautology_query",
    "transitivity_query",
    "two_cause_deconfounder_query",
    "verify",
    "violation_score",
]
