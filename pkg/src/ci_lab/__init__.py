"""
ci-lab - exact conditional-independence checking for discrete joint distributions.

Verifies that the premises of the deconfounder claim can hold while its
conclusion fails, searches for counterexamples to CI implications, and runs a
small latent-class deconfounder pipeline on known tables.

Entry points:
    verify_claim(build_ce1())            exact premise / conclusion report
    find_counterexample(query, config)   verified witness search
    run_deconfounder(table, causes, w, target)
"""

try:
    from importlib.metadata import version as _get_version

    __version__ = _get_version("ci-lab")
except Exception:
    __version__ = "1.0.0"  # Fallback for editable installs

from ci_lab.claims import (
    ClaimInstance,
    build_ce1,
    build_ce2,
    build_cluster_instance,
    build_overlap_variant,
    check_conclusion,
    check_premises,
    verify_claim,
)
from ci_lab.deconf_pipeline import (
    Dataset,
    EMConfig,
    LatentClassModel,
    adjustment_functional,
    degenerate_conditioning_report,
    fit_latent_class_em,
    run_deconfounder,
    simulate_samples,
    substitute_confounder,
)
from ci_lab.exceptions import (
    BoundExceededException,
    CILabException,
    EmptyDataException,
    FormatException,
    NotDeterministicException,
    OverlappingSetsException,
    ParseException,
    RoleValidationException,
    TableValidationException,
    UnknownVariableException,
    ZeroProbabilityEventException,
)
from ci_lab.independence import (
    CIStatement,
    MutualStatement,
    is_ci,
    is_mutually_independent,
    minimality_check,
    pairwise_joint_report,
)
from ci_lab.prob_core import (
    JointTable,
    Schema,
    condition,
    expectation,
    extend_independent,
    make_table,
    marginal,
    push_forward_deterministic,
)
from ci_lab.search import (
    ImplicationQuery,
    SearchConfig,
    exhaustive_grid_search,
    find_counterexample,
    violation_score,
)

__all__ = [
    # Tables
    "JointTable",
    "Schema",
    "make_table",
    "marginal",
    "condition",
    "expectation",
    "extend_independent",
    "push_forward_deterministic",
    # Independence
    "CIStatement",
    "MutualStatement",
    "is_ci",
    "is_mutually_independent",
    "pairwise_joint_report",
    "minimality_check",
    # Claims
    "ClaimInstance",
    "build_ce1",
    "build_ce2",
    "build_cluster_instance",
    "build_overlap_variant",
    "check_premises",
    "check_conclusion",
    "verify_claim",
    # Search
    "ImplicationQuery",
    "SearchConfig",
    "find_counterexample",
    "exhaustive_grid_search",
    "violation_score",
    # Deconfounder pipeline
    "Dataset",
    "EMConfig",
    "LatentClassModel",
    "simulate_samples",
    "fit_latent_class_em",
    "substitute_confounder",
    "adjustment_functional",
    "degenerate_conditioning_report",
    "run_deconfounder",
    # Exceptions
    "CILabException",
    "TableValidationException",
    "UnknownVariableException",
    "OverlappingSetsException",
    "ZeroProbabilityEventException",
    "BoundExceededException",
    "RoleValidationException",
    "ParseException",
    "NotDeterministicException",
    "EmptyDataException",
    "FormatException",
    # Metadata
    "__version__",
]
