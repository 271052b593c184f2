"""Exact representation and algebra of finite discrete joint distributions."""

from ci_lab.prob_core.codec import (
    table_from_document,
    table_from_json,
    table_to_document,
    table_to_json,
)
from ci_lab.prob_core.rational import Rational, as_rational, format_rational, parse_rational
from ci_lab.prob_core.table import (
    Assignment,
    JointTable,
    Schema,
    Variable,
    condition,
    expectation,
    extend_independent,
    make_table,
    marginal,
    point_mass,
    probability,
    product_table,
    push_forward_deterministic,
    relabel_outcomes,
    rename_variables,
)

__all__ = [
    "Assignment",
    "JointTable",
    "Rational",
    "Schema",
    "Variable",
    "as_rational",
    "condition",
    "expectation",
    "extend_independent",
    "format_rational",
    "make_table",
    "marginal",
    "parse_rational",
    "point_mass",
    "probability",
    "product_table",
    "push_forward_deterministic",
    "relabel_outcomes",
    "rename_variables",
    "table_from_document",
    "table_from_json",
    "table_to_document",
    "table_to_json",
]
