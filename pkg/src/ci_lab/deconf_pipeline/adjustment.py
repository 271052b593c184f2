"""
Adjustment functional psi(a) = sum_z P(Z=z) E[W | A=a, Z=z], exactly.

A stratum with P(Z=z) > 0 but P(A=a, Z=z) = 0 has no conditional mean. Such
strata are listed and psi is left undefined; nothing is imputed.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from fractions import Fraction

from ci_lab.exceptions import RoleValidationException
from ci_lab.prob_core import JointTable, condition, expectation, marginal, probability
from ci_lab.validation.models import AdjustmentReport, StratumTerm

logger = logging.getLogger(__name__)


def check_target(table: JointTable, causes: Sequence[str], a: Mapping[str, str]) -> None:
    """`a` must assign every cause, and nothing else, a label in its support."""
    table.schema.require(causes)
    if set(a) != set(causes):
        raise RoleValidationException(
            f"Target must assign exactly the causes {sorted(causes)}, got {sorted(a)}", role="target"
        )
    table.schema.check_assignment(a, full=False)


def adjustment_functional(
    table: JointTable,
    causes: Sequence[str],
    w: str,
    z: str,
    a: Mapping[str, str],
    value_map: Mapping[str, Fraction | int | str] | None = None,
) -> AdjustmentReport:
    """
    Evaluate psi(a) against the baseline E[W].

    Raises:
        UnknownVariableException: A role is not in the schema
        RoleValidationException: Roles overlap or `a` is not a full cause assignment
        MissingValueException: W labels are not numeric and no value_map is given
    """
    table.schema.require([*causes, w, z])
    if w in causes or z in causes or z == w:
        raise RoleValidationException("causes, w and z must be distinct", role="z")
    check_target(table, causes, a)

    sub = marginal(table, {*causes, w, z})
    baseline = expectation(sub, w, value_map)
    terms: list[StratumTerm] = []
    degenerate: list[str] = []
    for (z_label,), pz in marginal(sub, {z}).items():
        event = {**a, z: z_label}
        if probability(sub, event) == 0:
            degenerate.append(z_label)
            terms.append(StratumTerm(z=z_label, weight=pz, conditional_mean=None))
            continue
        mean = expectation(condition(sub, event), w, value_map)
        terms.append(StratumTerm(z=z_label, weight=pz, conditional_mean=mean))

    if degenerate:
        logger.info("Adjustment for %s undefined: degenerate strata %s=%s", dict(a), z, degenerate)
        psi = gap = None
    else:
        psi = sum((t.weight * t.conditional_mean for t in terms if t.conditional_mean is not None), Fraction(0))
        gap = psi - baseline
    return AdjustmentReport(
        target=dict(sorted(a.items())),
        z=z,
        psi=psi,
        baseline=baseline,
        gap=gap,
        terms=terms,
        degenerate_strata=degenerate,
    )
