"""
Off-manifold conditioning for deterministic substitutes Z = f(A).

When Z is a function of the causes, the event (A=a, Z=z) has probability
zero for every z other than f(a), and conditioning on it is undefined.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Mapping, Sequence
from fractions import Fraction

from ci_lab.deconf_pipeline.adjustment import check_target
from ci_lab.exceptions import NotDeterministicException
from ci_lab.prob_core import JointTable, marginal, probability, push_forward_deterministic
from ci_lab.validation.models import ConditioningStatus, DegenerateConditioningReport

logger = logging.getLogger(__name__)

Key = tuple[str, ...]
ZDefinition = Callable[[dict[str, str]], str] | Mapping[Key, str]


def is_deterministic(table: JointTable, causes: Sequence[str], z: str) -> bool:
    """H(z | causes) = 0: every positive cause assignment has exactly one positive z."""
    sub = marginal(table, {*causes, z})
    cause_pos = sub.positions([n for n in sub.schema.names if n != z])
    seen: dict[Key, str] = {}
    z_pos = sub.schema.index(z)
    for key in sub.entries:
        cause_key = tuple(key[i] for i in cause_pos)
        if seen.setdefault(cause_key, key[z_pos]) != key[z_pos]:
            return False
    return True


def degenerate_conditioning_report(
    table: JointTable,
    causes: Sequence[str],
    z: str,
    a: Mapping[str, str],
    z_value: str,
    z_def: ZDefinition | None = None,
) -> DegenerateConditioningReport:
    """
    Classify the conditioning event (A=a, Z=z_value).

    With `z_def`, Z is (re)built as z_def(causes) on the causes' marginal;
    otherwise the table's own z must be deterministic given the causes.

    Raises:
        NotDeterministicException: z is not a function of the causes
        RoleValidationException: `a` is not a full cause assignment
        UnknownOutcomeException: z_value is not a label of z
    """
    if z_def is not None:
        table = push_forward_deterministic(marginal(table, set(causes)), z, z_def)
    elif not is_deterministic(table, causes, z):
        raise NotDeterministicException(f"{z} is not a deterministic function of the causes", variable=z)
    check_target(table, causes, a)
    table.schema.check_assignment({z: z_value}, full=False)

    feasible = [
        label for label in table.schema.support(z) if probability(table, {**a, z: label}) > Fraction(0)
    ]
    p = probability(table, {**a, z: z_value})
    if p > 0:
        status = ConditioningStatus.WELL_DEFINED
    elif not feasible:
        status = ConditioningStatus.OFF_SUPPORT
    else:
        status = ConditioningStatus.OFF_MANIFOLD
        logger.info("Conditioning on %s, %s=%s is off-manifold; feasible %s", dict(a), z, z_value, feasible)
    return DegenerateConditioningReport(
        target=dict(sorted(a.items())),
        z=z,
        z_value=z_value,
        probability=p,
        status=status,
        feasible_z=feasible,
    )
