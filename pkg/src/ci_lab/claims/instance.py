"""
Role-tagged claim instances and the deconfounder-claim checker.

The claim, for causes A_1..A_m, outcome stand-in W, variable U and conditioner Z:

    Assume (1)(i)   A_j _||_ W | U                    for all j
           (1)(ii)  A_j _||_ (all other causes) | U   for all j
           (iii)    no proper coarsening of U satisfies (1)(ii)
    and    (2)      A_1..A_m mutually independent given Z.
    Then   (3)      (A_1..A_m) _||_ W | Z.

An absent U means a constant: (1) is checked unconditionally and (iii) holds trivially.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Mapping
from dataclasses import dataclass

from ci_lab.exceptions import RoleValidationException
from ci_lab.independence import (
    CIStatement,
    is_ci,
    is_mutually_independent,
    minimality_check,
)
from ci_lab.prob_core import (
    JointTable,
    marginal,
    rename_variables,
    table_from_document,
    table_to_document,
)
from ci_lab.schema.documents import ClaimDocument, RolesDocument
from ci_lab.validation.models import ClaimReport

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClaimInstance:
    """
    A joint table with roles.

    u may coincide with z (the U=Z reading) but never with a cause or w.
    u == w is rejected: A_j _||_ W | W holds trivially, so premise (1)(i)
    would pass for any table and say nothing about the causes.
    """

    table: JointTable
    causes: tuple[str, ...]
    w: str
    u: str | None
    z: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "causes", tuple(self.causes))
        schema = self.table.schema
        if len(self.causes) < 2:
            raise RoleValidationException("At least two causes are required", role="causes")
        if len(set(self.causes)) != len(self.causes):
            raise RoleValidationException("Causes must be distinct", role="causes")
        roles = [("cause", c) for c in self.causes] + [("w", self.w), ("z", self.z)]
        if self.u is not None:
            roles.append(("u", self.u))
        for role, name in roles:
            if name not in schema:
                raise RoleValidationException(f"Role {role} names unknown variable {name}", role=role)
        if self.w in self.causes:
            raise RoleValidationException("w must differ from every cause", role="w")
        if self.z in self.causes or self.z == self.w:
            raise RoleValidationException("z must differ from the causes and w", role="z")
        if self.u is not None and (self.u in self.causes or self.u == self.w):
            raise RoleValidationException("u must differ from the causes and w", role="u")

    @property
    def u_given(self) -> frozenset[str]:
        return frozenset() if self.u is None else frozenset([self.u])

    def rename(self, mapping: Mapping[str, str]) -> ClaimInstance:
        """Rename variables in the table and every role."""

        def new(name: str) -> str:
            return mapping.get(name, name)

        return ClaimInstance(
            table=rename_variables(self.table, mapping),
            causes=tuple(new(c) for c in self.causes),
            w=new(self.w),
            u=None if self.u is None else new(self.u),
            z=new(self.z),
        )


def check_premises(inst: ClaimInstance) -> ClaimReport:
    """Evaluate premises (1)(i), (1)(ii), (iii) and (2); conclusion left unset."""
    table = inst.table
    given_u = inst.u_given
    premise_1i: dict[str, bool] = {}
    premise_1ii: dict[str, bool] = {}
    for cause in inst.causes:
        others = frozenset(inst.causes) - {cause}
        premise_1i[cause] = is_ci(table, CIStatement(frozenset([cause]), frozenset([inst.w]), given_u))
        premise_1ii[cause] = is_ci(table, CIStatement(frozenset([cause]), others, given_u))

    singletons = [frozenset([c]) for c in inst.causes]
    premise_iii = True if inst.u is None else minimality_check(table, inst.u, singletons)
    premise_2 = is_mutually_independent(table, singletons, {inst.z})

    report = ClaimReport(
        premise_1i=premise_1i,
        premise_1ii=premise_1ii,
        premise_iii=premise_iii,
        premise_2=premise_2,
    )
    return report.model_copy(update={"verdict": report.recompute_verdict()})


def check_conclusion(inst: ClaimInstance) -> bool:
    """Conclusion (3): all causes jointly independent of w given z."""
    return is_ci(
        inst.table,
        CIStatement(frozenset(inst.causes), frozenset([inst.w]), frozenset([inst.z])),
    )


def verify_claim(inst: ClaimInstance) -> ClaimReport:
    """Premises, conclusion and verdict in one report."""
    premises = check_premises(inst)
    report = premises.model_copy(update={"conclusion_3": check_conclusion(inst)})
    verdict = report.recompute_verdict()
    logger.debug("Claim over causes %s: %s", ",".join(inst.causes), verdict)
    return report.model_copy(update={"verdict": verdict})


def check_overlap(table: JointTable, causes: tuple[str, ...] | list[str], z: str) -> bool:
    """
    Positivity: every cause assignment has positive probability in every
    positive-probability stratum of z.
    """
    sub = marginal(table, set(causes) | {z})
    names = sub.schema.names
    cause_supports = [sub.schema.support(c) for c in causes]
    strata = [key[0] for key, _ in marginal(sub, {z}).items()]
    for z_label in strata:
        for values in itertools.product(*cause_supports):
            assignment = dict(zip(causes, values))
            assignment[z] = z_label
            if tuple(assignment[n] for n in names) not in sub.entries:
                return False
    return True


def instance_to_document(inst: ClaimInstance) -> ClaimDocument:
    table_doc = table_to_document(inst.table)
    return ClaimDocument(
        variables=table_doc.variables,
        entries=table_doc.entries,
        roles=RolesDocument(causes=list(inst.causes), w=inst.w, u=inst.u, z=inst.z),
    )


def instance_from_document(doc: ClaimDocument) -> ClaimInstance:
    return ClaimInstance(
        table=table_from_document(doc),
        causes=tuple(doc.roles.causes),
        w=doc.roles.w,
        u=doc.roles.u,
        z=doc.roles.z,
    )


def instance_to_json(inst: ClaimInstance) -> str:
    """Canonical JSON: table fields then roles."""
    return instance_to_document(inst).model_dump_json()
