"""
Report models for claim verification, adjustment and search results.

Rationals serialize as "num/den" strings; fitted (floating-point) values stay floats.
"""

from __future__ import annotations

from enum import Enum
from fractions import Fraction
from typing import Annotated, Any

from pydantic import BaseModel, ConfigDict, Field, PlainSerializer

from ci_lab.prob_core.rational import format_rational
from ci_lab.prob_core.table import JointTable

RationalField = Annotated[Fraction, PlainSerializer(format_rational, return_type=str)]


class _Report(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class GroupVerdict(_Report):
    """Independence of one group from the target."""

    group: list[str]
    independent: bool


class PairwiseJointReport(_Report):
    """Per-group vs joint independence from a target."""

    target: list[str]
    given: list[str]
    pairwise: list[GroupVerdict]
    joint: bool = Field(..., description="Union of groups independent of target")
    mutual: bool | None = Field(None, description="Groups mutually independent (None for one group)")
    gap: bool = Field(..., description="Every group independent but the union is not")


class Verdict(str, Enum):
    """Outcome of checking one claim instance."""

    CLAIM_REFUTED = "ClaimRefuted"
    CLAIM_INSTANCE_CONSISTENT = "ClaimInstanceConsistent"
    PREMISES_FAIL = "PremisesFail"


class ClaimReport(_Report):
    """
    Premises (1)(i), (1)(ii), minimality (iii), factor-model premise (2) and
    conclusion (3) of the deconfounder claim for one instance.

    `conclusion_3` and `verdict` are None when only premises were checked.
    """

    premise_1i: dict[str, bool] = Field(..., description="A_j _||_ W | U per cause")
    premise_1ii: dict[str, bool] = Field(..., description="A_j _||_ other causes | U per cause")
    premise_iii: bool = Field(..., description="No proper coarsening of U satisfies (ii)")
    premise_2: bool = Field(..., description="Causes mutually independent given Z")
    conclusion_3: bool | None = Field(None, description="All causes jointly _||_ W | Z")
    verdict: Verdict | None = None

    @property
    def premises_hold(self) -> bool:
        return (
            all(self.premise_1i.values())
            and all(self.premise_1ii.values())
            and self.premise_iii
            and self.premise_2
        )

    def recompute_verdict(self) -> Verdict | None:
        """Verdict implied by the boolean fields."""
        if not self.premises_hold:
            return Verdict.PREMISES_FAIL
        if self.conclusion_3 is None:
            return None
        return Verdict.CLAIM_INSTANCE_CONSISTENT if self.conclusion_3 else Verdict.CLAIM_REFUTED


class StratumTerm(_Report):
    """One stratum z of the adjustment sum."""

    z: str
    weight: RationalField = Field(..., description="P(Z=z)")
    conditional_mean: RationalField | None = Field(
        None, description="E[W | A=a, Z=z]; None when the stratum is degenerate"
    )


class AdjustmentReport(_Report):
    """
    psi(a) = sum_z P(z) E[W | A=a, Z=z] against the baseline E[W].

    With degenerate strata psi and gap are None (undefined, never imputed).
    """

    target: dict[str, str]
    z: str
    psi: RationalField | None
    baseline: RationalField
    gap: RationalField | None
    terms: list[StratumTerm]
    degenerate_strata: list[str] = Field(default_factory=list)

    @property
    def defined(self) -> bool:
        return not self.degenerate_strata


class ConditioningStatus(str, Enum):
    """Classification of a conditioning event (A=a, Z=z)."""

    WELL_DEFINED = "WellDefined"
    OFF_MANIFOLD = "OffManifold"
    OFF_SUPPORT = "OffSupport"


class DegenerateConditioningReport(_Report):
    """Whether (A=a, Z=z_value) has positive probability for a deterministic Z = f(A)."""

    target: dict[str, str]
    z: str
    z_value: str
    probability: RationalField
    status: ConditioningStatus
    feasible_z: list[str] = Field(..., description="z with P(A=a, Z=z) > 0")

    @property
    def well_defined(self) -> bool:
        return self.status is ConditioningStatus.WELL_DEFINED


class StatementCheck(_Report):
    """Exact verdict on one statement of a query."""

    statement: str
    holds: bool


class SearchVerification(_Report):
    """Exact re-verification of a candidate witness."""

    premises: list[StatementCheck]
    conclusion: StatementCheck

    @property
    def is_counterexample(self) -> bool:
        return all(p.holds for p in self.premises) and not self.conclusion.holds


class SearchOutcome(_Report):
    """Result of a counterexample search, with the configuration echoed."""

    found: bool
    budget_exhausted: bool
    mode: str
    restarts_used: int
    witness: dict[str, Any] | None = Field(None, description="Witness table document")
    table: JointTable | None = Field(None, exclude=True, description="Witness as a JointTable")
    verification: SearchVerification | None = None
    config: dict[str, Any] = Field(default_factory=dict)


class DeconfounderReport(_Report):
    """
    End-to-end deconfounder run on a known table.

    In exact mode there is no sampling or fitting: `adjustment` uses the
    table's own z. Otherwise `adjustment` uses the fitted substitute and
    `oracle` (when the table has a z) the true one.
    """

    causes: list[str]
    w: str
    target: dict[str, str]
    seed: int
    exact: bool
    n: int | None = None
    k: int | None = None
    log_likelihood: float | None = None
    converged: bool | None = None
    class_weights: list[float] | None = None
    substitute: str | None = Field(None, description="Name of the substitute-confounder column")
    substitute_map: dict[str, str] | None = Field(
        None, description="Cause assignment (comma-joined labels) -> MAP class"
    )
    adjustment: AdjustmentReport
    oracle: AdjustmentReport | None = None
    conditioning: list[DegenerateConditioningReport] = Field(default_factory=list)
