"""
Wire-format documents (pydantic) for tables, claim instances and queries.

Unknown fields are rejected everywhere (extra="forbid"). Probabilities travel
as "num/den" strings; see ci_lab.prob_core.rational.
"""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class _Document(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class VariableDocument(_Document):
    """One schema variable."""

    name: str = Field(..., min_length=1, description="Variable name")
    support: list[str] = Field(..., min_length=1, description="Ordered outcome labels")


class EntryDocument(_Document):
    """One positive-probability table row."""

    assignment: dict[str, str] = Field(..., description="Full assignment, label per variable")
    p: str = Field(..., description='Probability as "num/den" (den omitted when 1)')


class TableDocument(_Document):
    """
    Joint table file.

    Example:
        {"variables": [{"name": "A1", "support": ["0", "1"]}],
         "entries": [{"assignment": {"A1": "0"}, "p": "1/2"},
                     {"assignment": {"A1": "1"}, "p": "1/2"}]}
    """

    variables: list[VariableDocument]
    entries: list[EntryDocument]


class RolesDocument(_Document):
    """Claim roles: causes A1..Am, outcome stand-in W, optional U, conditioner Z."""

    causes: list[str] = Field(..., min_length=1)
    w: str
    u: str | None = None
    z: str


class ClaimDocument(_Document):
    """Claim instance file: table fields plus roles."""

    variables: list[VariableDocument]
    entries: list[EntryDocument]
    roles: RolesDocument


class MutualDocument(_Document):
    """Mutual-independence premise: groups mutually independent given `given`."""

    mutual: list[list[str]] = Field(..., min_length=2)
    given: list[str] = Field(default_factory=list)


class QueryDocument(_Document):
    """
    Implication query file.

    Premises are CI-grammar strings (`A1,A2 _||_ W | Z`) or MutualDocument
    objects; `cells` optionally restricts the candidate support.
    """

    variables: list[VariableDocument]
    premises: list[str | MutualDocument]
    conclusion: str
    cells: list[dict[str, str]] | None = None


class ClassDocument(_Document):
    """One latent class: its weight and a categorical per cause (support order)."""

    weight: str
    categoricals: dict[str, list[str]]


class ModelDocument(_Document):
    """
    Latent-class model file.

    Fitted models carry decimal strings; exact models carry "num/den" strings.
    """

    variables: list[VariableDocument]
    classes: list[ClassDocument] = Field(..., min_length=1)
    fitted: bool
    smoothing: str = "0"
