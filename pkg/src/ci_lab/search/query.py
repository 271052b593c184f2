"""
Implication queries: "premises imply conclusion" over a finite schema.

A counterexample is an exact table on which every premise holds and the
conclusion fails.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Union

from ci_lab.exceptions import TableValidationException
from ci_lab.independence import CIStatement, MutualStatement, is_ci, is_mutually_independent
from ci_lab.prob_core import JointTable, Schema
from ci_lab.validation.models import SearchVerification, StatementCheck

Statement = Union[CIStatement, MutualStatement]
Key = tuple[str, ...]

BINARY = ("0", "1")


def holds(table: JointTable, statement: Statement) -> bool:
    """Exact truth value of a CI or mutual-independence statement."""
    if isinstance(statement, MutualStatement):
        return is_mutually_independent(table, statement.groups, statement.given)
    return is_ci(table, statement)


@dataclass(frozen=True)
class ImplicationQuery:
    """
    Premises and a conclusion over a schema.

    `cells` optionally restricts candidate tables to a subset of full
    assignments (schema order); None means the whole product support.
    """

    schema: Schema
    premises: tuple[Statement, ...]
    conclusion: CIStatement
    cells: tuple[Key, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "premises", tuple(self.premises))
        for statement in (*self.premises, self.conclusion):
            statement.validate(self.schema)
        if self.cells is not None:
            cells = tuple(tuple(c) for c in self.cells)
            for cell in cells:
                self.schema.key(dict(zip(self.schema.names, cell)))
            if len(set(cells)) != len(cells) or not cells:
                raise TableValidationException("Candidate cells must be distinct and non-empty")
            object.__setattr__(
                self, "cells", tuple(sorted(cells, key=self.schema.sort_key))
            )

    @property
    def candidate_cells(self) -> tuple[Key, ...]:
        if self.cells is not None:
            return self.cells
        return tuple(self.schema.cells())

    @property
    def conclusion_is_premise(self) -> bool:
        """The conclusion restates a premise, so no table can separate them."""
        return any(p.content == self.conclusion.content for p in self.premises)

    def __str__(self) -> str:
        premises = " ; ".join(str(p) for p in self.premises)
        return f"[{premises}] => {self.conclusion}"


def verify(table: JointTable, query: ImplicationQuery) -> SearchVerification:
    """Exact, statement-by-statement re-verification of a candidate witness."""
    return SearchVerification(
        premises=[StatementCheck(statement=str(p), holds=holds(table, p)) for p in query.premises],
        conclusion=StatementCheck(
            statement=str(query.conclusion), holds=holds(table, query.conclusion)
        ),
    )


def is_counterexample(table: JointTable, query: ImplicationQuery) -> bool:
    """Short-circuiting form of verify(...).is_counterexample."""
    return all(holds(table, p) for p in query.premises) and not holds(table, query.conclusion)


def _ci(x: Sequence[str], y: Sequence[str], given: Sequence[str] = ()) -> CIStatement:
    return CIStatement(frozenset(x), frozenset(y), frozenset(given))


def two_cause_deconfounder_query(restrict_to: JointTable | None = None) -> ImplicationQuery:
    """
    Binary A1, A2, W, Z with U absent:
    A1 _||_ W, A2 _||_ W, A1 _||_ A2, A1 _||_ A2 | Z  =>  A1,A2 _||_ W | Z.

    With `restrict_to`, candidate cells are that table's support.
    """
    schema = Schema.of(("A1", BINARY), ("A2", BINARY), ("W", BINARY), ("Z", BINARY))
    cells = None
    if restrict_to is not None:
        cells = tuple(
            tuple(assignment[n] for n in schema.names) for assignment, _ in restrict_to.assignments()
        )
    return ImplicationQuery(
        schema=schema,
        premises=(
            _ci(["A1"], ["W"]),
            _ci(["A2"], ["W"]),
            _ci(["A1"], ["A2"]),
            _ci(["A1"], ["A2"], ["Z"]),
        ),
        conclusion=_ci(["A1", "A2"], ["W"], ["Z"]),
        cells=cells,
    )


def transitivity_query() -> ImplicationQuery:
    """A _||_ B and B _||_ C  =>  A _||_ C, binary."""
    schema = Schema.of(("A", BINARY), ("B", BINARY), ("C", BINARY))
    return ImplicationQuery(
        schema=schema,
        premises=(_ci(["A"], ["B"]), _ci(["B"], ["C"])),
        conclusion=_ci(["A"], ["C"]),
    )


def tautology_query() -> ImplicationQuery:
    """A _||_ B  =>  A _||_ B, binary."""
    schema = Schema.of(("A", BINARY), ("B", BINARY))
    return ImplicationQuery(
        schema=schema, premises=(_ci(["A"], ["B"]),), conclusion=_ci(["A"], ["B"])
    )


def conditional_to_marginal_query() -> ImplicationQuery:
    """A _||_ B | C  =>  A _||_ B, binary."""
    schema = Schema.of(("A", BINARY), ("B", BINARY), ("C", BINARY))
    return ImplicationQuery(
        schema=schema, premises=(_ci(["A"], ["B"], ["C"]),), conclusion=_ci(["A"], ["B"])
    )


PRESETS = {
    "deconfounder": two_cause_deconfounder_query,
    "transitivity": transitivity_query,
    "tautology": tautology_query,
    "conditional-to-marginal": conditional_to_marginal_query,
}
