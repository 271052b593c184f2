"""
Canonical JSON codec for joint tables.

The serializer emits variables in schema order and entries in canonical
assignment order, so equal tables serialize to identical bytes.
"""

from __future__ import annotations

from typing import Any

from ci_lab.prob_core.rational import format_rational
from ci_lab.prob_core.table import JointTable, Schema, Variable, make_table
from ci_lab.schema.documents import EntryDocument, TableDocument, VariableDocument


def table_to_document(table: JointTable) -> TableDocument:
    return TableDocument(
        variables=[
            VariableDocument(name=v.name, support=list(v.support)) for v in table.schema.variables
        ],
        entries=[
            EntryDocument(assignment=assignment, p=format_rational(p))
            for assignment, p in table.assignments()
        ],
    )


def table_from_document(doc: TableDocument | Any) -> JointTable:
    """Build a validated table from a TableDocument (or any document with the same fields)."""
    schema = Schema(tuple(Variable(v.name, tuple(v.support)) for v in doc.variables))
    return make_table(schema, [(entry.assignment, entry.p) for entry in doc.entries])


def table_to_json(table: JointTable) -> str:
    """Canonical compact JSON."""
    return table_to_document(table).model_dump_json()


def table_from_json(text: str | bytes) -> JointTable:
    """
    Parse table JSON.

    Raises:
        pydantic.ValidationError: Unknown fields or wrong shapes
        TableValidationException: Table invariants violated
    """
    return table_from_document(TableDocument.model_validate_json(text))
