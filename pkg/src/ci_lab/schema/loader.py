"""
File loading for tables, claim instances, queries and models.

`.yaml` / `.yml` files are read with yaml.safe_load, everything else as JSON;
both are validated by the same pydantic documents.

Usage:
    from ci_lab.schema.loader import load_instance, load_query, load_table

    table = load_table("ce1.json")
    query = load_query("deconfounder.yaml")
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, TypeVar

import yaml
from pydantic import BaseModel, ValidationError

from ci_lab.claims import ClaimInstance, instance_from_document
from ci_lab.cli.grammar import parse_ci_statement
from ci_lab.deconf_pipeline import LatentClassModel, model_from_document
from ci_lab.exceptions import FormatException, ParseException
from ci_lab.independence import MutualStatement
from ci_lab.prob_core import JointTable, Schema, Variable, table_from_document
from ci_lab.schema.documents import (
    ClaimDocument,
    ModelDocument,
    MutualDocument,
    QueryDocument,
    TableDocument,
)
from ci_lab.search.query import ImplicationQuery

DocumentT = TypeVar("DocumentT", bound=BaseModel)


def read_document(path: str | Path, model: type[DocumentT]) -> DocumentT:
    """
    Parse a JSON or YAML file into `model`.

    Raises:
        FormatException: Missing file, syntax error or schema mismatch
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise FormatException(f"Cannot read {path}: {e.strerror}", path=str(path)) from e
    try:
        raw: Any
        if path.suffix.lower() in (".yaml", ".yml"):
            raw = yaml.safe_load(text)
        else:
            raw = json.loads(text)
        return model.model_validate(raw)
    except (yaml.YAMLError, json.JSONDecodeError) as e:
        raise FormatException(f"Malformed file {path}: {e}", path=str(path)) from e
    except ValidationError as e:
        raise FormatException(
            f"{path} is not a valid {model.__name__}: {e.error_count()} error(s)\n{e}", path=str(path)
        ) from e


def load_table(path: str | Path) -> JointTable:
    """Load a JointTable file."""
    return table_from_document(read_document(path, TableDocument))


def load_instance(path: str | Path) -> ClaimInstance:
    """Load a claim-instance file (table fields plus roles)."""
    return instance_from_document(read_document(path, ClaimDocument))


def load_query(path: str | Path) -> ImplicationQuery:
    """
    Load an implication-query file; statements use the CI text grammar.

    Raises:
        FormatException: Unreadable file, or a statement that does not parse
    """
    doc = read_document(path, QueryDocument)
    try:
        return query_from_document(doc)
    except ParseException as e:
        raise FormatException(f"{path}: {e.message}", path=str(path)) from e


def load_model(path: str | Path) -> LatentClassModel:
    """Load a latent-class model file."""
    return model_from_document(read_document(path, ModelDocument))


def query_from_document(doc: QueryDocument) -> ImplicationQuery:
    """
    Raises:
        ParseException: A statement does not follow the CI grammar
        UnknownVariableException / OverlappingSetsException: Ill-formed statement
    """
    schema = Schema(tuple(Variable(v.name, tuple(v.support)) for v in doc.variables))
    premises = [
        MutualStatement(tuple(frozenset(g) for g in p.mutual), frozenset(p.given))
        if isinstance(p, MutualDocument)
        else parse_ci_statement(p)
        for p in doc.premises
    ]
    cells = None
    if doc.cells is not None:
        cells = tuple(schema.key(assignment) for assignment in doc.cells)
    return ImplicationQuery(
        schema=schema,
        premises=tuple(premises),
        conclusion=parse_ci_statement(doc.conclusion),
        cells=cells,
    )
