"""
Wire formats for ci-lab.

- documents: pydantic models for table, claim, query and model files
- loader: JSON / YAML file loading into those models (import from ci_lab.schema.loader)
"""

from ci_lab.schema.documents import (
    ClaimDocument,
    ClassDocument,
    EntryDocument,
    ModelDocument,
    MutualDocument,
    QueryDocument,
    RolesDocument,
    TableDocument,
    VariableDocument,
)

__all__ = [
    "ClaimDocument",
    "ClassDocument",
    "EntryDocument",
    "ModelDocument",
    "MutualDocument",
    "QueryDocument",
    "RolesDocument",
    "TableDocument",
    "VariableDocument",
]
