"""
Text grammar for CI statements.

    X1,X2 _||_ Y | Z1,Z2
    A1 _||_ A2 |          (empty conditioning set)
    A1 _||_ A2 | -        (same)
    A1 _||_ A2            (same)

Whitespace is insignificant. Names are not checked here; an unknown or
repeated name surfaces when the statement is evaluated against a schema.
"""

from __future__ import annotations

import re

from ci_lab.exceptions import ParseException
from ci_lab.independence import CIStatement

INDEP = "_||_"
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*")


def _parse_names(text: str, segment: str, offset: int, allow_empty: bool) -> list[str]:
    stripped = segment.strip()
    if not stripped or (allow_empty and stripped == "-"):
        if allow_empty:
            return []
        raise ParseException("Expected at least one variable name", text=text, position=offset)
    names: list[str] = []
    cursor = offset
    for part in segment.split(","):
        name = part.strip()
        position = cursor + (len(part) - len(part.lstrip()))
        if not _NAME.fullmatch(name):
            raise ParseException(f"Invalid variable name {name!r}", text=text, position=position)
        names.append(name)
        cursor += len(part) + 1
    return names


def parse_ci_statement(text: str) -> CIStatement:
    """
    Parse `X _||_ Y | Z`.

    Raises:
        ParseException: Malformed text; `position` is the 0-based offset of the problem
    """
    first = text.find(INDEP)
    if first < 0:
        raise ParseException(f"Missing {INDEP!r}", text=text, position=len(text))
    second = text.find(INDEP, first + len(INDEP))
    if second >= 0:
        raise ParseException(f"More than one {INDEP!r}", text=text, position=second)

    left = text[:first]
    rest_offset = first + len(INDEP)
    rest = text[rest_offset:]
    bar = rest.find("|")
    if bar >= 0 and "|" in rest[bar + 1 :]:
        raise ParseException("More than one '|'", text=text, position=rest_offset + rest.index("|", bar + 1))
    right = rest if bar < 0 else rest[:bar]
    given = "" if bar < 0 else rest[bar + 1 :]

    x = _parse_names(text, left, 0, allow_empty=False)
    y = _parse_names(text, right, rest_offset, allow_empty=False)
    z = _parse_names(text, given, rest_offset + bar + 1, allow_empty=True) if bar >= 0 else []
    return CIStatement(frozenset(x), frozenset(y), frozenset(z))


def parse_groups(text: str) -> list[list[str]]:
    """`A1;A2,A3` -> [["A1"], ["A2", "A3"]] for mutual-independence checks."""
    groups = []
    offset = 0
    for segment in text.split(";"):
        groups.append(_parse_names(text, segment, offset, allow_empty=False))
        offset += len(segment) + 1
    if len(groups) < 2:
        raise ParseException("Mutual independence needs at least two groups", text=text, position=len(text))
    return groups


def parse_assignment(text: str) -> dict[str, str]:
    """`A1=0,A2=1` -> {"A1": "0", "A2": "1"}."""
    assignment: dict[str, str] = {}
    offset = 0
    for part in text.split(","):
        name, sep, label = part.partition("=")
        if not sep or not name.strip() or not label.strip():
            raise ParseException("Expected name=label", text=text, position=offset)
        if name.strip() in assignment:
            raise ParseException(f"{name.strip()} assigned twice", text=text, position=offset)
        assignment[name.strip()] = label.strip()
        offset += len(part) + 1
    return assignment
