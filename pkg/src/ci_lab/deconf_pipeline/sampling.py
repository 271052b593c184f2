"""
Finite samples of the causes.

A Dataset is the sample-level face of a table marginal: rows of outcome
labels in schema order, plus the seed that produced them. CSV files carry a
header of variable names and one label per cell.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
import polars as pl
from numpy.typing import NDArray

from ci_lab.exceptions import EmptyDataException, FormatException
from ci_lab.prob_core import JointTable, Schema, Variable, marginal

logger = logging.getLogger(__name__)

Key = tuple[str, ...]


@dataclass(frozen=True)
class Dataset:
    """Rows of labels over `schema`; `seed` records provenance (None for loaded data)."""

    schema: Schema
    rows: tuple[Key, ...]
    seed: int | None = None

    def __post_init__(self) -> None:
        rows = tuple(tuple(row) for row in self.rows)
        for row in rows:
            if len(row) != len(self.schema):
                raise FormatException(f"Row has {len(row)} labels, expected {len(self.schema)}")
            self.schema.key(dict(zip(self.schema.names, row)))
        object.__setattr__(self, "rows", rows)

    def __len__(self) -> int:
        return len(self.rows)

    def frequencies(self) -> dict[Key, Fraction]:
        """Exact empirical frequency of every observed row."""
        if not self.rows:
            raise EmptyDataException("Dataset has no rows")
        n = len(self.rows)
        return {key: Fraction(count, n) for key, count in sorted(Counter(self.rows).items())}

    def indices(self) -> NDArray[np.int64]:
        """(n, m) array of support indices."""
        lookup = [{label: i for i, label in enumerate(var.support)} for var in self.schema.variables]
        return np.array(
            [[lookup[j][label] for j, label in enumerate(row)] for row in self.rows],
            dtype=np.int64,
        ).reshape(len(self.rows), len(self.schema))

    def to_frame(self) -> pl.DataFrame:
        columns = {
            name: [row[j] for row in self.rows] for j, name in enumerate(self.schema.names)
        }
        return pl.DataFrame(columns, schema={name: pl.Utf8 for name in self.schema.names})

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        self.to_frame().write_csv(path)
        logger.info("Wrote %d rows to %s", len(self.rows), path)
        return path

    @classmethod
    def from_csv(cls, path: str | Path, schema: Schema | None = None) -> Dataset:
        """
        Load a CSV with a header of variable names.

        Without a schema, each column's support is its sorted distinct labels.

        Raises:
            FormatException: Unreadable file, missing cells or header mismatch
        """
        path = Path(path)
        try:
            frame = pl.read_csv(path, infer_schema_length=0)
        except (OSError, pl.exceptions.PolarsError) as e:
            raise FormatException(f"Cannot read dataset: {e}", path=str(path)) from e
        if frame.null_count().sum_horizontal().item() > 0:
            raise FormatException("Dataset has empty cells", path=str(path))
        if schema is None:
            schema = Schema(
                tuple(Variable(name, tuple(sorted(frame[name].unique().to_list()))) for name in frame.columns)
            )
        elif list(frame.columns) != list(schema.names):
            raise FormatException(
                f"Header {frame.columns} does not match schema {list(schema.names)}", path=str(path)
            )
        return cls(schema=schema, rows=tuple(frame.iter_rows()))


def simulate_samples(table: JointTable, vars: Iterable[str], n: int, seed: int = 0) -> Dataset:
    """
    n i.i.d. draws from marginal(table, vars); deterministic given seed.

    Raises:
        UnknownVariableException: A name is not in the schema
        ValueError: n < 1
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    sub = marginal(table, set(vars))
    items = sub.items()
    probs = np.array([float(p) for _, p in items])
    rng = np.random.default_rng(seed)
    draws = rng.choice(len(items), size=n, p=probs / probs.sum())
    keys: Sequence[Key] = [key for key, _ in items]
    logger.debug("Sampled %d rows over %s (seed=%d)", n, ",".join(sub.schema.names), seed)
    return Dataset(schema=sub.schema, rows=tuple(keys[i] for i in draws), seed=seed)
