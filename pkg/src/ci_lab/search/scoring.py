"""
Violation scores: continuous surrogates for the boolean independence checks.

violation_score is exact (Fraction) and is zero iff the statement holds.
CompiledStatement evaluates the same quantity in float64 over a fixed list of
candidate cells, for the inner loops of the search.
"""

from __future__ import annotations

from collections.abc import Sequence
from fractions import Fraction

import numpy as np
from numpy.typing import NDArray

from ci_lab.independence import CIStatement, MutualStatement, strata_masses
from ci_lab.prob_core import JointTable, Schema

Key = tuple[str, ...]
FloatArray = NDArray[np.float64]


def violation_score(table: JointTable, s: CIStatement) -> Fraction:
    """
    max over positive strata z and over (x, y) of |P(x,y,z)P(z) - P(x,z)P(y,z)|.

    Raises:
        UnknownVariableException, OverlappingSetsException
    """
    acc = strata_masses(table, s)
    xs_by_z: dict[Key, list[Key]] = {}
    ys_by_z: dict[Key, list[Key]] = {}
    for z, x in acc.xz:
        xs_by_z.setdefault(z, []).append(x)
    for z, y in acc.yz:
        ys_by_z.setdefault(z, []).append(y)

    worst = Fraction(0)
    for z, pz in acc.z.items():
        for x in xs_by_z[z]:
            pxz = acc.xz[(z, x)]
            for y in ys_by_z[z]:
                pxyz = acc.xyz.get((z, x, y), Fraction(0))
                worst = max(worst, abs(pxyz * pz - pxz * acc.yz[(z, y)]))
    return worst


def _dense_ids(cells: Sequence[Key], positions: Sequence[int]) -> tuple[NDArray[np.int64], int]:
    """Index each cell's projection onto `positions`; returns (ids, number of distinct values)."""
    if not positions:
        return np.zeros(len(cells), dtype=np.int64), 1
    index: dict[Key, int] = {}
    ids = [index.setdefault(tuple(cell[i] for i in positions), len(index)) for cell in cells]
    return np.asarray(ids, dtype=np.int64), len(index)


class CompiledStatement:
    """
    A CI or mutual-independence statement bound to a fixed cell list.

    `score(p)` takes one weight per cell (any nonnegative scale) and returns
    the largest factorization residual. With integer weights the residual is
    computed exactly in float64, so score == 0 is an exact test there.
    """

    def __init__(self, schema: Schema, cells: Sequence[Key], statement: CIStatement | MutualStatement):
        statement.validate(schema)
        self.statement = statement
        if isinstance(statement, MutualStatement):
            group_sets = list(statement.groups)
        else:
            group_sets = [statement.x, statement.y]
        self._z, self._nz = _dense_ids(cells, [schema.index(n) for n in sorted(statement.given)])
        self._groups = [
            _dense_ids(cells, [schema.index(n) for n in sorted(g)]) for g in group_sets
        ]
        sizes = [n for _, n in self._groups]
        joint = self._z.copy()
        for ids, n in self._groups:
            joint = joint * n + ids
        self._joint = joint
        self._shape = (self._nz, *sizes)

    def score(self, p: FloatArray) -> float:
        m = len(self._groups)
        pz = np.bincount(self._z, weights=p, minlength=self._nz)
        joint = np.bincount(self._joint, weights=p, minlength=int(np.prod(self._shape))).reshape(
            self._shape
        )
        product = np.ones(self._shape)
        for i, (ids, n) in enumerate(self._groups):
            margin = np.bincount(self._z * n + ids, weights=p, minlength=self._nz * n)
            view = [self._nz] + [1] * m
            view[i + 1] = n
            product = product * margin.reshape(view)
        scale = pz.reshape([self._nz] + [1] * m) ** (m - 1)
        residual = np.abs(joint * scale - product)
        return float(residual.max()) if residual.size else 0.0


class CompiledQuery:
    """All statements of a query compiled against one cell list."""

    def __init__(
        self,
        schema: Schema,
        cells: Sequence[Key],
        premises: Sequence[CIStatement | MutualStatement],
        conclusion: CIStatement,
        penalty: float,
    ):
        self.premises = [CompiledStatement(schema, cells, s) for s in premises]
        self.conclusion = CompiledStatement(schema, cells, conclusion)
        self.penalty = penalty

    def premise_scores(self, p: FloatArray) -> list[float]:
        return [s.score(p) for s in self.premises]

    def objective(self, p: FloatArray) -> float:
        """Conclusion violation minus the weighted premise violations; larger is better."""
        return self.conclusion.score(p) - self.penalty * sum(self.premise_scores(p))

    def looks_like_witness(self, p: FloatArray, tol: float = 1e-12) -> bool:
        """Float pre-check before exact verification."""
        return all(s <= tol for s in self.premise_scores(p)) and self.conclusion.score(p) > tol
