"""
Counterexample search for CI-implication queries.

Modes:
- heuristic: seeded random restarts. Each restart first hill-climbs over
  parity tables (uniform coin vectors mapped through modular linear maps, which
  are exact on the 1/2^r grid) and then runs a continuous mass-transfer search
  whose result is snapped to the 1/snap_denominator grid.
- structured: deterministic enumeration of the same parity templates, smallest
  coin count first.
- exhaustive_grid: every table on the 1/D grid, in canonical order.

Whatever the mode, a table is returned only after exact verification.

Usage:
    from ci_lab.search import SearchConfig, find_counterexample, transitivity_query

    outcome = find_counterexample(transitivity_query(), SearchConfig(seed=0))
    outcome.found, outcome.table
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Iterator, Sequence
from enum import Enum
from fractions import Fraction

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from tenacity import Retrying, retry_if_result, stop_after_attempt

from ci_lab.config import get_settings
from ci_lab.exceptions import GridTooLargeException, SchemaTooLargeException
from ci_lab.prob_core import JointTable, make_table, table_to_document
from ci_lab.search.query import ImplicationQuery, is_counterexample, verify
from ci_lab.search.scoring import CompiledQuery, FloatArray
from ci_lab.validation.models import SearchOutcome

logger = logging.getLogger(__name__)

Key = tuple[str, ...]

# 2**6 divides the default snap denominator; parity tables stay on its grid.
MAX_COINS = 6
WITNESS_TOL = 1e-12


class SearchMode(str, Enum):
    HEURISTIC = "heuristic"
    EXHAUSTIVE_GRID = "exhaustive_grid"
    STRUCTURED = "structured"


class SearchConfig(BaseModel):
    """Search knobs; echoed verbatim in every SearchOutcome."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = 0
    restarts: int = Field(default=256, ge=1)
    max_iterations: int = Field(default=200, ge=1, description="Moves per restart phase")
    snap_denominator: int = Field(default=64, ge=2)
    premise_penalty_weight: float = Field(default=16.0, gt=0)
    mode: SearchMode = SearchMode.HEURISTIC
    grid_denominator: int = Field(default=8, ge=1, description="D for exhaustive_grid mode")


def _table_from_counts(query: ImplicationQuery, cells: Sequence[Key], counts: Sequence[int]) -> JointTable:
    total = sum(counts)
    names = query.schema.names
    return make_table(
        query.schema,
        [
            (dict(zip(names, cell)), Fraction(int(c), total))
            for cell, c in zip(cells, counts)
            if c
        ],
    )


class _ParityFamily:
    """
    Tables generated by r fair coins: variable v takes label
    support_v[(coef_v . coins + offset_v) mod |support_v|].
    """

    def __init__(self, query: ImplicationQuery, cells: Sequence[Key]):
        self.query = query
        self.cells = cells
        self.cell_index = {cell: i for i, cell in enumerate(cells)}
        self.supports = [var.support for var in query.schema.variables]

    def weights(self, coins: int, coefs: np.ndarray, offsets: np.ndarray) -> FloatArray | None:
        """Integer counts per cell, or None when a coin vector lands outside the cells."""
        p = np.zeros(len(self.cells))
        for bits in itertools.product((0, 1), repeat=coins):
            key = tuple(
                support[(int(np.dot(coefs[v], bits)) + int(offsets[v])) % len(support)]
                for v, support in enumerate(self.supports)
            )
            i = self.cell_index.get(key)
            if i is None:
                return None
            p[i] += 1.0
        return p

    def templates(self, max_coins: int) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
        """Zero-offset templates, fewest coins first."""
        n = len(self.supports)
        for coins in range(1, max_coins + 1):
            per_variable = [
                list(itertools.product(range(len(s)), repeat=coins)) for s in self.supports
            ]
            for choice in itertools.product(*per_variable):
                yield coins, np.array(choice, dtype=np.int64).reshape(n, coins), np.zeros(n, np.int64)


def largest_remainder_snap(p: FloatArray, denominator: int) -> list[int]:
    """Round a probability vector to integer counts summing to `denominator`."""
    p = np.clip(p, 0.0, None)
    total = p.sum()
    if total <= 0:
        p = np.ones_like(p)
        total = p.sum()
    scaled = p / total * denominator
    counts = np.floor(scaled).astype(np.int64)
    short = denominator - int(counts.sum())
    order = np.argsort(-(scaled - counts), kind="stable")
    counts[order[:short]] += 1
    return [int(c) for c in counts]


class _Searcher:
    def __init__(self, query: ImplicationQuery, config: SearchConfig):
        self.query = query
        self.config = config
        self.cells = query.candidate_cells
        self.compiled = CompiledQuery(
            query.schema, self.cells, query.premises, query.conclusion, config.premise_penalty_weight
        )
        self.family = _ParityFamily(query, self.cells)
        self.max_coins = min(
            MAX_COINS, max(1, int(math.log2(config.snap_denominator))), max(1, len(query.schema) + 1)
        )

    def _verified(self, counts: Sequence[int]) -> JointTable | None:
        table = _table_from_counts(self.query, self.cells, counts)
        if is_counterexample(table, self.query):
            return table
        logger.debug("Float pre-check passed but exact verification failed")
        return None

    def _parity_phase(self, rng: np.random.Generator) -> JointTable | None:
        n = len(self.family.supports)
        coins = int(rng.integers(1, self.max_coins + 1))
        sizes = np.array([len(s) for s in self.family.supports])
        coefs = rng.integers(0, sizes[:, None], size=(n, coins))
        offsets = rng.integers(0, sizes)
        current = self.family.weights(coins, coefs, offsets)
        score = -math.inf if current is None else self.compiled.objective(current)

        for _ in range(self.config.max_iterations):
            if current is not None and self.compiled.looks_like_witness(current, WITNESS_TOL):
                table = self._verified([int(c) for c in current])
                if table is not None:
                    return table
            new_coefs, new_offsets = coefs.copy(), offsets.copy()
            v = int(rng.integers(n))
            if rng.random() < 0.8:
                new_coefs[v, int(rng.integers(coins))] = rng.integers(sizes[v])
            else:
                new_offsets[v] = rng.integers(sizes[v])
            candidate = self.family.weights(coins, new_coefs, new_offsets)
            if candidate is None:
                continue
            candidate_score = self.compiled.objective(candidate)
            if candidate_score >= score:
                coefs, offsets, current, score = new_coefs, new_offsets, candidate, candidate_score
        return None

    def _continuous_phase(self, rng: np.random.Generator) -> JointTable | None:
        if len(self.cells) < 2:
            return None
        p = rng.dirichlet(np.ones(len(self.cells)))
        score = self.compiled.objective(p)
        for _ in range(self.config.max_iterations):
            i, j = rng.choice(len(self.cells), size=2, replace=False)
            if p[i] <= 0:
                continue
            moved = p.copy()
            delta = p[i] * rng.random()
            moved[i] -= delta
            moved[j] += delta
            moved_score = self.compiled.objective(moved)
            if moved_score >= score:
                p, score = moved, moved_score
        counts = largest_remainder_snap(p, self.config.snap_denominator)
        if self.compiled.looks_like_witness(np.array(counts, dtype=float), WITNESS_TOL):
            return self._verified(counts)
        return None

    def restart(self, index: int) -> JointTable | None:
        rng = np.random.default_rng([self.config.seed, index])
        table = self._parity_phase(rng)
        if table is None:
            table = self._continuous_phase(rng)
        if table is not None:
            logger.info("Restart %d produced a verified witness", index)
        return table

    def heuristic(self) -> tuple[JointTable | None, int]:
        retryer = Retrying(
            stop=stop_after_attempt(self.config.restarts),
            retry=retry_if_result(lambda table: table is None),
            retry_error_callback=lambda state: None,
        )
        found: JointTable | None = None
        used = 0
        for attempt in retryer:
            with attempt:
                used = attempt.retry_state.attempt_number
                found = self.restart(used - 1)
            if not attempt.retry_state.outcome.failed:
                attempt.retry_state.set_result(found)
        return found, used

    def structured(self) -> tuple[JointTable | None, int]:
        budget = self.config.restarts * self.config.max_iterations
        tried = 0
        for coins, coefs, offsets in itertools.islice(self.family.templates(3), budget):
            tried += 1
            weights = self.family.weights(coins, coefs, offsets)
            if weights is None or not self.compiled.looks_like_witness(weights, WITNESS_TOL):
                continue
            table = self._verified([int(c) for c in weights])
            if table is not None:
                logger.info("Template %d (%d coins) is a verified witness", tried, coins)
                return table, tried
        return None, tried


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Nonnegative integer vectors of length `parts` summing to `total`, ascending lexicographic."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first, *rest)


def exhaustive_grid_search(query: ImplicationQuery, denominator: int) -> JointTable | None:
    """
    First table (entries multiples of 1/denominator, candidate cells in
    canonical order, count vectors ascending) that is an exact counterexample.

    None is a definitive negative at this grid resolution.

    Raises:
        GridTooLargeException: More grid tables than the configured bound
    """
    if denominator < 1:
        raise ValueError(f"denominator must be >= 1, got {denominator}")
    cells = query.candidate_cells
    size = math.comb(denominator + len(cells) - 1, len(cells) - 1)
    limit = get_settings().max_grid_tables
    if size > limit:
        raise GridTooLargeException(
            f"Grid with D={denominator} over {len(cells)} cells is too large", limit=limit, actual=size
        )
    if query.conclusion_is_premise:
        return None

    # Counts are small integers, so the float residuals are exact.
    compiled = CompiledQuery(query.schema, cells, query.premises, query.conclusion, 1.0)
    for counts in _compositions(denominator, len(cells)):
        weights = np.array(counts, dtype=float)
        if not compiled.looks_like_witness(weights, tol=0.0):
            continue
        table = _table_from_counts(query, cells, counts)
        if is_counterexample(table, query):
            logger.info("Grid witness at D=%d", denominator)
            return table
    logger.info("No grid witness at D=%d over %d tables", denominator, size)
    return None


def find_counterexample(query: ImplicationQuery, config: SearchConfig | None = None) -> SearchOutcome:
    """
    Look for a table satisfying every premise and violating the conclusion.

    An exhausted budget is a normal outcome (found=False, budget_exhausted=True).

    Raises:
        SchemaTooLargeException: Product support exceeds Settings.max_cells
        GridTooLargeException: exhaustive_grid mode over too many tables
    """
    cfg = config or SearchConfig()
    limit = get_settings().max_cells
    if query.schema.cell_count > limit:
        raise SchemaTooLargeException(
            "Schema product support exceeds the search bound",
            limit=limit,
            actual=query.schema.cell_count,
        )
    echo = cfg.model_dump(mode="json")

    if query.conclusion_is_premise:
        logger.warning("Conclusion restates a premise; no counterexample can exist")
        return SearchOutcome(
            found=False, budget_exhausted=False, mode=cfg.mode.value, restarts_used=0, config=echo
        )

    table: JointTable | None
    if cfg.mode is SearchMode.EXHAUSTIVE_GRID:
        table, used = exhaustive_grid_search(query, cfg.grid_denominator), 0
        exhausted = False
    else:
        searcher = _Searcher(query, cfg)
        if cfg.mode is SearchMode.STRUCTURED:
            table, used = searcher.structured()
        else:
            table, used = searcher.heuristic()
        exhausted = table is None

    if table is None:
        logger.info("No counterexample found (%s, %d attempts)", cfg.mode.value, used)
        return SearchOutcome(
            found=False, budget_exhausted=exhausted, mode=cfg.mode.value, restarts_used=used, config=echo
        )
    return SearchOutcome(
        found=True,
        budget_exhausted=False,
        mode=cfg.mode.value,
        restarts_used=used,
        witness=table_to_document(table).model_dump(mode="json"),
        table=table,
        verification=verify(table, query),
        config=echo,
    )
