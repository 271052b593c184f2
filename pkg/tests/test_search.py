"""Tests for violation scores, implication queries and counterexample search."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from pydantic import ValidationError

from ci_lab.claims.fixtures import build_xor_triple
from ci_lab.exceptions import GridTooLargeException, SchemaTooLargeException, TableValidationException
from ci_lab.independence import CIStatement
from ci_lab.prob_core import Schema, table_from_document
from ci_lab.search import (
    PRESETS,
    ImplicationQuery,
    SearchConfig,
    SearchMode,
    conditional_to_marginal_query,
    exhaustive_grid_search,
    find_counterexample,
    is_counterexample,
    largest_remainder_snap,
    tautology_query,
    transitivity_query,
    two_cause_deconfounder_query,
    verify,
    violation_score,
)
from ci_lab.search.scoring import CompiledStatement
from tests.conftest import BINARY, joint_tables


def ci(x, y, z=()):
    return CIStatement(frozenset(x), frozenset(y), frozenset(z))


class TestViolationScore:
    """Exact scores are zero iff the statement holds."""

    def test_ce1_conclusion_score(self, ce1):
        assert violation_score(ce1.table, ci(["A1", "A2"], ["W"], ["Z"])) == Fraction(1, 32)

    def test_satisfied_statement_scores_zero(self, ce1):
        assert violation_score(ce1.table, ci(["A1"], ["W"], ["Z"])) == 0

    @settings(max_examples=300, deadline=None)
    @given(joint_tables())
    def test_zero_iff_ci(self, table):
        """Property: score == 0 exactly when is_ci holds."""
        from ci_lab.independence import is_ci

        s = ci(["V0"], ["V1"], ["V2"])
        assert (violation_score(table, s) == 0) == is_ci(table, s)

    def test_compiled_matches_exact_on_integer_weights(self, ce1):
        cells = [key for key, _ in ce1.table.items()]
        weights = np.array([float(p * 16) for _, p in ce1.table.items()])
        compiled = CompiledStatement(ce1.table.schema, cells, ci(["A1", "A2"], ["W"], ["Z"]))
        assert compiled.score(weights) > 0
        premise = CompiledStatement(ce1.table.schema, cells, ci(["A1"], ["A2"], ["Z"]))
        assert premise.score(weights) == 0.0


class TestImplicationQuery:
    """Query construction and verification."""

    def test_str(self):
        assert str(tautology_query()) == "[A _||_ B |] => A _||_ B |"

    def test_conclusion_is_premise(self):
        assert tautology_query().conclusion_is_premise
        assert not transitivity_query().conclusion_is_premise

    def test_symmetric_restatement_is_premise(self):
        schema = Schema.of(("A", BINARY), ("B", BINARY))
        query = ImplicationQuery(schema, (ci(["A"], ["B"]),), ci(["B"], ["A"]))
        assert query.conclusion_is_premise

    def test_cells_validated(self):
        schema = Schema.of(("A", BINARY), ("B", BINARY))
        with pytest.raises(TableValidationException):
            ImplicationQuery(schema, (ci(["A"], ["B"]),), ci(["A"], ["B"]), cells=())
        with pytest.raises(TableValidationException):
            ImplicationQuery(
                schema, (ci(["A"], ["B"]),), ci(["A"], ["B"]), cells=(("0", "0"), ("0", "0"))
            )

    def test_restricted_deconfounder_query(self, ce1):
        query = two_cause_deconfounder_query(restrict_to=ce1.table)
        assert len(query.candidate_cells) == 8
        assert is_counterexample(ce1.table, query)
        report = verify(ce1.table, query)
        assert report.is_counterexample
        assert all(check.holds for check in report.premises)
        assert report.conclusion.holds is False

    def test_presets(self):
        assert set(PRESETS) == {"deconfounder", "transitivity", "tautology", "conditional-to-marginal"}


class TestSnap:
    def test_counts_sum_to_denominator(self):
        counts = largest_remainder_snap(np.array([0.3, 0.3, 0.4]), 8)
        assert sum(counts) == 8
        assert all(c >= 0 for c in counts)

    def test_all_zero_vector(self):
        assert sum(largest_remainder_snap(np.zeros(4), 64)) == 64


class TestHeuristicSearch:
    """Randomized search; every reported witness is exactly verified."""

    def test_finds_deconfounder_witness(self):
        outcome = find_counterexample(two_cause_deconfounder_query(), SearchConfig(seed=0))
        assert outcome.found
        assert outcome.table is not None
        assert is_counterexample(outcome.table, two_cause_deconfounder_query())
        assert outcome.verification.is_counterexample

    def test_witness_document_round_trips(self):
        outcome = find_counterexample(transitivity_query(), SearchConfig(seed=0))
        assert outcome.found
        from ci_lab.schema.documents import TableDocument

        table = table_from_document(TableDocument.model_validate(outcome.witness))
        assert table == outcome.table

    def test_deterministic_for_seed(self):
        cfg = SearchConfig(seed=7, restarts=16)
        first = find_counterexample(transitivity_query(), cfg)
        second = find_counterexample(transitivity_query(), cfg)
        assert first.witness == second.witness
        assert first.restarts_used == second.restarts_used

    def test_config_echoed(self):
        cfg = SearchConfig(seed=3, restarts=4)
        outcome = find_counterexample(transitivity_query(), cfg)
        assert outcome.config["seed"] == 3
        assert outcome.config["restarts"] == 4
        assert outcome.config["mode"] == "heuristic"

    def test_tautology_exhausts_budget(self):
        schema = Schema.of(("A", BINARY), ("B", BINARY), ("C", BINARY))
        query = ImplicationQuery(schema, (ci(["A"], ["B", "C"]),), ci(["A"], ["B"]))
        outcome = find_counterexample(query, SearchConfig(restarts=3, max_iterations=20))
        assert not outcome.found
        assert outcome.budget_exhausted
        assert outcome.restarts_used == 3

    def test_conclusion_is_premise_short_circuits(self):
        outcome = find_counterexample(tautology_query())
        assert not outcome.found
        assert not outcome.budget_exhausted
        assert outcome.restarts_used == 0

    def test_config_rejects_unknown_field(self):
        with pytest.raises(ValidationError):
            SearchConfig(sed=1)

    def test_schema_too_large(self, monkeypatch):
        monkeypatch.setenv("CI_LAB_MAX_CELLS", "8")
        with pytest.raises(SchemaTooLargeException) as exc_info:
            find_counterexample(two_cause_deconfounder_query())
        assert exc_info.value.actual == 16


def random_statement(rng, names):
    """Disjoint non-empty X and Y, the rest split at random into Z or dropped."""
    order = [str(name) for name in rng.permutation(names)]
    n_x = int(rng.integers(1, len(order)))
    n_y = int(rng.integers(1, len(order) - n_x + 1))
    x, y, rest = order[:n_x], order[n_x : n_x + n_y], order[n_x + n_y :]
    z = [name for name in rest if rng.random() < 0.5]
    return ci(x, y, z)


def random_queries(count, seed=0):
    rng = np.random.default_rng(seed)
    names = ["V0", "V1", "V2", "V3"]
    schema = Schema.of(*((name, BINARY) for name in names))
    for _ in range(count):
        premises = tuple(random_statement(rng, names) for _ in range(int(rng.integers(1, 4))))
        yield ImplicationQuery(schema, premises, random_statement(rng, names))


class TestSoundness:
    """A reported witness always satisfies the premises and violates the conclusion."""

    @pytest.mark.property
    @pytest.mark.slow
    @pytest.mark.parametrize("mode", [SearchMode.HEURISTIC, SearchMode.STRUCTURED])
    def test_random_queries_never_unsound(self, mode):
        found = 0
        for query in random_queries(100):
            outcome = find_counterexample(query, SearchConfig(seed=0, restarts=16, mode=mode))
            if outcome.found:
                found += 1
                assert is_counterexample(outcome.table, query), str(query)
                assert outcome.verification.is_counterexample
            else:
                assert outcome.table is None
        if mode is SearchMode.HEURISTIC:
            assert found > 0

    @pytest.mark.property
    def test_grid_witnesses_are_sound(self):
        for query in random_queries(20, seed=1):
            table = exhaustive_grid_search(query, 2)
            if table is not None:
                assert is_counterexample(table, query), str(query)


class TestStructuredSearch:
    def test_deconfounder(self):
        outcome = find_counterexample(
            two_cause_deconfounder_query(), SearchConfig(mode=SearchMode.STRUCTURED)
        )
        assert outcome.found
        assert outcome.mode == "structured"
        assert is_counterexample(outcome.table, two_cause_deconfounder_query())

    def test_transitivity(self):
        outcome = find_counterexample(transitivity_query(), SearchConfig(mode="structured"))
        assert outcome.found


class TestExhaustiveGrid:
    """Deterministic enumeration; None is a definitive negative at that resolution."""

    @pytest.mark.parametrize("denominator", [2, 4, 8])
    def test_sound_implication_has_no_witness(self, denominator):
        schema = Schema.of(("A", BINARY), ("B", BINARY), ("C", BINARY))
        query = ImplicationQuery(schema, (ci(["A"], ["B", "C"]),), ci(["A"], ["B"]))
        assert exhaustive_grid_search(query, denominator) is None

    def test_ce1_support(self, ce1):
        query = two_cause_deconfounder_query(restrict_to=ce1.table)
        table = exhaustive_grid_search(query, 8)
        assert table is not None
        assert is_counterexample(table, query)
        assert all((p * 8).denominator == 1 for p in table.entries.values())

    def test_conditional_to_marginal(self):
        table = exhaustive_grid_search(conditional_to_marginal_query(), 4)
        assert table is not None
        assert is_counterexample(table, conditional_to_marginal_query())

    def test_grid_mode_outcome(self):
        outcome = find_counterexample(
            conditional_to_marginal_query(), SearchConfig(mode="exhaustive_grid", grid_denominator=4)
        )
        assert outcome.found
        assert outcome.restarts_used == 0

    def test_grid_bound(self, monkeypatch):
        monkeypatch.setenv("CI_LAB_MAX_GRID_TABLES", "10")
        with pytest.raises(GridTooLargeException):
            exhaustive_grid_search(transitivity_query(), 8)

    def test_xor_is_pairwise_only(self):
        """The XOR triple is the smallest pairwise-but-not-joint witness."""
        schema = Schema.of(("A1", BINARY), ("A2", BINARY), ("W", BINARY))
        query = ImplicationQuery(
            schema,
            (ci(["A1"], ["W"]), ci(["A2"], ["W"]), ci(["A1"], ["A2"])),
            ci(["A1", "A2"], ["W"]),
            cells=tuple(key for key, _ in build_xor_triple().items()),
        )
        table = exhaustive_grid_search(query, 4)
        assert table == build_xor_triple()
