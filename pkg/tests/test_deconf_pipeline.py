"""Tests for sampling, latent-class EM, the substitute confounder and adjustment."""

import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from ci_lab.claims import build_cluster_instance, build_overlap_variant
from ci_lab.deconf_pipeline import (
    Dataset,
    EMConfig,
    LatentClassModel,
    adjustment_functional,
    align_classes,
    degenerate_conditioning_report,
    fit_latent_class_em,
    is_deterministic,
    log_likelihood,
    model_from_document,
    model_to_document,
    model_to_json,
    run_deconfounder,
    simulate_samples,
    substitute_confounder,
)
from ci_lab.exceptions import (
    EmptyDataException,
    FormatException,
    NotDeterministicException,
    RoleValidationException,
    TableValidationException,
    UnknownOutcomeException,
)
from ci_lab.independence import CIStatement, is_ci
from ci_lab.prob_core import Schema, extend_independent, point_mass
from ci_lab.schema.loader import load_model
from ci_lab.validation.models import ConditioningStatus
from tests.conftest import BINARY, joint_tables

CAUSES = ("A1", "A2")


class TestSampling:
    """simulate_samples and Dataset."""

    def test_rows_in_support(self, ce2):
        data = simulate_samples(ce2.table, CAUSES, 500, seed=1)
        assert data.schema.names == CAUSES
        assert len(data) == 500
        assert all(row != ("1", "2") and row != ("2", "1") for row in data.rows)

    def test_zero_cells_never_drawn(self, ce2):
        freqs = simulate_samples(ce2.table, CAUSES, 2000, seed=0).frequencies()
        assert ("1", "2") not in freqs
        assert ("2", "2") in freqs

    def test_point_mass(self):
        schema = Schema.of(("A1", BINARY), ("A2", BINARY))
        data = simulate_samples(point_mass(schema, {"A1": "1", "A2": "0"}), CAUSES, 50, seed=3)
        assert set(data.rows) == {("1", "0")}

    @pytest.mark.slow
    def test_frequencies_converge(self, ce2):
        freqs = simulate_samples(ce2.table, CAUSES, 100_000, seed=0).frequencies()
        assert abs(float(freqs[("0", "0")]) - 0.25) < 0.02
        assert abs(float(freqs[("2", "0")]) - 0.125) < 0.02

    def test_deterministic_for_seed(self, ce1):
        assert simulate_samples(ce1.table, CAUSES, 100, seed=5) == simulate_samples(ce1.table, CAUSES, 100, seed=5)

    def test_invalid_n(self, ce1):
        with pytest.raises(ValueError):
            simulate_samples(ce1.table, CAUSES, 0)

    def test_empty_frequencies(self):
        schema = Schema.of(("A1", BINARY))
        with pytest.raises(EmptyDataException):
            Dataset(schema=schema, rows=()).frequencies()

    def test_row_validation(self):
        schema = Schema.of(("A1", BINARY), ("A2", BINARY))
        with pytest.raises(FormatException):
            Dataset(schema=schema, rows=(("0",),))
        with pytest.raises(UnknownOutcomeException):
            Dataset(schema=schema, rows=(("0", "7"),))

    def test_csv_round_trip(self, ce2, tmp_path):
        data = simulate_samples(ce2.table, CAUSES, 200, seed=2)
        path = data.to_csv(tmp_path / "samples.csv")
        loaded = Dataset.from_csv(path, schema=data.schema)
        assert loaded.rows == data.rows
        assert loaded.seed is None

    def test_csv_header_mismatch(self, ce1, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("X,Y\n0,1\n")
        with pytest.raises(FormatException):
            Dataset.from_csv(path, schema=marginal_schema(ce1))

    def test_csv_missing_cell(self, tmp_path):
        path = tmp_path / "gap.csv"
        path.write_text("A1,A2\n0,\n1,1\n")
        with pytest.raises(FormatException):
            Dataset.from_csv(path)

    def test_csv_infers_schema(self, tmp_path):
        path = tmp_path / "free.csv"
        path.write_text("A1,A2\n1,b\n0,a\n")
        loaded = Dataset.from_csv(path)
        assert loaded.schema.support("A2") == ("a", "b")


def marginal_schema(inst):
    return inst.table.schema.restrict(CAUSES)


class TestLatentClassModel:
    """Exact models and their posteriors."""

    def test_from_table(self, ce2):
        model = LatentClassModel.from_table(ce2.table, CAUSES, "Z")
        assert model.k == 2
        assert model.weights == (Fraction(1, 2), Fraction(1, 2))
        assert model.categoricals[1][0] == (Fraction(1, 2), Fraction(0), Fraction(1, 2))

    def test_simplex_enforced(self):
        schema = Schema.of(("A1", BINARY))
        with pytest.raises(TableValidationException):
            LatentClassModel(
                schema=schema,
                weights=(Fraction(1, 2), Fraction(1, 3)),
                categoricals=(((Fraction(1), Fraction(0)),), ((Fraction(0), Fraction(1)),)),
                fitted=False,
            )

    def test_shared_cell_posterior_is_even(self, ce2):
        model = LatentClassModel.from_table(ce2.table, CAUSES, "Z")
        sub = substitute_confounder(model, {"A1": "0", "A2": "0"})
        assert sub.posterior == (Fraction(1, 2), Fraction(1, 2))
        assert sub.map_class == 0

    def test_exclusive_cell_posterior(self, ce2):
        model = LatentClassModel.from_table(ce2.table, CAUSES, "Z")
        assert substitute_confounder(model, {"A1": "2", "A2": "0"}).map_class == 1
        assert substitute_confounder(model, {"A1": "1", "A2": "1"}).posterior == (Fraction(1), Fraction(0))

    def test_zero_likelihood_assignment(self, ce2):
        model = LatentClassModel.from_table(ce2.table, CAUSES, "Z")
        sub = substitute_confounder(model, {"A1": "1", "A2": "2"})
        assert sub.zero_likelihood
        assert sub.posterior == (Fraction(1, 2), Fraction(1, 2))

    def test_document_round_trip(self, ce2):
        model = LatentClassModel.from_table(ce2.table, CAUSES, "Z")
        doc = model_to_document(model)
        assert doc.classes[0].weight == "1/2"
        assert model_from_document(doc) == model

    def test_fitted_model_file_round_trip(self, ce2, tmp_path):
        data = simulate_samples(ce2.table, CAUSES, 500, seed=1)
        fitted = fit_latent_class_em(data, 2, EMConfig(seed=1, restarts=2)).model
        path = tmp_path / "model.json"
        path.write_text(model_to_json(fitted))

        loaded = load_model(path)
        assert loaded == fitted
        assert loaded.fitted
        assert loaded.smoothing == fitted.smoothing
        assert log_likelihood(loaded, data) == log_likelihood(fitted, data)

    def test_exact_model_file_round_trip(self, ce2, tmp_path):
        model = LatentClassModel.from_table(ce2.table, CAUSES, "Z")
        path = tmp_path / "model.yaml"
        path.write_text(model_to_json(model))
        assert load_model(path) == model

    def test_model_file_missing_class_variable(self, ce2, tmp_path):
        doc = model_to_document(LatentClassModel.from_table(ce2.table, CAUSES, "Z")).model_dump()
        del doc["classes"][0]["categoricals"]["A2"]
        path = tmp_path / "model.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(TableValidationException):
            load_model(path)

    def test_permute(self, ce2):
        model = LatentClassModel.from_table(ce2.table, CAUSES, "Z")
        swapped = model.permute((1, 0))
        assert swapped.categoricals[0] == model.categoricals[1]
        assert align_classes(swapped, model) == (1, 0)


class TestEM:
    """fit_latent_class_em."""

    def test_single_class_closed_form(self, ce1):
        data = simulate_samples(ce1.table, CAUSES, 400, seed=0)
        fit = fit_latent_class_em(data, 1, EMConfig(smoothing=0.0))
        freq_a1 = sum(1 for row in data.rows if row[0] == "1") / len(data)
        assert fit.model.categoricals[0][0][1] == pytest.approx(freq_a1)
        assert fit.converged
        assert fit.n_iter == 0

    def test_rejects_bad_k(self, ce1):
        data = simulate_samples(ce1.table, CAUSES, 10, seed=0)
        with pytest.raises(ValueError):
            fit_latent_class_em(data, 0)

    def test_rejects_empty(self):
        with pytest.raises(EmptyDataException):
            fit_latent_class_em(Dataset(schema=Schema.of(("A1", BINARY)), rows=()), 2)

    @pytest.mark.slow
    def test_recovers_ce2_model(self, ce2):
        data = simulate_samples(ce2.table, CAUSES, 10_000, seed=0)
        fit = fit_latent_class_em(data, 2, EMConfig(seed=0))
        truth = LatentClassModel.from_table(ce2.table, CAUSES, "Z")
        true_ll = log_likelihood(truth, data)
        assert abs(fit.log_likelihood - true_ll) <= 0.01 * abs(true_ll)

        aligned = fit.model.permute(align_classes(fit.model, truth))
        for c in range(2):
            assert aligned.weights[c] == pytest.approx(0.5, abs=0.03)
            for j in range(2):
                expected = [float(p) for p in truth.categoricals[c][j]]
                assert list(aligned.categoricals[c][j]) == pytest.approx(expected, abs=0.03)

        # A 1 only occurs under Z=0 and a 2 only under Z=1.
        labelled = [(row, 0 if "1" in row else 1) for row in data.rows if "1" in row or "2" in row]
        hits = sum(
            substitute_confounder(aligned, dict(zip(CAUSES, row))).map_class == z for row, z in labelled
        )
        assert hits / len(labelled) >= 0.99

        posterior = substitute_confounder(aligned, {"A1": "1", "A2": "0"}).posterior
        assert posterior[0] == pytest.approx(1.0, abs=0.01)

    def test_trace_never_decreases(self, ce2):
        data = simulate_samples(ce2.table, CAUSES, 2000, seed=4)
        fit = fit_latent_class_em(data, 2, EMConfig(seed=4, restarts=3))
        trace = np.array(fit.trace)
        assert np.all(np.diff(trace) >= -1e-8 * np.abs(trace[:-1]).clip(min=1.0))
        assert fit.responsibilities.shape == (2000, 2)
        assert np.allclose(fit.responsibilities.sum(axis=1), 1.0)

    def test_deterministic_for_seed(self, ce2):
        data = simulate_samples(ce2.table, CAUSES, 1000, seed=0)
        first = fit_latent_class_em(data, 2, EMConfig(seed=9, restarts=2))
        second = fit_latent_class_em(data, 2, EMConfig(seed=9, restarts=2))
        assert first.log_likelihood == second.log_likelihood
        assert first.model == second.model


class TestAdjustment:
    """Exact adjustment functional."""

    @pytest.mark.parametrize("target", [{"A1": "0", "A2": "0"}, {"A1": "1", "A2": "1"}])
    def test_ce1_gap(self, ce1, target):
        report = adjustment_functional(ce1.table, CAUSES, "W", "Z", target)
        assert report.psi == 0
        assert report.baseline == Fraction(1, 2)
        assert report.gap == Fraction(-1, 2)

    def test_ce1_odd_parity_target(self, ce1):
        report = adjustment_functional(ce1.table, CAUSES, "W", "Z", {"A1": "1", "A2": "0"})
        assert report.psi == 1
        assert report.gap == Fraction(1, 2)

    def test_ce2_gap(self, ce2):
        report = adjustment_functional(ce2.table, CAUSES, "W", "Z", {"A1": "0", "A2": "0"})
        assert report.gap == Fraction(-1, 2)
        assert report.defined

    def test_ce2_degenerate_stratum(self, ce2):
        report = adjustment_functional(ce2.table, CAUSES, "W", "Z", {"A1": "1", "A2": "1"})
        assert report.degenerate_strata == ["1"]
        assert report.psi is None
        assert report.gap is None
        assert report.terms[1].conditional_mean is None

    def test_independent_w_has_no_gap(self, ce1):
        table = extend_independent(ce1.table, ("V", BINARY), ["1/3", "2/3"])
        report = adjustment_functional(table, CAUSES, "V", "Z", {"A1": "0", "A2": "1"})
        assert report.gap == 0

    def test_value_map(self, ce1):
        report = adjustment_functional(
            ce1.table, CAUSES, "W", "Z", {"A1": "0", "A2": "0"}, value_map={"0": 10, "1": 20}
        )
        assert report.psi == 10

    def test_partial_target_rejected(self, ce1):
        with pytest.raises(RoleValidationException):
            adjustment_functional(ce1.table, CAUSES, "W", "Z", {"A1": "0"})

    def test_json_rationals(self, ce1):
        dumped = adjustment_functional(ce1.table, CAUSES, "W", "Z", {"A1": "0", "A2": "0"}).model_dump(mode="json")
        assert dumped["gap"] == "-1/2"
        assert dumped["baseline"] == "1/2"


@pytest.mark.property
class TestAdjustmentProperties:
    @settings(max_examples=300, deadline=None)
    @given(joint_tables(n_vars=4, max_support=2))
    def test_ignorability_gives_zero_gap(self, table):
        """Property: causes _||_ W | Z with no degenerate strata means psi(a) == E[W]."""
        causes = ("V0", "V1")
        ignorable = is_ci(table, CIStatement(frozenset(causes), frozenset({"V2"}), frozenset({"V3"})))
        for labels in itertools.product(*(table.schema.support(c) for c in causes)):
            report = adjustment_functional(table, causes, "V2", "V3", dict(zip(causes, labels)))
            if ignorable and not report.degenerate_strata:
                assert report.gap == 0
            if report.degenerate_strata:
                assert report.psi is None

    @settings(max_examples=200, deadline=None)
    @given(joint_tables(n_vars=3, max_support=2, allow_zeros=False))
    def test_independent_outcome_has_no_gap(self, table):
        """Property: an outcome added independently of everything is never confounded."""
        extended = extend_independent(table, ("W", BINARY), ["1/4", "3/4"])
        report = adjustment_functional(extended, ("V0", "V1"), "W", "V2", {"V0": "0", "V1": "0"})
        assert report.baseline == Fraction(3, 4)
        assert report.gap == 0


class TestDegenerateConditioning:
    """Deterministic substitutes leave most conditioning events undefined."""

    def test_overlap_variant_off_manifold(self):
        inst = build_overlap_variant(1)
        causes = ("A1", "A2", "A3")
        assert is_deterministic(inst.table, causes, "Z")
        report = degenerate_conditioning_report(
            inst.table, causes, "Z", {"A1": "0", "A2": "0", "A3": "0"}, "1"
        )
        assert report.status is ConditioningStatus.OFF_MANIFOLD
        assert report.probability == 0
        assert report.feasible_z == ["0"]

    def test_well_defined(self):
        inst = build_overlap_variant(1)
        report = degenerate_conditioning_report(
            inst.table, ("A1", "A2", "A3"), "Z", {"A1": "0", "A2": "1", "A3": "1"}, "1"
        )
        assert report.well_defined
        assert report.probability == Fraction(1, 8)

    def test_off_support(self, ce2):
        report = degenerate_conditioning_report(
            ce2.table, CAUSES, "S", {"A1": "1", "A2": "2"}, "0",
            z_def=lambda a: "0" if "2" in (a["A1"], a["A2"]) else "1",
        )
        assert report.status is ConditioningStatus.OFF_SUPPORT
        assert report.feasible_z == []

    def test_z_def_builds_substitute(self, ce1):
        report = degenerate_conditioning_report(
            ce1.table, CAUSES, "S", {"A1": "0", "A2": "1"}, "0",
            z_def=lambda a: str(int(a["A1"]) ^ int(a["A2"])),
        )
        assert report.status is ConditioningStatus.OFF_MANIFOLD
        assert report.feasible_z == ["1"]

    def test_not_deterministic(self, ce1):
        with pytest.raises(NotDeterministicException):
            degenerate_conditioning_report(ce1.table, CAUSES, "Z", {"A1": "0", "A2": "0"}, "0")


class TestRunDeconfounder:
    """End-to-end runs on known tables."""

    def test_exact_ce1(self, ce1):
        report = run_deconfounder(ce1.table, CAUSES, "W", {"A1": "0", "A2": "0"}, z="Z", exact=True)
        assert report.exact
        assert report.adjustment.gap == Fraction(-1, 2)
        assert report.n is None

    def test_exact_needs_z(self, ce1):
        with pytest.raises(RoleValidationException):
            run_deconfounder(ce1.table, CAUSES, "W", {"A1": "0", "A2": "0"}, exact=True)

    def test_sampled_ce2(self, ce2):
        report = run_deconfounder(
            ce2.table, CAUSES, "W", {"A1": "0", "A2": "0"}, z="Z", n=2000, k=2, seed=0,
            em_config=EMConfig(seed=0, restarts=3),
        )
        assert report.substitute == "Z_hat"
        assert set(report.substitute_map) == {"0,0", "0,1", "1,0", "1,1", "0,2", "2,0", "2,2"}
        assert report.oracle.gap == Fraction(-1, 2)
        assert len(report.conditioning) == 2
        assert sum(c.status is ConditioningStatus.WELL_DEFINED for c in report.conditioning) == 1
        assert report.adjustment.degenerate_strata

    def test_cluster_oracle_has_no_degenerate_strata(self):
        inst = build_cluster_instance()
        report = run_deconfounder(
            inst.table, inst.causes, inst.w, {"A1": "1", "A2": "1"}, z=inst.z, n=1000, seed=1,
            em_config=EMConfig(seed=1, restarts=2),
        )
        assert report.oracle.defined
        assert report.class_weights is not None
        assert sum(report.class_weights) == pytest.approx(1.0)
