"""Desk-scale deconfounder pipeline: sample, fit, substitute, adjust."""

from ci_lab.deconf_pipeline.adjustment import adjustment_functional
from ci_lab.deconf_pipeline.degenerate import degenerate_conditioning_report, is_deterministic
from ci_lab.deconf_pipeline.latent_class import (
    EMConfig,
    LatentClassFit,
    LatentClassModel,
    SubstituteConfounder,
    align_classes,
    fit_latent_class_em,
    log_likelihood,
    model_from_document,
    model_to_document,
    model_to_json,
    substitute_confounder,
)
from ci_lab.deconf_pipeline.sampling import Dataset, simulate_samples
from ci_lab.deconf_pipeline.workflow import run_deconfounder

__all__ = [
    "Dataset",
    "EMConfig",
    "LatentClassFit",
    "LatentClassModel",
    "SubstituteConfounder",
    "adjustment_functional",
    "align_classes",
    "degenerate_conditioning_report",
    "fit_latent_class_em",
    "is_deterministic",
    "log_likelihood",
    "model_from_document",
    "model_to_document",
    "model_to_json",
    "run_deconfounder",
    "simulate_samples",
    "substitute_confounder",
]
