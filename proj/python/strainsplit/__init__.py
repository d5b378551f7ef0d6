"""Mixed-strain detection, proportion estimation and read separation."""

import json as _json

from ._core import (
    AlignedRead,
    ComponentCollapse,
    HypothesisResult,
    MixtureComponent,
    MixtureModel,
    NoVariantEvidence,
    ParseError,
    SiteFeature,
    assign_binomial,
    assign_gaussian_vote,
    chi2_quantile,
    chi2_sf,
    em_fit,
    feature_vectors,
    likelihood_ratio_test,
    log_likelihood_h0,
    log_likelihood_h1,
    parse_sam,
    proportions,
    read_sam,
    rmse,
    roc_auc,
    simulate,
)
from . import _core


def detect(sam_path, ref_path, out_dir=".", **options):
    """Run detection and return report.json as a dict."""
    return _json.loads(_core._detect(sam_path, ref_path, out_dir, **options))


def separate(sam_path, ref_path, out_dir=".", **options):
    """Run detection and read separation; returns the report dict."""
    return _json.loads(_core._separate(sam_path, ref_path, out_dir, **options))


def evaluate(panel_dir, out_dir="."):
    """Score a panel of sample directories; returns evaluation.json as a dict."""
    return _json.loads(_core._evaluate(panel_dir, out_dir))


__all__ = [
    "AlignedRead",
    "ComponentCollapse",
    "HypothesisResult",
    "MixtureComponent",
    "MixtureModel",
    "NoVariantEvidence",
    "ParseError",
    "SiteFeature",
    "assign_binomial",
    "assign_gaussian_vote",
    "chi2_quantile",
    "chi2_sf",
    "detect",
    "em_fit",
    "evaluate",
    "feature_vectors",
    "likelihood_ratio_test",
    "log_likelihood_h0",
    "log_likelihood_h1",
    "parse_sam",
    "proportions",
    "read_sam",
    "rmse",
    "roc_auc",
    "separate",
    "simulate",
]
