"""Delayed voltage recovery assessment with EMD envelopes and entropy indices."""

from .criteria import (ConfigurationError, CriteriaSet, StepwiseCriterion, criterion_trace,
                       example_criteria, label_violation, load_criteria)
from .emd import EmdConfig, decompose, reconstruct
from .entropy import GaussianReference, LegacyConfig, legacy_kl_index
from .envelope import EnvelopePair, extract_envelopes
from .evrvi import EvrviConfig, EvrviReport, assess, envelope_divergence, violation_thresholds
from .trace import TraceError, VoltageTrace, load_trace, resample_uniform, window_post_fault

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "CriteriaSet", "StepwiseCriterion", "criterion_trace",
    "example_criteria", "label_violation", "load_criteria", "EmdConfig", "decompose",
    "reconstruct", "GaussianReference", "LegacyConfig", "legacy_kl_index", "EnvelopePair",
    "extract_envelopes", "EvrviConfig", "EvrviReport", "assess", "envelope_divergence",
    "violation_thresholds", "TraceError", "VoltageTrace", "load_trace", "resample_uniform",
    "window_post_fault",
]
