"""Monotone over-/under-voltage envelopes built from an EMD."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import _kernels
from .emd import EmdConfig, ImfDecomposition, decompose
from .trace import VoltageTrace

__all__ = [
    "EnvelopePair",
    "oscillation_band",
    "clip_nominal",
    "monotone_hull",
    "extract_envelopes",
]

NOMINAL = 1.0


@dataclass(frozen=True, eq=False)
class EnvelopePair:
    """Upper envelope U(t) >= 1 (non-increasing) and lower L(t) <= 1 (non-decreasing)."""

    upper: np.ndarray
    lower: np.ndarray
    dt: float
    duration: float


def oscillation_band(d: ImfDecomposition, cfg: EmdConfig | None = None):
    """Residual trend shifted by the spline envelopes of the summed IMFs.

    The band always contains the oscillation itself, so
    ``lower_raw <= r + sum(IMF) <= upper_raw`` pointwise.

    Returns
    -------
    upper_raw, lower_raw : ndarray
    """
    r = np.asarray(d.residual, dtype=float)
    if len(d.imfs) == 0 or r.size < 3:
        return r.copy(), r.copy()
    osc = np.ascontiguousarray(np.asarray(d.imfs, dtype=float).sum(axis=0))
    return _kernels.band(osc, np.ascontiguousarray(r), float(d.dt))


def clip_nominal(upper_raw, lower_raw):
    """Clamp the upper series to >= 1 pu and the lower series to <= 1 pu."""
    upper_raw = np.asarray(upper_raw, dtype=float)
    lower_raw = np.asarray(lower_raw, dtype=float)
    if upper_raw.shape != lower_raw.shape:
        raise ValueError("upper and lower series differ in length")
    return np.maximum(NOMINAL, upper_raw), np.minimum(NOMINAL, lower_raw)


def monotone_hull(series, direction: Literal["non_increasing", "non_decreasing"]):
    """Tightest monotone series on the conservative side of ``series``.

    ``non_increasing`` takes the suffix maximum, ``non_decreasing`` the
    suffix minimum.
    """
    x = np.asarray(series, dtype=float)
    if x.size == 0:
        raise ValueError("monotone_hull needs a non-empty series")
    if direction == "non_increasing":
        return np.maximum.accumulate(x[::-1])[::-1]
    if direction == "non_decreasing":
        return np.minimum.accumulate(x[::-1])[::-1]
    raise ValueError(f"unknown direction {direction!r}")


def extract_envelopes(trace: VoltageTrace, cfg: EmdConfig = EmdConfig()) -> EnvelopePair:
    """decompose -> oscillation_band -> clip_nominal -> monotone_hull.

    The last three stages run fused in one compiled pass.
    """
    d = decompose(trace, cfg)
    upper, lower = _kernels.monotone_envelopes(
        np.ascontiguousarray(d.imfs, dtype=float), d.residual, float(d.dt))
    return EnvelopePair(upper, lower, trace.dt, trace.duration)
