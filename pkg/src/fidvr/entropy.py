"""Voltage histograms, KL divergence and the legacy entropy index."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtr

from .trace import VoltageTrace

__all__ = [
    "VoltageHistogram",
    "GaussianReference",
    "LegacyConfig",
    "LegacyResult",
    "histogram_mdf",
    "bin_indices",
    "discretized_gaussian",
    "kl_divergence",
    "kl_gaussian_closed_form",
    "partition_constant",
    "legacy_kl_index",
]


@dataclass(frozen=True, eq=False)
class VoltageHistogram:
    """Mass distribution over ``n_bins`` equal voltage segments."""

    v_min: float
    v_max: float
    n_bins: int
    masses: np.ndarray
    bin_values: np.ndarray

    def same_binning(self, other: "VoltageHistogram") -> bool:
        return (self.v_min, self.v_max, self.n_bins) == (other.v_min, other.v_max, other.n_bins)


@dataclass(frozen=True)
class GaussianReference:
    """Ideal voltage distribution N(mu, s^2) restricted to [v_min, v_max]."""

    s: float = 0.05
    mu: float = 1.0
    v_min: float = 0.0
    v_max: float = 2.0

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError(f"s must be positive, got {self.s!r}")
        if not self.v_min <= self.mu <= self.v_max:
            raise ValueError("mu must lie inside the domain")


@dataclass(frozen=True)
class LegacyConfig:
    """Parameters of the plain KL index: bins, reference spread and domain."""

    n_bins: int = 256
    lam: float = 0.1
    v_min: float = 0.0
    v_max: float = 2.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if self.n_bins < 2:
            raise ValueError("n_bins must be >= 2")


@dataclass(frozen=True)
class LegacyResult:
    kl_signal: float
    kl_reference: float
    violated: bool


def _check_domain(v_min, v_max, n_bins):
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    if not v_min < v_max:
        raise ValueError("v_min must be below v_max")


def bin_indices(samples, v_min, v_max, n_bins):
    """Segment index of each sample; out-of-range values clamp to the edge bins."""
    x = np.asarray(samples, dtype=float)
    idx = np.floor((x - v_min) * n_bins / (v_max - v_min))
    return np.clip(idx, 0, n_bins - 1).astype(np.intp)


def _centers(v_min, v_max, n_bins):
    width = (v_max - v_min) / n_bins
    return v_min + width * (np.arange(n_bins) + 0.5)


def histogram_mdf(samples, v_min=0.0, v_max=2.0, n_bins=256) -> VoltageHistogram:
    """Normalized sample counts over equal-width voltage bins.

    Bins are left-closed and right-open except the last, which is closed.
    On a uniform grid the mass of a bin is the fraction of time spent in it.
    """
    _check_domain(v_min, v_max, n_bins)
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("histogram_mdf needs at least one sample")
    counts = np.bincount(bin_indices(x, v_min, v_max, n_bins), minlength=n_bins)
    return VoltageHistogram(float(v_min), float(v_max), int(n_bins), counts / x.size,
                            _centers(v_min, v_max, n_bins))


def discretized_gaussian(v_min, v_max, n_bins, ref: GaussianReference) -> VoltageHistogram:
    """Gaussian density at the bin centers, renormalized over the bins."""
    _check_domain(v_min, v_max, n_bins)
    centers = _centers(v_min, v_max, n_bins)
    z = (centers - ref.mu) / ref.s
    logw = -0.5 * z * z
    w = np.exp(logw - logw.max())
    return VoltageHistogram(float(v_min), float(v_max), int(n_bins), w / w.sum(), centers)


def kl_divergence(p: VoltageHistogram, q: VoltageHistogram) -> float:
    """D(P || Q) in nats; ``inf`` when P puts mass where Q has none."""
    if not p.same_binning(q):
        raise ValueError("histograms must share the same binning")
    pm, qm = np.asarray(p.masses), np.asarray(q.masses)
    support = pm > 0
    if np.any(qm[support] == 0):
        return math.inf
    ps = pm[support]
    return float(np.sum(ps * np.log(ps / qm[support])))


@lru_cache(maxsize=64)
def partition_constant(ref: GaussianReference) -> float:
    """Z, the integral of exp(-(x - mu)^2 / (2 s^2)) over [v_min, v_max]."""
    a = (ref.v_min - ref.mu) / ref.s
    b = (ref.v_max - ref.mu) / ref.s
    # difference of upper tails is more accurate when both limits sit above mu
    if a > 0:
        mass = ndtr(-a) - ndtr(-b)
    else:
        mass = ndtr(b) - ndtr(a)
    return float(ref.s * math.sqrt(2 * math.pi) * mass)


def kl_gaussian_closed_form(values, dwell_masses, ref: GaussianReference, total_time: float) -> float:
    """KL divergence of a dwell-time distribution from the ideal Gaussian.

    Computes ``sum_i [P_i ln P_i + P_i (x_i - mu)^2 / (2 s^2)] + ln Z``.
    Empty segments contribute nothing.
    """
    x = np.asarray(values, dtype=float)
    p = np.asarray(dwell_masses, dtype=float)
    if x.shape != p.shape:
        raise ValueError("values and dwell_masses differ in length")
    if np.any(p < 0):
        raise ValueError("dwell masses must be non-negative")
    if abs(p.sum() - 1) > 1e-12:
        raise ValueError("dwell masses must sum to 1")
    if not total_time > 0:
        raise ValueError("total_time must be positive")
    if not np.all(np.isfinite(x)):
        raise ValueError("segment values must be finite")
    nz = p > 0
    p, x = p[nz], x[nz]
    quad = (x - ref.mu) ** 2 / (2 * ref.s ** 2)
    return float(np.sum(p * np.log(p)) + np.sum(p * quad) + math.log(partition_constant(ref)))


def legacy_kl_index(trace: VoltageTrace, ref_trace: VoltageTrace,
                    cfg: LegacyConfig = LegacyConfig()) -> LegacyResult:
    """Plain entropy index: flag the trace when its KL exceeds the reference's."""
    q = discretized_gaussian(cfg.v_min, cfg.v_max, cfg.n_bins,
                             GaussianReference(cfg.lam, 1.0, cfg.v_min, cfg.v_max))
    kl_sig = kl_divergence(histogram_mdf(trace.samples, cfg.v_min, cfg.v_max, cfg.n_bins), q)
    kl_ref = kl_divergence(histogram_mdf(ref_trace.samples, cfg.v_min, cfg.v_max, cfg.n_bins), q)
    return LegacyResult(kl_sig, kl_ref, kl_sig > kl_ref)
