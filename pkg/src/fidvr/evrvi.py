"""Over- and under-voltage recovery violation indices."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from .criteria import ConfigurationError, StepwiseCriterion, criterion_trace
from .emd import EmdConfig
from . import _kernels
from .entropy import GaussianReference, LegacyResult, partition_constant
from .envelope import extract_envelopes
from .trace import VoltageTrace

__all__ = [
    "EvrviConfig",
    "EvrviReport",
    "segment_masses",
    "envelope_divergence",
    "violation_thresholds",
    "assess",
]

# per-step slack for the monotone precondition of envelope_divergence
_MONOTONE_TOL = 1e-12


@dataclass(frozen=True)
class EvrviConfig:
    """Gaussian spread, voltage partitions, domain and EMD settings."""

    s: float = 0.05
    n_partitions: int = 256
    v_min: float = 0.0
    v_max: float = 2.0
    emd: EmdConfig = field(default_factory=EmdConfig)

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError("s must be positive")
        if self.n_partitions < 2:
            raise ValueError("n_partitions must be >= 2")
        if not self.v_min < 1.0 < self.v_max:
            raise ValueError("the domain must contain 1 pu")

    @property
    def reference(self) -> GaussianReference:
        return GaussianReference(self.s, 1.0, self.v_min, self.v_max)


@dataclass(frozen=True)
class EvrviReport:
    evrvi_plus: float
    evrvi_minus: float
    d_kl_u: float
    d_kl_l: float
    d_violate_ov: float
    d_violate_uv: float
    ov_violation: bool
    uv_violation: bool
    legacy: LegacyResult | None = None

    @property
    def violated(self) -> bool:
        return self.ov_violation or self.uv_violation

    def to_dict(self) -> dict:
        out = asdict(self)
        if self.legacy is None:
            out.pop("legacy")
        return out


def segment_masses(envelope, cfg: EvrviConfig, dt: float):
    """Dwell times and mean envelope values of the occupied voltage segments.

    Returns
    -------
    dwell : ndarray
        Seconds spent in each occupied segment (``dt`` per sample).
    values : ndarray
        Mean envelope value inside each occupied segment.
    """
    x = np.ascontiguousarray(envelope, dtype=float)
    counts, sums = _kernels.segment_stats(x, cfg.v_min, cfg.v_max, cfg.n_partitions)
    occupied = counts > 0
    return dt * counts[occupied], sums[occupied] / counts[occupied]


def envelope_divergence(envelope, cfg: EvrviConfig = EvrviConfig(), dt: float = 1.0) -> float:
    """Divergence of a monotone envelope from the ideal Gaussian.

    ``ln(Z/T) + sum_i (dT_i/T) (ln dT_i + (x_i - 1)^2 / (2 s^2))`` with
    ``dT_i`` the time spent in voltage segment ``i``, ``x_i`` the mean
    envelope value there and ``T`` the total dwell time.
    """
    x = np.ascontiguousarray(envelope, dtype=float)
    if x.size < 2:
        raise ValueError("envelope needs at least 2 samples")
    if not _kernels.is_monotone(x, _MONOTONE_TOL):
        raise ValueError("envelope_divergence is only defined for monotone envelopes")
    if not dt > 0:
        raise ValueError("dt must be positive")
    log_z = math.log(partition_constant(cfg.reference))
    return float(_kernels.divergence(x, cfg.v_min, cfg.v_max, cfg.n_partitions, cfg.s, dt, log_z))


@lru_cache(maxsize=256)
def _thresholds(uv: StepwiseCriterion, ov: StepwiseCriterion, cfg: EvrviConfig,
                dt: float, n: int):
    duration = dt * (n - 1)
    d_uv = envelope_divergence(
        extract_envelopes(criterion_trace(uv, dt, duration), cfg.emd).lower, cfg, dt)
    d_ov = envelope_divergence(
        extract_envelopes(criterion_trace(ov, dt, duration), cfg.emd).upper, cfg, dt)
    for name, value in (("under-voltage", d_uv), ("over-voltage", d_ov)):
        if not value > 0:
            raise ConfigurationError(
                f"{name} reference indistinguishable from ideal at s={cfg.s} "
                f"(threshold {value:.6g}); decrease s or widen criteria")
    return d_uv, d_ov


def violation_thresholds(uv: StepwiseCriterion, ov: StepwiseCriterion,
                         cfg: EvrviConfig = EvrviConfig(), dt: float = 0.01,
                         duration: float = 10.0):
    """Divergences of the rendered reference criteria.

    The under-voltage threshold is the divergence of the lower envelope of
    the rendered ``uv`` criterion, the over-voltage threshold that of the
    upper envelope of ``ov``. Results are cached per (criteria, config,
    grid).

    Returns
    -------
    d_violate_uv, d_violate_ov : float
    """
    if not dt > 0 or not duration > 0:
        raise ValueError("dt and duration must be positive")
    return _thresholds(uv, ov, cfg, float(dt), int(round(duration / dt)) + 1)


def assess(trace: VoltageTrace, uv: StepwiseCriterion, ov: StepwiseCriterion,
           cfg: EvrviConfig = EvrviConfig()) -> EvrviReport:
    """Score a post-fault window against the criteria.

    The envelope divergences are divided by the reference thresholds on the
    same grid; a ratio above 1 flags a violation.
    """
    trace.require_uniform()
    pair = extract_envelopes(trace, cfg.emd)
    d_u = envelope_divergence(pair.upper, cfg, trace.dt)
    d_l = envelope_divergence(pair.lower, cfg, trace.dt)
    d_uv, d_ov = _thresholds(uv, ov, cfg, trace.dt, len(trace))
    plus, minus = d_u / d_ov, d_l / d_uv
    return EvrviReport(plus, minus, d_u, d_l, d_ov, d_uv, plus > 1, minus > 1)
