"""Empirical mode decomposition by cubic-spline sifting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from . import _kernels
from .trace import VoltageTrace

__all__ = [
    "EmdConfig",
    "ImfDecomposition",
    "NoOscillation",
    "MonotonicComponent",
    "IntegrityError",
    "find_extrema",
    "interpolate_envelope",
    "is_imf",
    "sift",
    "decompose",
    "reconstruct",
    "is_monotone",
]

# per-step slack when deciding whether a residue is monotone
MONOTONE_TOL = 1e-9


class NoOscillation(ValueError):
    """Too few extrema to draw an envelope."""


class MonotonicComponent(ValueError):
    """The series has no oscillation left to sift."""


class IntegrityError(ValueError):
    """Decomposition components disagree in length."""


@dataclass(frozen=True)
class EmdConfig:
    """Stopping rules for the sifting process.

    Parameters
    ----------
    max_imfs : int
        Cap on the number of extracted IMFs.
    max_sift_iters : int
        Cap on sifting iterations per IMF.
    sift_tolerance : float
        Threshold for both the Cauchy-type SD criterion and the relative
        size of the mean envelope in the IMF test.
    boundary : {'mirror'}
        End treatment for the spline envelopes.
    """

    max_imfs: int = 10
    max_sift_iters: int = 50
    sift_tolerance: float = 0.05
    boundary: str = "mirror"

    def __post_init__(self):
        if self.max_imfs < 1:
            raise ValueError("max_imfs must be >= 1")
        if self.max_sift_iters < 1:
            raise ValueError("max_sift_iters must be >= 1")
        if not self.sift_tolerance > 0:
            raise ValueError("sift_tolerance must be positive")
        if self.boundary != "mirror":
            raise ValueError(f"unsupported boundary mode {self.boundary!r}")


@dataclass(frozen=True, eq=False)
class ImfDecomposition:
    """IMFs (highest frequency first) plus the residual trend."""

    imfs: np.ndarray
    residual: np.ndarray
    source_len: int
    dt: float = 1.0

    @property
    def n_imfs(self) -> int:
        return len(self.imfs)


def is_monotone(x, tol=MONOTONE_TOL) -> bool:
    """True if ``x`` never steps against one direction by more than ``tol``."""
    return bool(_kernels.is_monotone(np.ascontiguousarray(x, dtype=float), tol))


def find_extrema(samples):
    """Indices of the interior strict local maxima and minima.

    A flat plateau counts once, at its midpoint (lower index on ties).
    Endpoints are never extrema.

    Returns
    -------
    maxima, minima : ndarray of int
    """
    x = np.ascontiguousarray(samples, dtype=float)
    if x.ndim != 1 or x.size < 3:
        raise ValueError("find_extrema needs a 1-d series of length >= 3")
    return _kernels.extrema(x)


def interpolate_envelope(samples, extrema, dt=1.0):
    """Natural cubic spline through ``samples[extrema]``.

    The two extrema nearest each end are mirrored about that end before
    fitting. A single extremum gives a flat envelope and two give the chord
    through them.

    Raises
    ------
    NoOscillation
        If ``extrema`` is empty.
    """
    x = np.ascontiguousarray(samples, dtype=float)
    idx = np.ascontiguousarray(extrema, dtype=np.int64)
    if idx.size == 0:
        raise NoOscillation("no extrema to interpolate")
    if np.any(np.diff(idx) <= 0) or idx[0] < 0 or idx[-1] >= x.size:
        raise ValueError("extrema must be increasing indices into samples")
    return _kernels.envelope(x, idx, float(dt))


def is_imf(samples, tol=0.05, dt=1.0) -> bool:
    """Check the two IMF conditions.

    The extrema and zero-crossing counts must differ by at most one, and
    the mean of the upper and lower envelopes must stay within ``tol``
    times the series' peak magnitude.
    """
    h = np.ascontiguousarray(samples, dtype=float)
    if h.size < 3:
        raise ValueError("is_imf needs a series of length >= 3")
    maxima, minima = _kernels.extrema(h)
    if maxima.size == 0 or minima.size == 0:
        return False
    mean = 0.5 * (_kernels.envelope(h, maxima, float(dt)) + _kernels.envelope(h, minima, float(dt)))
    return bool(_kernels.imf_test(h, mean, maxima.size + minima.size, tol))


def sift(samples, cfg: EmdConfig = EmdConfig(), dt=1.0):
    """Sift one IMF out of ``samples``.

    Stops when the IMF test passes, the SD criterion
    ``sum(h_k - h_{k-1})^2 / sum(h_{k-1}^2)`` drops below
    ``cfg.sift_tolerance``, the envelopes can no longer be drawn, or
    ``cfg.max_sift_iters`` is reached.

    Raises
    ------
    MonotonicComponent
        If the input lacks a maximum or a minimum.
    """
    h = np.ascontiguousarray(samples, dtype=float)
    if h.size < 3:
        raise MonotonicComponent("series too short to sift")
    out, status = _kernels.sift(h, float(dt), cfg.max_sift_iters, cfg.sift_tolerance)
    if status == _kernels.SIFT_NO_EXTREMA:
        raise MonotonicComponent("series has no oscillation to sift")
    return out


def decompose(trace: VoltageTrace, cfg: EmdConfig = EmdConfig()) -> ImfDecomposition:
    """Split ``trace`` into IMFs and a residual.

    Extraction stops once the residue is monotone, has fewer than two
    interior extrema, or ``cfg.max_imfs`` IMFs have been taken. The
    residual is defined by exact subtraction, so the decomposition is
    complete up to rounding.
    """
    trace.require_uniform()
    x = np.ascontiguousarray(trace.samples, dtype=float)
    imfs, residue = _kernels.decompose(x, trace.dt, cfg.max_imfs, cfg.max_sift_iters,
                                       cfg.sift_tolerance, MONOTONE_TOL)
    return ImfDecomposition(imfs, residue, x.size, trace.dt)


def reconstruct(d: ImfDecomposition):
    """Pointwise sum of the IMFs and the residual."""
    residual = np.asarray(d.residual, dtype=float)
    if residual.size != d.source_len:
        raise IntegrityError("residual length differs from source length")
    if any(len(imf) != residual.size for imf in d.imfs):
        raise IntegrityError("IMF and residual lengths differ")
    if len(d.imfs) == 0:
        return residual.copy()
    return np.asarray(d.imfs, dtype=float).sum(axis=0) + residual
