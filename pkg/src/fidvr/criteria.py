"""Stepwise voltage recovery criteria and ground-truth violation labels."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from importlib import resources
from typing import Literal

import numpy as np

from .trace import VoltageTrace

__all__ = [
    "ConfigurationError",
    "LabelError",
    "StepwiseCriterion",
    "CriteriaSet",
    "GroundTruthLabel",
    "criterion_value",
    "criterion_trace",
    "label_violation",
    "load_criteria",
    "example_criteria",
    "DEFAULT_MARGIN",
    "DEFAULT_DWELL",
]

DEFAULT_MARGIN = 0.005
DEFAULT_DWELL = 0.25

Side = Literal["lower_bound", "upper_bound"]


class ConfigurationError(ValueError):
    """Invalid criterion or index configuration."""


class LabelError(ValueError):
    """Trace and criterion domains do not line up."""


@dataclass(frozen=True)
class StepwiseCriterion:
    """Piecewise-constant voltage bound measured from fault clearing.

    Each step ``(t_offset, bound)`` holds from its offset until the next
    one. ``final_bound`` is the level after the last step and must agree
    with the last step's bound. With no steps the criterion is the constant
    ``final_bound``.
    """

    side: Side
    steps: tuple[tuple[float, float], ...]
    final_bound: float

    def __post_init__(self):
        steps = tuple((float(t), float(b)) for t, b in self.steps)
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "final_bound", float(self.final_bound))
        if self.side not in ("lower_bound", "upper_bound"):
            raise ConfigurationError(f"unknown criterion side {self.side!r}")
        bounds = [b for _, b in steps] + [self.final_bound]
        if any(not 0 < b < 2 for b in bounds):
            raise ConfigurationError("criterion bounds must lie in (0, 2) pu")
        offsets = [t for t, _ in steps]
        if any(t < 0 for t in offsets):
            raise ConfigurationError("step offsets must be non-negative")
        if any(b <= a for a, b in zip(offsets, offsets[1:])):
            raise ConfigurationError("step offsets must be strictly increasing")
        if steps and steps[-1][1] != self.final_bound:
            raise ConfigurationError("final_bound must equal the last step's bound")
        diffs = np.diff(bounds)
        if self.side == "lower_bound":
            if np.any(diffs < 0) or self.final_bound > 1:
                raise ConfigurationError(
                    "a lower-bound criterion must be non-decreasing with final_bound <= 1")
        elif np.any(diffs > 0) or self.final_bound < 1:
            raise ConfigurationError(
                "an upper-bound criterion must be non-increasing with final_bound >= 1")

    @classmethod
    def from_dict(cls, side: Side, data: dict) -> "StepwiseCriterion":
        try:
            steps = tuple((t, b) for t, b in data.get("steps", []))
            return cls(side, steps, data["final_bound"])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(f"malformed {side} criterion: {exc}") from None

    def to_dict(self) -> dict:
        return {"steps": [list(s) for s in self.steps], "final_bound": self.final_bound}

    def _check_defined(self):
        if self.steps and self.steps[0][0] > 0:
            raise ConfigurationError(
                "criterion is undefined before its first step; the first t_offset must be 0")

    def evaluate(self, t) -> np.ndarray:
        """Vectorised :func:`criterion_value`."""
        self._check_defined()
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("criterion evaluated at negative time")
        if not self.steps:
            return np.full(t.shape, self.final_bound)
        offsets = np.array([s[0] for s in self.steps])
        bounds = np.array([s[1] for s in self.steps])
        idx = np.searchsorted(offsets, t, side="right") - 1
        return bounds[idx]


@dataclass(frozen=True)
class CriteriaSet:
    """The under- and over-voltage criteria plus the ground-truth rule."""

    uv: StepwiseCriterion
    ov: StepwiseCriterion
    margin: float = DEFAULT_MARGIN
    dwell: float = DEFAULT_DWELL

    def to_dict(self) -> dict:
        return {"uv": self.uv.to_dict(), "ov": self.ov.to_dict(),
                "margin_pu": self.margin, "dwell_s": self.dwell}


@dataclass(frozen=True)
class GroundTruthLabel:
    violated: bool
    kind: Literal["none", "under_voltage", "over_voltage", "both"]
    worst_excursion: float
    longest_excursion: float


def criterion_value(criterion: StepwiseCriterion, t: float) -> float:
    """Bound in force at ``t`` seconds after clearing (left-closed steps)."""
    return float(criterion.evaluate(t))


def criterion_trace(criterion: StepwiseCriterion, dt: float, duration: float) -> VoltageTrace:
    """Render ``criterion`` on the grid ``0, dt, ..., duration``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if not duration > 0:
        raise ValueError(f"duration must be positive, got {duration!r}")
    n = int(round(duration / dt)) + 1
    return VoltageTrace(0.0, dt, criterion.evaluate(dt * np.arange(max(n, 2))))


def _runs(mask):
    """Start/stop index pairs of the True runs in a boolean array."""
    padded = np.concatenate(([False], mask, [False]))
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    return edges[0::2], edges[1::2]


def label_violation(trace: VoltageTrace, uv: StepwiseCriterion, ov: StepwiseCriterion,
                    margin: float = DEFAULT_MARGIN, dwell: float = DEFAULT_DWELL) -> GroundTruthLabel:
    """Label ``trace`` by the margin/dwell rule.

    A side is violated when some contiguous run of samples sits beyond its
    bound by more than ``margin`` for at least ``dwell`` seconds, a run of
    ``k`` samples counting as ``k * dt`` seconds.
    """
    if margin < 0 or dwell < 0:
        raise ValueError("margin and dwell must be non-negative")
    trace.require_uniform()
    if trace.t0 < 0:
        raise LabelError("trace starts before fault clearing; rebase it with window_post_fault")
    t = trace.time_axis()
    for crit in (uv, ov):
        if crit.steps and crit.steps[0][0] > t[-1]:
            raise LabelError("trace ends before the criterion's first step")
    v = trace.samples
    lo = uv.evaluate(t)
    hi = ov.evaluate(t)

    # rounding slack so that e.g. 25 samples at 10 ms meet a 250 ms dwell
    need = dwell - 1e-9 * trace.dt
    flags = {}
    longest = 0
    for name, mask in (("under_voltage", v < lo - margin), ("over_voltage", v > hi + margin)):
        starts, stops = _runs(mask)
        run = int(np.max(stops - starts)) if starts.size else 0
        longest = max(longest, run)
        flags[name] = run * trace.dt >= need and run > 0

    depth = max(float(np.max(lo - v)), float(np.max(v - hi)), 0.0)
    if flags["under_voltage"] and flags["over_voltage"]:
        kind = "both"
    elif flags["under_voltage"]:
        kind = "under_voltage"
    elif flags["over_voltage"]:
        kind = "over_voltage"
    else:
        kind = "none"
    return GroundTruthLabel(kind != "none", kind, depth, longest * trace.dt)


def load_criteria(source) -> CriteriaSet:
    """Read the criteria JSON (``uv``, ``ov`` and optional rule overrides)."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            data = json.load(fh)
    elif isinstance(source, dict):
        data = source
    else:
        data = json.load(source)
    try:
        uv, ov = data["uv"], data["ov"]
    except (KeyError, TypeError):
        raise ConfigurationError("criteria JSON needs 'uv' and 'ov' entries") from None
    return CriteriaSet(
        StepwiseCriterion.from_dict("lower_bound", uv),
        StepwiseCriterion.from_dict("upper_bound", ov),
        float(data.get("margin_pu", DEFAULT_MARGIN)),
        float(data.get("dwell_s", DEFAULT_DWELL)),
    )


def example_criteria() -> CriteriaSet:
    """Illustrative recovery criteria bundled with the package."""
    text = resources.files("fidvr.data").joinpath("example_criteria.json").read_text(encoding="utf-8")
    return load_criteria(json.loads(text))
