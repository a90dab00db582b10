"""Voltage trace data model, CSV ingestion and post-fault windowing."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TraceError",
    "VoltageTrace",
    "load_trace",
    "write_trace",
    "resample_uniform",
    "window_post_fault",
]

CSV_HEADER = ("time_s", "voltage_pu")

# relative deviation from the median interval beyond which a grid is non-uniform
_UNIFORM_RTOL = 1e-6


class TraceError(ValueError):
    """Raised for malformed traces, parse failures and bad windows."""


@dataclass(frozen=True, eq=False)
class VoltageTrace:
    """Uniformly sampled per-unit voltage series.

    Parameters
    ----------
    t0 : float
        Time of the first sample, in seconds.
    dt : float
        Sampling interval, in seconds.
    samples : array_like
        Voltage magnitudes in pu.
    times : array_like, optional
        Explicit sample times. Only set for traces read from a non-uniform
        grid; such traces must go through :func:`resample_uniform` before
        analysis.
    """

    t0: float
    dt: float
    samples: np.ndarray
    times: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size < 2:
            raise TraceError("a trace needs at least 2 samples")
        if not np.all(np.isfinite(samples)):
            raise TraceError("trace samples must be finite")
        if np.any(samples < 0):
            raise TraceError("trace samples must be non-negative")
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise TraceError(f"dt must be positive, got {self.dt!r}")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "dt", float(self.dt))
        if self.times is not None:
            times = np.array(self.times, dtype=float)
            if times.shape != samples.shape:
                raise TraceError("times and samples differ in length")
            if np.any(np.diff(times) <= 0):
                raise TraceError("times must be strictly increasing")
            times.flags.writeable = False
            object.__setattr__(self, "times", times)

    def __len__(self):
        return self.samples.size

    @property
    def uniform(self) -> bool:
        return self.times is None

    @property
    def duration(self) -> float:
        """Total span T = dt * (len - 1)."""
        if self.times is not None:
            return float(self.times[-1] - self.times[0])
        return self.dt * (self.samples.size - 1)

    def time_axis(self) -> np.ndarray:
        if self.times is not None:
            return self.times
        return self.t0 + self.dt * np.arange(self.samples.size)

    def require_uniform(self):
        if not self.uniform:
            raise TraceError("trace is non-uniform; call resample_uniform first")


def _open_text(source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8", newline=""), True
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8")), True
    if isinstance(source, io.TextIOBase):
        return source, False
    return io.TextIOWrapper(source, encoding="utf-8", newline=""), False


def load_trace(source) -> VoltageTrace:
    """Read a ``time_s,voltage_pu`` CSV.

    ``source`` may be a path, raw bytes, or a binary/text stream. Parse
    failures raise :class:`TraceError` naming the offending line.
    """
    fh, owned = _open_text(source)
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise TraceError("line 1: expected header 'time_s,voltage_pu'")
        times, values = [], []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise TraceError(f"malformed row at line {line}")
            try:
                t, v = float(row[0]), float(row[1])
            except ValueError:
                raise TraceError(f"malformed row at line {line}") from None
            if not (np.isfinite(t) and np.isfinite(v)):
                raise TraceError(f"non-finite value at line {line}")
            if times and t <= times[-1]:
                raise TraceError(f"non-monotone time at line {line}")
            if v < 0:
                raise TraceError(f"negative voltage at line {line}")
            times.append(t)
            values.append(v)
    finally:
        if owned:
            fh.close()

    if len(times) < 2:
        raise TraceError("a trace needs at least 2 rows")

    t = np.asarray(times)
    steps = np.diff(t)
    median = np.median(steps)
    if np.any(np.abs(steps - median) > _UNIFORM_RTOL * median):
        return VoltageTrace(t[0], median, values, times=t)
    dt = (t[-1] - t[0]) / (t.size - 1)
    return VoltageTrace(t[0], dt, values)


def write_trace(trace: VoltageTrace, dest):
    """Write ``trace`` as CSV with 17 significant digits (lossless for floats)."""
    lines = ["%s,%s" % CSV_HEADER]
    for t, v in zip(trace.time_axis(), trace.samples):
        lines.append(f"{t:.17g},{v:.17g}")
    text = "\n".join(lines) + "\n"
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    elif isinstance(dest, io.TextIOBase):
        dest.write(text)
    else:
        dest.write(text.encode("utf-8"))


def resample_uniform(trace: VoltageTrace, dt: float) -> VoltageTrace:
    """Linearly interpolate ``trace`` onto the grid ``t0, t0 + dt, ...``.

    The last grid point never passes the last original time.
    """
    if not dt > 0:
        raise TraceError(f"dt must be positive, got {dt!r}")
    t_src = trace.time_axis()
    span = t_src[-1] - t_src[0]
    if span < dt * (1 - 1e-12):
        raise TraceError("trace is shorter than one resampling interval")
    n = int(np.floor(span / dt * (1 + 1e-12))) + 1
    grid = t_src[0] + dt * np.arange(n)
    grid[-1] = min(grid[-1], t_src[-1])
    if trace.uniform and np.isclose(dt, trace.dt, rtol=1e-12, atol=0):
        return VoltageTrace(trace.t0, trace.dt, trace.samples)
    return VoltageTrace(t_src[0], dt, np.interp(grid, t_src, trace.samples))


def window_post_fault(trace: VoltageTrace, t_clear: float, duration: float) -> VoltageTrace:
    """Cut the post-fault window and rebase its time origin to 0.

    The window starts at the first sample at or after ``t_clear`` and keeps
    samples up to ``t_clear + duration``.
    """
    trace.require_uniform()
    if not duration > 0:
        raise TraceError(f"window duration must be positive, got {duration!r}")
    t = trace.time_axis()
    eps = 1e-9 * trace.dt
    if t_clear < t[0] - eps or t_clear > t[-1] + eps:
        raise TraceError(f"t_clear={t_clear} lies outside the trace span [{t[0]}, {t[-1]}]")
    start = int(np.searchsorted(t, t_clear - eps, side="left"))
    stop = int(np.searchsorted(t, t_clear + duration + eps, side="right"))
    if stop - start < 2:
        raise TraceError("post-fault window holds fewer than 2 samples")
    return VoltageTrace(0.0, trace.dt, trace.samples[start:stop])
