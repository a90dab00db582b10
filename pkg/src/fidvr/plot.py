"""Hand-written SVG figures: trace with criteria, envelopes, mdfs and indices.

Coordinates are printed with fixed precision so output is byte-stable.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .criteria import CriteriaSet
from .envelope import EnvelopePair
from .evrvi import EvrviConfig, EvrviReport, segment_masses

__all__ = ["analysis_svg", "envelope_svg"]

WIDTH, HEIGHT = 1200, 900
_COLORS = {"trace": "#1f77b4", "uv": "#d62728", "ov": "#ff7f0e", "upper": "#9467bd",
           "lower": "#2ca02c", "grid": "#dddddd", "axis": "#333333"}


def _f(x):
    return f"{x:.2f}"


class _Panel:
    """Axes box mapping data coordinates to canvas pixels."""

    def __init__(self, x, y, w, h, xlim, ylim, title):
        self.x, self.y, self.w, self.h = x, y, w, h
        self.xlim, self.ylim = xlim, ylim
        self.title = title
        self.parts = []

    def px(self, xs):
        lo, hi = self.xlim
        return self.x + (np.asarray(xs, dtype=float) - lo) / (hi - lo) * self.w

    def py(self, ys):
        lo, hi = self.ylim
        return self.y + self.h - (np.asarray(ys, dtype=float) - lo) / (hi - lo) * self.h

    def line(self, xs, ys, color, width=1.5, dash=None, max_points=1200):
        xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
        if xs.size > max_points:
            keep = np.unique(np.linspace(0, xs.size - 1, max_points).round().astype(int))
            xs, ys = xs[keep], ys[keep]
        pts = " ".join(f"{_f(a)},{_f(b)}" for a, b in zip(self.px(xs), self.py(ys)))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="{width}"{extra} '
                          f'points="{pts}"/>')

    def rect(self, x0, y0, x1, y1, color, opacity=0.6):
        px0, px1 = sorted((float(self.px(x0)), float(self.px(x1))))
        py0, py1 = sorted((float(self.py(y0)), float(self.py(y1))))
        self.parts.append(f'<rect x="{_f(px0)}" y="{_f(py0)}" width="{_f(px1 - px0)}" '
                          f'height="{_f(py1 - py0)}" fill="{color}" fill-opacity="{opacity}"/>')

    def text(self, x, y, s, size=12, anchor="start", color=None):
        fill = color or _COLORS["axis"]
        self.parts.append(f'<text x="{_f(x)}" y="{_f(y)}" font-size="{size}" text-anchor="{anchor}" '
                          f'fill="{fill}">{escape(s)}</text>')

    def render(self, xlabel="", ylabel="", nticks=5):
        out = [f'<rect x="{_f(self.x)}" y="{_f(self.y)}" width="{_f(self.w)}" height="{_f(self.h)}" '
               f'fill="none" stroke="{_COLORS["axis"]}"/>']
        for v in np.linspace(*self.ylim, nticks):
            yy = float(self.py(v))
            out.append(f'<line x1="{_f(self.x)}" y1="{_f(yy)}" x2="{_f(self.x + self.w)}" '
                       f'y2="{_f(yy)}" stroke="{_COLORS["grid"]}"/>')
            out.append(f'<text x="{_f(self.x - 6)}" y="{_f(yy + 4)}" font-size="11" '
                       f'text-anchor="end">{v:.3g}</text>')
        for v in np.linspace(*self.xlim, nticks):
            xx = float(self.px(v))
            out.append(f'<text x="{_f(xx)}" y="{_f(self.y + self.h + 16)}" font-size="11" '
                       f'text-anchor="middle">{v:.3g}</text>')
        out.append(f'<text x="{_f(self.x + self.w / 2)}" y="{_f(self.y - 10)}" font-size="14" '
                   f'text-anchor="middle" font-weight="bold">{escape(self.title)}</text>')
        if xlabel:
            out.append(f'<text x="{_f(self.x + self.w / 2)}" y="{_f(self.y + self.h + 34)}" '
                       f'font-size="12" text-anchor="middle">{escape(xlabel)}</text>')
        if ylabel:
            cx, cy = self.x - 44, self.y + self.h / 2
            out.append(f'<text x="{_f(cx)}" y="{_f(cy)}" font-size="12" text-anchor="middle" '
                       f'transform="rotate(-90 {_f(cx)} {_f(cy)})">{escape(ylabel)}</text>')
        return out + self.parts


def _document(body):
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">')
    return "\n".join([head, f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>', *body, "</svg>"]) + "\n"


def _vrange(*series, pad=0.05):
    lo = min(float(np.min(s)) for s in series)
    hi = max(float(np.max(s)) for s in series)
    lo, hi = min(lo, 1.0), max(hi, 1.0)
    span = max(hi - lo, 0.05)
    return lo - pad * span, hi + pad * span


def _legend(panel, entries):
    x0, y0 = panel.x + panel.w - 150, panel.y + 14
    for i, (label, color) in enumerate(entries):
        yy = y0 + 16 * i
        panel.parts.append(f'<line x1="{_f(x0)}" y1="{_f(yy - 4)}" x2="{_f(x0 + 20)}" '
                           f'y2="{_f(yy - 4)}" stroke="{color}" stroke-width="2"/>')
        panel.text(x0 + 26, yy, label, size=11)


def _trace_panel(panel, t, v, criteria):
    panel.line(t, v, _COLORS["trace"])
    entries = [("voltage", _COLORS["trace"])]
    if criteria is not None:
        panel.line(t, criteria.uv.evaluate(t), _COLORS["uv"], dash="6,4")
        panel.line(t, criteria.ov.evaluate(t), _COLORS["ov"], dash="6,4")
        entries += [("UV criterion", _COLORS["uv"]), ("OV criterion", _COLORS["ov"])]
    _legend(panel, entries)


def _envelope_panel(panel, t, v, pair):
    panel.line(t, v, "#aaaaaa", width=1)
    panel.line(t, pair.upper, _COLORS["upper"], width=2)
    panel.line(t, pair.lower, _COLORS["lower"], width=2)
    _legend(panel, [("voltage", "#aaaaaa"), ("upper U(t)", _COLORS["upper"]),
                    ("lower L(t)", _COLORS["lower"])])


def envelope_svg(t, v, pair: EnvelopePair, criteria: CriteriaSet | None = None) -> str:
    """Two stacked panels: the trace with criteria, then U and L over the trace."""
    t = np.asarray(t, dtype=float)
    xlim = (float(t[0]), float(t[-1]) if t[-1] > t[0] else float(t[0]) + 1)
    series = [v, pair.upper, pair.lower]
    if criteria is not None:
        series += [criteria.uv.evaluate(t), criteria.ov.evaluate(t)]
    ylim = _vrange(*series)
    top = _Panel(90, 50, 1060, 340, xlim, ylim, "Voltage and criteria")
    bottom = _Panel(90, 480, 1060, 340, xlim, ylim, "Monotone envelopes")
    _trace_panel(top, t, v, criteria)
    _envelope_panel(bottom, t, v, pair)
    return _document(top.render("time after clearing (s)", "voltage (pu)")
                     + bottom.render("time after clearing (s)", "voltage (pu)"))


def analysis_svg(t, v, pair: EnvelopePair, criteria: CriteriaSet, cfg: EvrviConfig,
                 report: EvrviReport) -> str:
    """Four panels: trace and criteria, envelopes, envelope mdfs, index bars."""
    t = np.asarray(t, dtype=float)
    xlim = (float(t[0]), float(t[-1]) if t[-1] > t[0] else float(t[0]) + 1)
    ylim = _vrange(v, pair.upper, pair.lower, criteria.uv.evaluate(t), criteria.ov.evaluate(t))

    p1 = _Panel(80, 50, 470, 330, xlim, ylim, "(1) Voltage and stepwise criteria")
    _trace_panel(p1, t, v, criteria)
    p2 = _Panel(680, 50, 470, 330, xlim, ylim, "(2) Upper and lower envelopes")
    _envelope_panel(p2, t, v, pair)

    width = (cfg.v_max - cfg.v_min) / cfg.n_partitions
    bars = []
    for key, env in (("upper", pair.upper), ("lower", pair.lower)):
        dwell, values = segment_masses(env, cfg, pair.dt)
        bars.append((key, values, dwell / dwell.sum()))
    vlo, vhi = ylim
    mmax = max(float(m.max()) for _, _, m in bars)
    p3 = _Panel(80, 480, 470, 330, (vlo, vhi), (0.0, mmax * 1.1), f"(3) Envelope mdf, N={cfg.n_partitions}")
    for key, values, masses in bars:
        for x, m in zip(values, masses):
            left = cfg.v_min + width * np.floor((x - cfg.v_min) / width)
            p3.rect(left, 0.0, left + width, m, _COLORS[key])
    _legend(p3, [("upper envelope", _COLORS["upper"]), ("lower envelope", _COLORS["lower"])])

    vals = [report.evrvi_plus, report.evrvi_minus]
    top = max(1.5, max(vals) * 1.15)
    bottom = min(0.0, min(vals) * 1.15)
    p4 = _Panel(680, 480, 470, 330, (0.0, 2.0), (bottom, top), "(4) Indices vs violation threshold")
    for i, (name, val, color, flag) in enumerate((
            ("EVRVI+ (OV)", report.evrvi_plus, _COLORS["upper"], report.ov_violation),
            ("EVRVI- (UV)", report.evrvi_minus, _COLORS["lower"], report.uv_violation))):
        p4.rect(0.25 + i, 0.0, 0.75 + i, val, color, opacity=0.8)
        p4.text(float(p4.px(0.5 + i)), float(p4.py(max(val, 0.0))) - 6,
                f"{name} = {val:.3f}{' VIOLATION' if flag else ''}", size=12, anchor="middle")
    p4.line([0.0, 2.0], [1.0, 1.0], _COLORS["uv"], width=2, dash="8,4")
    p4.text(float(p4.px(1.0)), float(p4.py(1.0)) - 4, "threshold = 1", size=11, anchor="middle",
            color=_COLORS["uv"])

    return _document(p1.render("time (s)", "voltage (pu)") + p2.render("time (s)", "voltage (pu)")
                     + p3.render("voltage (pu)", "mass") + p4.render("", "index"))
