"""Batch scoring of the legacy and EVRVI classifiers against ground truth."""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache

from .criteria import CriteriaSet, criterion_trace, label_violation
from .entropy import LegacyConfig, legacy_kl_index
from .evrvi import EvrviConfig, assess

__all__ = [
    "ConfusionMatrix",
    "ScenarioResult",
    "Evaluation",
    "confusion_rates",
    "evaluate_scenario",
    "evaluate_corpus",
    "results_csv",
    "summary_dict",
    "format_matrix",
]

log = logging.getLogger(__name__)

RESULT_COLUMNS = ("scenario_id", "archetype", "truth", "legacy_pred", "evrvi_pred",
                  "evrvi_plus", "evrvi_minus", "kl_signal", "kl_reference")


@dataclass(frozen=True)
class ConfusionMatrix:
    true_positive: int = 0
    false_positive: int = 0
    true_negative: int = 0
    false_negative: int = 0

    def __post_init__(self):
        if min(self.true_positive, self.false_positive, self.true_negative, self.false_negative) < 0:
            raise ValueError("confusion counts must be non-negative")

    @classmethod
    def from_pairs(cls, pairs) -> "ConfusionMatrix":
        """Tally ``(truth, prediction)`` boolean pairs."""
        tp = fp = tn = fn = 0
        for truth, pred in pairs:
            if truth and pred:
                tp += 1
            elif truth:
                fn += 1
            elif pred:
                fp += 1
            else:
                tn += 1
        return cls(tp, fp, tn, fn)

    @property
    def total(self) -> int:
        return self.true_positive + self.false_positive + self.true_negative + self.false_negative

    @property
    def false_negative_rate(self):
        return confusion_rates(self)["false_negative_rate"]

    @property
    def accuracy_violation(self):
        return confusion_rates(self)["accuracy_violation"]

    @property
    def accuracy_nonviolation(self):
        return confusion_rates(self)["accuracy_nonviolation"]


def _ratio(num, den):
    return num / den if den > 0 else None


def confusion_rates(m: ConfusionMatrix) -> dict:
    """Derived rates; ``None`` marks a rate whose denominator is zero."""
    positives = m.true_positive + m.false_negative
    negatives = m.true_negative + m.false_positive
    return {
        "false_negative_rate": _ratio(m.false_negative, positives),
        "accuracy_violation": _ratio(m.true_positive, positives),
        "false_positive_rate": _ratio(m.false_positive, negatives),
        "accuracy_nonviolation": _ratio(m.true_negative, negatives),
    }


def format_matrix(m: ConfusionMatrix, title: str = "") -> str:
    """Plain-text confusion table with thousands separators."""
    width = max(len(f"{c:,}") for c in (m.true_positive, m.false_positive,
                                         m.true_negative, m.false_negative, 0))
    width = max(width, 9)
    rates = confusion_rates(m)

    def pct(x):
        return "undefined" if x is None else f"{100 * x:.1f}%"

    lines = [title] if title else []
    lines += [
        f"{'':>14} {'pred viol':>{width}} {'pred ok':>{width}}",
        f"{'truth viol':>14} {m.true_positive:>{width},} {m.false_negative:>{width},}",
        f"{'truth ok':>14} {m.false_positive:>{width},} {m.true_negative:>{width},}",
        f"FN rate {pct(rates['false_negative_rate'])}, "
        f"violation accuracy {pct(rates['accuracy_violation'])}, "
        f"non-violation accuracy {pct(rates['accuracy_nonviolation'])}",
    ]
    return "\n".join(lines)


@dataclass(frozen=True)
class ScenarioResult:
    scenario_id: str
    archetype: str
    truth: bool | None = None
    truth_kind: str | None = None
    legacy_pred: bool | None = None
    evrvi_pred: bool | None = None
    evrvi_plus: float | None = None
    evrvi_minus: float | None = None
    kl_signal: float | None = None
    kl_reference: float | None = None
    uv_violation: bool | None = None
    ov_violation: bool | None = None
    error: str | None = None


@dataclass
class Evaluation:
    rows: list
    legacy: ConfusionMatrix
    evrvi: ConfusionMatrix
    legacy_seconds: float
    evrvi_seconds: float

    @property
    def errors(self) -> list:
        return [r for r in self.rows if r.error is not None]

    @property
    def runtime_ratio(self):
        return _ratio(self.evrvi_seconds, self.legacy_seconds)


@lru_cache(maxsize=32)
def _reference_trace(uv, dt, n):
    return criterion_trace(uv, dt, dt * (n - 1))


def evaluate_scenario(scenario, criteria: CriteriaSet, cfg: EvrviConfig = EvrviConfig(),
                      legacy: LegacyConfig = LegacyConfig()):
    """Label and classify one scenario.

    The timings cover each classifier's public entry point only:
    ``legacy_kl_index`` given the rendered reference trace, and ``assess``
    with its cached thresholds.

    Returns
    -------
    row : ScenarioResult
    legacy_seconds, evrvi_seconds : float
        Wall-clock spent inside each classifier.
    """
    trace = scenario.trace
    archetype = scenario.spec.archetype
    try:
        label = label_violation(trace, criteria.uv, criteria.ov, criteria.margin, criteria.dwell)
        ref = _reference_trace(criteria.uv, trace.dt, len(trace))
        t0 = time.perf_counter()
        old = legacy_kl_index(trace, ref, legacy)
        t1 = time.perf_counter()
        rep = assess(trace, criteria.uv, criteria.ov, cfg)
        t2 = time.perf_counter()
    except Exception as exc:  # recorded as an error row, the batch keeps going
        log.warning("scenario %s failed: %s", scenario.scenario_id, exc)
        return ScenarioResult(scenario.scenario_id, archetype, error=f"{type(exc).__name__}: {exc}"), 0.0, 0.0
    row = ScenarioResult(
        scenario.scenario_id, archetype, label.violated, label.kind, old.violated, rep.violated,
        rep.evrvi_plus, rep.evrvi_minus, old.kl_signal, old.kl_reference,
        rep.uv_violation, rep.ov_violation)
    return row, t1 - t0, t2 - t1


def _evaluate_chunk(args):
    chunk, criteria, cfg, legacy = args
    # one untimed pass per worker: loads the compiled kernels and fills the
    # per-grid threshold and reference caches for both classifiers
    evaluate_scenario(chunk[0], criteria, cfg, legacy)
    return [evaluate_scenario(sc, criteria, cfg, legacy) for sc in chunk]


def evaluate_corpus(corpus, criteria: CriteriaSet, cfg: EvrviConfig = EvrviConfig(),
                    legacy: LegacyConfig = LegacyConfig(), jobs: int = 1) -> Evaluation:
    """Score both classifiers on ``corpus`` against the margin/dwell labels.

    Rows come back sorted by scenario id, so the result does not depend on
    corpus order or on ``jobs``. Each worker makes one untimed warm-up call
    before timing starts. The timings are only comparable with ``jobs=1``. Failed scenarios stay in ``rows`` with an
    error message and are left out of both matrices.
    """
    corpus = list(corpus)
    if not corpus:
        raise ValueError("empty corpus")
    if jobs <= 1:
        results = _evaluate_chunk((corpus, criteria, cfg, legacy))
    else:
        chunks = [corpus[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(_evaluate_chunk, [(c, criteria, cfg, legacy) for c in chunks if c])
            results = [r for part in parts for r in part]
    results.sort(key=lambda r: r[0].scenario_id)
    rows = [r[0] for r in results]
    ok = [r for r in rows if r.error is None]
    return Evaluation(
        rows,
        ConfusionMatrix.from_pairs((r.truth, r.legacy_pred) for r in ok),
        ConfusionMatrix.from_pairs((r.truth, r.evrvi_pred) for r in ok),
        sum(r[1] for r in results),
        sum(r[2] for r in results),
    )


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def results_csv(ev: Evaluation) -> str:
    """Per-scenario table; error rows carry blanks in the value columns."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for row in sorted(ev.rows, key=lambda r: r.scenario_id):
        writer.writerow([_cell(getattr(row, c)) for c in RESULT_COLUMNS])
    return buf.getvalue()


def summary_dict(ev: Evaluation, criteria: CriteriaSet | None = None,
                 cfg: EvrviConfig | None = None, legacy: LegacyConfig | None = None) -> dict:
    errors = ev.errors
    out = {
        "scenarios": len(ev.rows),
        "assessed": len(ev.rows) - len(errors),
        "errors": len(errors),
        "error_ids": [r.scenario_id for r in errors],
        "legacy": {"matrix": asdict(ev.legacy), "rates": confusion_rates(ev.legacy)},
        "evrvi": {"matrix": asdict(ev.evrvi), "rates": confusion_rates(ev.evrvi)},
        "timing_s": {"legacy": ev.legacy_seconds, "evrvi": ev.evrvi_seconds,
                     "ratio": ev.runtime_ratio},
    }
    if criteria is not None:
        out["criteria"] = criteria.to_dict()
    if cfg is not None:
        out["evrvi_config"] = asdict(cfg)
    if legacy is not None:
        out["legacy_config"] = asdict(legacy)
    return out


def write_summary(summary: dict, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
