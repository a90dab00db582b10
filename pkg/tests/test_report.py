import json
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fidvr.report import (RESULT_COLUMNS, ConfusionMatrix, confusion_rates, evaluate_corpus,
                          format_matrix, results_csv, summary_dict, write_summary)
from fidvr.synth import Scenario, ScenarioSpec, generate_corpus, generate_scenario
from fidvr.trace import VoltageTrace

# counts printed for the 245,729-scenario study; used as an arithmetic fixture only
PAPER = ConfusionMatrix(true_positive=17_222, false_positive=678, true_negative=215_799,
                        false_negative=12_030)


@pytest.fixture(scope="module")
def small_corpus():
    corpus = []
    for arch, params in [("fidvr", {"dip_depth": 0.45, "stall_time": 3.0, "noise_amp": 0.002}),
                         ("fidvr", {"dip_depth": 0.2, "recovery_tau": 0.3, "noise_amp": 0.002}),
                         ("nominal", {"noise_amp": 0.003})]:
        corpus += generate_corpus(4, ScenarioSpec(arch, params), 0.1, 31, prefix=f"{arch}{len(corpus)}")
    return corpus


class TestConfusionMatrix:
    def test_fixture_rates(self):
        r = confusion_rates(PAPER)
        assert round(100 * r["false_negative_rate"], 1) == 41.1
        assert round(100 * r["accuracy_violation"], 1) == 58.9
        assert round(100 * r["accuracy_nonviolation"], 1) == 99.7
        assert r["accuracy_violation"] == pytest.approx(0.5887, abs=5e-5)
        assert r["accuracy_nonviolation"] == pytest.approx(0.99687, abs=5e-6)
        assert PAPER.total == 245_729

    def test_all_zero_is_undefined(self):
        r = confusion_rates(ConfusionMatrix())
        assert all(v is None for v in r.values())
        assert "undefined" in format_matrix(ConfusionMatrix())

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            ConfusionMatrix(-1, 0, 0, 0)

    def test_rendering(self):
        text = format_matrix(PAPER, "legacy")
        assert "215,799" in text and "12,030" in text and "17,222" in text and "678" in text
        assert "41.1%" in text and "99.7%" in text

    @given(st.lists(st.tuples(st.booleans(), st.booleans()), max_size=200))
    def test_from_pairs(self, pairs):
        m = ConfusionMatrix.from_pairs(pairs)
        assert m.total == len(pairs)
        r = confusion_rates(m)
        for key in ("false_negative_rate", "accuracy_violation", "accuracy_nonviolation"):
            assert getattr(m, key) == r[key]
            assert r[key] is None or 0 <= r[key] <= 1
        if m.true_positive + m.false_negative:
            assert r["false_negative_rate"] == m.false_negative / (m.true_positive + m.false_negative)


class TestEvaluateCorpus:
    def test_single_nominal(self, criteria):
        sc = Scenario("n", generate_scenario(ScenarioSpec("nominal")), ScenarioSpec("nominal"))
        ev = evaluate_corpus([sc], criteria)
        assert ev.legacy == ConfusionMatrix(0, 0, 1, 0)
        assert ev.evrvi == ConfusionMatrix(0, 0, 1, 0)

    def test_empty(self, criteria):
        with pytest.raises(ValueError, match="empty corpus"):
            evaluate_corpus([], criteria)

    def test_counts_and_rows(self, criteria, small_corpus):
        ev = evaluate_corpus(small_corpus, criteria)
        assert ev.legacy.total == ev.evrvi.total == len(small_corpus)
        assert ev.evrvi.true_positive >= 1 and ev.evrvi.true_negative >= 1
        for row in ev.rows:
            assert row.evrvi_pred == (row.uv_violation or row.ov_violation)

    def test_error_rows_excluded(self, criteria, small_corpus):
        bad = Scenario("aaa-bad", VoltageTrace(0.0, 0.01, np.ones(4), times=[0, 0.01, 0.03, 0.04]),
                       ScenarioSpec("nominal"))
        ev = evaluate_corpus(small_corpus + [bad], criteria)
        assert [r.scenario_id for r in ev.errors] == ["aaa-bad"]
        assert ev.evrvi.total == len(small_corpus)
        summary = summary_dict(ev)
        assert summary["errors"] == 1 and summary["assessed"] == len(small_corpus)
        first = results_csv(ev).splitlines()[1]
        assert first.startswith("aaa-bad,nominal,,")

    def test_order_independent(self, criteria, small_corpus):
        shuffled = list(small_corpus)
        random.Random(4).shuffle(shuffled)
        a, b = evaluate_corpus(small_corpus, criteria), evaluate_corpus(shuffled, criteria)
        assert a.legacy == b.legacy and a.evrvi == b.evrvi
        assert results_csv(a) == results_csv(b)

    def test_worker_count_independent(self, criteria, small_corpus):
        a = evaluate_corpus(small_corpus, criteria, jobs=1)
        b = evaluate_corpus(small_corpus, criteria, jobs=3)
        assert results_csv(a) == results_csv(b)


class TestOutputs:
    def test_csv_header_and_cells(self, criteria, small_corpus):
        text = results_csv(evaluate_corpus(small_corpus[:2], criteria))
        lines = text.splitlines()
        assert lines[0] == ",".join(RESULT_COLUMNS)
        cells = lines[1].split(",")
        assert cells[2] in ("0", "1") and float(cells[5]) == float(cells[5])

    def test_summary_json(self, criteria, small_corpus, tmp_path):
        ev = evaluate_corpus(small_corpus, criteria)
        path = tmp_path / "summary.json"
        write_summary(summary_dict(ev, criteria), path)
        doc = json.loads(path.read_text())
        assert set(doc["legacy"]) == {"matrix", "rates"}
        assert doc["evrvi"]["matrix"]["true_negative"] == ev.evrvi.true_negative
        assert doc["timing_s"]["ratio"] == pytest.approx(ev.runtime_ratio)
        assert doc["criteria"]["margin_pu"] == 0.005
