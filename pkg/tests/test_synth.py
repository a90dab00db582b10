import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fidvr.criteria import label_violation
from fidvr.emd import find_extrema
from fidvr.synth import (ARCHETYPES, ScenarioSpec, build_corpus, builtin_template,
                         generate_corpus, generate_scenario, load_template, read_corpus,
                         write_corpus)

# frozen split example: fidvr template, dip depth 0.3 jittered +-50 %
SPLIT_TEMPLATE = ScenarioSpec("fidvr", {"dip_depth": 0.3, "stall_time": 1.0, "recovery_tau": 1.0,
                                        "noise_amp": 0.002})
SPLIT_SEED = 424242
SPLIT_VIOLATIONS = 39


class TestSpec:
    @pytest.mark.parametrize("archetype,params,kw", [
        ("motor_e", {}, {}),
        ("fidvr", {"dip_depth": 1.0}, {}),
        ("fidvr", {"dip_depth": -0.1}, {}),
        ("oscillatory", {"osc_amp": -0.1}, {}),
        ("fidvr", {"recovery_tau": 0.0}, {}),
        ("fidvr", {"mystery": 1.0}, {}),
        ("fidvr", {}, {"dt": 0.0}),
        ("fidvr", {}, {"duration": -1.0}),
    ])
    def test_invalid(self, archetype, params, kw):
        with pytest.raises(ValueError):
            ScenarioSpec(archetype, params, **kw)

    def test_dict_round_trip(self):
        spec = ScenarioSpec("oscillatory", {"osc_amp": 0.1, "dip_depth": 0.2}, seed=2**63 + 5)
        assert ScenarioSpec.from_dict(json.loads(json.dumps(spec.to_dict()))) == spec


class TestGenerateScenario:
    def test_nominal_without_noise(self):
        tr = generate_scenario(ScenarioSpec("nominal"))
        assert np.all(tr.samples == 1.0) and len(tr) == 1001

    def test_fidvr_closed_form(self):
        tr = generate_scenario(ScenarioSpec("fidvr", {"dip_depth": 0.3, "recovery_tau": 3.0}))
        assert tr.samples[0] == pytest.approx(0.7, abs=1e-15)
        assert tr.samples[-1] >= 0.985
        assert np.all(np.diff(tr.samples) > 0)
        t = tr.time_axis()
        np.testing.assert_allclose(tr.samples, 1 - 0.3 * np.exp(-t / 3.0), rtol=0, atol=1e-15)

    def test_stall_holds_the_dip(self):
        tr = generate_scenario(ScenarioSpec("fidvr", {"dip_depth": 0.4, "stall_time": 2.0}))
        assert np.all(tr.samples[:201] == pytest.approx(0.6))
        assert tr.samples[-1] > 0.99

    def test_bit_identical(self):
        spec = ScenarioSpec("over_voltage_oscillatory", {"dip_depth": 0.2, "osc_amp": 0.05,
                                                         "overshoot_amp": 0.2, "noise_amp": 0.01},
                            seed=77)
        assert np.array_equal(generate_scenario(spec).samples, generate_scenario(spec).samples)

    def test_seed_changes_noise_only(self):
        base = {"dip_depth": 0.2, "noise_amp": 0.01}
        a = generate_scenario(ScenarioSpec("fidvr", base, seed=1)).samples
        b = generate_scenario(ScenarioSpec("fidvr", base, seed=2)).samples
        assert not np.array_equal(a, b)
        assert np.max(np.abs(a - b)) <= 2 * 0.01

    def test_clipped_at_zero(self):
        tr = generate_scenario(ScenarioSpec("oscillatory", {"dip_depth": 0.95, "osc_amp": 0.5,
                                                            "stall_time": 2.0, "osc_decay": 10.0}))
        assert tr.samples.min() == 0.0


class TestArchetypeFidelity:
    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.05, 0.5), st.floats(0.5, 3.0), st.floats(0.02, 0.2), st.integers(0, 10**6))
    def test_oscillatory_extrema(self, dip, freq, amp, seed):
        spec = ScenarioSpec("oscillatory", {"dip_depth": dip, "osc_freq": freq, "osc_amp": amp,
                                            "osc_decay": 3.0, "noise_amp": 0.002}, seed=seed)
        mx, mn = find_extrema(generate_scenario(spec).samples)
        assert mx.size + mn.size >= 3

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.0, 0.3), st.floats(0.05, 0.4), st.integers(0, 10**6))
    def test_over_voltage_exceeds_nominal(self, dip, amp, seed):
        spec = ScenarioSpec("over_voltage", {"dip_depth": dip, "recovery_tau": 0.3,
                                             "overshoot_amp": amp + dip, "overshoot_decay": 3.0,
                                             "overshoot_rise": 0.1}, seed=seed)
        assert generate_scenario(spec).samples.max() > 1.0

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.0, 0.9), st.floats(0.05, 5.0), st.floats(0.0, 4.0))
    def test_fidvr_monotone_without_noise(self, dip, tau, stall):
        spec = ScenarioSpec("fidvr", {"dip_depth": dip, "recovery_tau": tau, "stall_time": stall})
        assert np.all(np.diff(generate_scenario(spec).samples) >= 0)

    @pytest.mark.parametrize("archetype", ARCHETYPES)
    def test_trace_invariants(self, archetype):
        spec = ScenarioSpec(archetype, {"dip_depth": 0.9, "osc_amp": 0.4, "overshoot_amp": 0.5,
                                        "noise_amp": 0.05}, seed=3)
        tr = generate_scenario(spec)
        assert np.all(np.isfinite(tr.samples)) and np.all(tr.samples >= 0)


class TestCorpus:
    def test_single_unjittered(self):
        tmpl = ScenarioSpec("oscillatory", {"dip_depth": 0.2, "osc_amp": 0.1, "noise_amp": 0.01})
        (sc,) = generate_corpus(1, tmpl, jitter=0.0, master_seed=0)
        assert np.array_equal(sc.trace.samples, generate_scenario(tmpl).samples)

    def test_reproducible(self):
        a = generate_corpus(100, SPLIT_TEMPLATE, 0.5, 9)
        b = generate_corpus(100, SPLIT_TEMPLATE, 0.5, 9)
        assert [s.spec for s in a] == [s.spec for s in b]
        assert all(np.array_equal(x.trace.samples, y.trace.samples) for x, y in zip(a, b))

    def test_counter_seeds_and_jitter_bounds(self):
        corpus = generate_corpus(50, SPLIT_TEMPLATE, 0.2, 1000)
        assert [s.spec.seed for s in corpus] == [1000 ^ k for k in range(50)]
        for sc in corpus:
            for key, base in SPLIT_TEMPLATE.params.items():
                assert abs(sc.spec.params[key] - base) <= 0.2 * base + 1e-15

    def test_count_must_be_positive(self):
        with pytest.raises(ValueError):
            generate_corpus(0, SPLIT_TEMPLATE)

    def test_both_classes(self, criteria):
        corpus = generate_corpus(100, SPLIT_TEMPLATE, 0.5, SPLIT_SEED)
        labels = [label_violation(s.trace, criteria.uv, criteria.ov).violated for s in corpus]
        assert sum(labels) == SPLIT_VIOLATIONS
        assert sum(labels) >= 10 and len(labels) - sum(labels) >= 10

    def test_write_read(self, tmp_path):
        corpus = generate_corpus(3, SPLIT_TEMPLATE, 0.3, 5, prefix="x")
        write_corpus(corpus, tmp_path)
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert [e["id"] for e in manifest["scenarios"]] == ["x-00000", "x-00001", "x-00002"]
        back = read_corpus(tmp_path)
        for a, b in zip(corpus, back):
            assert a.spec == b.spec
            assert np.array_equal(a.trace.samples, b.trace.samples)

    def test_duplicate_ids(self):
        tmpl = {"groups": [{"archetype": "nominal", "count": 1, "prefix": "a"},
                           {"archetype": "nominal", "count": 1, "prefix": "a"}]}
        with pytest.raises(ValueError, match="duplicate"):
            build_corpus(tmpl)


class TestAcceptanceTemplate:
    def test_shape(self, acceptance_corpus):
        assert len(acceptance_corpus) == 300
        families = {}
        for sc in acceptance_corpus:
            fam = sc.scenario_id.split("-")[0]
            families[fam] = families.get(fam, 0) + 1
        assert families == {"osc": 100, "ov": 100, "fidvr": 100}
        kinds = {sc.spec.archetype for sc in acceptance_corpus}
        assert kinds == {"oscillatory", "over_voltage_oscillatory", "fidvr", "nominal"}

    def test_builtin_lookup(self, tmp_path):
        tmpl = builtin_template("acceptance")
        assert load_template("acceptance") == tmpl
        p = tmp_path / "t.json"
        p.write_text(json.dumps(tmpl))
        assert load_template(str(p)) == tmpl
        with pytest.raises(ValueError):
            builtin_template("nope")
