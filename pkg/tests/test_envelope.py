import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fidvr.emd import EmdConfig, ImfDecomposition, decompose
from fidvr.envelope import clip_nominal, extract_envelopes, monotone_hull, oscillation_band
from fidvr.synth import ARCHETYPES, ScenarioSpec, generate_scenario
from fidvr.trace import VoltageTrace


def composed(trace, cfg=EmdConfig()):
    """The pipeline spelled out with the public stage functions."""
    up, lo = clip_nominal(*oscillation_band(decompose(trace, cfg), cfg))
    return monotone_hull(up, "non_increasing"), monotone_hull(lo, "non_decreasing")


def scenario(archetype, seed, **params):
    base = {"dip_depth": 0.3, "osc_amp": 0.1, "overshoot_amp": 0.2, "noise_amp": 0.005,
            "stall_time": 1.0}
    return generate_scenario(ScenarioSpec(archetype, {**base, **params}, seed=seed))


class TestOscillationBand:
    def test_no_imfs(self):
        r = np.linspace(0.8, 1.0, 50)
        up, lo = oscillation_band(ImfDecomposition(np.empty((0, 50)), r, 50, 0.01))
        assert np.array_equal(up, r) and np.array_equal(lo, r)

    def test_unit_residual_with_tone(self):
        dt = 0.001
        t = np.arange(0, 2, dt)
        imf = 0.1 * np.sin(2 * np.pi * 5 * t)
        up, lo = oscillation_band(ImfDecomposition(imf[None, :], np.ones_like(t), t.size, dt))
        inner = slice(t.size // 10, t.size - t.size // 10)
        assert np.max(np.abs(up[inner] - 1.1)) <= 0.02
        assert np.max(np.abs(lo[inner] - 0.9)) <= 0.02

    def test_decaying_oscillation_nonnegative_width(self):
        dt = 0.01
        t = np.arange(0, 10, dt)
        tr = VoltageTrace(0.0, dt, 1 + 0.2 * np.exp(-t / 2) * np.sin(2 * np.pi * 1.3 * t))
        up, lo = oscillation_band(decompose(tr))
        assert np.all(up - lo >= 0)

    @pytest.mark.parametrize("seed", range(5))
    def test_band_contains_signal(self, seed):
        tr = scenario("over_voltage_oscillatory", seed)
        d = decompose(tr)
        up, lo = oscillation_band(d)
        x = d.residual + d.imfs.sum(axis=0)
        assert np.all(lo <= x + 1e-12) and np.all(x <= up + 1e-12)


class TestClipNominal:
    def test_upper_below_one(self):
        up, _ = clip_nominal([0.9, 0.95, 0.99], [0.9, 0.95, 0.99])
        assert np.all(up == 1.0)

    def test_lower_example(self):
        _, lo = clip_nominal([1, 1, 1], [0.7, 0.95, 1.05])
        np.testing.assert_array_equal(lo, [0.7, 0.95, 1.0])

    def test_identity(self):
        up, lo = clip_nominal(np.ones(5), np.ones(5))
        assert np.all(up == 1) and np.all(lo == 1)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            clip_nominal([1, 1], [1, 1, 1])


class TestMonotoneHull:
    def test_suffix_max(self):
        np.testing.assert_array_equal(monotone_hull([1.2, 1.0, 1.1, 1.0], "non_increasing"),
                                      [1.2, 1.1, 1.1, 1.0])

    def test_suffix_min(self):
        np.testing.assert_array_equal(monotone_hull([0.7, 0.9, 0.8, 1.0], "non_decreasing"),
                                      [0.7, 0.8, 0.8, 1.0])

    def test_monotone_unchanged(self):
        x = np.linspace(1.3, 1.0, 7)
        np.testing.assert_array_equal(monotone_hull(x, "non_increasing"), x)

    def test_bad_direction(self):
        with pytest.raises(ValueError):
            monotone_hull([1.0], "sideways")

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(0, 2, allow_nan=False), min_size=1, max_size=60),
           st.sampled_from(["non_increasing", "non_decreasing"]))
    def test_idempotent_and_dominating(self, xs, direction):
        x = np.array(xs)
        h = monotone_hull(x, direction)
        assert np.array_equal(monotone_hull(h, direction), h)
        if direction == "non_increasing":
            assert np.all(h >= x) and np.all(np.diff(h) <= 0)
            ref = np.array([x[k:].max() for k in range(x.size)])
        else:
            assert np.all(h <= x) and np.all(np.diff(h) >= 0)
            ref = np.array([x[k:].min() for k in range(x.size)])
        assert np.array_equal(h, ref)


class TestExtractEnvelopes:
    def test_constant(self):
        pair = extract_envelopes(VoltageTrace(0.0, 0.01, np.ones(300)))
        assert np.all(pair.upper == 1) and np.all(pair.lower == 1)

    def test_step_recovery(self):
        v = np.where(np.arange(501) * 0.01 < 1.0, 0.7, 1.0)
        pair = extract_envelopes(VoltageTrace(0.0, 0.01, v))
        assert pair.lower[0] == pytest.approx(0.7)
        assert pair.lower[-1] == pytest.approx(1.0)
        assert np.all(np.diff(pair.lower) >= 0)
        assert np.all(pair.upper == 1)
        np.testing.assert_array_equal(pair.lower, v)

    def test_overvoltage_hump(self):
        t = np.arange(0, 10.001, 0.01)
        v = 1.0 + 0.15 * np.exp(-((t - 2.0) / 0.7) ** 2)
        pair = extract_envelopes(VoltageTrace(0.0, 0.01, v))
        assert pair.upper[0] >= 1.15 - 1e-12
        assert pair.upper[-1] == pytest.approx(1.0, abs=1e-6)
        assert np.all(pair.lower == 1)

    @pytest.mark.parametrize("archetype", ARCHETYPES)
    @pytest.mark.parametrize("seed", range(3))
    def test_invariants(self, archetype, seed):
        tr = scenario(archetype, seed)
        pair = extract_envelopes(tr)
        assert len(pair.upper) == len(pair.lower) == len(tr)
        assert np.all(pair.lower <= 1) and np.all(pair.upper >= 1)
        assert np.all(np.diff(pair.upper) <= 1e-12)
        assert np.all(np.diff(pair.lower) >= -1e-12)

    @pytest.mark.parametrize("archetype", ARCHETYPES)
    @pytest.mark.parametrize("seed", range(3))
    def test_fused_pipeline_matches_composition(self, archetype, seed):
        tr = scenario(archetype, seed)
        pair = extract_envelopes(tr)
        up, lo = composed(tr)
        np.testing.assert_allclose(pair.upper, up, rtol=0, atol=1e-14)
        np.testing.assert_allclose(pair.lower, lo, rtol=0, atol=1e-14)

    @pytest.mark.parametrize("seed", range(3))
    def test_hulls_bound_clipped_raw(self, seed):
        tr = scenario("over_voltage_oscillatory", seed)
        up_raw, lo_raw = clip_nominal(*oscillation_band(decompose(tr)))
        pair = extract_envelopes(tr)
        assert np.all(pair.upper >= up_raw - 1e-14)
        assert np.all(pair.lower <= lo_raw + 1e-14)

    def test_no_undervoltage_gives_flat_lower(self):
        t = np.arange(1001) * 0.01
        v = 1.0 + 0.2 * np.exp(-t) * (1 - np.exp(-t / 0.1))
        pair = extract_envelopes(VoltageTrace(0.0, 0.01, v))
        assert np.all(pair.lower == 1.0)
