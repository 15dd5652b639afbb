"""
Test Synthetic Generator

Tests spec sampling, rendering, caption rendering and dataset generation.
"""

import json
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

# Add project root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent.parent))


def _spec(**overrides):
    from dualcast.types import (
        Combination,
        ComponentSpec,
        NoiseLevel,
        SeasonalitySpec,
        SeasonKind,
        TrendKind,
        TrendSpec,
    )

    spec = ComponentSpec(
        lookback=40,
        horizon=10,
        trend=TrendSpec(TrendKind.LINEAR, 0.0, 0.02),
        seasonality=SeasonalitySpec(SeasonKind.COSINE, 8, 0.5),
        noise=NoiseLevel.LOW,
        combination=Combination.ADDITIVE,
    )
    return replace(spec, **overrides)


def test_sample_spec_deterministic():
    """Test the sampler is a pure function of its seed"""
    from dualcast.modules.synthgen import sample_spec

    print("Testing sample_spec determinism...")

    assert sample_spec(11) == sample_spec(11)
    assert sample_spec(11) != sample_spec(12)

    print("  sample_spec determinism: PASSED")


def test_sample_spec_ranges():
    """Test sampled specs respect the distribution"""
    from dualcast.modules.synthgen import sample_spec
    from dualcast.types import NoiseLevel, SpecDistribution

    print("Testing sample_spec ranges...")

    dist = SpecDistribution(lookback=200, horizon=30, switch_probability=0.5)
    low, high = dist.period_range
    switch_low, switch_high = dist.switch_index_range()
    switches = 0
    for seed in range(300):
        spec = sample_spec(seed, dist)
        assert low <= spec.seasonality.period <= high
        assert 4 <= spec.seasonality.period <= spec.lookback / 2
        assert spec.noise != NoiseLevel.NONE
        assert spec.trend.rate != 0
        if spec.switch is not None:
            switches += 1
            assert switch_low <= spec.switch.index <= switch_high
    # p = 0.5 over 300 draws
    assert 100 < switches < 200

    never = SpecDistribution(switch_probability=0.0)
    assert all(sample_spec(seed, never).switch is None for seed in range(50))

    print("  sample_spec ranges: PASSED")


def test_horizon_switches():
    """Test the switch_heavy distribution always switches inside the horizon"""
    from dualcast.modules.synthgen import sample_spec
    from dualcast.types import SpecDistribution, SwitchKind

    print("Testing horizon switches...")

    dist = SpecDistribution.named("switch_heavy", lookback=64, horizon=16)
    for seed in range(50):
        spec = sample_spec(seed, dist)
        assert spec.switch is not None
        assert spec.switch.component == SwitchKind.TREND
        assert spec.switch_in_horizon
        # post-switch rate flips sign
        assert spec.post_switch_trend.rate * spec.trend.rate < 0

    print("  horizon switches: PASSED")


def test_render_series():
    """Test rendering is seeded and honours the requested length"""
    from dualcast.errors import SynthesisError
    from dualcast.modules.synthgen import compose, render_series
    from dualcast.types import NoiseLevel

    print("Testing render_series...")

    spec = _spec()
    a = render_series(spec, rng_seed=3)
    b = render_series(spec, rng_seed=3)
    assert a.shape == (50,)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, render_series(spec, rng_seed=4))

    clean = render_series(spec.without_noise(), rng_seed=3)
    assert np.allclose(clean, compose(spec))

    # noise stream does not depend on the level
    low = render_series(spec, rng_seed=5) - compose(spec)
    high = render_series(replace(spec, noise=NoiseLevel.HIGH), rng_seed=5) - compose(spec)
    assert np.allclose(high / np.sqrt(0.5), low / np.sqrt(0.01))

    try:
        render_series(spec, length=49)
        assert False, "Should raise for a length mismatch"
    except SynthesisError:
        pass

    print("  render_series: PASSED")


def test_additive_noise_variance():
    """Test rendered noise matches the configured variance per level"""
    from dualcast.modules.synthgen import render_series
    from dualcast.types import NoiseLevel

    print("Testing additive noise variance...")

    for level in (NoiseLevel.LOW, NoiseLevel.MEDIUM, NoiseLevel.HIGH):
        spec = _spec(noise=level)
        clean = render_series(spec.without_noise(), rng_seed=0)
        residuals = np.stack([render_series(spec, rng_seed=seed) - clean for seed in range(1000)])
        variance = float(residuals.var())
        assert abs(variance - level.variance) <= 0.2 * level.variance, (level, variance)
        print(f"  {level.value}: {variance:.4f} (target {level.variance})")

    print("  additive noise variance: PASSED")


def test_trend_rate_recovered():
    """Test regression on noise-free trends recovers the configured rate"""
    from dualcast.modules.synthgen import render_series
    from dualcast.types import NoiseLevel, SeasonalitySpec, SeasonKind, TrendKind, TrendSpec

    print("Testing trend rate recovery...")

    flat = SeasonalitySpec(SeasonKind.COSINE, 8, 0.0)
    t = np.arange(50, dtype=float)
    for rate in (0.013, -0.4, 2.5):
        spec = _spec(trend=TrendSpec(TrendKind.LINEAR, 1.5, rate), seasonality=flat, noise=NoiseLevel.NONE)
        values = render_series(spec)
        slope, intercept = np.polyfit(t, values, 1)
        assert abs(slope - rate) < 1e-9
        assert abs(intercept - 1.5) < 1e-9

    # exponential rate is per lookback length
    spec = _spec(trend=TrendSpec(TrendKind.EXPONENTIAL, 2.0, 1.2), seasonality=flat, noise=NoiseLevel.NONE)
    slope, intercept = np.polyfit(t, np.log(render_series(spec)), 1)
    assert abs(slope - 1.2 / spec.lookback) < 1e-9
    assert abs(intercept - np.log(2.0)) < 1e-9

    print("  trend rate recovery: PASSED")


def test_cosine_autocorrelation_peak():
    """Test autocorrelation of a cosine season peaks at its period"""
    from dualcast.modules.synthgen import render_series
    from dualcast.types import NoiseLevel, SeasonalitySpec, SeasonKind, TrendKind, TrendSpec

    print("Testing cosine autocorrelation...")

    for period in (4, 5, 8, 13, 30):
        spec = _spec(
            lookback=60,
            horizon=20,
            trend=TrendSpec(TrendKind.LINEAR, 0.0, 1e-12),
            seasonality=SeasonalitySpec(SeasonKind.COSINE, period, 1.0),
            noise=NoiseLevel.NONE,
        )
        values = render_series(spec)
        values = values - values.mean()
        energy = float(np.dot(values, values))
        lags = range(1, len(values) // 2 + 1)
        acf = np.array([float(np.dot(values[:-lag], values[lag:])) / energy for lag in lags])
        # highest peak after the first negative lag
        first = int(np.argmax(acf < 0))
        assert int(np.argmax(acf[first:])) + first + 1 == period, (period, acf)

    print("  cosine autocorrelation: PASSED")


def test_switch_placement():
    """Test sampled switches fall in [0.3 n, 0.9 n] and change the trend at their index"""
    from dualcast.modules.synthgen import render_series, sample_spec
    from dualcast.types import NoiseLevel, SeasonalitySpec, SeasonKind, SpecDistribution, SwitchKind, SwitchSpec, TrendKind

    print("Testing switch placement...")

    dist = SpecDistribution(
        lookback=200,
        horizon=30,
        trend_kinds=(TrendKind.LINEAR,),
        switch_probability=1.0,
        switch_components=(SwitchKind.TREND,),
    )
    n = dist.length
    for seed in range(200):
        spec = sample_spec(seed, dist)
        k = spec.switch.index
        assert 0.3 * n <= k <= 0.9 * n, (seed, k)

        flat = replace(spec, seasonality=SeasonalitySpec(spec.seasonality.kind, spec.seasonality.period, 0.0))
        values = render_series(flat.without_noise())
        bends = np.abs(np.diff(values, 2))
        assert int(np.argmax(bends)) + 1 == k
        assert np.all(np.delete(bends, k - 1) < 1e-9)

    # slope +s to -s peaks at the switch
    peaked = _spec(
        seasonality=SeasonalitySpec(SeasonKind.COSINE, 8, 0.0),
        noise=NoiseLevel.NONE,
        switch=SwitchSpec(SwitchKind.TREND, 27, rate=-0.02),
    )
    assert int(np.argmax(render_series(peaked))) == 27

    print("  switch placement: PASSED")


def test_invalid_spec():
    """Test spec validation"""
    from dualcast.errors import SynthesisError
    from dualcast.modules.synthgen import render_series
    from dualcast.types import SeasonalitySpec, SeasonKind, SwitchKind, SwitchSpec

    print("Testing invalid specs...")

    bad = [
        _spec(seasonality=SeasonalitySpec(SeasonKind.COSINE, 3, 0.5)),
        _spec(seasonality=SeasonalitySpec(SeasonKind.COSINE, 21, 0.5)),
        _spec(switch=SwitchSpec(SwitchKind.TREND, 0, rate=-0.1)),
        _spec(switch=SwitchSpec(SwitchKind.NOISE, 20)),
    ]
    for spec in bad:
        try:
            render_series(spec)
            assert False, f"Should reject {spec}"
        except SynthesisError:
            pass

    print("  invalid specs: PASSED")


def test_trend_switch_is_continuous():
    """Test a trend switch changes slope without a jump"""
    from dualcast.modules.synthgen import trend_component
    from dualcast.types import SwitchKind, SwitchSpec

    print("Testing trend switch continuity...")

    spec = _spec(switch=SwitchSpec(SwitchKind.TREND, 30, rate=-0.05))
    trend = trend_component(spec)
    assert abs(trend[30] - 0.6) < 1e-12
    assert abs((trend[31] - trend[30]) - (-0.05)) < 1e-12
    assert abs((trend[29] - trend[28]) - 0.02) < 1e-12

    print("  trend switch continuity: PASSED")


def test_stabilize_multiplicative():
    """Test multiplicative specs keep their trend above the floor"""
    from dualcast.modules.synthgen import TREND_FLOOR, stabilize, trend_component
    from dualcast.types import Combination, TrendKind, TrendSpec

    print("Testing stabilize...")

    spec = _spec(combination=Combination.MULTIPLICATIVE, trend=TrendSpec(TrendKind.LINEAR, -1.0, 0.01))
    stable = stabilize(spec)
    assert stable.trend_offset > 0
    assert abs(trend_component(stable).min() - TREND_FLOOR) < 1e-12

    additive = _spec(trend=TrendSpec(TrendKind.LINEAR, -1.0, 0.01))
    assert stabilize(additive) is additive

    print("  stabilize: PASSED")


def test_caption_parse_back():
    """Test captions name the fields that produced them"""
    from dualcast.modules.synthgen import render_captions, sample_spec
    from dualcast.modules.templates import parse_caption
    from dualcast.types import SpecDistribution

    print("Testing caption parse-back...")

    dist = SpecDistribution(lookback=200, horizon=30, switch_probability=0.5)
    for seed in range(200):
        spec = sample_spec(seed, dist)
        history_text, future_text = render_captions(spec, rng_seed=seed)
        assert history_text and future_text
        parsed = parse_caption(history_text, future_text)
        assert parsed.direction == spec.trend.direction, (seed, history_text)
        assert parsed.noise == spec.noise, (seed, history_text)
        assert parsed.has_switch == (spec.switch is not None), (seed, history_text, future_text)

    print("  caption parse-back: PASSED")


def test_future_caption_time():
    """Test horizon switches are timed from the horizon start"""
    from dualcast.modules.synthgen import render_captions
    from dualcast.types import SwitchKind, SwitchSpec

    print("Testing future caption time...")

    spec = _spec(switch=SwitchSpec(SwitchKind.TREND, 44, rate=-0.05))
    history_text, future_text = render_captions(spec, rng_seed=0)
    assert "after 4 steps" in future_text.lower()
    assert "44" not in history_text

    print("  future caption time: PASSED")


def test_uncovered_bank():
    """Test an incomplete template bank is reported"""
    from dualcast.errors import CaptionError
    from dualcast.modules.synthgen import render_captions
    from dualcast.modules.templates import default_bank
    from dualcast.types import CaptionTemplateBank

    print("Testing uncovered bank...")

    templates = dict(default_bank().templates)
    del templates[("seasonality", "cosine")]
    try:
        render_captions(_spec(), CaptionTemplateBank(templates))
        assert False, "Should raise for a missing template"
    except CaptionError as e:
        assert e.pair == ("seasonality", "cosine")

    assert default_bank().undercovered(2) == ()

    print("  uncovered bank: PASSED")


def test_build_dataset():
    """Test dataset generation writes records, manifest and specs"""
    from dualcast.infra import load_split, read_jsonl, read_manifest
    from dualcast.modules.synthgen import build_dataset, generate_sample, read_specs, render_series
    from dualcast.types import SpecDistribution

    print("Testing build_dataset...")

    dist = SpecDistribution(lookback=32, horizon=8)
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "synth.jsonl"
        manifest = build_dataset(20, dist, seed=7, out=out, holdout_fraction=0.25, workers=1)
        assert manifest.n_train == 15 and manifest.n_holdout == 5
        assert manifest.lookback == 32 and manifest.horizon == 8
        assert manifest.captioned
        assert read_manifest(out) == manifest

        windows = read_jsonl(out)
        assert len(windows) == 20
        assert windows[3].series_id == "synth-7-00003"
        assert all(w.lookback == 32 and w.horizon == 8 for w in windows)

        # each record reproducible from (seed, index)
        window, spec = generate_sample(7, 3, dist)
        assert window == windows[3]

        specs = read_specs(out)
        assert [sid for sid, _ in specs] == [w.series_id for w in windows]
        assert specs[3][1] == spec

        test_split, _ = load_split(out, "test")
        assert [w.series_id for w in test_split] == [f"synth-7-{i:05d}" for i in range(15, 20)]

        again = Path(tmp) / "again.jsonl"
        build_dataset(20, dist, seed=7, out=again, holdout_fraction=0.25, workers=1)
        assert out.read_bytes() == again.read_bytes()

        switches = json.loads((Path(tmp) / "synth.manifest.json").read_text())["extras"]["switches"]
        assert switches == sum(1 for _, s in specs if s.switch is not None)

    print("  build_dataset: PASSED")


def test_parallel_matches_serial():
    """Test worker count does not change the output"""
    from dualcast.modules.synthgen import generate_samples
    from dualcast.types import SpecDistribution

    print("Testing parallel generation...")

    dist = SpecDistribution(lookback=32, horizon=8)
    serial = generate_samples(12, dist, seed=1, workers=1)
    parallel = generate_samples(12, dist, seed=1, workers=2)
    assert [w for w, _ in serial] == [w for w, _ in parallel]

    print("  parallel generation: PASSED")


def test_resolve_distribution():
    """Test named distribution plus overrides"""
    from dualcast.errors import ConfigurationError
    from dualcast.modules.synthgen import resolve_distribution
    from dualcast.types import TrendKind

    print("Testing resolve_distribution...")

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "dist.json"
        path.write_text(json.dumps({"trend_kinds": ["exponential"], "additive_amplitude": [0.2, 0.3]}))
        dist = resolve_distribution("default", 64, 16, path, switch_probability=0.0)
        assert dist.trend_kinds == (TrendKind.EXPONENTIAL,)
        assert dist.additive_amplitude == (0.2, 0.3)
        assert dist.switch_probability == 0.0
        assert dist.lookback == 64

        path.write_text(json.dumps({"not_a_field": 1}))
        try:
            resolve_distribution("default", config_file=path)
            assert False, "Should reject unknown fields"
        except ConfigurationError:
            pass

    print("  resolve_distribution: PASSED")


def main():
    """Run all tests"""
    print("=" * 60)
    print("Synthetic Generator Tests")
    print("=" * 60)

    tests = [
        test_sample_spec_deterministic,
        test_sample_spec_ranges,
        test_horizon_switches,
        test_render_series,
        test_additive_noise_variance,
        test_trend_rate_recovered,
        test_cosine_autocorrelation_peak,
        test_switch_placement,
        test_invalid_spec,
        test_trend_switch_is_continuous,
        test_stabilize_multiplicative,
        test_caption_parse_back,
        test_future_caption_time,
        test_uncovered_bank,
        test_build_dataset,
        test_parallel_matches_serial,
        test_resolve_distribution,
    ]

    passed = 0
    failed = 0

    for test in tests:
        try:
            test()
            passed += 1
        except Exception as e:
            print(f"  FAILED: {e}")
            failed += 1

    print("=" * 60)
    print(f"Results: {passed} passed, {failed} failed")
    print("=" * 60)

    return failed == 0


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
