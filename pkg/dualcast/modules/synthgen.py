"""
Synthetic Benchmark Module

Component-compositional series (trend, seasonality, noise, combination rule,
at most one switch) with rule-based caption pairs. Every sample is a pure
function of (seed, index), so generation parallelizes without changing the
output.
"""

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import TYPE_CHECKING, List, Optional, Tuple, Union

import numpy as np

if TYPE_CHECKING:
    from ..client import Workbench

from ..config import get_config
from ..errors import ConfigurationError, SynthesisError
from ..infra import CorrelationContext, is_deterministic, log_event, sample_seed_sequence, write_jsonl, write_manifest
from ..types import (
    CaptionTemplateBank,
    Combination,
    ComponentSpec,
    DatasetManifest,
    Direction,
    MultimodalWindow,
    NoiseLevel,
    SeasonalitySpec,
    SeasonKind,
    SpecDistribution,
    SwitchKind,
    SwitchSpec,
    TrendKind,
    TrendSpec,
)
from .templates import DIRECTION_WORDS, NOISE_WORDS, default_bank

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.SeedSequence, None]

# smallest trend value allowed under a multiplicative combination
TREND_FLOOR = 0.5

_M_SHAPE = ((0.0, 0.25, 0.5, 0.75, 1.0), (-1.0, 1.0, 0.0, 1.0, -1.0))
_TRAPEZOID = ((0.0, 0.2, 0.5, 0.7, 1.0), (-1.0, 1.0, 1.0, -1.0, -1.0))
_EXP_CURVE = 3.0


def _uniform(rng: np.random.Generator, bounds: Tuple[float, float]) -> float:
    return float(rng.uniform(bounds[0], bounds[1]))


def _pick(rng: np.random.Generator, options):
    return options[int(rng.integers(len(options)))]


# =============================================================================
# Components
# =============================================================================

def trend_component(spec: ComponentSpec) -> np.ndarray:
    """Trend values over [0, L+h), continuous across a trend switch, offset included"""
    n = spec.length
    scale = spec.lookback
    t = np.arange(n, dtype=np.float64)
    trend = spec.trend

    def base(at: np.ndarray, rate: float) -> np.ndarray:
        if trend.kind == TrendKind.LINEAR:
            return trend.level + rate * at
        return trend.level * np.exp(rate * at / scale)

    values = base(t, trend.rate)
    switch = spec.switch
    if switch is not None and switch.component == SwitchKind.TREND:
        k = switch.index
        anchor = values[k]
        after = t[k:] - k
        if trend.kind == TrendKind.LINEAR:
            values[k:] = anchor + switch.rate * after
        else:
            values[k:] = anchor * np.exp(switch.rate * after / scale)
    return values + spec.trend_offset


def season_unit(kind: SeasonKind, period: int, n: int) -> np.ndarray:
    """Unit-amplitude seasonal template tiled by period (values in [-1, 1])"""
    phase = (np.arange(n) % period) / period
    if kind == SeasonKind.COSINE:
        return np.cos(2.0 * np.pi * phase)
    if kind == SeasonKind.LINEAR:
        return 2.0 * phase - 1.0
    if kind == SeasonKind.EXPONENTIAL:
        return 2.0 * np.expm1(_EXP_CURVE * phase) / math.expm1(_EXP_CURVE) - 1.0
    if kind == SeasonKind.M_SHAPE:
        return np.interp(phase, *_M_SHAPE)
    return np.interp(phase, *_TRAPEZOID)


def season_component(spec: ComponentSpec) -> np.ndarray:
    n = spec.length
    season = spec.seasonality
    amplitude = np.full(n, season.amplitude)
    switch = spec.switch
    if switch is not None and switch.component == SwitchKind.SEASONALITY:
        amplitude[switch.index:] = switch.amplitude
    return amplitude * season_unit(season.kind, season.period, n)


def noise_std(spec: ComponentSpec) -> np.ndarray:
    """Per-step noise standard deviation"""
    n = spec.length
    std = np.full(n, math.sqrt(spec.noise.variance))
    switch = spec.switch
    if switch is not None and switch.component == SwitchKind.NOISE:
        std[switch.index:] = math.sqrt(switch.noise.variance)
    return std


def stabilize(spec: ComponentSpec) -> ComponentSpec:
    """
    Shift a multiplicative spec's trend so it stays >= TREND_FLOOR.

    Additive specs and already-stable specs come back unchanged.
    """
    if spec.combination != Combination.MULTIPLICATIVE:
        return spec
    low = float(trend_component(spec).min())
    if low >= TREND_FLOOR:
        return spec
    return replace(spec, trend_offset=spec.trend_offset + (TREND_FLOOR - low))


def compose(spec: ComponentSpec) -> np.ndarray:
    """Noise-free trend/seasonality composition"""
    trend = trend_component(spec)
    season = season_component(spec)
    if spec.combination == Combination.ADDITIVE:
        return trend + season
    return trend * (1.0 + season)


# =============================================================================
# Operations
# =============================================================================

def _sample_trend(rng: np.random.Generator, dist: SpecDistribution, kind: TrendKind) -> TrendSpec:
    sign = 1.0 if rng.random() < 0.5 else -1.0
    if kind == TrendKind.LINEAR:
        change = _uniform(rng, dist.linear_change)
        return TrendSpec(kind, _uniform(rng, dist.linear_level), sign * change / dist.length)
    return TrendSpec(kind, _uniform(rng, dist.exponential_level), sign * _uniform(rng, dist.exponential_rate))


def _sample_switch(
    rng: np.random.Generator,
    dist: SpecDistribution,
    trend: TrendSpec,
    season: SeasonalitySpec,
    noise: NoiseLevel,
) -> SwitchSpec:
    component = _pick(rng, dist.switch_components)
    low, high = dist.switch_index_range()
    index = int(rng.integers(low, high + 1))
    if component == SwitchKind.TREND:
        return SwitchSpec(component, index, rate=-trend.rate * _uniform(rng, dist.switch_rate_factor))
    if component == SwitchKind.SEASONALITY:
        factor = 2.0 if rng.random() < 0.5 else 0.5
        return SwitchSpec(component, index, amplitude=season.amplitude * factor)
    others = [level for level in dist.noise_levels if level != noise]
    if not others:
        others = [level for level in (NoiseLevel.LOW, NoiseLevel.MEDIUM, NoiseLevel.HIGH) if level != noise]
    return SwitchSpec(component, index, noise=_pick(rng, others))


def sample_spec(rng_seed: SeedLike, distribution: Optional[SpecDistribution] = None) -> ComponentSpec:
    """
    Draw one ComponentSpec.

    Categorical choices are uniform over the distribution's allowed values;
    a switch is added with probability switch_probability. Multiplicative
    specs come back stabilized (trend_offset recorded).
    """
    dist = distribution or SpecDistribution()
    rng = np.random.default_rng(rng_seed)

    trend = _sample_trend(rng, dist, _pick(rng, dist.trend_kinds))
    combination = _pick(rng, dist.combinations)
    low, high = dist.period_range
    amplitude_range = dist.additive_amplitude if combination == Combination.ADDITIVE else dist.multiplicative_amplitude
    season = SeasonalitySpec(
        kind=_pick(rng, dist.season_kinds),
        period=int(rng.integers(low, high + 1)),
        amplitude=_uniform(rng, amplitude_range),
    )
    noise = _pick(rng, dist.noise_levels)

    switch = None
    if dist.switch_probability > 0 and rng.random() < dist.switch_probability:
        switch = _sample_switch(rng, dist, trend, season, noise)

    spec = ComponentSpec(
        lookback=dist.lookback,
        horizon=dist.horizon,
        trend=trend,
        seasonality=season,
        noise=noise,
        combination=combination,
        switch=switch,
    )
    return stabilize(spec).validate()


def render_series(spec: ComponentSpec, length: Optional[int] = None, rng_seed: SeedLike = 0) -> np.ndarray:
    """
    Render L+h values: composition of the (stabilized) spec plus Gaussian noise.

    A standard normal draw is made for every step even at zero variance, so
    the noise stream does not depend on the noise level.
    """
    spec.validate()
    if length is not None and length != spec.length:
        raise SynthesisError.invalid_spec("length", f"{length} != L + h = {spec.length}")
    spec = stabilize(spec)
    rng = np.random.default_rng(rng_seed)
    values = compose(spec) + rng.standard_normal(spec.length) * noise_std(spec)
    if not np.all(np.isfinite(values)):
        raise SynthesisError.invalid_spec("spec", "rendered series is not finite")
    return values


def _direction_word(rng: np.random.Generator, direction: Direction) -> str:
    return _pick(rng, DIRECTION_WORDS[direction])


def _noise_word(rng: np.random.Generator, level: NoiseLevel) -> str:
    if level not in NOISE_WORDS:
        # NoiseLevel.NONE has no caption
        return level.value
    return _pick(rng, NOISE_WORDS[level])


def render_captions(
    spec: ComponentSpec,
    bank: Optional[CaptionTemplateBank] = None,
    rng_seed: SeedLike = 0,
) -> Tuple[str, str]:
    """
    (history_text, future_text) for a spec.

    The history text covers [0, L): trend, seasonality, noise and the
    combination rule, plus any switch that happens inside the history. The
    future text covers [L, L+h) and names a switch that happens there, with
    its time counted from the start of the horizon.

    Raises:
        CaptionError: if the bank lacks a (component, state) pair the components need
    """
    bank = bank or default_bank()
    rng = np.random.default_rng(rng_seed)
    switch = spec.switch
    L = spec.lookback

    def switched(kind: SwitchKind) -> bool:
        return switch is not None and switch.component == kind

    def trend_sentence(trend: TrendSpec) -> str:
        return bank.realize("trend", trend.kind.value, rng, direction=_direction_word(rng, trend.direction))

    def season_sentence() -> str:
        return bank.realize("seasonality", spec.seasonality.kind.value, rng, period=spec.seasonality.period)

    def noise_sentence(level: NoiseLevel) -> str:
        return bank.realize("noise", level.value, rng, noise=_noise_word(rng, level))

    def switch_sentence(side: str, time: int) -> str:
        if switch.component == SwitchKind.TREND:
            return bank.realize(
                "trend_switch", side, rng,
                before=_direction_word(rng, spec.trend.direction),
                after=_direction_word(rng, spec.post_switch_trend.direction),
                time=time,
            )
        if switch.component == SwitchKind.SEASONALITY:
            ratio = "twice" if switch.amplitude > spec.seasonality.amplitude else "half"
            return bank.realize("season_switch", side, rng, ratio=ratio, time=time)
        return bank.realize(
            "noise_switch", side, rng,
            before=_noise_word(rng, spec.noise),
            after=_noise_word(rng, switch.noise),
            time=time,
        )

    history = [trend_sentence(spec.trend)]
    if spec.switch_in_history and switched(SwitchKind.TREND):
        history.append(switch_sentence("history", switch.index))
    history.append(season_sentence())
    if spec.switch_in_history and switched(SwitchKind.SEASONALITY):
        history.append(switch_sentence("history", switch.index))
    history.append(noise_sentence(spec.noise))
    if spec.switch_in_history and switched(SwitchKind.NOISE):
        history.append(switch_sentence("history", switch.index))
    history.append(bank.realize("combination", spec.combination.value, rng))

    future = []
    if spec.switch_in_horizon and switched(SwitchKind.TREND):
        future.append(switch_sentence("future", switch.index - L))
    else:
        future.append(trend_sentence(spec.post_switch_trend))
    if spec.switch_in_horizon and switched(SwitchKind.SEASONALITY):
        future.append(switch_sentence("future", switch.index - L))
    else:
        future.append(season_sentence())
    if spec.switch_in_horizon and switched(SwitchKind.NOISE):
        future.append(switch_sentence("future", switch.index - L))
    else:
        future.append(noise_sentence(spec.post_switch_noise))

    return " ".join(history), " ".join(future)


def generate_sample(
    seed: int,
    index: int,
    distribution: SpecDistribution,
    bank: Optional[CaptionTemplateBank] = None,
) -> Tuple[MultimodalWindow, ComponentSpec]:
    """One record, a pure function of (seed, index)"""
    spec_seed, noise_seed, caption_seed = sample_seed_sequence(seed, index)
    spec = sample_spec(spec_seed, distribution)
    values = render_series(spec, rng_seed=noise_seed)
    history_text, future_text = render_captions(spec, bank, caption_seed)
    window = MultimodalWindow(
        series_id=f"synth-{seed}-{index:05d}",
        history=values[:spec.lookback].tolist(),
        future=values[spec.lookback:].tolist(),
        history_text=history_text,
        future_text=future_text,
    )
    return window, spec


def _generate_chunk(args) -> List[Tuple[MultimodalWindow, ComponentSpec]]:
    seed, indices, distribution, bank = args
    return [generate_sample(seed, i, distribution, bank) for i in indices]


def generate_samples(
    n_samples: int,
    distribution: Optional[SpecDistribution] = None,
    seed: int = 0,
    bank: Optional[CaptionTemplateBank] = None,
    workers: Optional[int] = None,
) -> List[Tuple[MultimodalWindow, ComponentSpec]]:
    """Records 0..n-1 in index order, optionally across a process pool"""
    if n_samples < 1:
        raise ConfigurationError.invalid("n_samples", f"{n_samples} < 1")
    distribution = distribution or SpecDistribution()
    bank = bank or default_bank()
    if workers is None:
        workers = get_config().runtime.effective_workers
    if is_deterministic():
        workers = 1
    if workers <= 1 or n_samples < 2 * workers:
        return _generate_chunk((seed, range(n_samples), distribution, bank))

    chunk = math.ceil(n_samples / workers)
    jobs = [
        (seed, range(start, min(start + chunk, n_samples)), distribution, bank)
        for start in range(0, n_samples, chunk)
    ]
    results: List[Tuple[MultimodalWindow, ComponentSpec]] = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map keeps job order
        for part in pool.map(_generate_chunk, jobs):
            results.extend(part)
    return results


def specs_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}.specs.jsonl")


def build_dataset(
    n_samples: int,
    distribution: Optional[SpecDistribution] = None,
    seed: int = 0,
    out: Union[str, Path] = "synth.jsonl",
    holdout_fraction: Optional[float] = None,
    bank: Optional[CaptionTemplateBank] = None,
    workers: Optional[int] = None,
) -> DatasetManifest:
    """
    Generate n_samples records and write <out>, <stem>.manifest.json and
    <stem>.specs.jsonl (one ComponentSpec per record).

    The trailing round(n * holdout_fraction) records form the test split.
    Filesystem errors propagate unchanged.
    """
    distribution = distribution or SpecDistribution()
    if holdout_fraction is None:
        holdout_fraction = get_config().synth.holdout_fraction
    if not 0.0 <= holdout_fraction < 1.0:
        raise ConfigurationError.invalid("holdout_fraction", f"{holdout_fraction} not in [0, 1)")

    with CorrelationContext(prefix="synth"):
        samples = generate_samples(n_samples, distribution, seed, bank, workers)
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        write_jsonl(out, (window for window, _ in samples))
        with open(specs_path(out), "w", encoding="utf-8", newline="\n") as f:
            for window, spec in samples:
                f.write(json.dumps({"series_id": window.series_id, "spec": spec.to_dict()}, sort_keys=True))
                f.write("\n")

        n_holdout = int(round(n_samples * holdout_fraction))
        manifest = DatasetManifest(
            lookback=distribution.lookback,
            horizon=distribution.horizon,
            stride=1,
            dataset_name=distribution.name if distribution.name != "default" else "synthetic",
            captioned=True,
            n_train=n_samples - n_holdout,
            n_holdout=n_holdout,
            extras={
                "seed": seed,
                "holdout_fraction": holdout_fraction,
                "distribution": distribution.to_dict(),
                "switches": sum(1 for _, spec in samples if spec.switch is not None),
            },
        )
        write_manifest(out, manifest)
        log_event(
            logging.INFO,
            "synthetic dataset written",
            "build_dataset",
            log=logger,
            path=str(out),
            n=n_samples,
            n_holdout=n_holdout,
            distribution=distribution.name,
        )
    return manifest


def read_specs(path: Union[str, Path]) -> List[Tuple[str, ComponentSpec]]:
    """(series_id, spec) pairs from the sidecar written by build_dataset"""
    pairs = []
    with open(specs_path(path), "r", encoding="utf-8") as f:
        for line in f:
            if line.strip():
                data = json.loads(line)
                pairs.append((data["series_id"], ComponentSpec.from_dict(data["spec"])))
    return pairs


def resolve_distribution(
    name: str = "default",
    lookback: int = 200,
    horizon: int = 30,
    config_file: Optional[Union[str, Path]] = None,
    switch_probability: Optional[float] = None,
) -> SpecDistribution:
    """Named distribution, then JSON overrides, then an explicit switch probability"""
    distribution = SpecDistribution.named(name, lookback, horizon)
    if name == "default":
        distribution = replace(distribution, switch_probability=get_config().synth.switch_probability)
    if config_file is not None:
        distribution = SpecDistribution.from_json_file(config_file, distribution)
    if switch_probability is not None:
        distribution = replace(distribution, switch_probability=switch_probability)
    return distribution


class SynthModule:
    """
    Synthetic benchmark generation bound to a Workbench

    Usage:
        bench = Workbench()
        manifest = bench.synth.build(3040, seed=7, out="synth.jsonl")
    """

    def __init__(self, bench: "Workbench"):
        self._bench = bench
        self.bank = default_bank()

    def sample(self, seed: SeedLike, distribution: Optional[SpecDistribution] = None) -> ComponentSpec:
        return sample_spec(seed, distribution)

    def render(self, spec: ComponentSpec, seed: SeedLike = 0) -> np.ndarray:
        return render_series(spec, rng_seed=seed)

    def captions(self, spec: ComponentSpec, seed: SeedLike = 0) -> Tuple[str, str]:
        return render_captions(spec, self.bank, seed)

    def build(
        self,
        n_samples: int,
        seed: int = 0,
        out: Union[str, Path] = "synth.jsonl",
        distribution: Optional[SpecDistribution] = None,
        holdout_fraction: Optional[float] = None,
    ) -> DatasetManifest:
        return build_dataset(n_samples, distribution or resolve_distribution(), seed, out, holdout_fraction, self.bank)
