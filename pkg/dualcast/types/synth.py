"""
Synthetic benchmark type definitions

A ComponentSpec fully determines a noise-free series: one trend, one
seasonality, one noise level, a combination rule and at most one switch.
Noise realizations additionally depend on the render seed.
"""

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from ..errors import CaptionError, ConfigurationError, SynthesisError


class TrendKind(str, Enum):
    LINEAR = "linear"
    EXPONENTIAL = "exponential"


class SeasonKind(str, Enum):
    COSINE = "cosine"
    LINEAR = "linear"
    EXPONENTIAL = "exponential"
    M_SHAPE = "m_shape"
    TRAPEZOIDAL = "trapezoidal"


class NoiseLevel(str, Enum):
    # NONE is only used for noise-free renders, the sampler never draws it
    NONE = "none"
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"

    @property
    def variance(self) -> float:
        return NOISE_VARIANCE[self]


NOISE_VARIANCE: Dict[NoiseLevel, float] = {
    NoiseLevel.NONE: 0.0,
    NoiseLevel.LOW: 0.01,
    NoiseLevel.MEDIUM: 0.1,
    NoiseLevel.HIGH: 0.5,
}


class Combination(str, Enum):
    ADDITIVE = "additive"
    MULTIPLICATIVE = "multiplicative"


class SwitchKind(str, Enum):
    TREND = "trend"
    SEASONALITY = "seasonality"
    NOISE = "noise"


class Direction(str, Enum):
    UPWARD = "upward"
    DOWNWARD = "downward"


@dataclass(frozen=True)
class TrendSpec:
    """
    linear:      level + rate * t           (rate per step)
    exponential: level * exp(rate * t / L)  (L = lookback, level > 0)
    """
    kind: TrendKind
    level: float
    rate: float

    @property
    def direction(self) -> Direction:
        return Direction.UPWARD if self.rate > 0 else Direction.DOWNWARD


@dataclass(frozen=True)
class SeasonalitySpec:
    kind: SeasonKind
    period: int
    amplitude: float


@dataclass(frozen=True)
class SwitchSpec:
    """
    A single change of one component at `index`

    Exactly one of rate / amplitude / noise is set, matching `component`.
    """
    component: SwitchKind
    index: int
    rate: Optional[float] = None
    amplitude: Optional[float] = None
    noise: Optional[NoiseLevel] = None


@dataclass(frozen=True)
class ComponentSpec:
    """
    Complete description of one synthetic sample

    Attributes:
        lookback: History length L
        horizon: Future length h
        trend: Trend component
        seasonality: Seasonal component
        noise: Gaussian noise level before any switch
        combination: additive (trend + season) or multiplicative (trend * (1 + season))
        switch: Optional single-component switch
        trend_offset: Constant added to the trend so that a multiplicative
            product stays sign-stable (0 for additive specs)
    """
    lookback: int
    horizon: int
    trend: TrendSpec
    seasonality: SeasonalitySpec
    noise: NoiseLevel
    combination: Combination
    switch: Optional[SwitchSpec] = None
    trend_offset: float = 0.0

    @property
    def length(self) -> int:
        return self.lookback + self.horizon

    @property
    def switch_in_history(self) -> bool:
        return self.switch is not None and self.switch.index < self.lookback

    @property
    def switch_in_horizon(self) -> bool:
        return self.switch is not None and self.switch.index >= self.lookback

    @property
    def post_switch_trend(self) -> TrendSpec:
        if self.switch is None or self.switch.component != SwitchKind.TREND:
            return self.trend
        return replace(self.trend, rate=self.switch.rate)

    @property
    def post_switch_noise(self) -> NoiseLevel:
        if self.switch is None or self.switch.component != SwitchKind.NOISE:
            return self.noise
        return self.switch.noise

    def validate(self) -> "ComponentSpec":
        if self.seasonality.period < 4:
            raise SynthesisError.invalid_spec("period", f"{self.seasonality.period} < 4")
        if self.seasonality.period > self.lookback / 2:
            raise SynthesisError.invalid_spec(
                "period", f"{self.seasonality.period} > L/2 = {self.lookback / 2}"
            )
        if self.trend.kind == TrendKind.EXPONENTIAL and self.trend.level <= 0:
            raise SynthesisError.invalid_spec("trend.level", "exponential trend needs a positive level")
        if self.trend.rate == 0:
            raise SynthesisError.invalid_spec("trend.rate", "rate must be nonzero")
        if self.switch is not None:
            if not 0 < self.switch.index < self.length:
                raise SynthesisError.invalid_spec(
                    "switch.index", f"{self.switch.index} not strictly inside (0, {self.length})"
                )
            expected = {
                SwitchKind.TREND: "rate",
                SwitchKind.SEASONALITY: "amplitude",
                SwitchKind.NOISE: "noise",
            }[self.switch.component]
            if getattr(self.switch, expected) is None:
                raise SynthesisError.invalid_spec("switch", f"{self.switch.component.value} switch needs {expected}")
        return self

    def without_noise(self) -> "ComponentSpec":
        """Same spec with zero noise variance on both sides of any switch"""
        switch = self.switch
        if switch is not None and switch.component == SwitchKind.NOISE:
            switch = replace(switch, noise=NoiseLevel.NONE)
        return replace(self, noise=NoiseLevel.NONE, switch=switch)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "lookback": self.lookback,
            "horizon": self.horizon,
            "trend": {"kind": self.trend.kind.value, "level": self.trend.level, "rate": self.trend.rate},
            "seasonality": {
                "kind": self.seasonality.kind.value,
                "period": self.seasonality.period,
                "amplitude": self.seasonality.amplitude,
            },
            "noise": self.noise.value,
            "combination": self.combination.value,
            "switch": None,
            "trend_offset": self.trend_offset,
        }
        if self.switch is not None:
            data["switch"] = {
                "component": self.switch.component.value,
                "index": self.switch.index,
                "rate": self.switch.rate,
                "amplitude": self.switch.amplitude,
                "noise": self.switch.noise.value if self.switch.noise is not None else None,
            }
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ComponentSpec":
        switch = None
        if data.get("switch"):
            raw = data["switch"]
            switch = SwitchSpec(
                component=SwitchKind(raw["component"]),
                index=int(raw["index"]),
                rate=raw.get("rate"),
                amplitude=raw.get("amplitude"),
                noise=NoiseLevel(raw["noise"]) if raw.get("noise") else None,
            )
        return cls(
            lookback=int(data["lookback"]),
            horizon=int(data["horizon"]),
            trend=TrendSpec(TrendKind(data["trend"]["kind"]), float(data["trend"]["level"]), float(data["trend"]["rate"])),
            seasonality=SeasonalitySpec(
                SeasonKind(data["seasonality"]["kind"]),
                int(data["seasonality"]["period"]),
                float(data["seasonality"]["amplitude"]),
            ),
            noise=NoiseLevel(data["noise"]),
            combination=Combination(data["combination"]),
            switch=switch,
            trend_offset=float(data.get("trend_offset", 0.0)),
        )


SWITCH_WINDOWS = ("anywhere", "history", "horizon")


@dataclass(frozen=True)
class SpecDistribution:
    """
    Distribution sample_spec draws from

    Categorical fields are tuples of allowed values drawn uniformly.
    Numeric ranges are (low, high) uniform bounds.
    switch_window: "anywhere" places switches uniformly in
    [0.3 n, 0.9 n]; "history" / "horizon" restrict them to that side.
    """
    name: str = "default"
    lookback: int = 200
    horizon: int = 30
    trend_kinds: Tuple[TrendKind, ...] = tuple(TrendKind)
    season_kinds: Tuple[SeasonKind, ...] = tuple(SeasonKind)
    noise_levels: Tuple[NoiseLevel, ...] = (NoiseLevel.LOW, NoiseLevel.MEDIUM, NoiseLevel.HIGH)
    combinations: Tuple[Combination, ...] = tuple(Combination)
    switch_probability: float = 0.5
    switch_components: Tuple[SwitchKind, ...] = tuple(SwitchKind)
    switch_window: str = "anywhere"
    # total change of a linear trend over the series
    linear_change: Tuple[float, float] = (0.5, 2.0)
    linear_level: Tuple[float, float] = (-1.0, 1.0)
    exponential_rate: Tuple[float, float] = (0.5, 2.0)
    exponential_level: Tuple[float, float] = (0.5, 1.5)
    additive_amplitude: Tuple[float, float] = (0.5, 1.0)
    multiplicative_amplitude: Tuple[float, float] = (0.1, 0.25)
    # post-switch trend rate = -rate * U(switch_rate_factor)
    switch_rate_factor: Tuple[float, float] = (0.5, 1.5)

    def __post_init__(self):
        if not 0.0 <= self.switch_probability <= 1.0:
            raise ConfigurationError.invalid("switch_probability", f"{self.switch_probability} not in [0, 1]")
        if self.switch_window not in SWITCH_WINDOWS:
            raise ConfigurationError.invalid("switch_window", f"{self.switch_window!r} not in {SWITCH_WINDOWS}")
        if self.lookback < 8:
            raise ConfigurationError.invalid("lookback", "synthetic series need L >= 8 for a period >= 4")
        if self.switch_window == "horizon" and self.horizon < 3:
            raise ConfigurationError.invalid("horizon", "horizon switches need h >= 3")
        for name in ("trend_kinds", "season_kinds", "noise_levels", "combinations"):
            if not getattr(self, name):
                raise ConfigurationError.invalid(name, "must not be empty")

    @property
    def length(self) -> int:
        return self.lookback + self.horizon

    @property
    def period_range(self) -> Tuple[int, int]:
        low = max(4, self.lookback // 20)
        # at least four visible cycles when L allows it
        high = max(low, self.lookback // 4)
        return low, high

    def switch_index_range(self) -> Tuple[int, int]:
        """Inclusive bounds of the switch index for this distribution"""
        n = self.length
        if self.switch_window == "horizon":
            return self.lookback + 1, n - 2
        low = max(1, math.ceil(0.3 * n))
        high = min(n - 2, math.floor(0.9 * n))
        if self.switch_window == "history":
            high = min(high, self.lookback - 2)
        if high < low:
            raise ConfigurationError.invalid("switch_window", f"empty switch range for n={n}")
        return low, high

    def with_window(self, lookback: int, horizon: int) -> "SpecDistribution":
        return replace(self, lookback=lookback, horizon=horizon)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {}
        for key, value in self.__dict__.items():
            if isinstance(value, tuple) and value and isinstance(value[0], Enum):
                data[key] = [v.value for v in value]
            elif isinstance(value, tuple):
                data[key] = list(value)
            else:
                data[key] = value
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base: Optional["SpecDistribution"] = None) -> "SpecDistribution":
        base = base or cls()
        enum_fields = {
            "trend_kinds": TrendKind,
            "season_kinds": SeasonKind,
            "noise_levels": NoiseLevel,
            "combinations": Combination,
            "switch_components": SwitchKind,
        }
        updates: Dict[str, Any] = {}
        for key, value in data.items():
            if key not in base.__dataclass_fields__:
                raise ConfigurationError.invalid(key, "unknown spec distribution field")
            try:
                if key in enum_fields:
                    updates[key] = tuple(enum_fields[key](v) for v in value)
                elif isinstance(value, list):
                    updates[key] = tuple(float(v) for v in value)
                else:
                    updates[key] = value
            except ValueError as e:
                raise ConfigurationError.invalid(key, str(e)) from e
        return replace(base, **updates)

    @classmethod
    def from_json_file(cls, path: Union[str, Path], base: Optional["SpecDistribution"] = None) -> "SpecDistribution":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f), base)

    @classmethod
    def named(cls, name: str, lookback: int = 200, horizon: int = 30) -> "SpecDistribution":
        """
        Built-in distributions:
            default      every component kind, switches anywhere with p=0.5
            family_a     linear trends, smooth seasonality (zero-shot source)
            family_b     exponential trends, piecewise seasonality (zero-shot target)
            switch_heavy every sample switches its trend inside the horizon
        """
        if name == "default":
            return cls(lookback=lookback, horizon=horizon)
        if name == "family_a":
            return cls(
                name=name, lookback=lookback, horizon=horizon,
                trend_kinds=(TrendKind.LINEAR,),
                season_kinds=(SeasonKind.COSINE, SeasonKind.LINEAR, SeasonKind.EXPONENTIAL),
                switch_components=(SwitchKind.TREND,),
            )
        if name == "family_b":
            return cls(
                name=name, lookback=lookback, horizon=horizon,
                trend_kinds=(TrendKind.EXPONENTIAL,),
                season_kinds=(SeasonKind.M_SHAPE, SeasonKind.TRAPEZOIDAL),
                switch_components=(SwitchKind.TREND,),
            )
        if name == "switch_heavy":
            return cls(
                name=name, lookback=lookback, horizon=horizon,
                noise_levels=(NoiseLevel.LOW, NoiseLevel.MEDIUM),
                combinations=(Combination.ADDITIVE,),
                switch_probability=1.0,
                switch_components=(SwitchKind.TREND,),
                switch_window="horizon",
            )
        raise ConfigurationError.invalid("distribution", f"unknown name {name!r}")


DISTRIBUTION_NAMES = ("default", "family_a", "family_b", "switch_heavy")


@dataclass(frozen=True)
class CaptionTemplateBank:
    """
    Sentence templates keyed by (component, state)

    Templates are str.format strings; slots are filled by keyword.
    """
    templates: Mapping[Tuple[str, str], Tuple[str, ...]] = field(default_factory=dict)

    def covers(self, component: str, state: str) -> bool:
        return bool(self.templates.get((component, state)))

    def variants(self, component: str, state: str) -> Tuple[str, ...]:
        found = self.templates.get((component, state))
        if not found:
            raise CaptionError.uncovered_pair(component, state)
        return tuple(found)

    def realize(
        self,
        component: str,
        state: str,
        rng: Optional[np.random.Generator] = None,
        variant: Optional[int] = None,
        **slots: Any,
    ) -> str:
        """Fill one template; variant picks by index, otherwise rng picks uniformly"""
        choices = self.variants(component, state)
        if variant is not None:
            template = choices[variant % len(choices)]
        elif rng is not None:
            template = choices[int(rng.integers(len(choices)))]
        else:
            template = choices[0]
        return template.format(**slots)

    def undercovered(self, minimum: int = 2) -> Tuple[Tuple[str, str], ...]:
        """Keys with fewer than `minimum` variants"""
        return tuple(key for key, values in self.templates.items() if len(values) < minimum)
