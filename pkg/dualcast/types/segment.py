"""
Captioner segment types
"""

from dataclasses import dataclass
from enum import Enum

from ..errors import ConfigurationError


class TrendClass(str, Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"
    FLUCTUATING = "fluctuating"


class NoiseClass(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


@dataclass(frozen=True)
class IepfParams:
    """
    Iterative end-point fitting parameters

    Attributes:
        epsilon: Split threshold on the point-to-chord distance, measured in
            (index/(n-1), min-max normalized value) coordinates
        min_segment_points: Smallest number of points either side of a split
            may keep (endpoints included). 2 reproduces the classical
            keep-set; a candidate that would leave a shorter side is skipped
            in favour of the next farthest point.
    """
    epsilon: float = 0.08
    min_segment_points: int = 2

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigurationError.invalid("epsilon", f"must be > 0, got {self.epsilon}")
        if self.min_segment_points < 2:
            raise ConfigurationError.invalid(
                "min_segment_points", f"must be >= 2, got {self.min_segment_points}"
            )


@dataclass(frozen=True)
class Segment:
    """
    One fitted piece of a series

    Attributes:
        start_index: First index (inclusive)
        end_index: Last index (exclusive)
        slope: OLS slope per step
        intercept: OLS intercept at start_index
        p_value: Two-sided t-test p-value of the slope
        residual_mse: Mean squared OLS residual
        trend_class: increasing / decreasing / fluctuating
        noise_class: low / medium / high
    """
    start_index: int
    end_index: int
    slope: float
    intercept: float
    p_value: float
    residual_mse: float
    trend_class: TrendClass
    noise_class: NoiseClass

    @property
    def length(self) -> int:
        return self.end_index - self.start_index

    def to_dict(self) -> dict:
        return {
            "start_index": self.start_index,
            "end_index": self.end_index,
            "slope": self.slope,
            "intercept": self.intercept,
            "p_value": self.p_value,
            "residual_mse": self.residual_mse,
            "trend_class": self.trend_class.value,
            "noise_class": self.noise_class.value,
        }
