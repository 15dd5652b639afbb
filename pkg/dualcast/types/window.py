"""
Multimodal sample and windowing type definitions
"""

import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, Optional, Tuple

from ..errors import ConfigurationError, DatasetError

# JSONL records carry exactly these keys, in this order
RECORD_KEYS: Tuple[str, ...] = ("series_id", "history", "future", "history_text", "future_text")

STD_FLOOR = 1e-5


def _as_float_tuple(values: Iterable[float]) -> Tuple[float, ...]:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class MultimodalWindow:
    """
    One training sample: a history/future pair of series values with a
    caption for each side.

    Attributes:
        series_id: Stable identifier (e.g. "synth-7-00012", "ETTh1:OT:336")
        history: The L lookback values
        future: The h target values
        history_text: Caption of the history values ("" in text-ablation mode)
        future_text: Caption of the future values ("" in text-ablation mode)
    """
    series_id: str
    history: Tuple[float, ...]
    future: Tuple[float, ...]
    history_text: str = ""
    future_text: str = ""

    def __post_init__(self):
        object.__setattr__(self, "history", _as_float_tuple(self.history))
        object.__setattr__(self, "future", _as_float_tuple(self.future))

    @property
    def lookback(self) -> int:
        return len(self.history)

    @property
    def horizon(self) -> int:
        return len(self.future)

    def validate(
        self,
        spec: Optional["WindowingSpec"] = None,
        captioned: bool = False,
        line_number: Optional[int] = None,
    ) -> None:
        """Raise DatasetError when the record breaks the sample contract"""
        if spec is not None:
            if len(self.history) != spec.lookback:
                raise DatasetError.length_mismatch(
                    self.series_id, "history", spec.lookback, len(self.history), line_number
                )
            if len(self.future) != spec.horizon:
                raise DatasetError.length_mismatch(
                    self.series_id, "future", spec.horizon, len(self.future), line_number
                )
        for name, values in (("history", self.history), ("future", self.future)):
            if not all(math.isfinite(v) for v in values):
                raise DatasetError.non_finite(self.series_id, name, line_number)
        if captioned and (not self.history_text or not self.future_text):
            raise DatasetError(
                f"Record '{self.series_id}' is missing a caption in a captioned dataset",
                series_id=self.series_id,
                line_number=line_number,
            )

    def without_text(self) -> "MultimodalWindow":
        return replace(self, history_text="", future_text="")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "series_id": self.series_id,
            "history": list(self.history),
            "future": list(self.future),
            "history_text": self.history_text,
            "future_text": self.future_text,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], line_number: Optional[int] = None) -> "MultimodalWindow":
        """
        Build from a decoded record. Values must be JSON numbers: booleans,
        strings and nulls raise DatasetError instead of being coerced.
        """
        series_id = str(data["series_id"])
        for name in ("history", "future"):
            values = data[name]
            if not isinstance(values, (list, tuple)):
                raise DatasetError.non_numeric(series_id, name, values, line_number)
            for value in values:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise DatasetError.non_numeric(series_id, name, value, line_number)
        return cls(
            series_id=series_id,
            history=data["history"],
            future=data["future"],
            history_text=data.get("history_text", ""),
            future_text=data.get("future_text", ""),
        )


@dataclass(frozen=True)
class NormalizationStats:
    """Instance-normalization statistics of one history window"""
    mean: float
    std: float

    def __post_init__(self):
        if not self.std >= STD_FLOOR:
            raise ConfigurationError.invalid("std", f"{self.std} is below the floor {STD_FLOOR}")

    @classmethod
    def identity(cls) -> "NormalizationStats":
        return cls(mean=0.0, std=1.0)


@dataclass(frozen=True)
class WindowingSpec:
    """
    Sliding-window extraction parameters

    Attributes:
        lookback: History length L
        horizon: Forecast length h
        stride: Step between consecutive window starts
    """
    lookback: int
    horizon: int
    stride: int = 1

    def __post_init__(self):
        for name in ("lookback", "horizon", "stride"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigurationError.invalid(name, f"must be a positive integer, got {value!r}")

    @property
    def span(self) -> int:
        return self.lookback + self.horizon

    def count(self, length: int) -> int:
        """Number of windows a series of this length yields"""
        if length < self.span:
            return 0
        return (length - self.span) // self.stride + 1


@dataclass
class DatasetManifest:
    """
    Sidecar manifest describing a JSONL dataset

    Records are stored train-first: the first n_train lines form the
    training split and the trailing n_holdout lines the test split.
    """
    lookback: int
    horizon: int
    stride: int
    dataset_name: str
    captioned: bool
    n_train: int = 0
    n_holdout: int = 0
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def windowing(self) -> WindowingSpec:
        return WindowingSpec(self.lookback, self.horizon, self.stride)

    @property
    def n_records(self) -> int:
        return self.n_train + self.n_holdout

    def to_dict(self) -> Dict[str, Any]:
        return {
            "L": self.lookback,
            "h": self.horizon,
            "stride": self.stride,
            "dataset_name": self.dataset_name,
            "captioned": self.captioned,
            "n_train": self.n_train,
            "n_holdout": self.n_holdout,
            "extras": self.extras,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DatasetManifest":
        try:
            return cls(
                lookback=int(data["L"]),
                horizon=int(data["h"]),
                stride=int(data["stride"]),
                dataset_name=str(data["dataset_name"]),
                captioned=bool(data["captioned"]),
                n_train=int(data.get("n_train", 0)),
                n_holdout=int(data.get("n_holdout", 0)),
                extras=dict(data.get("extras", {})),
            )
        except KeyError as e:
            raise ConfigurationError.missing(f"manifest field {e.args[0]}") from e
