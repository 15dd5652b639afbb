"""
Loss, evaluation and run result type definitions
"""

import json
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

# Metrics are computed on denormalized locations unless stated otherwise
METRIC_SCALE = "raw"


@dataclass(frozen=True)
class LossReport:
    """
    Per-step loss breakdown

    total = forecast_nll + contrastive
    """
    forecast_nll: float
    contrastive: float
    total: float
    contrastive_series_to_text: float = 0.0
    contrastive_text_to_series: float = 0.0

    def to_dict(self) -> Dict[str, float]:
        return {
            "forecast_nll": self.forecast_nll,
            "contrastive": self.contrastive,
            "total": self.total,
            "contrastive_series_to_text": self.contrastive_series_to_text,
            "contrastive_text_to_series": self.contrastive_text_to_series,
        }


@dataclass
class EvalResult:
    """
    Metrics of one model on one window set

    Attributes:
        mse / mae: Raw-scale metrics on the denormalized location
        mse_normalized / mae_normalized: Same metrics in instance-normalized space
        n_windows: Number of windows scored
        per_window: Optional per-window rows (series_id, mse, mae)
    """
    mse: float
    mae: float
    mse_normalized: float
    mae_normalized: float
    n_windows: int
    per_window: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self, include_windows: bool = False) -> Dict[str, Any]:
        data = {
            "mse": self.mse,
            "mae": self.mae,
            "mse_normalized": self.mse_normalized,
            "mae_normalized": self.mae_normalized,
            "n_windows": self.n_windows,
        }
        if include_windows:
            data["per_window"] = self.per_window
        return data


@dataclass
class SeedResult:
    """Outcome of one seed"""
    seed: int
    mse: float
    mae: float
    mse_normalized: float = float("nan")
    mae_normalized: float = float("nan")
    epochs: int = 0
    steps: int = 0
    best_val_mse: Optional[float] = None
    stopped_early: bool = False
    loss_trace: List[float] = field(default_factory=list)
    checkpoint: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "mse": self.mse,
            "mae": self.mae,
            "mse_normalized": self.mse_normalized,
            "mae_normalized": self.mae_normalized,
            "epochs": self.epochs,
            "steps": self.steps,
            "best_val_mse": self.best_val_mse,
            "stopped_early": self.stopped_early,
            "loss_trace": self.loss_trace,
            "checkpoint": self.checkpoint,
        }


def _sample_std(values: List[float]) -> float:
    if len(values) < 2:
        return 0.0
    return statistics.stdev(values)


@dataclass
class RunResult:
    """
    Aggregate over seeds

    mean_* is the arithmetic mean of the per-seed metrics and std_* the
    sample standard deviation (ddof = 1, 0 for a single seed).
    """
    seeds: List[SeedResult]
    config_hash: str = ""
    tag: str = ""
    ablation: str = "full"
    wall_clock_seconds: float = 0.0
    metric_scale: str = METRIC_SCALE
    config_snapshot: Dict[str, Any] = field(default_factory=dict)

    @property
    def mse_values(self) -> List[float]:
        return [s.mse for s in self.seeds]

    @property
    def mae_values(self) -> List[float]:
        return [s.mae for s in self.seeds]

    @property
    def mean_mse(self) -> float:
        return statistics.fmean(self.mse_values)

    @property
    def mean_mae(self) -> float:
        return statistics.fmean(self.mae_values)

    @property
    def std_mse(self) -> float:
        return _sample_std(self.mse_values)

    @property
    def std_mae(self) -> float:
        return _sample_std(self.mae_values)

    @property
    def loss_trace(self) -> List[float]:
        return self.seeds[0].loss_trace if self.seeds else []

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tag": self.tag,
            "ablation": self.ablation,
            "metric_scale": self.metric_scale,
            "mean_mse": self.mean_mse,
            "std_mse": self.std_mse,
            "mean_mae": self.mean_mae,
            "std_mae": self.std_mae,
            "seeds": [s.to_dict() for s in self.seeds],
            "wall_clock_seconds": self.wall_clock_seconds,
            "config_hash": self.config_hash,
            "config": self.config_snapshot,
        }

    def write_json(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        return path
