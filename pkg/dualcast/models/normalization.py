"""
Per-window instance normalization of the history
"""

from typing import Tuple

import torch
import torch.nn as nn

from ..errors import DatasetError
from ..types import STD_FLOOR, BatchStats, StudentTParams


class InstanceNormalizer(nn.Module):
    """
    Zero-mean / unit population-std normalization per window, no affine
    parameters. Forecast parameters are mapped back with the same stats.
    """

    def __init__(self, std_floor: float = STD_FLOOR):
        super().__init__()
        self.std_floor = std_floor

    def forward(self, history: torch.Tensor) -> Tuple[torch.Tensor, BatchStats]:
        return self.normalize(history)

    def normalize(self, history: torch.Tensor) -> Tuple[torch.Tensor, BatchStats]:
        if not torch.isfinite(history).all():
            raise DatasetError.non_finite("<batch>", "history")
        mean = history.mean(dim=-1)
        std = history.std(dim=-1, correction=0).clamp_min(self.std_floor)
        return (history - mean.unsqueeze(-1)) / std.unsqueeze(-1), BatchStats(mean=mean, std=std)

    def normalize_target(self, future: torch.Tensor, stats: BatchStats) -> torch.Tensor:
        return (future - stats.mean.unsqueeze(-1)) / stats.std.unsqueeze(-1)

    def denormalize(self, params: StudentTParams, stats: BatchStats) -> StudentTParams:
        return params.denormalize(stats)
