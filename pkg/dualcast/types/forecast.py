"""
Tensor-carrying containers passed between model stages
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np
import torch

from .window import NormalizationStats

Number = Union[float, np.ndarray, torch.Tensor]


class TokenRole(Enum):
    """What a token sequence holds"""
    TEXT = "text"
    PATCH = "patch"
    QUERY = "query"
    CLS = "cls"


@dataclass
class TokenSequence:
    """
    A batch of token embeddings

    Attributes:
        values: (B, T, width) embeddings
        mask: (B, T) bool, True marks padding; None means nothing is padded
        role: What the tokens represent
        truncated: How many inputs of the batch were cut at the token limit
    """
    values: torch.Tensor
    mask: Optional[torch.Tensor] = None
    role: TokenRole = TokenRole.TEXT
    truncated: int = 0

    @property
    def width(self) -> int:
        return self.values.shape[-1]

    @property
    def length(self) -> int:
        return self.values.shape[1]


@dataclass
class StudentTParams:
    """
    Per-step location/scale/degrees-of-freedom of the forecast distribution

    Fields share a shape (..., h). Works with torch tensors or numpy arrays.
    scale > 0 and dof > 2 are guaranteed by the head that produces them.
    """
    location: Number
    scale: Number
    dof: Number

    @property
    def horizon(self) -> int:
        return self.location.shape[-1]

    def denormalize(self, stats: Union[NormalizationStats, "BatchStats"]) -> "StudentTParams":
        """Map parameters from normalized to raw scale; dof is unchanged"""
        return StudentTParams(
            location=self.location * _col(stats.std, self.location) + _col(stats.mean, self.location),
            scale=self.scale * _col(stats.std, self.scale),
            dof=self.dof,
        )

    def detach(self) -> "StudentTParams":
        return StudentTParams(self.location.detach(), self.scale.detach(), self.dof.detach())

    def to_distribution(self) -> torch.distributions.StudentT:
        return torch.distributions.StudentT(
            df=torch.as_tensor(self.dof),
            loc=torch.as_tensor(self.location),
            scale=torch.as_tensor(self.scale),
        )

    def row(self, index: int) -> "StudentTParams":
        return StudentTParams(self.location[index], self.scale[index], self.dof[index])


@dataclass
class BatchStats:
    """Batched normalization statistics, each of shape (B,)"""
    mean: torch.Tensor
    std: torch.Tensor

    def row(self, index: int) -> NormalizationStats:
        return NormalizationStats(float(self.mean[index]), float(self.std[index]))


def _col(value: Number, like: Number) -> Number:
    """Broadcast per-sample stats (B,) against (B, h) parameters"""
    if isinstance(value, torch.Tensor) and value.dim() == 1 and isinstance(like, torch.Tensor) and like.dim() == 2:
        return value.unsqueeze(-1)
    if isinstance(value, np.ndarray) and value.ndim == 1 and getattr(like, "ndim", 0) == 2:
        return value[:, None]
    return value


@dataclass
class PooledText:
    """
    Pooled text embedding

    Attributes:
        content: (B, q, d_m) content tokens
        cls: (B, d_m) text summary token
        attention: (B, heads, q+1, G') pooling weights when captured
    """
    content: torch.Tensor
    cls: torch.Tensor
    attention: Optional[torch.Tensor] = None


@dataclass
class PatchTokens:
    """
    Temporal tokens

    Attributes:
        patches: (B, P, d_m)
        cls: (B, d_m) series summary token
    """
    patches: torch.Tensor
    cls: torch.Tensor

    @property
    def num_patches(self) -> int:
        return self.patches.shape[1]
