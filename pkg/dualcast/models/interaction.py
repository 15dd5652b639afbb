"""
Modality interaction stages

History-oriented (n_mul layers):
    x1  = x + MHSA(norm(x))
    out = x + MHCA(norm(x1), S_history)          residual back to the layer input

Future-oriented (one layer):
    out = x + MHCA(norm(x), S_future)

The series CLS never enters these stages.
"""

from typing import Optional, Tuple

import torch
import torch.nn as nn

from ..types import BackboneConfig
from .attention import Attention, feed_forward, make_norm


class HistoryInteractionLayer(nn.Module):

    def __init__(self, d_model: int, heads: int, include_ffn: bool = False, norm_placement: str = "pre"):
        super().__init__()
        self.self_norm = make_norm(d_model, norm_placement)
        self.self_attn = Attention(d_model, heads)
        self.cross_norm = make_norm(d_model, norm_placement)
        self.cross_attn = Attention(d_model, heads)
        self.ffn = None
        if include_ffn:
            self.ffn_norm = make_norm(d_model, norm_placement)
            self.ffn = feed_forward(d_model)

    def forward(self, x: torch.Tensor, text: torch.Tensor) -> torch.Tensor:
        h = self.self_norm(x)
        x1 = x + self.self_attn(h, h)[0]
        out = x + self.cross_attn(self.cross_norm(x1), text)[0]
        if self.ffn is not None:
            out = out + self.ffn(self.ffn_norm(out))
        return out

    def zero_init_output(self) -> None:
        self.self_attn.zero_init_output()
        self.cross_attn.zero_init_output()
        if self.ffn is not None:
            nn.init.zeros_(self.ffn[-1].weight)
            nn.init.zeros_(self.ffn[-1].bias)


class HistoryInteraction(nn.Module):
    """Aligns patch tokens (B, P, d_m) with pooled history text (B, q, d_m)"""

    def __init__(self, config: BackboneConfig):
        super().__init__()
        self.layers = nn.ModuleList(
            HistoryInteractionLayer(config.d_model, config.heads, config.include_ffn, config.norm_placement)
            for _ in range(config.n_mul)
        )

    def forward(self, patches: torch.Tensor, text: torch.Tensor) -> torch.Tensor:
        x = patches
        for layer in self.layers:
            x = layer(x, text)
        return x

    def zero_init_output(self) -> None:
        for layer in self.layers:
            layer.zero_init_output()


class FutureInteraction(nn.Module):
    """Single cross-attention from aligned patches to pooled future text"""

    def __init__(self, config: BackboneConfig):
        super().__init__()
        self.norm = make_norm(config.d_model, config.norm_placement)
        self.cross_attn = Attention(config.d_model, config.heads)

    def forward(
        self,
        aligned: torch.Tensor,
        text: torch.Tensor,
        need_weights: bool = False,
    ) -> Tuple[torch.Tensor, Optional[torch.Tensor]]:
        out, weights = self.cross_attn(self.norm(aligned), text, need_weights=need_weights)
        return aligned + out, weights

    def zero_init_output(self) -> None:
        self.cross_attn.zero_init_output()
