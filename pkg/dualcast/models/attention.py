"""
Multi-head attention used by every stage of the model
"""

from typing import Optional, Tuple

import torch
import torch.nn as nn


class Attention(nn.Module):
    """
    Batch-first multi-head attention returning per-head weights.

    Padded key positions (mask True) get -inf before the softmax.
    """

    def __init__(self, d_model: int, heads: int):
        super().__init__()
        self.d_model = d_model
        self.heads = heads
        self.mha = nn.MultiheadAttention(d_model, heads, dropout=0.0, bias=True, batch_first=True)

    def forward(
        self,
        query: torch.Tensor,
        key: torch.Tensor,
        value: Optional[torch.Tensor] = None,
        key_padding_mask: Optional[torch.Tensor] = None,
        need_weights: bool = False,
    ) -> Tuple[torch.Tensor, Optional[torch.Tensor]]:
        """
        Returns:
            (output (B, T, d_model), weights (B, heads, T, S) or None)
        """
        if value is None:
            value = key
        out, weights = self.mha(
            query,
            key,
            value,
            key_padding_mask=key_padding_mask,
            need_weights=need_weights,
            average_attn_weights=False,
        )
        return out, weights

    def value_projection(self, tokens: torch.Tensor) -> torch.Tensor:
        """out_proj(v_proj(tokens)); the output of attention over a single key"""
        d = self.d_model
        w_v = self.mha.in_proj_weight[2 * d:]
        b_v = self.mha.in_proj_bias[2 * d:]
        return self.mha.out_proj(tokens @ w_v.T + b_v)

    def zero_init_output(self) -> None:
        nn.init.zeros_(self.mha.out_proj.weight)
        nn.init.zeros_(self.mha.out_proj.bias)


def feed_forward(d_model: int, expansion: int = 4) -> nn.Sequential:
    return nn.Sequential(
        nn.Linear(d_model, expansion * d_model),
        nn.GELU(),
        nn.Linear(expansion * d_model, d_model),
    )


def make_norm(d_model: int, placement: str) -> nn.Module:
    return nn.LayerNorm(d_model) if placement == "pre" else nn.Identity()
