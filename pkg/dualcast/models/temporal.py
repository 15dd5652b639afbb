"""
Temporal branch: patch embedding with a series CLS token and the
unimodal self-attention encoder
"""

from typing import List, Optional, Tuple

import torch
import torch.nn as nn

from ..errors import ModelError
from ..types import BackboneConfig, PatchTokens
from .attention import Attention, feed_forward, make_norm


class PatchEmbedding(nn.Module):
    """
    (B, L) -> P non-overlapping patches of L_p values, one shared affine map
    L_p -> d_model, a zero-initialized positional embedding and a learned CLS.
    """

    def __init__(self, lookback: int, patch_len: int, d_model: int):
        super().__init__()
        if lookback % patch_len:
            raise ModelError.shape_mismatch("lookback", "patch_len", (lookback,), (patch_len,))
        self.lookback = lookback
        self.patch_len = patch_len
        self.num_patches = lookback // patch_len
        self.proj = nn.Linear(patch_len, d_model)
        nn.init.zeros_(self.proj.bias)
        self.position = nn.Parameter(torch.zeros(self.num_patches, d_model))
        self.cls = nn.Parameter(torch.empty(d_model))
        nn.init.normal_(self.cls, std=0.02)

    def forward(self, history: torch.Tensor) -> PatchTokens:
        if history.dim() != 2 or history.shape[1] != self.lookback:
            raise ModelError.shape_mismatch("history", "lookback", history.shape, (history.shape[0], self.lookback))
        batch = history.shape[0]
        patches = history.reshape(batch, self.num_patches, self.patch_len)
        return PatchTokens(
            patches=self.proj(patches) + self.position,
            cls=self.cls.unsqueeze(0).expand(batch, -1),
        )


class SelfAttentionLayer(nn.Module):
    """x + MHSA(norm(x)) [+ FFN(norm(x))]"""

    def __init__(self, d_model: int, heads: int, include_ffn: bool = False, norm_placement: str = "pre"):
        super().__init__()
        self.norm = make_norm(d_model, norm_placement)
        self.attn = Attention(d_model, heads)
        self.ffn = None
        if include_ffn:
            self.ffn_norm = make_norm(d_model, norm_placement)
            self.ffn = feed_forward(d_model)

    def forward(self, x: torch.Tensor, need_weights: bool = False) -> Tuple[torch.Tensor, Optional[torch.Tensor]]:
        h = self.norm(x)
        out, weights = self.attn(h, h, need_weights=need_weights)
        x = x + out
        if self.ffn is not None:
            x = x + self.ffn(self.ffn_norm(x))
        return x, weights

    def zero_init_output(self) -> None:
        self.attn.zero_init_output()
        if self.ffn is not None:
            nn.init.zeros_(self.ffn[-1].weight)
            nn.init.zeros_(self.ffn[-1].bias)


class UnimodalEncoder(nn.Module):
    """
    n_uni self-attention layers over [patches; CLS] (CLS is token P+1).
    n_uni = 0 is the identity.
    """

    def __init__(self, config: BackboneConfig):
        super().__init__()
        self.layers = nn.ModuleList(
            SelfAttentionLayer(config.d_model, config.heads, config.include_ffn, config.norm_placement)
            for _ in range(config.n_uni)
        )

    def forward(self, tokens: PatchTokens, need_weights: bool = False) -> Tuple[PatchTokens, List[torch.Tensor]]:
        x = torch.cat([tokens.patches, tokens.cls.unsqueeze(1)], dim=1)
        weights = []
        for layer in self.layers:
            x, w = layer(x, need_weights)
            if w is not None:
                weights.append(w)
        return PatchTokens(patches=x[:, :-1], cls=x[:, -1]), weights

    def zero_init_output(self) -> None:
        for layer in self.layers:
            layer.zero_init_output()
