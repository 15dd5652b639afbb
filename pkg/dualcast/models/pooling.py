"""
Attentional pooling of text tokens into q content tokens plus a text CLS
"""

from typing import Optional, Sequence

import torch
import torch.nn as nn

from ..types import ModelConfig, PooledText, TokenSequence
from .attention import Attention
from .text_encoders import TextEncoder, create_text_encoder


class AttentionalPooler(nn.Module):
    """
    (q+1) learnable queries cross-attend over text tokens.

    Rows 0..q-1 of the output are content tokens and row q is the CLS.
    A learned affine map brings token width d to d_model when they differ.
    """

    def __init__(self, token_width: int, d_model: int, num_queries: int, heads: int):
        super().__init__()
        self.num_queries = num_queries
        self.input_proj = nn.Linear(token_width, d_model) if token_width != d_model else nn.Identity()
        self.queries = nn.Parameter(torch.empty(num_queries + 1, d_model))
        nn.init.normal_(self.queries, std=0.02)
        self.attn = Attention(d_model, heads)

    def forward(self, tokens: TokenSequence, need_weights: bool = False) -> PooledText:
        keys = self.input_proj(tokens.values)
        queries = self.queries.unsqueeze(0).expand(keys.shape[0], -1, -1)
        out, weights = self.attn(queries, keys, key_padding_mask=tokens.mask, need_weights=need_weights)
        return PooledText(content=out[:, :self.num_queries], cls=out[:, self.num_queries], attention=weights)


class TextBranch(nn.Module):
    """
    Text encoder + history / future poolers

    With share_text_queries the future texts go through the history pooler
    (same queries, same projections); otherwise a second pooler is built.
    """

    def __init__(self, config: ModelConfig, encoder: Optional[TextEncoder] = None):
        super().__init__()
        self.encoder = encoder if encoder is not None else create_text_encoder(config.text_encoder)
        backbone = config.backbone
        self.history_pooler = AttentionalPooler(
            config.text_encoder.width, backbone.d_model, config.num_queries, backbone.heads
        )
        self.future_pooler = None
        if not config.share_text_queries:
            self.future_pooler = AttentionalPooler(
                config.text_encoder.width, backbone.d_model, config.num_queries, backbone.heads
            )

    def encode(self, texts: Sequence[str], sample_ids: Optional[Sequence[str]] = None, role: str = "history") -> TokenSequence:
        return self.encoder.encode(texts, sample_ids, role)

    def pool_history(self, texts: Sequence[str], sample_ids: Optional[Sequence[str]] = None, need_weights: bool = False) -> PooledText:
        return self.history_pooler(self.encode(texts, sample_ids, "history"), need_weights)

    def pool_future(self, texts: Sequence[str], sample_ids: Optional[Sequence[str]] = None, need_weights: bool = False) -> PooledText:
        pooler = self.future_pooler if self.future_pooler is not None else self.history_pooler
        return pooler(self.encode(texts, sample_ids, "future"), need_weights)
