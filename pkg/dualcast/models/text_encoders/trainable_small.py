"""
Small trainable text encoder

Hashing word/punctuation tokenizer, learned embedding table and a short
stack of residual self-attention blocks.
"""

import logging
import re
import zlib
from typing import List, Optional, Sequence, Tuple

import torch
import torch.nn as nn

from ...types import TextEncoderConfig, TokenRole, TokenSequence
from ..attention import Attention, feed_forward
from .base import TextEncoder

logger = logging.getLogger(__name__)

PAD_ID = 0
BLANK_ID = 1
_TOKEN = re.compile(r"\w+|[^\w\s]")


class HashingTokenizer:
    """
    Lowercased word / punctuation tokens hashed into vocab_size buckets.

    Ids 0 and 1 are reserved for PAD and BLANK; an empty (or whitespace-only)
    text becomes the single BLANK token.
    """

    def __init__(self, vocab_size: int, max_tokens: int):
        self.vocab_size = vocab_size
        self.max_tokens = max_tokens

    def token_id(self, token: str) -> int:
        return 2 + zlib.crc32(token.encode("utf-8")) % (self.vocab_size - 2)

    def tokenize(self, text: str) -> Tuple[List[int], bool]:
        """(ids, truncated)"""
        tokens = _TOKEN.findall(text.lower())
        if not tokens:
            return [BLANK_ID], False
        ids = [self.token_id(tok) for tok in tokens]
        if len(ids) > self.max_tokens:
            return ids[:self.max_tokens], True
        return ids, False

    def batch(self, texts: Sequence[str]) -> Tuple[torch.Tensor, torch.Tensor, int]:
        """(ids (B, G'), mask (B, G') True = padding, number truncated)"""
        rows = [self.tokenize(text) for text in texts]
        width = max(len(ids) for ids, _ in rows)
        ids = torch.full((len(rows), width), PAD_ID, dtype=torch.long)
        for i, (row, _) in enumerate(rows):
            ids[i, :len(row)] = torch.tensor(row, dtype=torch.long)
        return ids, ids == PAD_ID, sum(1 for _, cut in rows if cut)


class _EncoderBlock(nn.Module):
    def __init__(self, width: int, heads: int):
        super().__init__()
        self.norm1 = nn.LayerNorm(width)
        self.attn = Attention(width, heads)
        self.norm2 = nn.LayerNorm(width)
        self.ffn = feed_forward(width, expansion=2)

    def forward(self, x: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        h = self.norm1(x)
        x = x + self.attn(h, h, key_padding_mask=mask)[0]
        return x + self.ffn(self.norm2(x))


class TrainableTextEncoder(TextEncoder):
    """
    Learned embedding table + positional embedding + residual self-attention
    """

    name = "trainable_small"

    def __init__(self, config: TextEncoderConfig):
        super().__init__(config)
        self.tokenizer = HashingTokenizer(config.vocab_size, config.max_tokens)
        self.embedding = nn.Embedding(config.vocab_size, config.width, padding_idx=PAD_ID)
        self.position = nn.Parameter(torch.zeros(config.max_tokens, config.width))
        nn.init.normal_(self.position, std=0.02)
        self.blocks = nn.ModuleList(_EncoderBlock(config.width, config.heads) for _ in range(config.layers))
        self.norm = nn.LayerNorm(config.width)

    def encode(
        self,
        texts: Sequence[str],
        sample_ids: Optional[Sequence[str]] = None,
        role: str = "history",
    ) -> TokenSequence:
        ids, mask, truncated = self.tokenizer.batch(texts)
        device = self.position.device
        ids = ids.to(device)
        mask = mask.to(device)
        x = self.embedding(ids) + self.position[:ids.shape[1]]
        for block in self.blocks:
            x = block(x, mask)
        x = self.norm(x)
        if truncated:
            logger.debug(f"{truncated} {role} text(s) truncated to {self.max_tokens} tokens")
        return TokenSequence(values=x, mask=mask, role=TokenRole.TEXT, truncated=truncated)
