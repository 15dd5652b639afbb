"""
Base text encoder interface

Every encoder turns a batch of strings into padded token embeddings
(B, G', d) with G' <= G and a padding mask. An empty string always yields
exactly one non-padded token (the BLANK pathway), so no row is fully masked.
"""

from abc import ABC, abstractmethod
from typing import Optional, Sequence

import torch.nn as nn

from ...types import TextEncoderConfig, TokenSequence


class TextEncoder(nn.Module, ABC):
    """
    Abstract base class for text encoders

    Subclasses set `name` and implement encode().
    """

    name: str = "base"

    def __init__(self, config: TextEncoderConfig):
        super().__init__()
        self.config = config

    @property
    def width(self) -> int:
        """Token embedding width d"""
        return self.config.width

    @property
    def max_tokens(self) -> int:
        return self.config.max_tokens

    @abstractmethod
    def encode(
        self,
        texts: Sequence[str],
        sample_ids: Optional[Sequence[str]] = None,
        role: str = "history",
    ) -> TokenSequence:
        """
        Encode a batch of texts

        Args:
            texts: UTF-8 strings, "" for an absent text
            sample_ids: series_id per text (needed by lookup-based encoders)
            role: "history" or "future"

        Returns:
            TokenSequence with values (B, G', d) and mask (B, G') (True = padding)
        """
        ...

    def forward(self, texts: Sequence[str], sample_ids: Optional[Sequence[str]] = None, role: str = "history") -> TokenSequence:
        return self.encode(texts, sample_ids, role)
