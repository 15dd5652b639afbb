"""
Lookup encoder over a precomputed embedding sidecar

Keeps the frozen-pretrained-encoder workflow: token embeddings produced
offline by any language model are read by series_id. Only the BLANK
vector (used for empty texts) is learned.
"""

from typing import Optional, Sequence

import torch
import torch.nn as nn

from ...errors import ConfigurationError, TextEncoderError
from ...infra import EmbeddingStore
from ...types import TextEncoderConfig, TokenRole, TokenSequence
from .base import TextEncoder


class ExternalEmbeddingEncoder(TextEncoder):

    name = "external_embeddings"

    def __init__(self, config: TextEncoderConfig, store: Optional[EmbeddingStore] = None):
        super().__init__(config)
        if store is None:
            if not config.embeddings_path:
                raise ConfigurationError.missing("text_encoder.embeddings_path")
            store = EmbeddingStore(config.embeddings_path)
        if store.width != config.width:
            raise TextEncoderError.bad_sidecar(str(store.path), f"width {store.width} != configured d={config.width}")
        self.store = store
        self.blank = nn.Parameter(torch.zeros(1, config.width))

    def encode(
        self,
        texts: Sequence[str],
        sample_ids: Optional[Sequence[str]] = None,
        role: str = "history",
    ) -> TokenSequence:
        rows = []
        truncated = 0
        for i, text in enumerate(texts):
            if not text.strip():
                rows.append(self.blank)
                continue
            if sample_ids is None:
                raise TextEncoderError.missing_sample("<no sample id>", str(self.store.path))
            tokens = torch.from_numpy(self.store.lookup(sample_ids[i], role)).to(self.blank)
            if tokens.shape[0] > self.max_tokens:
                tokens = tokens[:self.max_tokens]
                truncated += 1
            rows.append(tokens)
        width = max(row.shape[0] for row in rows)
        values = self.blank.new_zeros(len(rows), width, self.width)
        mask = torch.ones(len(rows), width, dtype=torch.bool, device=self.blank.device)
        for i, row in enumerate(rows):
            values[i, :row.shape[0]] = row
            mask[i, :row.shape[0]] = False
        return TokenSequence(values=values, mask=mask, role=TokenRole.TEXT, truncated=truncated)
