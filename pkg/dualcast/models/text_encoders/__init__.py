"""
Text encoders

Each encoder implements the TextEncoder interface and is built from a
TextEncoderConfig through TextEncoderRegistry.
"""

from .base import TextEncoder
from .registry import TextEncoderRegistry, create_text_encoder
from .trainable_small import HashingTokenizer, TrainableTextEncoder, PAD_ID, BLANK_ID
from .external import ExternalEmbeddingEncoder

__all__ = [
    "TextEncoder",
    "TextEncoderRegistry",
    "create_text_encoder",
    "HashingTokenizer",
    "TrainableTextEncoder",
    "ExternalEmbeddingEncoder",
    "PAD_ID",
    "BLANK_ID",
]
