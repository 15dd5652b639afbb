"""
Text encoder registry

Provides centralized registration and lookup for text encoders.
"""

from typing import Dict, Type, TYPE_CHECKING
import logging

if TYPE_CHECKING:
    from .base import TextEncoder

from ...errors import ConfigurationError
from ...types.settings import BUILTIN_TEXT_ENCODERS, TextEncoderConfig

logger = logging.getLogger(__name__)


class TextEncoderRegistry:
    """
    Registry for text encoder classes

    Built-in encoders are loaded lazily on first lookup.

    Usage:
        # Register an encoder class
        TextEncoderRegistry.register("my_encoder", MyEncoder)

        # Build an encoder from config (new instance each time)
        encoder = TextEncoderRegistry.create(TextEncoderConfig(kind="trainable_small"))
    """

    _encoders: Dict[str, Type["TextEncoder"]] = {}

    @classmethod
    def register(cls, name: str, encoder_class: Type["TextEncoder"]):
        cls._encoders[name.lower()] = encoder_class
        logger.debug(f"Registered text encoder: {name}")

    @classmethod
    def create(cls, config: TextEncoderConfig) -> "TextEncoder":
        """
        Raises:
            ConfigurationError: If the kind is not registered
        """
        name = config.kind.lower()
        if name not in cls._encoders:
            cls._try_load(name)
        if name not in cls._encoders:
            available = ", ".join(cls._encoders.keys()) or "none"
            raise ConfigurationError.invalid(
                "text_encoder.kind", f"Unknown text encoder: {config.kind}. Available: {available}"
            )
        return cls._encoders[name](config)

    @classmethod
    def list(cls) -> list[str]:
        for name in BUILTIN_TEXT_ENCODERS:
            if name not in cls._encoders:
                cls._try_load(name)
        return list(cls._encoders.keys())

    @classmethod
    def is_registered(cls, name: str) -> bool:
        return name.lower() in cls._encoders

    @classmethod
    def _try_load(cls, name: str):
        try:
            if name == "trainable_small":
                from .trainable_small import TrainableTextEncoder
                cls.register("trainable_small", TrainableTextEncoder)
            elif name == "external_embeddings":
                from .external import ExternalEmbeddingEncoder
                cls.register("external_embeddings", ExternalEmbeddingEncoder)
        except ImportError as e:
            logger.warning(f"Failed to load text encoder '{name}': {e}")


def create_text_encoder(config: TextEncoderConfig) -> "TextEncoder":
    return TextEncoderRegistry.create(config)
