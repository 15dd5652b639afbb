"""
Error definitions for dualcast
"""

from .exceptions import (
    ErrorCode,
    DualcastError,
    DatasetError,
    SynthesisError,
    CaptionError,
    TextEncoderError,
    ModelError,
    TrainingError,
    CheckpointError,
    ConfigurationError,
)

__all__ = [
    "ErrorCode",
    "DualcastError",
    "DatasetError",
    "SynthesisError",
    "CaptionError",
    "TextEncoderError",
    "ModelError",
    "TrainingError",
    "CheckpointError",
    "ConfigurationError",
]
