"""
dualcast - text-conditioned probabilistic time-series forecasting

Provides:
- A dual-branch forecaster that reads a numeric history together with
  captions of the history and of the expected future
- A synthetic benchmark generator with matching captions
- A segmentation captioner for arbitrary series
- Training, ablation, zero-shot and alignment diagnostics
"""

__version__ = "0.3.1"

from .client import Workbench
from .types import (
    MultimodalWindow,
    WindowingSpec,
    DatasetManifest,
    StudentTParams,
    ComponentSpec,
    SpecDistribution,
    Segment,
    IepfParams,
    ModelConfig,
    TrainConfig,
    AblationSet,
    RunResult,
    get_preset,
    list_presets,
)
from .errors import (
    DualcastError,
    DatasetError,
    SynthesisError,
    CaptionError,
    TextEncoderError,
    ModelError,
    TrainingError,
    CheckpointError,
    ConfigurationError,
    ErrorCode,
)
from .models import DualForecaster

__all__ = [
    # Client
    "Workbench",
    # Types
    "MultimodalWindow",
    "WindowingSpec",
    "DatasetManifest",
    "StudentTParams",
    "ComponentSpec",
    "SpecDistribution",
    "Segment",
    "IepfParams",
    "ModelConfig",
    "TrainConfig",
    "AblationSet",
    "RunResult",
    "get_preset",
    "list_presets",
    # Errors
    "DualcastError",
    "DatasetError",
    "SynthesisError",
    "CaptionError",
    "TextEncoderError",
    "ModelError",
    "TrainingError",
    "CheckpointError",
    "ConfigurationError",
    "ErrorCode",
    # Model
    "DualForecaster",
]
