"""
Type definitions for dualcast
"""

from .window import (
    MultimodalWindow,
    NormalizationStats,
    WindowingSpec,
    DatasetManifest,
    RECORD_KEYS,
    STD_FLOOR,
)
from .forecast import (
    TokenRole,
    TokenSequence,
    StudentTParams,
    BatchStats,
    PooledText,
    PatchTokens,
)
from .segment import TrendClass, NoiseClass, IepfParams, Segment
from .synth import (
    TrendKind,
    SeasonKind,
    NoiseLevel,
    NOISE_VARIANCE,
    Combination,
    SwitchKind,
    Direction,
    TrendSpec,
    SeasonalitySpec,
    SwitchSpec,
    ComponentSpec,
    SpecDistribution,
    DISTRIBUTION_NAMES,
    CaptionTemplateBank,
)
from .settings import (
    TextEncoderConfig,
    ContrastiveConfig,
    BackboneConfig,
    ModelConfig,
    TrainConfig,
    AblationFlag,
    AblationSet,
    FULL,
    ABLATION_ROWS,
    resolve_ablation_rows,
    apply_overrides,
    read_config_file,
)
from .result import LossReport, EvalResult, SeedResult, RunResult
from .preset import ExperimentPreset, PRESETS, get_preset, list_presets

__all__ = [
    # Windows
    "MultimodalWindow",
    "NormalizationStats",
    "WindowingSpec",
    "DatasetManifest",
    "RECORD_KEYS",
    "STD_FLOOR",
    # Model containers
    "TokenRole",
    "TokenSequence",
    "StudentTParams",
    "BatchStats",
    "PooledText",
    "PatchTokens",
    # Captioner
    "TrendClass",
    "NoiseClass",
    "IepfParams",
    "Segment",
    # Synthetic
    "TrendKind",
    "SeasonKind",
    "NoiseLevel",
    "NOISE_VARIANCE",
    "Combination",
    "SwitchKind",
    "Direction",
    "TrendSpec",
    "SeasonalitySpec",
    "SwitchSpec",
    "ComponentSpec",
    "SpecDistribution",
    "DISTRIBUTION_NAMES",
    "CaptionTemplateBank",
    # Settings
    "TextEncoderConfig",
    "ContrastiveConfig",
    "BackboneConfig",
    "ModelConfig",
    "TrainConfig",
    "AblationFlag",
    "AblationSet",
    "FULL",
    "ABLATION_ROWS",
    "resolve_ablation_rows",
    "apply_overrides",
    "read_config_file",
    # Results
    "LossReport",
    "EvalResult",
    "SeedResult",
    "RunResult",
    # Presets
    "ExperimentPreset",
    "PRESETS",
    "get_preset",
    "list_presets",
]
