"""
Experiment presets

One preset per dataset row of the reference configuration table, plus
desk-scale presets used by tests and the CLI defaults.
"""

from dataclasses import dataclass, replace
from typing import Dict, List, Optional

from ..errors import ConfigurationError
from .settings import BackboneConfig, ModelConfig, TextEncoderConfig, TrainConfig


@dataclass(frozen=True)
class ExperimentPreset:
    """
    Attributes:
        name: Registry key
        model: Model configuration
        train: Training configuration
        stride: Sliding-window stride used when captioning the source data
        description: One-line summary
    """
    name: str
    model: ModelConfig
    train: TrainConfig
    stride: Optional[int] = None
    description: str = ""


def _row(
    name: str,
    L: int,
    L_p: int,
    h: int,
    d_m: int,
    n_uni: int,
    n_mul: int,
    heads: int,
    lr: float,
    batch: int,
    epochs: int,
    patience: int,
    stride: Optional[int] = None,
    description: str = "",
) -> ExperimentPreset:
    model = ModelConfig(
        lookback=L,
        horizon=h,
        backbone=BackboneConfig(d_model=d_m, n_uni=n_uni, n_mul=n_mul, heads=heads, patch_len=L_p),
    )
    train = TrainConfig(learning_rate=lr, weight_decay=0.01, batch_size=batch, max_epochs=epochs, patience=patience)
    return ExperimentPreset(name=name, model=model, train=train, stride=stride, description=description)


_TABLE_ROWS = [
    # name, L, L_p, h, d_m, n_uni, n_mul, heads, lr, batch, epochs, patience, stride
    ("synthetic", 200, 8, 30, 256, 6, 3, 8, 1e-4, 64, 300, 7, None),
    ("ETTm1", 336, 8, 96, 256, 6, 3, 8, 1e-4, 64, 100, 7, 16),
    ("ETTm2", 336, 8, 96, 256, 6, 3, 8, 1e-4, 64, 100, 7, 16),
    ("ETTh1", 336, 8, 96, 256, 6, 3, 8, 1e-4, 64, 100, 7, 4),
    ("ETTh2", 336, 8, 96, 256, 6, 3, 8, 1e-4, 64, 100, 7, 4),
    ("exchange-rate", 336, 8, 96, 256, 6, 3, 8, 1e-4, 64, 100, 7, 12),
    ("stock", 336, 8, 21, 256, 6, 3, 8, 1e-4, 64, 100, 7, 32),
    ("Weather-captioned", 288, 8, 36, 64, 6, 3, 4, 1e-4, 64, 100, 7, None),
    ("Time-MMD-Climate", 8, 8, 8, 64, 2, 1, 2, 1e-4, 32, 300, 7, 1),
    ("Time-MMD-Economy", 8, 8, 8, 64, 2, 1, 2, 5e-3, 32, 300, 20, 1),
    ("Time-MMD-SocialGood", 8, 8, 8, 64, 2, 1, 2, 1e-4, 32, 300, 7, 1),
    ("Time-MMD-Traffic", 8, 8, 8, 128, 2, 1, 4, 1e-4, 32, 300, 7, 1),
    ("Time-MMD-Energy", 40, 8, 12, 64, 2, 1, 2, 1e-4, 32, 300, 7, 1),
    ("Time-MMD-Health-US", 40, 8, 12, 128, 2, 1, 2, 1e-4, 32, 300, 7, 1),
    ("Time-MMD-Health-AFR", 40, 8, 12, 128, 2, 1, 2, 1e-4, 32, 300, 7, 1),
]

PRESETS: Dict[str, ExperimentPreset] = {
    row[0]: _row(*row[:12], stride=row[12], description=f"{row[0]} row of the configuration table")
    for row in _TABLE_ROWS
}

# Laptop-scale synthetic setup used by the acceptance runs
PRESETS["desk"] = ExperimentPreset(
    name="desk",
    model=ModelConfig(
        lookback=64,
        horizon=16,
        backbone=BackboneConfig(d_model=32, n_uni=2, n_mul=1, heads=4, patch_len=8),
        num_queries=4,
        text_encoder=TextEncoderConfig(width=32, max_tokens=64, vocab_size=2048, layers=1, heads=4),
    ),
    train=TrainConfig(learning_rate=1e-3, batch_size=32, max_epochs=40, patience=7),
    description="desk-scale synthetic",
)

# Gradient-check configuration
PRESETS["toy"] = ExperimentPreset(
    name="toy",
    model=ModelConfig(
        lookback=16,
        horizon=4,
        backbone=BackboneConfig(d_model=8, n_uni=1, n_mul=1, heads=2, patch_len=4),
        num_queries=2,
        text_encoder=TextEncoderConfig(width=8, max_tokens=8, vocab_size=32, layers=1, heads=2),
    ),
    train=TrainConfig(learning_rate=1e-3, batch_size=8, max_epochs=10, patience=3, seeds=(0,)),
    description="toy shapes for gradient checks and overfit tests",
)

# Attention-map export with eight cross-attention heads
PRESETS["heads8"] = ExperimentPreset(
    name="heads8",
    model=replace(
        PRESETS["desk"].model,
        backbone=BackboneConfig(d_model=64, n_uni=2, n_mul=1, heads=8, patch_len=8),
    ),
    train=PRESETS["desk"].train,
    description="desk-scale synthetic with 8 attention heads",
)


def get_preset(name: str) -> ExperimentPreset:
    """Look up a preset by name (case-insensitive)"""
    for key, preset in PRESETS.items():
        if key.lower() == name.lower():
            return preset
    raise ConfigurationError.invalid(
        "preset", f"Unknown preset: {name}. Available presets: {', '.join(PRESETS)}"
    )


def list_presets() -> List[str]:
    return list(PRESETS)
