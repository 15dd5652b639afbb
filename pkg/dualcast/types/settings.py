"""
Experiment settings: model, text encoder, contrastive, training, ablation

Config files (JSON or TOML) may use either the field names below or the
usual configuration table column names (L, P, L_p, h, d_m,
n_uni, n_mul, Heads, LR, Weight Decay, Batch Size, Epochs, Patience).
"""

import json
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterable, Mapping, Optional, Tuple, Union

from ..errors import ConfigurationError

try:
    import tomllib as _toml
except ModuleNotFoundError:  # Python 3.10
    import tomli as _toml


BUILTIN_TEXT_ENCODERS = ("trainable_small", "external_embeddings")
NORM_PLACEMENTS = ("pre", "none")


@dataclass(frozen=True)
class TextEncoderConfig:
    """
    Attributes:
        kind: Registered encoder name (trainable_small, external_embeddings or a custom one)
        width: Token embedding width d
        max_tokens: Token limit G
        vocab_size: Hash buckets of the trainable tokenizer (ids 0/1 are PAD/BLANK)
        layers: Residual self-attention blocks of the trainable encoder
        heads: Attention heads of the trainable encoder
        embeddings_path: Sidecar binary for external_embeddings
    """
    kind: str = "trainable_small"
    width: int = 64
    max_tokens: int = 128
    vocab_size: int = 4096
    layers: int = 2
    heads: int = 4
    embeddings_path: Optional[str] = None

    def __post_init__(self):
        if not self.kind:
            raise ConfigurationError.missing("text_encoder.kind")
        if self.width < 8:
            raise ConfigurationError.invalid("text_encoder.width", f"d must be >= 8, got {self.width}")
        if self.max_tokens < 1:
            raise ConfigurationError.invalid("text_encoder.max_tokens", f"G must be >= 1, got {self.max_tokens}")
        if self.kind == "trainable_small":
            if self.vocab_size < 3:
                raise ConfigurationError.invalid("text_encoder.vocab_size", "need at least 3 buckets")
            if self.width % self.heads:
                raise ConfigurationError.invalid("text_encoder.heads", f"{self.heads} does not divide d={self.width}")


@dataclass(frozen=True)
class ContrastiveConfig:
    temperature: float = 0.07
    normalize_cls: bool = True
    learnable_temperature: bool = False

    def __post_init__(self):
        if not self.temperature > 0:
            raise ConfigurationError.invalid("contrastive.temperature", f"must be > 0, got {self.temperature}")


@dataclass(frozen=True)
class BackboneConfig:
    """Temporal backbone and interaction stack"""
    d_model: int = 256
    n_uni: int = 6
    n_mul: int = 3
    heads: int = 8
    patch_len: int = 8
    include_ffn: bool = False
    norm_placement: str = "pre"

    def __post_init__(self):
        if self.d_model % self.heads:
            raise ConfigurationError.invalid("heads", f"{self.heads} does not divide d_m={self.d_model}")
        if self.norm_placement not in NORM_PLACEMENTS:
            raise ConfigurationError.invalid("norm_placement", f"{self.norm_placement!r} not in {NORM_PLACEMENTS}")
        if self.n_uni < 0 or self.n_mul < 0:
            raise ConfigurationError.invalid("n_uni/n_mul", "layer counts must be >= 0")
        if self.patch_len < 1:
            raise ConfigurationError.invalid("patch_len", "must be >= 1")


@dataclass(frozen=True)
class ModelConfig:
    """
    Full model configuration

    Attributes:
        lookback: L
        horizon: h
        backbone: d_m, n_uni, n_mul, heads, L_p and sublayer options
        num_queries: q learnable text queries (plus one CLS query)
        share_text_queries: history and future pooling share query parameters
        text_encoder: Text encoder settings
        contrastive: Contrastive loss settings
    """
    lookback: int = 200
    horizon: int = 30
    backbone: BackboneConfig = field(default_factory=BackboneConfig)
    num_queries: int = 8
    share_text_queries: bool = True
    text_encoder: TextEncoderConfig = field(default_factory=TextEncoderConfig)
    contrastive: ContrastiveConfig = field(default_factory=ContrastiveConfig)

    def __post_init__(self):
        if self.lookback < 1 or self.horizon < 1:
            raise ConfigurationError.invalid("L/h", "lookback and horizon must be positive")
        if self.lookback % self.backbone.patch_len:
            raise ConfigurationError.invalid(
                "L_p", f"L={self.lookback} is not divisible by L_p={self.backbone.patch_len}"
            )
        if self.num_queries < 1:
            raise ConfigurationError.invalid("num_queries", "q must be >= 1")

    @property
    def num_patches(self) -> int:
        return self.lookback // self.backbone.patch_len

    @property
    def d_model(self) -> int:
        return self.backbone.d_model

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ModelConfig":
        data = dict(data)
        backbone = BackboneConfig(**data.pop("backbone", {}))
        text_encoder = TextEncoderConfig(**data.pop("text_encoder", {}))
        contrastive = ContrastiveConfig(**data.pop("contrastive", {}))
        return cls(backbone=backbone, text_encoder=text_encoder, contrastive=contrastive, **data)


class AblationFlag(str, Enum):
    FULL = "full"
    NO_FUTURE_TEXT = "no_future_text"
    NO_HISTORY_TEXT = "no_history_text"
    NO_ANY_TEXT = "no_any_text"
    NO_CONTRASTIVE = "no_contrastive"
    NO_HISTORY_INTERACT = "no_history_interact"
    NO_FUTURE_INTERACT = "no_future_interact"


@dataclass(frozen=True)
class AblationSet:
    """
    A combination of ablation flags; the empty set is the full model.

    Parse with AblationSet.parse("no_future_text,no_contrastive").
    """
    flags: FrozenSet[AblationFlag] = frozenset()

    @classmethod
    def parse(cls, value: Union[str, Iterable[str], "AblationSet", None]) -> "AblationSet":
        if value is None:
            return cls()
        if isinstance(value, AblationSet):
            return value
        if isinstance(value, str):
            names = [part.strip() for part in value.replace("+", ",").split(",") if part.strip()]
        else:
            names = [str(part) for part in value]
        known = [flag.value for flag in AblationFlag]
        parsed = set()
        for name in names:
            if name not in known:
                raise ConfigurationError.unknown_ablation(name, known)
            flag = AblationFlag(name)
            if flag != AblationFlag.FULL:
                parsed.add(flag)
        return cls(frozenset(parsed))

    def __contains__(self, flag: AblationFlag) -> bool:
        return flag in self.flags

    @property
    def is_full(self) -> bool:
        return not self.flags

    @property
    def uses_history_text(self) -> bool:
        return not ({AblationFlag.NO_HISTORY_TEXT, AblationFlag.NO_ANY_TEXT} & self.flags)

    @property
    def uses_future_text(self) -> bool:
        return not ({AblationFlag.NO_FUTURE_TEXT, AblationFlag.NO_ANY_TEXT} & self.flags)

    @property
    def uses_any_text(self) -> bool:
        return self.uses_history_text or self.uses_future_text

    @property
    def contrastive_enabled(self) -> bool:
        return self.uses_history_text and AblationFlag.NO_CONTRASTIVE not in self.flags

    @property
    def history_interact(self) -> bool:
        return AblationFlag.NO_HISTORY_INTERACT not in self.flags

    @property
    def future_interact(self) -> bool:
        return AblationFlag.NO_FUTURE_INTERACT not in self.flags

    @property
    def label(self) -> str:
        if not self.flags:
            return AblationFlag.FULL.value
        return ",".join(sorted(flag.value for flag in self.flags))

    def __str__(self) -> str:
        return self.label


FULL = AblationSet()

# Ablation matrix rows, in table order
ABLATION_ROWS: Dict[str, AblationSet] = {
    "full model": FULL,
    "no texts": AblationSet.parse("no_any_text"),
    "history text": AblationSet.parse("no_future_text"),
    "history text without contrastive loss": AblationSet.parse("no_future_text,no_contrastive"),
    "history text without history interaction": AblationSet.parse("no_future_text,no_history_interact"),
    "future text added": FULL,
    "future text added without future interaction": AblationSet.parse("no_future_interact"),
    "future text without history text": AblationSet.parse("no_history_text"),
}


def resolve_ablation_rows(rows: Union[str, Iterable[str]]) -> Dict[str, AblationSet]:
    """
    Resolve "all", row labels or 1-based row numbers into the ordered matrix subset.

    A string is split on ';'. Unknown entries are refused.
    """
    if isinstance(rows, str):
        if rows.strip().lower() == "all":
            return dict(ABLATION_ROWS)
        rows = [part.strip() for part in rows.split(";") if part.strip()]
    labels = list(ABLATION_ROWS)
    selected: Dict[str, AblationSet] = {}
    for row in rows:
        if row.isdigit() and 1 <= int(row) <= len(labels):
            row = labels[int(row) - 1]
        if row not in ABLATION_ROWS:
            raise ConfigurationError.unknown_ablation(row, labels)
        selected[row] = ABLATION_ROWS[row]
    return selected


@dataclass(frozen=True)
class TrainConfig:
    """
    Attributes:
        learning_rate: AdamW learning rate
        weight_decay: Decoupled weight decay
        batch_size: Windows per optimizer step
        max_epochs: Epoch cap
        patience: Epochs without validation improvement before stopping
        seeds: One training run per seed
        ablation: Flags applied during training and default evaluation
        val_fraction: Share of training windows held out for early stopping
            (0 validates on the training windows themselves)
        grad_clip: Max gradient norm (0 disables clipping)
        betas: AdamW betas
        max_steps: Optional cap on optimizer steps per seed
        eval_batch_size: Windows per evaluation forward pass
    """
    learning_rate: float = 1e-4
    weight_decay: float = 0.01
    batch_size: int = 64
    max_epochs: int = 100
    patience: int = 7
    seeds: Tuple[int, ...] = (2021, 2022, 2023)
    ablation: AblationSet = FULL
    val_fraction: float = 0.1
    grad_clip: float = 1.0
    betas: Tuple[float, float] = (0.9, 0.999)
    max_steps: Optional[int] = None
    eval_batch_size: int = 256

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigurationError.invalid("learning_rate", f"must be > 0, got {self.learning_rate}")
        if self.patience < 1:
            raise ConfigurationError.invalid("patience", f"must be >= 1, got {self.patience}")
        if self.batch_size < 1 or self.max_epochs < 1:
            raise ConfigurationError.invalid("batch_size/max_epochs", "must be >= 1")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ConfigurationError.invalid("val_fraction", f"{self.val_fraction} not in [0, 1)")
        if not self.seeds:
            raise ConfigurationError.invalid("seeds", "need at least one seed")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "ablation", AblationSet.parse(self.ablation))

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["ablation"] = self.ablation.label
        data["seeds"] = list(self.seeds)
        data["betas"] = list(self.betas)
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TrainConfig":
        data = dict(data)
        if "seeds" in data:
            data["seeds"] = tuple(data["seeds"])
        if "betas" in data:
            data["betas"] = tuple(data["betas"])
        return cls(**data)


# Table column names -> (section, field)
TABLE_COLUMNS: Dict[str, Tuple[str, str]] = {
    "L": ("model", "lookback"),
    "h": ("model", "horizon"),
    "L_p": ("backbone", "patch_len"),
    "d_m": ("backbone", "d_model"),
    "n_uni": ("backbone", "n_uni"),
    "n_mul": ("backbone", "n_mul"),
    "Heads": ("backbone", "heads"),
    "LR": ("train", "learning_rate"),
    "Learning Rate": ("train", "learning_rate"),
    "WD": ("train", "weight_decay"),
    "Weight Decay": ("train", "weight_decay"),
    "Batch": ("train", "batch_size"),
    "Batch Size": ("train", "batch_size"),
    "Epochs": ("train", "max_epochs"),
    "Patience": ("train", "patience"),
}


def _field_sections() -> Dict[str, Tuple[str, str]]:
    sections: Dict[str, Tuple[str, str]] = {}
    for section, cls in (("model", ModelConfig), ("backbone", BackboneConfig), ("train", TrainConfig)):
        for f in fields(cls):
            if f.name not in ("backbone", "text_encoder", "contrastive"):
                sections.setdefault(f.name, (section, f.name))
    return sections


def apply_overrides(
    model: ModelConfig,
    train: TrainConfig,
    overrides: Mapping[str, Any],
) -> Tuple[ModelConfig, TrainConfig]:
    """
    Apply flat overrides (table column names or field names) to a config pair.

    Nested "text_encoder" / "contrastive" tables are merged into the
    matching sub-config. "P" is accepted and checked against L / L_p.
    """
    by_name = _field_sections()
    updates: Dict[str, Dict[str, Any]] = {"model": {}, "backbone": {}, "train": {}}
    text_encoder = dict(asdict(model.text_encoder))
    contrastive = dict(asdict(model.contrastive))
    expected_patches = None
    for key, value in overrides.items():
        if key in ("preset", "name", "description", "stride"):
            continue
        if key == "P":
            expected_patches = int(value)
            continue
        if key == "text_encoder":
            text_encoder.update(value)
            continue
        if key == "contrastive":
            contrastive.update(value)
            continue
        target = TABLE_COLUMNS.get(key) or by_name.get(key)
        if target is None:
            raise ConfigurationError.invalid(key, "unknown configuration key")
        section, name = target
        updates[section][name] = value
    try:
        backbone = replace(model.backbone, **updates["backbone"])
        model = replace(
            model,
            backbone=backbone,
            text_encoder=TextEncoderConfig(**text_encoder),
            contrastive=ContrastiveConfig(**contrastive),
            **updates["model"],
        )
        if "seeds" in updates["train"]:
            updates["train"]["seeds"] = tuple(updates["train"]["seeds"])
        if "betas" in updates["train"]:
            updates["train"]["betas"] = tuple(updates["train"]["betas"])
        train = replace(train, **updates["train"])
    except TypeError as e:
        raise ConfigurationError.invalid("config", str(e)) from e
    if expected_patches is not None and expected_patches != model.num_patches:
        raise ConfigurationError.invalid("P", f"P={expected_patches} but L / L_p = {model.num_patches}")
    return model, train


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a JSON or TOML experiment config into a dict"""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError.missing(f"config file {path}")
    try:
        if path.suffix.lower() == ".toml":
            with open(path, "rb") as f:
                return _toml.load(f)
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except (ValueError, _toml.TOMLDecodeError) as e:
        raise ConfigurationError.invalid(str(path), f"cannot parse: {e}") from e
