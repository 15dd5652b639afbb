"""
Dual-branch multimodal forecaster

    normalize -> embed_patches -> unimodal_encode -> pool_history
    -> history_interact -> pool_future -> future_interact
    -> project_head -> denormalize

Ablation flags replace absent texts with "" (the BLANK pathway) and bypass
interaction stages; they never change the parameter layout, so one
checkpoint format serves every ablation row.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import torch
import torch.nn as nn

from ..errors import CheckpointError, ModelError
from ..infra import load_checkpoint, save_checkpoint
from ..types import (
    FULL,
    AblationSet,
    BatchStats,
    LossReport,
    ModelConfig,
    PatchTokens,
    PooledText,
    StudentTParams,
)
from .head import StudentTHead
from .interaction import FutureInteraction, HistoryInteraction
from .normalization import InstanceNormalizer
from .objectives import contrastive_loss, loss_report, studentt_nll, total_loss
from .pooling import TextBranch
from .temporal import PatchEmbedding, UnimodalEncoder
from .text_encoders import TextEncoder

logger = logging.getLogger(__name__)


@dataclass
class ForecastOutput:
    """
    Attributes:
        params: Raw-scale forecast distribution (B, h)
        params_normalized: Same distribution in instance-normalized space
        stats: Per-window normalization statistics
        history_text: Pooled history text
        patches: Unimodal encoder output (patches + series CLS)
        diagnostics: ts_cls, text_cls, future_attention (B, heads, P, G') or None,
            truncated (texts cut at the token limit)
    """
    params: StudentTParams
    params_normalized: StudentTParams
    stats: BatchStats
    history_text: PooledText
    patches: PatchTokens
    diagnostics: Dict[str, Any] = field(default_factory=dict)


class DualForecaster(nn.Module):
    """
    Usage:
        model = DualForecaster(get_preset("toy").model)
        out = model(history, history_texts, future_texts)
        loss, report = model.compute_loss(out, future)
    """

    def __init__(self, config: ModelConfig, text_encoder: Optional[TextEncoder] = None):
        super().__init__()
        self.config = config
        backbone = config.backbone
        self.normalizer = InstanceNormalizer()
        self.patch_embed = PatchEmbedding(config.lookback, backbone.patch_len, backbone.d_model)
        self.unimodal = UnimodalEncoder(backbone)
        self.text = TextBranch(config, text_encoder)
        self.history_interaction = HistoryInteraction(backbone)
        self.future_interaction = FutureInteraction(backbone)
        self.head = StudentTHead(backbone.d_model, config.horizon)
        self.log_temperature = nn.Parameter(
            torch.tensor(math.log(config.contrastive.temperature)),
            requires_grad=config.contrastive.learnable_temperature,
        )

    @property
    def temperature(self) -> torch.Tensor:
        return self.log_temperature.exp()

    def forward(
        self,
        history: torch.Tensor,
        history_texts: Sequence[str],
        future_texts: Sequence[str],
        sample_ids: Optional[Sequence[str]] = None,
        ablation: Union[AblationSet, str, None] = FULL,
        need_weights: bool = False,
    ) -> ForecastOutput:
        ablation = AblationSet.parse(ablation)
        batch = history.shape[0]
        if batch == 0:
            raise ModelError.empty_batch("forward")
        if len(history_texts) != batch or len(future_texts) != batch:
            raise ModelError.shape_mismatch("history", "texts", history.shape, (len(history_texts), len(future_texts)))
        if not ablation.uses_history_text:
            history_texts = [""] * batch
        if not ablation.uses_future_text:
            future_texts = [""] * batch

        normalized, stats = self.normalizer(history)
        encoded, _ = self.unimodal(self.patch_embed(normalized))

        pooled_history = self.text.pool_history(history_texts, sample_ids)
        aligned = encoded.patches
        if ablation.history_interact:
            aligned = self.history_interaction(aligned, pooled_history.content)

        final = aligned
        future_attention = None
        if ablation.future_interact:
            pooled_future = self.text.pool_future(future_texts, sample_ids)
            final, future_attention = self.future_interaction(aligned, pooled_future.content, need_weights)

        params_normalized = self.head(final[:, -1])
        return ForecastOutput(
            params=self.normalizer.denormalize(params_normalized, stats),
            params_normalized=params_normalized,
            stats=stats,
            history_text=pooled_history,
            patches=encoded,
            diagnostics={
                "ts_cls": encoded.cls,
                "text_cls": pooled_history.cls,
                "future_attention": future_attention,
            },
        )

    def compute_loss(
        self,
        output: ForecastOutput,
        future: torch.Tensor,
        ablation: Union[AblationSet, str, None] = FULL,
    ) -> Tuple[torch.Tensor, LossReport]:
        """
        NLL of the normalized future under the normalized forecast, plus the
        contrastive term when the flags keep history text and contrast.
        """
        ablation = AblationSet.parse(ablation)
        target = self.normalizer.normalize_target(future, output.stats)
        forecast = studentt_nll(output.params_normalized, target)
        contrastive = None
        if ablation.contrastive_enabled:
            contrastive = contrastive_loss(
                output.diagnostics["ts_cls"],
                output.diagnostics["text_cls"],
                self.temperature,
                self.config.contrastive.normalize_cls,
            )
        loss = total_loss(forecast, contrastive[0] if contrastive is not None else None, ablation.contrastive_enabled)
        return loss, loss_report(forecast, contrastive)

    # ========== Ablation ==========

    def apply_ablation_freezing(self, ablation: Union[AblationSet, str, None]) -> List[str]:
        """
        Freeze the parts the flags leave unused; returns their names.

        No text at all freezes the text branch; a bypassed interaction stage
        is frozen. Everything else is made trainable again.
        """
        ablation = AblationSet.parse(ablation)
        frozen = {
            "text": not ablation.uses_any_text,
            "history_interaction": not ablation.history_interact,
            "future_interaction": not ablation.future_interact,
        }
        for name, module in self.named_children():
            flag = frozen.get(name, False)
            for param in module.parameters():
                param.requires_grad_(not flag)
        self.log_temperature.requires_grad_(
            self.config.contrastive.learnable_temperature and ablation.contrastive_enabled
        )
        names = [name for name, flag in frozen.items() if flag]
        if names:
            logger.debug(f"Frozen for {ablation.label}: {', '.join(names)}")
        return names

    def zero_init_outputs(self) -> None:
        """Zero every attention output projection (residual stages become identities)"""
        self.unimodal.zero_init_output()
        self.history_interaction.zero_init_output()
        self.future_interaction.zero_init_output()

    # ========== Checkpoints ==========

    def save(self, directory: Union[str, Path], metadata: Optional[Mapping[str, Any]] = None) -> Path:
        return save_checkpoint(directory, self.config.to_dict(), self.state_dict(), metadata)

    @classmethod
    def from_checkpoint(
        cls,
        directory: Union[str, Path],
        expected: Optional[ModelConfig] = None,
    ) -> Tuple["DualForecaster", Dict[str, Any]]:
        """
        Rebuild a model from a checkpoint directory.

        Raises:
            CheckpointError: missing / corrupt directory, or a config that
                disagrees with `expected` on L, h or the backbone
        """
        model_dict, state, metadata = load_checkpoint(directory)
        try:
            config = ModelConfig.from_dict(model_dict)
        except (TypeError, ValueError) as e:
            raise CheckpointError.corrupt(str(directory), f"bad model config: {e}") from e
        if expected is not None:
            mismatched = {
                name: (getattr(config, name), getattr(expected, name))
                for name in ("lookback", "horizon", "backbone", "num_queries")
                if getattr(expected, name) != getattr(config, name)
            }
            if mismatched:
                raise CheckpointError.incompatible(mismatched)
        model = cls(config)
        current = model.state_dict()
        missing = sorted(set(current) - set(state))
        unexpected = sorted(set(state) - set(current))
        if missing or unexpected:
            raise CheckpointError.corrupt(str(directory), f"missing={missing[:5]} unexpected={unexpected[:5]}")
        for name, tensor in state.items():
            if tuple(tensor.shape) != tuple(current[name].shape):
                raise CheckpointError.incompatible({name: (tuple(tensor.shape), tuple(current[name].shape))})
        model.load_state_dict(state)
        return model, metadata


def count_parameters(model: nn.Module) -> Dict[str, Dict[str, int]]:
    """{top-level module: {"trainable": n, "frozen": n}} plus a "total" row"""
    counts: Dict[str, Dict[str, int]] = {}
    for name, param in model.named_parameters():
        group = name.split(".", 1)[0]
        row = counts.setdefault(group, {"trainable": 0, "frozen": 0})
        row["trainable" if param.requires_grad else "frozen"] += param.numel()
    counts["total"] = {
        "trainable": sum(row["trainable"] for row in counts.values()),
        "frozen": sum(row["frozen"] for row in counts.values()),
    }
    return counts
