"""
Torch modules of the dual-branch forecaster
"""

from .attention import Attention
from .text_encoders import (
    TextEncoder,
    TextEncoderRegistry,
    create_text_encoder,
    HashingTokenizer,
    TrainableTextEncoder,
    ExternalEmbeddingEncoder,
)
from .pooling import AttentionalPooler, TextBranch
from .temporal import PatchEmbedding, SelfAttentionLayer, UnimodalEncoder
from .interaction import HistoryInteractionLayer, HistoryInteraction, FutureInteraction
from .head import StudentTHead
from .normalization import InstanceNormalizer
from .objectives import (
    similarity_logits,
    symmetric_infonce,
    contrastive_loss,
    studentt_log_prob,
    studentt_nll,
    total_loss,
    loss_report,
    mse_mae,
    retrieval_accuracy,
)
from .forecaster import DualForecaster, ForecastOutput, count_parameters

__all__ = [
    # Building blocks
    "Attention",
    "TextEncoder",
    "TextEncoderRegistry",
    "create_text_encoder",
    "HashingTokenizer",
    "TrainableTextEncoder",
    "ExternalEmbeddingEncoder",
    "AttentionalPooler",
    "TextBranch",
    "PatchEmbedding",
    "SelfAttentionLayer",
    "UnimodalEncoder",
    "HistoryInteractionLayer",
    "HistoryInteraction",
    "FutureInteraction",
    "StudentTHead",
    "InstanceNormalizer",
    # Objectives
    "similarity_logits",
    "symmetric_infonce",
    "contrastive_loss",
    "studentt_log_prob",
    "studentt_nll",
    "total_loss",
    "loss_report",
    "mse_mae",
    "retrieval_accuracy",
    # Model
    "DualForecaster",
    "ForecastOutput",
    "count_parameters",
]
