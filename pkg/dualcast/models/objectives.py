"""
Training objectives and evaluation metrics

    contrastive_loss   symmetric InfoNCE over (series CLS, history text CLS)
    studentt_nll       location-scale Student's-t negative log-likelihood
    total_loss         forecast + gated contrastive
    mse_mae            point metrics on the location
"""

import math
from typing import Sequence, Tuple, Union

import numpy as np
import torch
import torch.nn.functional as F

from ..errors import ModelError
from ..types import LossReport, StudentTParams

TensorLike = Union[torch.Tensor, float]


def similarity_logits(
    ts_cls: torch.Tensor,
    text_cls: torch.Tensor,
    temperature: TensorLike,
    normalize: bool = True,
) -> torch.Tensor:
    """(B, B) logits: row i = series i against every text"""
    if ts_cls.shape != text_cls.shape:
        raise ModelError.shape_mismatch("ts_cls", "text_cls", ts_cls.shape, text_cls.shape)
    if ts_cls.shape[0] == 0:
        raise ModelError.empty_batch("contrastive_loss")
    if normalize:
        ts_cls = F.normalize(ts_cls, dim=-1)
        text_cls = F.normalize(text_cls, dim=-1)
    return ts_cls @ text_cls.transpose(0, 1) / temperature


def symmetric_infonce(logits: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """
    (row + col, row, col): mean cross-entropy toward the diagonal along
    rows (series -> text) and along columns (text -> series).
    """
    if logits.shape[0] == 0:
        raise ModelError.empty_batch("contrastive_loss")
    targets = torch.arange(logits.shape[0], device=logits.device)
    row = F.cross_entropy(logits, targets)
    col = F.cross_entropy(logits.transpose(0, 1), targets)
    return row + col, row, col


def contrastive_loss(
    ts_cls: torch.Tensor,
    text_cls: torch.Tensor,
    temperature: TensorLike = 0.07,
    normalize: bool = True,
) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """Symmetric InfoNCE; returns (total, series->text, text->series)"""
    return symmetric_infonce(similarity_logits(ts_cls, text_cls, temperature, normalize))


def studentt_log_prob(params: StudentTParams, target: torch.Tensor) -> torch.Tensor:
    mu, sigma, nu = params.location, params.scale, params.dof
    z = (target - mu) / sigma
    return (
        torch.lgamma((nu + 1.0) / 2.0)
        - torch.lgamma(nu / 2.0)
        - 0.5 * torch.log(nu * math.pi)
        - torch.log(sigma)
        - (nu + 1.0) / 2.0 * torch.log1p(z * z / nu)
    )


def studentt_nll(params: StudentTParams, target: torch.Tensor) -> torch.Tensor:
    """Mean per-step NLL over horizon and batch"""
    if target.shape != params.location.shape:
        raise ModelError.shape_mismatch("target", "location", target.shape, params.location.shape)
    if not torch.isfinite(target).all():
        raise ModelError.non_finite_target()
    return -studentt_log_prob(params, target).mean()


def total_loss(forecast: torch.Tensor, contrastive: torch.Tensor = None, enabled: bool = True) -> torch.Tensor:
    """forecast + contrastive, or forecast alone when the contrastive term is gated off"""
    if not enabled or contrastive is None:
        return forecast
    return forecast + contrastive


def loss_report(
    forecast: torch.Tensor,
    contrastive: Tuple[torch.Tensor, torch.Tensor, torch.Tensor] = None,
) -> LossReport:
    nll = float(forecast.detach())
    if contrastive is None:
        return LossReport(forecast_nll=nll, contrastive=0.0, total=nll)
    total, row, col = (float(t.detach()) for t in contrastive)
    return LossReport(
        forecast_nll=nll,
        contrastive=total,
        total=nll + total,
        contrastive_series_to_text=float(row),
        contrastive_text_to_series=float(col),
    )


def mse_mae(predictions: Union[Sequence, np.ndarray], truths: Union[Sequence, np.ndarray]) -> Tuple[float, float]:
    """
    MSE and MAE averaged per step, then per window.

    Accepts a single window (h,) or a stack (N, h).
    """
    pred = np.asarray(predictions, dtype=np.float64)
    true = np.asarray(truths, dtype=np.float64)
    if pred.shape != true.shape:
        raise ModelError.shape_mismatch("predictions", "truths", pred.shape, true.shape)
    if pred.size == 0:
        raise ModelError.empty_batch("mse_mae")
    error = pred - true
    if error.ndim == 1:
        error = error[None, :]
    mse = np.mean(np.mean(error ** 2, axis=-1))
    mae = np.mean(np.mean(np.abs(error), axis=-1))
    return float(mse), float(mae)


def retrieval_accuracy(logits: torch.Tensor) -> float:
    """Share of texts whose best-matching series (column argmax) is their own"""
    if logits.shape[0] == 0:
        raise ModelError.empty_batch("retrieval_accuracy")
    best = logits.argmax(dim=0)
    return float((best == torch.arange(logits.shape[0], device=logits.device)).float().mean())
