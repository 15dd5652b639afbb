"""
Diagnostics Module

Alignment exports, parameter counts and finite-difference gradient checks.

export_alignment writes three files into an output directory:
    similarity.csv   n x n cosine similarity of the series CLS (rows) against
                     the history-text CLS (columns), series ids as labels
    attention.csv    one row per (window, head): the last patch token's
                     future-interaction attention over the pooled future text
    alignment.json   index with file names, shapes and retrieval accuracy
"""

import json
import logging
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, List, Sequence, Union

import pandas as pd
import torch

if TYPE_CHECKING:
    from ..client import Workbench

from ..errors import DatasetError
from ..infra import CorrelationContext, log_event, substream_rng
from ..models import DualForecaster, count_parameters, retrieval_accuracy, similarity_logits
from ..types import AblationSet, ModelConfig, MultimodalWindow
from .trainer import batch_tensors, check_compatible, checkpoint_dirs, load_windows, model_device

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
ModelSource = Union[PathLike, DualForecaster]

SIMILARITY_FILE = "similarity.csv"
ATTENTION_FILE = "attention.csv"
INDEX_FILE = "alignment.json"


def _load_model(source: ModelSource):
    """(model, ablation label) from a model instance or the first checkpoint under a path"""
    if isinstance(source, DualForecaster):
        return source, None
    model, metadata = DualForecaster.from_checkpoint(checkpoint_dirs(source)[0])
    return model, metadata.get("ablation")


@torch.no_grad()
def alignment_tensors(
    model: DualForecaster,
    windows: Sequence[MultimodalWindow],
    ablation: Union[AblationSet, str, None] = None,
    batch_size: int = 256,
):
    """
    (series CLS (n, d), text CLS (n, d), last-patch future attention (n, heads, G') or None)
    """
    ablation = AblationSet.parse(ablation)
    was_training = model.training
    model.eval()
    device, dtype = model_device(model)
    ts, text, attention = [], [], []
    for start in range(0, len(windows), batch_size):
        history, _, h_texts, f_texts, ids = batch_tensors(windows[start:start + batch_size], device, dtype)
        out = model(history, h_texts, f_texts, ids, ablation, need_weights=True)
        ts.append(out.diagnostics["ts_cls"])
        text.append(out.diagnostics["text_cls"])
        weights = out.diagnostics["future_attention"]
        if weights is not None:
            attention.append(weights[:, :, -1, :])
    model.train(was_training)
    return torch.cat(ts), torch.cat(text), torch.cat(attention) if attention else None


def export_alignment(
    source: ModelSource,
    windows: Union[PathLike, Sequence[MultimodalWindow]],
    out_dir: PathLike,
    ablation: Union[AblationSet, str, None] = None,
) -> Dict[str, Any]:
    """
    Write the similarity matrix, attention rows and JSON index; returns the index.

    Works on untrained models too. Attention rows are absent (header only)
    when future interaction is ablated.

    Raises:
        DatasetError: empty window set
        CheckpointError: missing checkpoint or L/h mismatch
    """
    windows = load_windows(windows)
    if not windows:
        raise DatasetError.empty("alignment windows")
    model, trained_with = _load_model(source)
    check_compatible(model.config, windows)
    flags = AblationSet.parse(ablation if ablation is not None else trained_with)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with CorrelationContext(prefix="align"):
        ts_cls, text_cls, attention = alignment_tensors(model, windows, flags)
        similarity = similarity_logits(ts_cls, text_cls, 1.0, normalize=True)
        ids = [w.series_id for w in windows]

        pd.DataFrame(similarity.cpu().double().numpy(), index=ids, columns=ids).to_csv(
            out_dir / SIMILARITY_FILE, index_label="series_id", float_format="%.9g"
        )

        heads = model.config.backbone.heads
        width = attention.shape[-1] if attention is not None else model.config.num_queries
        columns = ["series_id", "head"] + [f"t{j}" for j in range(width)]
        rows: List[List[Any]] = []
        if attention is not None:
            values = attention.cpu().double().numpy()
            for i, series_id in enumerate(ids):
                for head in range(values.shape[1]):
                    rows.append([series_id, head] + values[i, head].tolist())
        pd.DataFrame(rows, columns=columns).to_csv(out_dir / ATTENTION_FILE, index=False, float_format="%.9g")

        accuracy = retrieval_accuracy(similarity)
        index = {
            "n_windows": len(windows),
            "similarity": {"file": SIMILARITY_FILE, "shape": [len(windows), len(windows)]},
            "attention": {
                "file": ATTENTION_FILE,
                "heads": heads,
                "text_tokens": width,
                "rows": len(rows),
            },
            "retrieval_accuracy": accuracy,
            "ablation": flags.label,
        }
        with open(out_dir / INDEX_FILE, "w", encoding="utf-8", newline="\n") as f:
            json.dump(index, f, indent=2, sort_keys=True)
            f.write("\n")
        log_event(logging.INFO, "alignment exported", "export_alignment", log=logger, n=len(windows), accuracy=accuracy)
    return index


def parameter_report(source: ModelSource, ablation: Union[AblationSet, str, None] = None) -> Dict[str, Dict[str, int]]:
    """
    Trainable/frozen counts per top-level module after applying ablation freezing.

    Checkpoints default to the ablation they were trained with.
    """
    model, trained_with = _load_model(source)
    flags = AblationSet.parse(ablation if ablation is not None else trained_with)
    model.apply_ablation_freezing(flags)
    return count_parameters(model)


def gradient_check(
    model_config: ModelConfig,
    windows: Sequence[MultimodalWindow],
    ablation: Union[AblationSet, str, None] = None,
    eps: float = 1e-6,
    entries_per_tensor: int = 3,
    seed: int = 0,
    floor: float = 1e-4,
) -> Dict[str, float]:
    """
    Max relative error of analytic vs central-difference gradients of total loss.

    Runs in float64 on a freshly initialized model. A few entries of every
    trainable tensor are perturbed; the result maps top-level module names to
    the worst relative error seen in that group. Errors are relative to
    max(|analytic|, |numeric|, floor), so vanishing entries compare absolutely.
    """
    flags = AblationSet.parse(ablation)
    torch.manual_seed(seed)
    model = DualForecaster(model_config).double()
    model.apply_ablation_freezing(flags)
    history, future, h_texts, f_texts, ids = batch_tensors(list(windows), torch.device("cpu"), torch.float64)

    def loss_value() -> torch.Tensor:
        out = model(history, h_texts, f_texts, ids, flags)
        return model.compute_loss(out, future, flags)[0]

    model.zero_grad(set_to_none=True)
    loss_value().backward()
    rng = substream_rng(seed, "gradcheck")
    errors: Dict[str, float] = {}
    for name, param in model.named_parameters():
        if not param.requires_grad:
            continue
        analytic = param.grad.detach().clone() if param.grad is not None else torch.zeros_like(param)
        flat = param.data.view(-1)
        picks = rng.choice(flat.numel(), size=min(entries_per_tensor, flat.numel()), replace=False)
        worst = 0.0
        with torch.no_grad():
            for k in picks.tolist():
                original = flat[k].item()
                flat[k] = original + eps
                plus = loss_value().item()
                flat[k] = original - eps
                minus = loss_value().item()
                flat[k] = original
                numeric = (plus - minus) / (2 * eps)
                exact = analytic.view(-1)[k].item()
                scale = max(abs(exact), abs(numeric), floor)
                worst = max(worst, abs(exact - numeric) / scale)
        group = name.split(".", 1)[0]
        errors[group] = max(errors.get(group, 0.0), worst)
    log_event(logging.DEBUG, "gradient check", "gradient_check", log=logger, worst=max(errors.values(), default=0.0))
    return errors


class DiagnosticsModule:
    """
    Diagnostics bound to a Workbench

    Usage:
        bench = Workbench()
        index = bench.diagnostics.export_alignment("runs/x/seed_2021", "synth.jsonl", "align/")
        counts = bench.diagnostics.parameters("runs/x/seed_2021")
    """

    def __init__(self, bench: "Workbench"):
        self._bench = bench

    def export_alignment(self, source: ModelSource, windows, out_dir: PathLike, ablation=None) -> Dict[str, Any]:
        return export_alignment(source, windows, out_dir, ablation)

    def parameters(self, source: ModelSource, ablation=None) -> Dict[str, Dict[str, int]]:
        return parameter_report(source, ablation)

    def gradient_check(self, model_config: ModelConfig, windows, ablation=None) -> Dict[str, float]:
        return gradient_check(model_config, windows, ablation)
