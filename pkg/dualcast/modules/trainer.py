"""
Trainer Module

Multi-seed training with early stopping, checkpoint evaluation, the
ablation matrix and zero-shot transfer.

Run directory layout:
    <run>/config.json              config snapshot (sorted keys)
    <run>/results.json             RunResult
    <run>/seed_<s>/                best-validation checkpoint
    <run>/seed_<s>/train_log.jsonl one line per optimizer step
"""

import copy
import hashlib
import json
import logging
import math
import re
import time
from dataclasses import replace
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import torch

if TYPE_CHECKING:
    from ..client import Workbench

from ..config import get_config
from ..errors import CheckpointError, DatasetError, TrainingError
from ..infra import (
    CorrelationContext,
    derive_seed,
    is_checkpoint,
    load_checkpoint,
    load_split,
    log_event,
    seed_everything,
    substream_rng,
    torch_generator,
)
from ..models import DualForecaster, mse_mae
from ..types import (
    FULL,
    AblationSet,
    EvalResult,
    ModelConfig,
    MultimodalWindow,
    RunResult,
    SeedResult,
    TrainConfig,
    resolve_ablation_rows,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
Windows = Sequence[MultimodalWindow]

TRAIN_LOG = "train_log.jsonl"
RESULTS_FILE = "results.json"
SNAPSHOT_FILE = "config.json"


# =============================================================================
# Helpers
# =============================================================================

def config_snapshot(model_config: ModelConfig, train_config: TrainConfig, **extra: Any) -> Dict[str, Any]:
    snapshot = {"model": model_config.to_dict(), "train": train_config.to_dict()}
    snapshot.update(extra)
    return snapshot


def config_hash(snapshot: Mapping[str, Any]) -> str:
    """First 12 hex chars of the SHA-256 of the sorted-key JSON snapshot"""
    payload = json.dumps(snapshot, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def write_snapshot(directory: PathLike, snapshot: Mapping[str, Any], name: str = SNAPSHOT_FILE) -> Path:
    path = Path(directory) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(snapshot, f, indent=2, sort_keys=True, default=str)
        f.write("\n")
    return path


def load_windows(dataset: Union[PathLike, Windows], split: str = "all") -> List[MultimodalWindow]:
    if isinstance(dataset, (str, Path)):
        return load_split(dataset, split)[0]
    return list(dataset)


def split_train_val(windows: Windows, val_fraction: float, seed: int) -> Tuple[List[MultimodalWindow], List[MultimodalWindow]]:
    """
    Hold out a seeded random share of the training windows for early stopping.

    With val_fraction 0 (or too few windows) the training windows double as
    the validation set.
    """
    windows = list(windows)
    n_val = int(round(len(windows) * val_fraction))
    if n_val == 0 or n_val >= len(windows):
        return windows, windows
    order = substream_rng(seed, "split").permutation(len(windows))
    val_idx = set(order[:n_val].tolist())
    train = [w for i, w in enumerate(windows) if i not in val_idx]
    val = [w for i, w in enumerate(windows) if i in val_idx]
    return train, val


def batch_tensors(windows: Windows, device: torch.device, dtype: torch.dtype):
    history = torch.tensor([w.history for w in windows], dtype=dtype, device=device)
    future = torch.tensor([w.future for w in windows], dtype=dtype, device=device)
    return (
        history,
        future,
        [w.history_text for w in windows],
        [w.future_text for w in windows],
        [w.series_id for w in windows],
    )


def model_device(model: torch.nn.Module) -> Tuple[torch.device, torch.dtype]:
    param = next(model.parameters())
    return param.device, param.dtype


def check_compatible(model_config: ModelConfig, windows: Windows) -> None:
    """Every window must match the model's L and h"""
    for window in windows:
        fields = {}
        if window.lookback != model_config.lookback:
            fields["lookback"] = (model_config.lookback, window.lookback)
        if window.horizon != model_config.horizon:
            fields["horizon"] = (model_config.horizon, window.horizon)
        if fields:
            raise CheckpointError.incompatible(fields)


# =============================================================================
# Evaluation
# =============================================================================

@torch.no_grad()
def predict(
    model: DualForecaster,
    windows: Windows,
    ablation: Union[AblationSet, str, None] = FULL,
    batch_size: int = 256,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(raw locations (N, h), normalized locations (N, h), normalized targets (N, h))"""
    if not windows:
        raise DatasetError.empty("prediction windows")
    was_training = model.training
    model.eval()
    device, dtype = model_device(model)
    raw, normalized, targets = [], [], []
    for start in range(0, len(windows), batch_size):
        chunk = windows[start:start + batch_size]
        history, future, h_texts, f_texts, ids = batch_tensors(chunk, device, dtype)
        out = model(history, h_texts, f_texts, ids, ablation)
        raw.append(out.params.location.cpu().numpy())
        normalized.append(out.params_normalized.location.cpu().numpy())
        targets.append(model.normalizer.normalize_target(future, out.stats).cpu().numpy())
    model.train(was_training)
    return np.concatenate(raw), np.concatenate(normalized), np.concatenate(targets)


def evaluate_model(
    model: DualForecaster,
    windows: Windows,
    ablation: Union[AblationSet, str, None] = FULL,
    batch_size: int = 256,
    include_windows: bool = False,
) -> EvalResult:
    """
    Raw-scale MSE/MAE of the forecast location, plus the normalized-scale pair.

    Raises:
        DatasetError: on an empty window set
    """
    windows = list(windows)
    if not windows:
        raise DatasetError.empty("evaluation windows")
    raw, normalized, targets = predict(model, windows, ablation, batch_size)
    truth = np.asarray([w.future for w in windows], dtype=np.float64)
    mse, mae = mse_mae(raw, truth)
    mse_n, mae_n = mse_mae(normalized, targets)
    per_window = []
    if include_windows:
        for window, pred, true in zip(windows, raw, truth):
            w_mse, w_mae = mse_mae(pred, true)
            per_window.append({"series_id": window.series_id, "mse": w_mse, "mae": w_mae})
    return EvalResult(mse=mse, mae=mae, mse_normalized=mse_n, mae_normalized=mae_n, n_windows=len(windows), per_window=per_window)


# =============================================================================
# Training
# =============================================================================

def build_model(model_config: ModelConfig, seed: int, ablation: AblationSet = FULL) -> DualForecaster:
    """Fresh model with seeded init and ablation freezing applied"""
    seed_everything(derive_seed(seed, "init"))
    model = DualForecaster(model_config)
    model.apply_ablation_freezing(ablation)
    return model.to(get_config().runtime.device)


def train_seed(
    train_windows: Windows,
    model_config: ModelConfig,
    train_config: TrainConfig,
    seed: int,
    out_dir: Optional[PathLike] = None,
    eval_windows: Optional[Windows] = None,
    metadata: Optional[Mapping[str, Any]] = None,
) -> Tuple[SeedResult, DualForecaster]:
    """
    Train one seed; returns its result and the best-validation model.

    AdamW on total loss with gradient clipping. Each epoch ends with a
    raw-scale validation MSE; the best state is kept and training stops
    after `patience` epochs without improvement. Metrics are computed on
    eval_windows (validation windows when none are given).

    Raises:
        TrainingError: on a non-finite loss, naming the batch
    """
    ablation = train_config.ablation
    train_windows = list(train_windows)
    if not train_windows:
        raise DatasetError.empty("training windows")
    check_compatible(model_config, train_windows)
    fit, val = split_train_val(train_windows, train_config.val_fraction, seed)

    model = build_model(model_config, seed, ablation)
    device, dtype = model_device(model)
    trainable = [p for p in model.parameters() if p.requires_grad]
    optimizer = torch.optim.AdamW(
        trainable,
        lr=train_config.learning_rate,
        betas=train_config.betas,
        weight_decay=train_config.weight_decay,
    )
    order = torch_generator(seed, "order")

    log_file = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        log_file = open(out_dir / TRAIN_LOG, "w", encoding="utf-8", newline="\n")

    best_val = math.inf
    best_state = copy.deepcopy(model.state_dict())
    stale = 0
    step = 0
    epochs = 0
    stopped_early = False
    loss_trace: List[float] = []
    try:
        for epoch in range(train_config.max_epochs):
            model.train()
            epochs = epoch + 1
            permutation = torch.randperm(len(fit), generator=order).tolist()
            totals = []
            for batch_index, start in enumerate(range(0, len(fit), train_config.batch_size)):
                chunk = [fit[i] for i in permutation[start:start + train_config.batch_size]]
                history, future, h_texts, f_texts, ids = batch_tensors(chunk, device, dtype)
                output = model(history, h_texts, f_texts, ids, ablation)
                loss, report = model.compute_loss(output, future, ablation)
                if not torch.isfinite(loss):
                    batch_id = f"epoch{epoch}:batch{batch_index}"
                    log_event(logging.ERROR, "non-finite loss", "train", log=logger, batch_id=batch_id, seed=seed)
                    raise TrainingError.diverged(batch_id, float(loss.detach()))
                optimizer.zero_grad(set_to_none=True)
                loss.backward()
                if train_config.grad_clip > 0:
                    torch.nn.utils.clip_grad_norm_(trainable, train_config.grad_clip)
                optimizer.step()
                step += 1
                totals.append(report.total)
                if log_file is not None:
                    record = {
                        "epoch": epoch,
                        "step": step,
                        "forecast_nll": report.forecast_nll,
                        "contrastive": report.contrastive,
                        "total": report.total,
                        "lr": optimizer.param_groups[0]["lr"],
                    }
                    log_file.write(json.dumps(record) + "\n")
                if train_config.max_steps is not None and step >= train_config.max_steps:
                    break
            loss_trace.append(float(np.mean(totals)))

            val_mse = evaluate_model(model, val, ablation, train_config.eval_batch_size).mse
            if val_mse < best_val:
                best_val = val_mse
                best_state = copy.deepcopy(model.state_dict())
                stale = 0
            else:
                stale += 1
            log_event(
                logging.DEBUG, "epoch finished", "train", log=logger,
                seed=seed, epoch=epoch, loss=loss_trace[-1], val_mse=val_mse, best=best_val,
            )
            if train_config.max_steps is not None and step >= train_config.max_steps:
                break
            if stale >= train_config.patience:
                stopped_early = True
                break
    finally:
        if log_file is not None:
            log_file.close()

    model.load_state_dict(best_state)
    result = evaluate_model(model, eval_windows or val, ablation, train_config.eval_batch_size)
    checkpoint = None
    if out_dir is not None:
        info = dict(metadata or {})
        info.update({"seed": seed, "ablation": ablation.label, "epochs": epochs, "best_val_mse": best_val})
        checkpoint = str(model.save(out_dir, info))
    log_event(
        logging.INFO, "seed finished", "train", log=logger,
        seed=seed, epochs=epochs, steps=step, mse=result.mse, stopped_early=stopped_early,
    )
    seed_result = SeedResult(
        seed=seed,
        mse=result.mse,
        mae=result.mae,
        mse_normalized=result.mse_normalized,
        mae_normalized=result.mae_normalized,
        epochs=epochs,
        steps=step,
        best_val_mse=best_val,
        stopped_early=stopped_early,
        loss_trace=loss_trace,
        checkpoint=checkpoint,
    )
    return seed_result, model


def _dataset_name(dataset: Union[PathLike, Windows]) -> str:
    if isinstance(dataset, (str, Path)):
        return Path(dataset).stem
    return "<memory>"


def train(
    dataset: Union[PathLike, Windows],
    model_config: ModelConfig,
    train_config: TrainConfig,
    run_dir: Optional[PathLike] = None,
    eval_dataset: Union[PathLike, Windows, None] = None,
) -> RunResult:
    """
    One training run per seed.

    A dataset path is read through its manifest: the train split trains
    (with a validation share held out) and the test split scores. An
    explicit eval_dataset overrides the test split.
    """
    start = time.perf_counter()
    train_windows = load_windows(dataset, "train")
    if eval_dataset is not None:
        eval_windows = load_windows(eval_dataset, "test" if isinstance(eval_dataset, (str, Path)) else "all")
    elif isinstance(dataset, (str, Path)):
        eval_windows = load_split(dataset, "test")[0]
    else:
        eval_windows = []

    snapshot = config_snapshot(
        model_config, train_config,
        dataset=_dataset_name(dataset),
        n_train=len(train_windows),
        n_eval=len(eval_windows),
    )
    digest = config_hash(snapshot)
    if run_dir is not None:
        write_snapshot(run_dir, snapshot)

    seeds = []
    with CorrelationContext(prefix=f"train-{digest}"):
        for seed in train_config.seeds:
            out_dir = Path(run_dir) / f"seed_{seed}" if run_dir is not None else None
            result, _ = train_seed(
                train_windows, model_config, train_config, seed, out_dir,
                eval_windows or None,
                metadata={"dataset": _dataset_name(dataset), "config_hash": digest},
            )
            seeds.append(result)

    run = RunResult(
        seeds=seeds,
        config_hash=digest,
        tag=_dataset_name(dataset),
        ablation=train_config.ablation.label,
        wall_clock_seconds=time.perf_counter() - start,
        config_snapshot=snapshot,
    )
    if run_dir is not None:
        run.write_json(Path(run_dir) / RESULTS_FILE)
    return run


def checkpoint_dirs(checkpoint: PathLike) -> List[Path]:
    """A checkpoint directory itself, or the seed_* checkpoints of a run directory"""
    checkpoint = Path(checkpoint)
    if is_checkpoint(checkpoint):
        return [checkpoint]
    found = sorted(
        (p for p in checkpoint.glob("seed_*") if is_checkpoint(p)),
        key=lambda p: int(re.sub(r"\D", "", p.name) or 0),
    )
    if not found:
        raise CheckpointError.missing(str(checkpoint))
    return found


def evaluate(
    checkpoint: PathLike,
    dataset: Union[PathLike, Windows],
    ablation: Union[AblationSet, str, None] = None,
    split: str = "test",
    per_window_path: Optional[PathLike] = None,
    tag: Optional[str] = None,
    batch_size: int = 256,
) -> RunResult:
    """
    Score every checkpoint under `checkpoint` on a dataset split.

    The ablation defaults to the one each checkpoint was trained with.

    Raises:
        CheckpointError: missing checkpoint or L/h mismatch with the data
        DatasetError: empty split
    """
    start = time.perf_counter()
    windows = load_windows(dataset, split)
    if not windows:
        raise DatasetError.empty(f"{split} split of {_dataset_name(dataset)}")
    seeds = []
    rows = []
    label = None
    snapshot: Dict[str, Any] = {}
    for directory in checkpoint_dirs(checkpoint):
        model, metadata = DualForecaster.from_checkpoint(directory)
        check_compatible(model.config, windows)
        model.to(get_config().runtime.device)
        flags = AblationSet.parse(ablation if ablation is not None else metadata.get("ablation"))
        label = flags.label
        result = evaluate_model(model, windows, flags, batch_size, include_windows=per_window_path is not None)
        seed = int(metadata.get("seed", 0))
        for row in result.per_window:
            rows.append(dict(row, seed=seed))
        seeds.append(SeedResult(
            seed=seed,
            mse=result.mse,
            mae=result.mae,
            mse_normalized=result.mse_normalized,
            mae_normalized=result.mae_normalized,
            epochs=int(metadata.get("epochs", 0)),
            best_val_mse=metadata.get("best_val_mse"),
            checkpoint=str(directory),
        ))
        snapshot = {"model": model.config.to_dict(), "checkpoint": str(checkpoint), "dataset": _dataset_name(dataset), "split": split}

    if per_window_path is not None:
        path = Path(per_window_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for row in rows:
                f.write(json.dumps(row, sort_keys=True) + "\n")

    return RunResult(
        seeds=seeds,
        config_hash=config_hash(snapshot),
        tag=tag or _dataset_name(dataset),
        ablation=label or FULL.label,
        wall_clock_seconds=time.perf_counter() - start,
        config_snapshot=snapshot,
    )


def zero_shot(
    checkpoint: PathLike,
    dataset: Union[PathLike, Windows],
    source_name: Optional[str] = None,
    ablation: Union[AblationSet, str, None] = None,
    split: str = "test",
) -> RunResult:
    """
    Pure evaluation of a checkpoint on data it never trained on, tagged "A→B".

    Uses the same path as evaluate(), so A→A equals in-domain evaluation.
    """
    if source_name is None:
        _, _, metadata = load_checkpoint(checkpoint_dirs(checkpoint)[0])
        source_name = metadata.get("dataset", Path(checkpoint).name)
    tag = f"{source_name}→{_dataset_name(dataset)}"
    run = evaluate(checkpoint, dataset, ablation, split, tag=tag)
    log_event(logging.INFO, "zero-shot evaluated", "zero_shot", log=logger, tag=tag, mse=run.mean_mse)
    return run


def _slug(label: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", label.lower()).strip("-") or "full"


def run_ablation(
    dataset: Union[PathLike, Windows],
    model_config: ModelConfig,
    train_config: TrainConfig,
    rows: Union[str, Sequence[str]] = "all",
    run_dir: Optional[PathLike] = None,
) -> Dict[str, RunResult]:
    """
    One RunResult per matrix row label.

    Rows mapping to the same flag set share a single training run. Unknown
    rows are refused before anything trains.
    """
    selected = resolve_ablation_rows(rows)
    cache: Dict[str, RunResult] = {}
    results: Dict[str, RunResult] = {}
    for label, flags in selected.items():
        if flags.label not in cache:
            config = replace(train_config, ablation=flags)
            sub_dir = Path(run_dir) / _slug(flags.label) if run_dir is not None else None
            log_event(logging.INFO, "ablation run", "run_ablation", log=logger, row=label, flags=flags.label)
            cache[flags.label] = train(dataset, model_config, config, sub_dir)
        results[label] = cache[flags.label]

    if run_dir is not None:
        summary = {label: run.to_dict() for label, run in results.items()}
        path = Path(run_dir) / "ablation.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(summary, f, indent=2, sort_keys=True, ensure_ascii=False)
            f.write("\n")
    return results


class TrainerModule:
    """
    Training and evaluation bound to a Workbench

    Usage:
        bench = Workbench()
        preset = get_preset("desk")
        run = bench.trainer.train("synth.jsonl", preset.model, preset.train)
    """

    def __init__(self, bench: "Workbench"):
        self._bench = bench

    def train(
        self,
        dataset: Union[PathLike, Windows],
        model_config: ModelConfig,
        train_config: TrainConfig,
        run_dir: Optional[PathLike] = None,
    ) -> RunResult:
        if run_dir is None:
            run_dir = self._bench.run_dir(config_snapshot(model_config, train_config))
        return train(dataset, model_config, train_config, run_dir)

    def evaluate(self, checkpoint: PathLike, dataset: Union[PathLike, Windows], ablation=None, split: str = "test") -> RunResult:
        return evaluate(checkpoint, dataset, ablation, split)

    def zero_shot(self, checkpoint: PathLike, dataset: Union[PathLike, Windows], source_name: Optional[str] = None) -> RunResult:
        return zero_shot(checkpoint, dataset, source_name)

    def ablate(
        self,
        dataset: Union[PathLike, Windows],
        model_config: ModelConfig,
        train_config: TrainConfig,
        rows: Union[str, Sequence[str]] = "all",
        run_dir: Optional[PathLike] = None,
    ) -> Dict[str, RunResult]:
        if run_dir is None:
            run_dir = self._bench.run_dir(config_snapshot(model_config, train_config, rows=rows))
        return run_ablation(dataset, model_config, train_config, rows, run_dir)
