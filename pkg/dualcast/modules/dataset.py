"""
Dataset Module

Sliding-window extraction, instance normalization and dataset validation.
Persistence lives in dualcast.infra.jsonl_store.
"""

import logging
from pathlib import Path
from typing import TYPE_CHECKING, Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

if TYPE_CHECKING:
    from ..client import Workbench

from ..errors import DatasetError
from ..infra import log_event, load_split, read_jsonl, read_manifest, write_jsonl, write_manifest
from ..types import (
    DatasetManifest,
    MultimodalWindow,
    NormalizationStats,
    StudentTParams,
    WindowingSpec,
    STD_FLOOR,
)

logger = logging.getLogger(__name__)

# (history values, future values, start index) -> (history caption, future caption)
CaptionSource = Callable[[np.ndarray, np.ndarray, int], Tuple[str, str]]


def window_starts(length: int, spec: WindowingSpec) -> range:
    """Start indices 0, stride, 2*stride, ... of every full window"""
    return range(0, spec.count(length) * spec.stride, spec.stride)


def extract_windows(
    series: Sequence[float],
    spec: WindowingSpec,
    texts: Optional[CaptionSource] = None,
    series_id: str = "series",
) -> List[MultimodalWindow]:
    """
    Cut a series into (history, future) windows.

    Window k starts at k * stride; its history covers [t - L, t) and its
    future [t, t + h) where t = k * stride + L. A series shorter than L + h
    yields no windows and a warning.

    Args:
        series: Finite values
        spec: Windowing parameters
        texts: Optional caption source called per window
        series_id: Prefix of the generated ids ("<series_id>:<start>")
    """
    values = np.asarray(series, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise DatasetError.non_finite(series_id, "series")
    starts = window_starts(len(values), spec)
    if not starts:
        log_event(
            logging.WARNING,
            "series shorter than one window, skipped",
            "extract_windows",
            log=logger,
            series_id=series_id,
            length=len(values),
            required=spec.span,
        )
        return []
    windows = []
    for start in starts:
        cut = start + spec.lookback
        history = values[start:cut]
        future = values[cut:cut + spec.horizon]
        history_text, future_text = texts(history, future, start) if texts is not None else ("", "")
        windows.append(
            MultimodalWindow(
                series_id=f"{series_id}:{start}",
                history=history.tolist(),
                future=future.tolist(),
                history_text=history_text,
                future_text=future_text,
            )
        )
    return windows


def normalize_history(history: Sequence[float]) -> Tuple[np.ndarray, NormalizationStats]:
    """
    Zero-mean / unit population std normalization of one history window.

    A constant window gets the floored std and normalizes to all zeros.
    """
    values = np.asarray(history, dtype=np.float64)
    if values.size < 2:
        raise DatasetError(f"normalize_history needs at least 2 values, got {values.size}")
    if not np.all(np.isfinite(values)):
        raise DatasetError.non_finite("<history>", "history")
    mean = float(values.mean())
    std = max(float(values.std()), STD_FLOOR)
    return (values - mean) / std, NormalizationStats(mean=mean, std=std)


def denormalize(values: Sequence[float], stats: NormalizationStats) -> np.ndarray:
    return np.asarray(values, dtype=np.float64) * stats.std + stats.mean


def denormalize_forecast(params: StudentTParams, stats: NormalizationStats) -> StudentTParams:
    """location -> location * std + mean, scale -> scale * std, dof unchanged"""
    return params.denormalize(stats)


def validate_dataset(
    path: Union[str, Path],
    spec: Optional[WindowingSpec] = None,
    captioned: Optional[bool] = None,
) -> Tuple[List[MultimodalWindow], Optional[DatasetManifest]]:
    """
    Read a dataset and check every record against its manifest (or the
    given spec / captioned flag, which take precedence).

    Raises:
        DatasetError: for the first offending record, naming its line
    """
    manifest = read_manifest(path)
    if spec is None and manifest is not None:
        spec = manifest.windowing
    if captioned is None:
        captioned = manifest.captioned if manifest is not None else False
    windows = read_jsonl(path, spec)
    if spec is None and windows:
        first = windows[0]
        spec = WindowingSpec(first.lookback, first.horizon)
        for line_number, window in enumerate(windows, start=1):
            window.validate(spec, line_number=line_number)
    if captioned:
        for line_number, window in enumerate(windows, start=1):
            window.validate(captioned=True, line_number=line_number)
    return windows, manifest


def stack_windows(windows: Sequence[MultimodalWindow]) -> Tuple[np.ndarray, np.ndarray]:
    """(N, L) history and (N, h) future arrays"""
    if not windows:
        raise DatasetError.empty("window stack")
    history = np.asarray([w.history for w in windows], dtype=np.float64)
    future = np.asarray([w.future for w in windows], dtype=np.float64)
    return history, future


class DatasetModule:
    """
    Dataset access bound to a Workbench

    Usage:
        bench = Workbench()
        train, manifest = bench.data.load("synth.jsonl", split="train")
    """

    def __init__(self, bench: "Workbench"):
        self._bench = bench

    def load(self, path: Union[str, Path], split: str = "all") -> Tuple[List[MultimodalWindow], Optional[DatasetManifest]]:
        windows, manifest = load_split(path, split)
        logger.info(f"Loaded {len(windows)} {split} windows from {path}")
        return windows, manifest

    def save(
        self,
        path: Union[str, Path],
        windows: Sequence[MultimodalWindow],
        manifest: Optional[DatasetManifest] = None,
    ) -> Path:
        write_jsonl(path, windows)
        if manifest is not None:
            write_manifest(path, manifest)
        return Path(path)

    def validate(self, path: Union[str, Path], spec: Optional[WindowingSpec] = None, captioned: Optional[bool] = None):
        return validate_dataset(path, spec, captioned)

    def windows(self, series: Sequence[float], spec: WindowingSpec, series_id: str = "series") -> List[MultimodalWindow]:
        return extract_windows(series, spec, series_id=series_id)
