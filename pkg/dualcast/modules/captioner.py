"""
Captioner Module

Annotates arbitrary series with shape captions:

    min-max normalize -> iterative end-point fit (breakpoints)
    -> OLS per segment (slope t-test, residual MSE) -> templated clauses

All thresholds act on the normalized [0, 1] scale, so captions do not
depend on the units of the input.
"""

import json
import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

if TYPE_CHECKING:
    from ..client import Workbench

from ..config import get_config
from ..errors import CaptionError, ConfigurationError, DatasetError, DualcastError
from ..infra import CorrelationContext, is_deterministic, log_event, write_jsonl, write_manifest
from ..types import (
    CaptionTemplateBank,
    DatasetManifest,
    IepfParams,
    MultimodalWindow,
    NoiseClass,
    Segment,
    TrendClass,
    WindowingSpec,
)
from .dataset import window_starts
from .templates import default_bank, ordinal

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass(frozen=True)
class Thresholds:
    """Segment classification cutoffs"""
    noise_low: float = 0.002
    noise_high: float = 0.02
    significance: float = 0.05

    @classmethod
    def from_config(cls) -> "Thresholds":
        cfg = get_config().captioner
        return cls(cfg.noise_low, cfg.noise_high, cfg.significance)

    def __post_init__(self):
        if not 0 < self.noise_low <= self.noise_high:
            raise ConfigurationError.invalid("noise thresholds", f"need 0 < {self.noise_low} <= {self.noise_high}")
        if not 0 < self.significance < 1:
            raise ConfigurationError.invalid("significance", f"{self.significance} not in (0, 1)")


def default_params() -> IepfParams:
    cfg = get_config().captioner
    return IepfParams(epsilon=cfg.epsilon, min_segment_points=cfg.min_segment_points)


# =============================================================================
# Student t tail
# =============================================================================

_BETA_MAX_ITER = 300
_BETA_EPS = 3e-16
_BETA_TINY = 1e-300


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETA_TINY:
        d = _BETA_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = _BETA_TINY if abs(d) < _BETA_TINY else d
        c = 1.0 + aa / c
        c = _BETA_TINY if abs(c) < _BETA_TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _BETA_TINY if abs(d) < _BETA_TINY else d
        c = 1.0 + aa / c
        c = _BETA_TINY if abs(c) < _BETA_TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_EPS:
            break
    return h


def regularized_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta I_x(a, b)"""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: int) -> float:
    """P(|T| >= |t|) for Student t with df degrees of freedom"""
    if df <= 0:
        raise ConfigurationError.invalid("df", f"must be positive, got {df}")
    if math.isinf(t):
        return 0.0
    return min(1.0, max(0.0, regularized_beta(df / (df + t * t), df / 2.0, 0.5)))


# =============================================================================
# Segmentation
# =============================================================================

def minmax_normalize(series: Sequence[float]) -> Tuple[np.ndarray, Tuple[float, float]]:
    """Map to [0, 1]; a constant series maps to zeros. Returns (values, (min, range))"""
    values = np.asarray(series, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise DatasetError.non_finite("<series>", "series")
    low = float(values.min())
    span = float(values.max()) - low
    if span <= 0.0:
        return np.zeros_like(values), (low, 0.0)
    return (values - low) / span, (low, span)


def _chord_distances(x: np.ndarray, y: np.ndarray, i: int, j: int) -> np.ndarray:
    """Perpendicular distances of points i+1..j-1 to the chord (i, j)"""
    dx = x[j] - x[i]
    dy = y[j] - y[i]
    inner_x = x[i + 1:j]
    inner_y = y[i + 1:j]
    return np.abs(dx * (inner_y - y[i]) - dy * (inner_x - x[i])) / math.hypot(dx, dy)


def iepf_breakpoints(series: Sequence[float], params: Optional[IepfParams] = None) -> List[int]:
    """
    Sorted keep-set of the iterative end-point fit.

    The span (i, j) is split at its farthest interior point while that
    distance exceeds epsilon; the first index wins ties. With
    min_segment_points > 2, candidates leaving either side shorter are
    skipped and the next farthest point is considered.

    Raises:
        CaptionError: if the series has fewer than 2 points
    """
    params = params or IepfParams()
    n = len(series)
    if n < 2:
        raise CaptionError.too_short(n)
    y, _ = minmax_normalize(series)
    x = np.arange(n, dtype=np.float64) / (n - 1)
    minimum = params.min_segment_points

    keep = {0, n - 1}
    stack = [(0, n - 1)]
    while stack:
        i, j = stack.pop()
        if j - i < 2:
            continue
        distances = _chord_distances(x, y, i, j)
        split = None
        for offset in np.argsort(-distances, kind="stable"):
            if distances[offset] <= params.epsilon:
                break
            candidate = i + 1 + int(offset)
            if candidate - i + 1 >= minimum and j - candidate + 1 >= minimum:
                split = candidate
                break
        if split is None:
            continue
        keep.add(split)
        stack.append((split, j))
        stack.append((i, split))
    return sorted(keep)


def _classify(slope: float, p_value: float, residual_mse: float, thresholds: Thresholds) -> Tuple[TrendClass, NoiseClass]:
    if p_value < thresholds.significance:
        trend = TrendClass.INCREASING if slope > 0 else TrendClass.DECREASING
    else:
        trend = TrendClass.FLUCTUATING
    if residual_mse < thresholds.noise_low:
        noise = NoiseClass.LOW
    elif residual_mse < thresholds.noise_high:
        noise = NoiseClass.MEDIUM
    else:
        noise = NoiseClass.HIGH
    return trend, noise


def segment_stats(
    series: Sequence[float],
    start: int,
    end: int,
    thresholds: Optional[Thresholds] = None,
) -> Segment:
    """
    OLS fit of series[start:end] against the step index.

    p_value is the two-sided t-test of the slope with n - 2 degrees of
    freedom. A perfect fit (no residual) gets p = 0 for a nonzero slope and
    p = 1 for a flat one; two-point segments are always perfect fits.
    """
    thresholds = thresholds or Thresholds()
    n = end - start
    if n < 2:
        raise CaptionError.too_short(n)
    y = np.asarray(series[start:end], dtype=np.float64)
    x = np.arange(n, dtype=np.float64)
    x_mean = x.mean()
    y_mean = y.mean()
    sxx = float(np.sum((x - x_mean) ** 2))
    slope = float(np.sum((x - x_mean) * (y - y_mean)) / sxx)
    intercept = float(y_mean - slope * x_mean)
    residuals = y - (intercept + slope * x)
    sse = float(np.sum(residuals ** 2))
    residual_mse = sse / n

    # rounding noise of an exact line is not evidence of scatter
    perfect = n == 2 or sse <= 1e-24 * max(1.0, float(np.sum(y ** 2)))
    if perfect:
        p_value = 0.0 if slope != 0.0 else 1.0
    else:
        df = n - 2
        stderr = math.sqrt(sse / df / sxx)
        p_value = t_two_sided_p(slope / stderr, df)

    trend, noise = _classify(slope, p_value, residual_mse, thresholds)
    return Segment(
        start_index=start,
        end_index=end,
        slope=slope,
        intercept=intercept,
        p_value=p_value,
        residual_mse=residual_mse,
        trend_class=trend,
        noise_class=noise,
    )


def segment_series(
    series: Sequence[float],
    params: Optional[IepfParams] = None,
    thresholds: Optional[Thresholds] = None,
) -> List[Segment]:
    """
    One segment per interval between consecutive breakpoints of the
    normalized series. Neighbours share their breakpoint.
    """
    params = params or default_params()
    thresholds = thresholds or Thresholds.from_config()
    values, _ = minmax_normalize(series)
    breaks = iepf_breakpoints(values, params)
    return [segment_stats(values, a, b + 1, thresholds) for a, b in zip(breaks[:-1], breaks[1:])]


def caption_segments(segments: Sequence[Segment], bank: Optional[CaptionTemplateBank] = None) -> str:
    """One clause per segment in temporal order, joined into a sentence"""
    bank = bank or default_bank()
    total = len(segments)
    clauses = [
        bank.realize(
            "segment",
            segment.trend_class.value,
            variant=index,
            ordinal=ordinal(index, total),
            noise=segment.noise_class.value,
        )
        for index, segment in enumerate(segments)
    ]
    text = "; ".join(clauses)
    return text[:1].upper() + text[1:] + "."


def caption_series(
    series: Sequence[float],
    params: Optional[IepfParams] = None,
    bank: Optional[CaptionTemplateBank] = None,
    thresholds: Optional[Thresholds] = None,
) -> str:
    """Shape caption of one series; deterministic given its inputs"""
    return caption_segments(segment_series(series, params, thresholds), bank)


# =============================================================================
# Dataset annotation
# =============================================================================

@dataclass
class CaptionReport:
    """Summary written next to a captioned dataset"""
    source: str
    n_channels: int = 0
    n_windows: int = 0
    errors: List[Dict[str, Any]] = field(default_factory=list)
    skipped_columns: List[str] = field(default_factory=list)
    segment_counts: Counter = field(default_factory=Counter)
    trend_classes: Counter = field(default_factory=Counter)
    noise_classes: Counter = field(default_factory=Counter)
    params: Dict[str, Any] = field(default_factory=dict)

    def add_segments(self, segments: Sequence[Segment]) -> None:
        self.segment_counts[len(segments)] += 1
        for segment in segments:
            self.trend_classes[segment.trend_class.value] += 1
            self.noise_classes[segment.noise_class.value] += 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "source": self.source,
            "n_channels": self.n_channels,
            "n_windows": self.n_windows,
            "n_errors": len(self.errors),
            "errors": self.errors,
            "skipped_columns": self.skipped_columns,
            "segment_counts": {str(k): v for k, v in sorted(self.segment_counts.items())},
            "trend_classes": dict(sorted(self.trend_classes.items())),
            "noise_classes": dict(sorted(self.noise_classes.items())),
            "params": self.params,
        }


def report_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}.report.json")


def read_channels(path: PathLike) -> Tuple[Dict[str, np.ndarray], List[str]]:
    """
    Numeric channels of a CSV, header optional.

    Returns ({column name: values}, skipped non-numeric columns). Headerless
    files name their columns "value" (single column) or "c0", "c1", ...
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError.missing_file(str(path))
    try:
        frame = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        return {}, []
    if frame.empty:
        return {}, []

    first = pd.to_numeric(frame.iloc[0], errors="coerce")
    if first.isna().any():
        names = [str(v).strip() for v in frame.iloc[0]]
        frame = frame.iloc[1:]
    elif frame.shape[1] == 1:
        names = ["value"]
    else:
        names = [f"c{i}" for i in range(frame.shape[1])]

    channels: Dict[str, np.ndarray] = {}
    skipped: List[str] = []
    for position, name in enumerate(names):
        column = pd.to_numeric(frame.iloc[:, position], errors="coerce")
        if len(column) and column.isna().all():
            skipped.append(name)
            continue
        channels[name] = column.to_numpy(dtype=np.float64)
    return channels, skipped


def _caption_one(args) -> Tuple[Optional[MultimodalWindow], Optional[Dict[str, Any]], List[List[Segment]]]:
    series_id, history, future, params, bank, thresholds = args
    try:
        if not (np.all(np.isfinite(history)) and np.all(np.isfinite(future))):
            raise DatasetError.non_finite(series_id, "window")
        history_segments = segment_series(history, params, thresholds)
        future_segments = segment_series(future, params, thresholds)
    except DualcastError as e:
        return None, {"series_id": series_id, "code": e.code.value, "reason": e.message}, []
    window = MultimodalWindow(
        series_id=series_id,
        history=history.tolist(),
        future=future.tolist(),
        history_text=caption_segments(history_segments, bank),
        future_text=caption_segments(future_segments, bank),
    )
    return window, None, [history_segments, future_segments]


def _caption_chunk(jobs):
    return [_caption_one(job) for job in jobs]


def _split_jobs(
    stem: str,
    name: str,
    values: np.ndarray,
    spec: WindowingSpec,
    holdout_fraction: float,
) -> Tuple[List[Tuple[str, np.ndarray, np.ndarray]], List[Tuple[str, np.ndarray, np.ndarray]]]:
    """(train windows, test windows) of one channel, split 8:2 in time before windowing"""
    cut = len(values) - int(round(len(values) * holdout_fraction))
    parts = []
    for offset, part in ((0, values[:cut]), (cut, values[cut:])):
        jobs = []
        for start in window_starts(len(part), spec):
            middle = start + spec.lookback
            jobs.append((
                f"{stem}:{name}:{offset + start}",
                part[start:middle],
                part[middle:middle + spec.horizon],
            ))
        parts.append(jobs)
    return parts[0], parts[1]


def caption_dataset(
    input_path: PathLike,
    spec: WindowingSpec,
    params: Optional[IepfParams] = None,
    out: PathLike = "captioned.jsonl",
    holdout_fraction: Optional[float] = None,
    dataset_name: Optional[str] = None,
    bank: Optional[CaptionTemplateBank] = None,
    thresholds: Optional[Thresholds] = None,
    workers: Optional[int] = None,
) -> Tuple[DatasetManifest, CaptionReport]:
    """
    Caption every window of every numeric CSV column.

    History and future captions are computed independently from their own
    points. Each channel is split chronologically (train first, trailing
    holdout_fraction as test) before windowing, and records are written
    train-first across channels. Per-window failures land in the report.

    Writes <out>, <stem>.manifest.json and <stem>.report.json.
    """
    params = params or default_params()
    bank = bank or default_bank()
    thresholds = thresholds or Thresholds.from_config()
    if holdout_fraction is None:
        holdout_fraction = get_config().captioner.holdout_fraction
    if not 0.0 <= holdout_fraction < 1.0:
        raise ConfigurationError.invalid("holdout_fraction", f"{holdout_fraction} not in [0, 1)")
    if workers is None:
        workers = get_config().runtime.effective_workers
    if is_deterministic():
        workers = 1

    input_path = Path(input_path)
    out = Path(out)
    stem = input_path.stem
    report = CaptionReport(
        source=str(input_path),
        params={
            "epsilon": params.epsilon,
            "min_segment_points": params.min_segment_points,
            "noise_low": thresholds.noise_low,
            "noise_high": thresholds.noise_high,
            "significance": thresholds.significance,
        },
    )

    with CorrelationContext(prefix="caption"):
        channels, report.skipped_columns = read_channels(input_path)
        report.n_channels = len(channels)
        train_jobs, test_jobs = [], []
        for name, values in channels.items():
            train, test = _split_jobs(stem, name, values, spec, holdout_fraction)
            train_jobs.extend(train)
            test_jobs.extend(test)
            if not train and not test:
                log_event(
                    logging.WARNING, "channel shorter than one window", "caption_dataset",
                    log=logger, column=name, length=len(values), required=spec.span,
                )

        jobs = [(sid, h, f, params, bank, thresholds) for sid, h, f in train_jobs + test_jobs]
        if workers <= 1 or len(jobs) < 2 * workers:
            results = _caption_chunk(jobs)
        else:
            size = math.ceil(len(jobs) / workers)
            chunks = [jobs[i:i + size] for i in range(0, len(jobs), size)]
            results = []
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for part in pool.map(_caption_chunk, chunks):
                    results.extend(part)

        windows: List[MultimodalWindow] = []
        n_train = 0
        for position, (window, error, segment_lists) in enumerate(results):
            if error is not None:
                report.errors.append(error)
                continue
            windows.append(window)
            if position < len(train_jobs):
                n_train += 1
            for segments in segment_lists:
                report.add_segments(segments)
        report.n_windows = len(windows)

        out.parent.mkdir(parents=True, exist_ok=True)
        write_jsonl(out, windows)
        manifest = DatasetManifest(
            lookback=spec.lookback,
            horizon=spec.horizon,
            stride=spec.stride,
            dataset_name=dataset_name or stem,
            captioned=True,
            n_train=n_train,
            n_holdout=len(windows) - n_train,
            extras={"captioner": report.params, "holdout_fraction": holdout_fraction, "source": str(input_path)},
        )
        write_manifest(out, manifest)
        with open(report_path(out), "w", encoding="utf-8", newline="\n") as f:
            json.dump(report.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")

        log_event(
            logging.INFO,
            "captioned dataset written",
            "caption_dataset",
            log=logger,
            path=str(out),
            windows=report.n_windows,
            errors=len(report.errors),
            channels=report.n_channels,
        )
    return manifest, report


class CaptionModule:
    """
    Series captioning bound to a Workbench

    Usage:
        bench = Workbench()
        text = bench.captioner.caption(values)
        manifest, report = bench.captioner.annotate("ETTh1.csv", WindowingSpec(336, 96, 4))
    """

    def __init__(self, bench: "Workbench"):
        self._bench = bench
        self.bank = default_bank()

    def breakpoints(self, series: Sequence[float], params: Optional[IepfParams] = None) -> List[int]:
        return iepf_breakpoints(series, params or default_params())

    def segments(self, series: Sequence[float], params: Optional[IepfParams] = None) -> List[Segment]:
        return segment_series(series, params)

    def caption(self, series: Sequence[float], params: Optional[IepfParams] = None) -> str:
        return caption_series(series, params, self.bank)

    def annotate(
        self,
        input_path: PathLike,
        spec: WindowingSpec,
        out: PathLike = "captioned.jsonl",
        params: Optional[IepfParams] = None,
        holdout_fraction: Optional[float] = None,
    ) -> Tuple[DatasetManifest, CaptionReport]:
        return caption_dataset(input_path, spec, params, out, holdout_fraction, bank=self.bank)
