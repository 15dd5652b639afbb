"""
Functional modules for Workbench

Provides high-level operations:
- DatasetModule: Load, save, window and validate multimodal JSONL
- SynthModule: Synthetic series + caption generation
- CaptionModule: Segmentation captioner for arbitrary series
- TrainerModule: Training, evaluation, ablation matrix, zero-shot
- DiagnosticsModule: Alignment exports, parameter counts, gradient checks
"""

from .dataset import (
    DatasetModule,
    window_starts,
    extract_windows,
    normalize_history,
    denormalize,
    denormalize_forecast,
    validate_dataset,
    stack_windows,
)
from .templates import default_bank, ordinal, parse_caption, ParsedCaption
from .synthgen import (
    SynthModule,
    sample_spec,
    render_series,
    render_captions,
    generate_sample,
    generate_samples,
    build_dataset,
    read_specs,
    resolve_distribution,
)
from .captioner import (
    CaptionModule,
    CaptionReport,
    Thresholds,
    iepf_breakpoints,
    segment_stats,
    segment_series,
    caption_segments,
    caption_series,
    caption_dataset,
    read_channels,
    t_two_sided_p,
)
from .trainer import (
    TrainerModule,
    train,
    train_seed,
    evaluate,
    evaluate_model,
    zero_shot,
    run_ablation,
    split_train_val,
    config_hash,
    config_snapshot,
    checkpoint_dirs,
)
from .diagnostics import DiagnosticsModule, export_alignment, parameter_report, gradient_check

__all__ = [
    # Core modules
    "DatasetModule",
    "SynthModule",
    "CaptionModule",
    "TrainerModule",
    "DiagnosticsModule",
    # Dataset
    "window_starts",
    "extract_windows",
    "normalize_history",
    "denormalize",
    "denormalize_forecast",
    "validate_dataset",
    "stack_windows",
    # Templates
    "default_bank",
    "ordinal",
    "parse_caption",
    "ParsedCaption",
    # Synthetic
    "sample_spec",
    "render_series",
    "render_captions",
    "generate_sample",
    "generate_samples",
    "build_dataset",
    "read_specs",
    "resolve_distribution",
    # Captioner
    "CaptionReport",
    "Thresholds",
    "iepf_breakpoints",
    "segment_stats",
    "segment_series",
    "caption_segments",
    "caption_series",
    "caption_dataset",
    "read_channels",
    "t_two_sided_p",
    # Training
    "train",
    "train_seed",
    "evaluate",
    "evaluate_model",
    "zero_shot",
    "run_ablation",
    "split_train_val",
    "config_hash",
    "config_snapshot",
    "checkpoint_dirs",
    # Diagnostics
    "export_alignment",
    "parameter_report",
    "gradient_check",
]
