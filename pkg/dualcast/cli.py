"""
Command-line entry point

    dualcast generate          synthetic multimodal dataset
    dualcast caption           caption every window of a CSV
    dualcast train             multi-seed training run
    dualcast evaluate          score checkpoints on a dataset
    dualcast ablate            ablation matrix rows
    dualcast zero-shot         checkpoint from one dataset on another
    dualcast export-alignment  similarity matrix + attention rows
    dualcast validate-data     check a JSONL dataset

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from . import __version__
from .client import Workbench
from .config import get_config, setup_logging
from .errors import ConfigurationError, DualcastError
from .infra import manifest_path, read_manifest, set_deterministic
from .modules.captioner import caption_dataset, default_params, report_path
from .modules.dataset import validate_dataset
from .modules.diagnostics import export_alignment
from .modules.synthgen import build_dataset, resolve_distribution, specs_path
from .modules.trainer import config_snapshot, evaluate, load_windows, run_ablation, train, write_snapshot, zero_shot
from .types import (
    DISTRIBUTION_NAMES,
    ModelConfig,
    TrainConfig,
    WindowingSpec,
    apply_overrides,
    get_preset,
    list_presets,
    read_config_file,
    resolve_ablation_rows,
)

logger = logging.getLogger(__name__)


# =============================================================================
# Parser
# =============================================================================

def _seeds(value: str) -> Tuple[int, ...]:
    try:
        return tuple(int(part) for part in value.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}")


def _add_experiment_flags(psr: argparse.ArgumentParser) -> None:
    psr.add_argument("--preset", default="desk", help=f"experiment preset ({', '.join(list_presets())})")
    psr.add_argument("--config", default=None, help="JSON or TOML overrides (configuration-table column names or field names)")
    psr.add_argument("--seeds", type=_seeds, default=None, help="comma-separated seeds (overrides the preset)")
    psr.add_argument("--max-epochs", type=int, default=None, help="epoch cap (overrides the preset)")
    psr.add_argument("--max-steps", type=int, default=None, help="optimizer step cap per seed")
    psr.add_argument("--run-root", default=None, help="parent directory of run directories (default: DUALCAST_RUN_ROOT)")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    psr = argparse.ArgumentParser(prog="dualcast", description="Text-conditioned probabilistic forecasting.", formatter_class=fmt)
    psr.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    psr.add_argument("--log-level", default=None, help="override LOG_LEVEL")
    sub = psr.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("generate", help="write a synthetic multimodal dataset", formatter_class=fmt)
    p.add_argument("--n", type=int, default=3040, help="number of samples")
    p.add_argument("--lookback", type=int, default=200, help="history length L")
    p.add_argument("--horizon", type=int, default=30, help="forecast length h")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out", default="synth.jsonl", help="output JSONL path")
    p.add_argument("--distribution", default="default", choices=DISTRIBUTION_NAMES, help="spec distribution")
    p.add_argument("--config", default=None, help="JSON file overriding distribution fields")
    p.add_argument("--holdout-fraction", type=float, default=None, help="trailing test share (default: SYNTH_HOLDOUT_FRACTION)")
    p.add_argument("--switch-probability", type=float, default=None, help="probability that a sample switches")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: DUALCAST_NUM_WORKERS)")

    p = sub.add_parser("caption", help="caption every window of a CSV file", formatter_class=fmt)
    p.add_argument("--input", required=True, help="CSV file, one column per channel")
    p.add_argument("--lookback", type=int, required=True, help="history length L")
    p.add_argument("--horizon", type=int, required=True, help="forecast length h")
    p.add_argument("--stride", type=int, default=1, help="step between window starts")
    p.add_argument("--epsilon", type=float, default=None, help="segmentation tolerance (default: CAPTION_EPSILON)")
    p.add_argument("--min-segment-points", type=int, default=None, help="fewest points per segment (default: CAPTION_MIN_SEGMENT_POINTS)")
    p.add_argument("--holdout-fraction", type=float, default=None, help="trailing test share (default: CAPTION_HOLDOUT_FRACTION)")
    p.add_argument("--dataset-name", default=None, help="name recorded in the manifest (default: input stem)")
    p.add_argument("--out", default="captioned.jsonl", help="output JSONL path")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: DUALCAST_NUM_WORKERS)")

    p = sub.add_parser("train", help="train one model per seed", formatter_class=fmt)
    p.add_argument("--dataset", required=True, help="training JSONL (its manifest's test split is scored)")
    p.add_argument("--ablation", default="full", help="comma-separated ablation flags")
    _add_experiment_flags(p)

    p = sub.add_parser("evaluate", help="score checkpoints on a dataset", formatter_class=fmt)
    p.add_argument("--checkpoint", required=True, help="checkpoint directory or run directory")
    p.add_argument("--dataset", required=True, help="JSONL dataset")
    p.add_argument("--ablation", default=None, help="ablation flags (default: as trained)")
    p.add_argument("--split", default="test", choices=("train", "test", "all"), help="dataset split")
    p.add_argument("--per-window", action="store_true", help="also dump per-window metrics")
    p.add_argument("--run-root", default=None, help="parent directory of run directories (default: DUALCAST_RUN_ROOT)")

    p = sub.add_parser("ablate", help="train the ablation matrix rows", formatter_class=fmt)
    p.add_argument("--dataset", required=True, help="training JSONL")
    p.add_argument("--rows", default="all", help="'all', or ';'-separated row labels or 1-based row numbers")
    _add_experiment_flags(p)

    p = sub.add_parser("zero-shot", help="evaluate a checkpoint on another dataset", formatter_class=fmt)
    p.add_argument("--checkpoint", required=True, help="checkpoint directory or run directory")
    p.add_argument("--dataset", required=True, help="target JSONL dataset")
    p.add_argument("--source-name", default=None, help="source dataset name in the tag (default: from checkpoint)")
    p.add_argument("--ablation", default=None, help="ablation flags (default: as trained)")
    p.add_argument("--split", default="test", choices=("train", "test", "all"), help="dataset split")
    p.add_argument("--run-root", default=None, help="parent directory of run directories (default: DUALCAST_RUN_ROOT)")

    p = sub.add_parser("export-alignment", help="export similarity matrix and attention rows", formatter_class=fmt)
    p.add_argument("--checkpoint", required=True, help="checkpoint directory or run directory")
    p.add_argument("--dataset", required=True, help="JSONL dataset")
    p.add_argument("--split", default="all", choices=("train", "test", "all"), help="dataset split")
    p.add_argument("--limit", type=int, default=64, help="number of windows (0 = all)")
    p.add_argument("--ablation", default=None, help="ablation flags (default: as trained)")
    p.add_argument("--out", default=None, help="output directory (default: a new run directory)")
    p.add_argument("--run-root", default=None, help="parent directory of run directories (default: DUALCAST_RUN_ROOT)")

    p = sub.add_parser("validate-data", help="check every record of a JSONL dataset", formatter_class=fmt)
    p.add_argument("path", help="JSONL dataset")
    p.add_argument("--lookback", type=int, default=None, help="expected history length (default: from manifest)")
    p.add_argument("--horizon", type=int, default=None, help="expected forecast length (default: from manifest)")
    p.add_argument("--captioned", action="store_true", help="require non-empty captions")

    return psr


# =============================================================================
# Commands
# =============================================================================

def resolve_experiment(args: argparse.Namespace) -> Tuple[ModelConfig, TrainConfig]:
    """Preset, then config-file overrides, then explicit flags"""
    preset = get_preset(args.preset)
    model, train_config = preset.model, preset.train
    if args.config:
        model, train_config = apply_overrides(model, train_config, read_config_file(args.config))
    overrides = {}
    if args.seeds:
        overrides["seeds"] = args.seeds
    if args.max_epochs is not None:
        overrides["max_epochs"] = args.max_epochs
    if args.max_steps is not None:
        overrides["max_steps"] = args.max_steps
    if getattr(args, "ablation", None):
        overrides["ablation"] = args.ablation
    if overrides:
        model, train_config = apply_overrides(model, train_config, overrides)
    return model, train_config


def dataset_snapshot_path(out: Path) -> Path:
    """synth.jsonl -> synth.config.json"""
    return out.with_name(f"{out.stem}.config.json")


def cmd_generate(args: argparse.Namespace, bench: Workbench) -> List[Path]:
    distribution = resolve_distribution(
        args.distribution, args.lookback, args.horizon, args.config, args.switch_probability
    )
    out = Path(args.out)
    manifest = build_dataset(args.n, distribution, args.seed, out, args.holdout_fraction, workers=args.workers)
    snapshot = {
        "command": args.command,
        "n": args.n,
        "seed": args.seed,
        "holdout_fraction": manifest.extras["holdout_fraction"],
        "distribution": distribution.to_dict(),
    }
    snapshot_file = write_snapshot(out.parent, snapshot, dataset_snapshot_path(out).name)
    print(f"generated {manifest.n_records} records ({manifest.n_holdout} held out)")
    return [out, manifest_path(out), specs_path(out), snapshot_file]


def cmd_caption(args: argparse.Namespace, bench: Workbench) -> List[Path]:
    params = default_params()
    if args.epsilon is not None:
        params = replace(params, epsilon=args.epsilon)
    if args.min_segment_points is not None:
        params = replace(params, min_segment_points=args.min_segment_points)
    spec = WindowingSpec(args.lookback, args.horizon, args.stride)
    out = Path(args.out)
    manifest, report = caption_dataset(
        args.input, spec, params, out, args.holdout_fraction, args.dataset_name, workers=args.workers
    )
    snapshot = {
        "command": args.command,
        "input": str(args.input),
        "lookback": spec.lookback,
        "horizon": spec.horizon,
        "stride": spec.stride,
        "dataset_name": manifest.dataset_name,
        "holdout_fraction": manifest.extras["holdout_fraction"],
        "captioner": report.params,
    }
    snapshot_file = write_snapshot(out.parent, snapshot, dataset_snapshot_path(out).name)
    print(f"captioned {manifest.n_records} windows, {len(report.errors)} failures")
    return [out, manifest_path(out), report_path(out), snapshot_file]


def cmd_train(args: argparse.Namespace, bench: Workbench) -> List[Path]:
    model, train_config = resolve_experiment(args)
    run_dir = bench.run_dir(config_snapshot(model, train_config, dataset=Path(args.dataset).stem))
    run = train(args.dataset, model, train_config, run_dir)
    print(f"mse {run.mean_mse:.6g} ± {run.std_mse:.3g}  mae {run.mean_mae:.6g} ± {run.std_mae:.3g}")
    return [run_dir / "results.json", run_dir / "config.json"] + [Path(s.checkpoint) for s in run.seeds if s.checkpoint]


def _eval_snapshot(args: argparse.Namespace) -> dict:
    return {
        "command": args.command,
        "checkpoint": str(args.checkpoint),
        "dataset": Path(args.dataset).stem,
        "split": args.split,
        "ablation": args.ablation,
    }


def _write_eval_run(run_dir: Path, run) -> List[Path]:
    write_snapshot(run_dir, run.config_snapshot)
    print(f"{run.tag}: mse {run.mean_mse:.6g} ± {run.std_mse:.3g}  mae {run.mean_mae:.6g} ± {run.std_mae:.3g}")
    return [run.write_json(run_dir / "results.json"), run_dir / "config.json"]


def cmd_evaluate(args: argparse.Namespace, bench: Workbench) -> List[Path]:
    run_dir = bench.run_dir(_eval_snapshot(args))
    per_window = run_dir / "per_window.jsonl" if args.per_window else None
    run = evaluate(args.checkpoint, args.dataset, args.ablation, args.split, per_window)
    outputs = _write_eval_run(run_dir, run)
    if per_window is not None:
        outputs.append(per_window)
    return outputs


def cmd_ablate(args: argparse.Namespace, bench: Workbench) -> List[Path]:
    model, train_config = resolve_experiment(args)
    resolve_ablation_rows(args.rows)
    snapshot = config_snapshot(model, train_config, dataset=Path(args.dataset).stem, rows=args.rows)
    run_dir = bench.run_dir(snapshot)
    results = run_ablation(args.dataset, model, train_config, args.rows, run_dir)
    write_snapshot(run_dir, snapshot)
    for label, run in results.items():
        print(f"{label}: mse {run.mean_mse:.6g} ± {run.std_mse:.3g}  mae {run.mean_mae:.6g} ± {run.std_mae:.3g}")
    return [run_dir / "ablation.json", run_dir / "config.json"]


def cmd_zero_shot(args: argparse.Namespace, bench: Workbench) -> List[Path]:
    run_dir = bench.run_dir(_eval_snapshot(args))
    run = zero_shot(args.checkpoint, args.dataset, args.source_name, args.ablation, args.split)
    return _write_eval_run(run_dir, run)


def cmd_export_alignment(args: argparse.Namespace, bench: Workbench) -> List[Path]:
    windows = load_windows(args.dataset, args.split)
    if args.limit > 0:
        windows = windows[:args.limit]
    snapshot = {"checkpoint": str(args.checkpoint), "dataset": Path(args.dataset).stem, "split": args.split, "limit": args.limit}
    out_dir = Path(args.out) if args.out else bench.run_dir(snapshot)
    index = export_alignment(args.checkpoint, windows, out_dir, args.ablation)
    write_snapshot(out_dir, snapshot)
    print(f"retrieval accuracy {index['retrieval_accuracy']:.4f} over {index['n_windows']} windows")
    return [out_dir / index["similarity"]["file"], out_dir / index["attention"]["file"], out_dir / "alignment.json"]


def cmd_validate_data(args: argparse.Namespace, bench: Workbench) -> List[Path]:
    spec = None
    if args.lookback is not None or args.horizon is not None:
        manifest = read_manifest(args.path)
        lookback = args.lookback or (manifest.lookback if manifest else None)
        horizon = args.horizon or (manifest.horizon if manifest else None)
        if lookback is None or horizon is None:
            raise ConfigurationError.missing("--lookback and --horizon (no manifest found)")
        spec = WindowingSpec(lookback, horizon)
    windows, manifest = validate_dataset(args.path, spec, True if args.captioned else None)
    print(f"ok: {len(windows)} records")
    return []


COMMANDS = {
    "generate": cmd_generate,
    "caption": cmd_caption,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "ablate": cmd_ablate,
    "zero-shot": cmd_zero_shot,
    "export-alignment": cmd_export_alignment,
    "validate-data": cmd_validate_data,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # argparse exits 0 for --help/--version and 2 for usage errors
        return int(e.code or 0)

    log_config = get_config().logging
    if args.log_level:
        log_config = replace(log_config, log_level=args.log_level)
    setup_logging(log_config)
    if get_config().runtime.deterministic:
        set_deterministic(True)

    bench = Workbench(run_root=getattr(args, "run_root", None))
    try:
        outputs = COMMANDS[args.command](args, bench)
    except ConfigurationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (DualcastError, OSError) as e:
        logger.debug(f"{args.command} failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return 1
    for path in outputs:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
