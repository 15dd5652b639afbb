"""
Workbench - Unified entry point for forecasting experiments

Provides a high-level interface over the functional modules
(data, synth, captioner, trainer, diagnostics) plus run-directory naming.
"""

from __future__ import annotations

import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import TYPE_CHECKING, Any, Mapping, Optional, Union

from .config import get_config
from .infra import set_deterministic

if TYPE_CHECKING:
    from .modules import CaptionModule, DatasetModule, DiagnosticsModule, SynthModule, TrainerModule

logger = logging.getLogger(__name__)


class Workbench:
    """
    Unified experiment client

    Provides access to the pipeline through functional modules:
    - data: JSONL datasets, windowing, validation
    - synth: Synthetic series and captions
    - captioner: Captions for arbitrary series and CSV files
    - trainer: Train, evaluate, ablate, zero-shot
    - diagnostics: Alignment exports, parameter counts, gradient checks

    Usage:
        bench = Workbench()
        manifest = bench.synth.build(512, seed=7, out="synth.jsonl")

        preset = get_preset("desk")
        run = bench.trainer.train("synth.jsonl", preset.model, preset.train)
        print(run.mean_mse, run.std_mse)

        # Deterministic, with outputs under a custom root
        bench = Workbench(run_root="/tmp/runs", deterministic=True)
    """

    def __init__(
        self,
        run_root: Optional[Union[str, Path]] = None,
        deterministic: Optional[bool] = None,
    ):
        """
        Initialize Workbench

        Args:
            run_root: Directory under which run directories are created
                (defaults to DUALCAST_RUN_ROOT)
            deterministic: Force deterministic mode on or off
                (defaults to DUALCAST_DETERMINISTIC)
        """
        runtime = get_config().runtime
        self._run_root = Path(run_root if run_root is not None else runtime.run_root)
        if deterministic is not None:
            set_deterministic(deterministic)

        # Lazy-loaded modules
        self._data: Optional["DatasetModule"] = None
        self._synth: Optional["SynthModule"] = None
        self._captioner: Optional["CaptionModule"] = None
        self._trainer: Optional["TrainerModule"] = None
        self._diagnostics: Optional["DiagnosticsModule"] = None

    @property
    def run_root(self) -> Path:
        return self._run_root

    @property
    def data(self) -> "DatasetModule":
        """
        Dataset module

        Provides:
        - load(path, split): Read windows and manifest
        - save(path, windows, manifest): Write JSONL + manifest
        - validate(path): Check every record
        - windows(series, spec): Slide a window over one series
        """
        if self._data is None:
            from .modules.dataset import DatasetModule
            self._data = DatasetModule(self)
        return self._data

    @property
    def synth(self) -> "SynthModule":
        """
        Synthetic generator module

        Provides:
        - sample(seed): Draw a component spec
        - render(spec): Series for a spec
        - captions(spec): History and future captions
        - build(n, seed, out): Write a dataset
        """
        if self._synth is None:
            from .modules.synthgen import SynthModule
            self._synth = SynthModule(self)
        return self._synth

    @property
    def captioner(self) -> "CaptionModule":
        """
        Captioner module

        Provides:
        - breakpoints(series): End-point-fit breakpoints
        - segments(series): Classified segments
        - caption(series): Caption text
        - annotate(csv, spec): Caption every window of a CSV
        """
        if self._captioner is None:
            from .modules.captioner import CaptionModule
            self._captioner = CaptionModule(self)
        return self._captioner

    @property
    def trainer(self) -> "TrainerModule":
        """
        Trainer module

        Provides:
        - train(dataset, model_config, train_config): Multi-seed training
        - evaluate(checkpoint, dataset): Score checkpoints
        - ablate(dataset, ..., rows): Ablation matrix
        - zero_shot(checkpoint, dataset): Cross-dataset evaluation
        """
        if self._trainer is None:
            from .modules.trainer import TrainerModule
            self._trainer = TrainerModule(self)
        return self._trainer

    @property
    def diagnostics(self) -> "DiagnosticsModule":
        """
        Diagnostics module

        Provides:
        - export_alignment(checkpoint, windows, out_dir): Similarity + attention files
        - parameters(checkpoint): Trainable/frozen counts
        - gradient_check(model_config, windows): Finite-difference check
        """
        if self._diagnostics is None:
            from .modules.diagnostics import DiagnosticsModule
            self._diagnostics = DiagnosticsModule(self)
        return self._diagnostics

    def run_dir(self, snapshot: Union[Mapping[str, Any], str], create: bool = True) -> Path:
        """
        New run directory <run_root>/<UTC timestamp>_<config hash>

        A numeric suffix is appended if the name is taken, so earlier runs are
        never overwritten.

        Args:
            snapshot: Config snapshot (hashed) or a precomputed hash
            create: Create the directory
        """
        from .modules.trainer import config_hash

        digest = snapshot if isinstance(snapshot, str) else config_hash(snapshot)
        stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
        path = self._run_root / f"{stamp}_{digest}"
        suffix = 1
        while path.exists():
            path = self._run_root / f"{stamp}_{digest}_{suffix}"
            suffix += 1
        if create:
            path.mkdir(parents=True)
            logger.debug(f"Run directory: {path}")
        return path

    def __repr__(self) -> str:
        return f"Workbench(run_root={str(self._run_root)!r})"
