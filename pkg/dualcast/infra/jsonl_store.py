"""
JSON Lines persistence for MultimodalWindow records and their manifests

Line format (UTF-8, LF):
    {"series_id": ..., "history": [...], "future": [...], "history_text": ..., "future_text": ...}

Floats are written with Python's shortest round-trip repr, so reading a
file back yields bit-identical values and writing them again reproduces the
same bytes.
"""

import json
import logging
from pathlib import Path
from typing import Any, Iterable, Iterator, List, Optional, Tuple, Union

from ..errors import DatasetError
from ..types import DatasetManifest, MultimodalWindow, WindowingSpec, RECORD_KEYS

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _reject_constant(token: str) -> Any:
    raise ValueError(f"non-finite literal {token}")


def encode_record(window: MultimodalWindow) -> str:
    """One JSONL line (without newline)"""
    try:
        return json.dumps(window.to_dict(), ensure_ascii=False, allow_nan=False)
    except ValueError as e:
        raise DatasetError.non_finite(window.series_id, "history/future") from e


def decode_record(
    line: str,
    line_number: int,
    path: str = "<memory>",
    spec: Optional[WindowingSpec] = None,
) -> MultimodalWindow:
    """Parse and validate one JSONL line"""
    try:
        data = json.loads(line, parse_constant=_reject_constant)
    except ValueError as e:
        raise DatasetError.malformed_line(path, line_number, str(e), e) from e
    if not isinstance(data, dict):
        raise DatasetError.malformed_line(path, line_number, "expected a JSON object")
    if set(data) != set(RECORD_KEYS):
        raise DatasetError.bad_keys(path, line_number, list(data))
    if not isinstance(data["history"], list) or not isinstance(data["future"], list):
        raise DatasetError.malformed_line(path, line_number, "history/future must be arrays")
    if not isinstance(data["history_text"], str) or not isinstance(data["future_text"], str):
        raise DatasetError.malformed_line(path, line_number, "texts must be strings")
    try:
        window = MultimodalWindow.from_dict(data, line_number=line_number)
    except DatasetError as e:
        e.path = path
        e.details["path"] = path
        raise
    except OverflowError as e:
        # integer literal beyond float range
        raise DatasetError.non_finite(str(data["series_id"]), "history/future", line_number) from e
    window.validate(spec, line_number=line_number)
    return window


def iter_jsonl(path: PathLike, spec: Optional[WindowingSpec] = None) -> Iterator[MultimodalWindow]:
    path = Path(path)
    if not path.exists():
        raise DatasetError.missing_file(str(path))
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            yield decode_record(line, line_number, str(path), spec)


def read_jsonl(path: PathLike, spec: Optional[WindowingSpec] = None) -> List[MultimodalWindow]:
    """
    Read every record of a JSONL dataset.

    Raises:
        DatasetError: naming the line for malformed JSON, wrong key set,
            non-finite values, or (with spec) history/future length mismatch
    """
    return list(iter_jsonl(path, spec))


def write_jsonl(path: PathLike, windows: Iterable[MultimodalWindow]) -> int:
    """Write records one per line; returns the record count"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for window in windows:
            f.write(encode_record(window))
            f.write("\n")
            count += 1
    logger.debug(f"Wrote {count} records to {path}")
    return count


def manifest_path(path: PathLike) -> Path:
    """synth.jsonl -> synth.manifest.json"""
    path = Path(path)
    return path.with_name(f"{path.stem}.manifest.json")


def write_manifest(path: PathLike, manifest: DatasetManifest) -> Path:
    target = manifest_path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="\n") as f:
        json.dump(manifest.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    return target


def read_manifest(path: PathLike) -> Optional[DatasetManifest]:
    """Manifest of a dataset file, or None when no sidecar exists"""
    target = manifest_path(path)
    if not target.exists():
        return None
    with open(target, "r", encoding="utf-8") as f:
        return DatasetManifest.from_dict(json.load(f))


SPLITS = ("train", "test", "all")


def load_split(path: PathLike, split: str = "all") -> Tuple[List[MultimodalWindow], Optional[DatasetManifest]]:
    """
    Read a dataset and select a split recorded in its manifest.

    Without a manifest (or with n_holdout = 0) "train" and "all" return every
    record and "test" returns an empty list.
    """
    if split not in SPLITS:
        raise DatasetError(f"Unknown split {split!r}, expected one of {SPLITS}")
    manifest = read_manifest(path)
    spec = manifest.windowing if manifest is not None else None
    windows = read_jsonl(path, spec)
    if manifest is not None and manifest.n_records and manifest.n_records != len(windows):
        logger.warning(
            f"{path}: manifest declares {manifest.n_records} records, file holds {len(windows)}"
        )
    if split == "all":
        return windows, manifest
    n_holdout = manifest.n_holdout if manifest is not None else 0
    if n_holdout > len(windows):
        raise DatasetError.holdout_exceeds(str(path), n_holdout, len(windows))
    n_train = len(windows) - n_holdout
    if split == "train":
        return windows[:n_train], manifest
    return windows[n_train:], manifest
