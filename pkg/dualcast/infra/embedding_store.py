"""
Precomputed text-embedding sidecar

Lets a frozen pretrained encoder run offline: its token embeddings are
dumped once and looked up by series_id during training.

Files:
    <name>.f32          little-endian float32, shape [n][2][G][d]
                        (axis 1: 0 = history text, 1 = future text)
    <name>.f32.json     {"G": G, "d": d, "rows": {series_id: row},
                         "lengths": {series_id: [g_history, g_future]}}

"lengths" is optional; without it every row uses all G token slots.
"""

import json
import logging
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple, Union

import numpy as np

from ..errors import TextEncoderError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
ROLES = {"history": 0, "future": 1}


def index_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_embedding_store(
    path: PathLike,
    rows: Mapping[str, Tuple[np.ndarray, np.ndarray]],
    max_tokens: int,
    width: int,
) -> Path:
    """
    Write a sidecar from {series_id: (history tokens (g_h, d), future tokens (g_f, d))}.

    Token matrices longer than max_tokens are truncated; shorter ones are zero padded.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ids = list(rows)
    data = np.zeros((len(ids), 2, max_tokens, width), dtype="<f4")
    lengths: Dict[str, list] = {}
    for row, series_id in enumerate(ids):
        pair = rows[series_id]
        lengths[series_id] = []
        for role, tokens in enumerate(pair):
            tokens = np.asarray(tokens, dtype=np.float32)
            if tokens.ndim != 2 or tokens.shape[1] != width:
                raise TextEncoderError.bad_sidecar(str(path), f"{series_id}: expected (g, {width}), got {tokens.shape}")
            g = min(tokens.shape[0], max_tokens)
            data[row, role, :g] = tokens[:g]
            lengths[series_id].append(int(g))
    data.tofile(path)
    with open(index_path(path), "w", encoding="utf-8") as f:
        json.dump(
            {"G": max_tokens, "d": width, "rows": {sid: i for i, sid in enumerate(ids)}, "lengths": lengths},
            f,
            indent=2,
            sort_keys=True,
        )
    return path


class EmbeddingStore:
    """Read-only memory-mapped view of a sidecar"""

    def __init__(self, path: PathLike):
        self.path = Path(path)
        idx = index_path(self.path)
        if not self.path.is_file() or not idx.is_file():
            raise TextEncoderError.bad_sidecar(str(self.path), "binary or index file missing")
        with open(idx, "r", encoding="utf-8") as f:
            index = json.load(f)
        try:
            self.max_tokens = int(index["G"])
            self.width = int(index["d"])
            self.rows: Dict[str, int] = {str(k): int(v) for k, v in index["rows"].items()}
        except (KeyError, TypeError, ValueError) as e:
            raise TextEncoderError.bad_sidecar(str(idx), f"bad index: {e}") from e
        self.lengths: Optional[Dict[str, list]] = index.get("lengths")
        n = len(self.rows)
        expected = n * 2 * self.max_tokens * self.width * 4
        actual = self.path.stat().st_size
        if actual != expected:
            raise TextEncoderError.bad_sidecar(str(self.path), f"size {actual} != expected {expected}")
        self._data = np.memmap(self.path, dtype="<f4", mode="r", shape=(n, 2, self.max_tokens, self.width)) if n else None

    def __contains__(self, series_id: str) -> bool:
        return series_id in self.rows

    def __len__(self) -> int:
        return len(self.rows)

    def lookup(self, series_id: str, role: str) -> np.ndarray:
        """(g, d) token matrix of one text; g >= 1"""
        if series_id not in self.rows:
            raise TextEncoderError.missing_sample(series_id, str(self.path))
        row = self.rows[series_id]
        slot = ROLES[role]
        g = self.max_tokens
        if self.lengths is not None and series_id in self.lengths:
            g = max(1, int(self.lengths[series_id][slot]))
        return np.array(self._data[row, slot, :g], dtype=np.float32)
