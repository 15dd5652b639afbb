"""
Infrastructure layer: tracing, seeding and on-disk formats
"""

from .tracing import (
    CorrelationContext,
    generate_correlation_id,
    get_correlation_id,
    set_correlation_id,
    log_event,
)
from .seeding import (
    derive_seed,
    substream_rng,
    torch_generator,
    sample_seed_sequence,
    seed_everything,
    is_deterministic,
    set_deterministic,
    deterministic_mode,
)
from .jsonl_store import (
    encode_record,
    decode_record,
    read_jsonl,
    write_jsonl,
    iter_jsonl,
    manifest_path,
    read_manifest,
    write_manifest,
    load_split,
    SPLITS,
)
from .checkpoint import save_checkpoint, load_checkpoint, is_checkpoint, encode_tensor, decode_tensor
from .embedding_store import EmbeddingStore, write_embedding_store

__all__ = [
    # Tracing
    "CorrelationContext",
    "generate_correlation_id",
    "get_correlation_id",
    "set_correlation_id",
    "log_event",
    # Seeding
    "derive_seed",
    "substream_rng",
    "torch_generator",
    "sample_seed_sequence",
    "seed_everything",
    "is_deterministic",
    "set_deterministic",
    "deterministic_mode",
    # JSONL
    "encode_record",
    "decode_record",
    "read_jsonl",
    "write_jsonl",
    "iter_jsonl",
    "manifest_path",
    "read_manifest",
    "write_manifest",
    "load_split",
    "SPLITS",
    # Checkpoints
    "save_checkpoint",
    "load_checkpoint",
    "is_checkpoint",
    "encode_tensor",
    "decode_tensor",
    # External embeddings
    "EmbeddingStore",
    "write_embedding_store",
]
