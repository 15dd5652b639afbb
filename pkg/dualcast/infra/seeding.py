"""
Seed management

All randomness flows from one master seed through named substreams
("init", "split", "order", "synth", ...). A substream is a pure function of
(master seed, name), so adding a new consumer never shifts existing ones.
"""

import logging
import random
import zlib
from contextlib import contextmanager
from typing import Iterator, Sequence, Union

import numpy as np
import torch

from ..config import get_config

logger = logging.getLogger(__name__)

SeedKey = Union[int, str]


def _key_entropy(key: SeedKey) -> int:
    if isinstance(key, int):
        return key & 0xFFFFFFFF
    return zlib.crc32(key.encode("utf-8"))


def derive_seed(master_seed: int, *keys: SeedKey) -> int:
    """Derive a 32-bit seed for the substream named by keys"""
    entropy = [int(master_seed) & 0xFFFFFFFF] + [_key_entropy(k) for k in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint32)[0])


def substream_rng(master_seed: int, *keys: SeedKey) -> np.random.Generator:
    """numpy Generator for a named substream"""
    return np.random.default_rng(derive_seed(master_seed, *keys))


def torch_generator(master_seed: int, *keys: SeedKey) -> torch.Generator:
    """torch CPU Generator for a named substream"""
    generator = torch.Generator()
    generator.manual_seed(derive_seed(master_seed, *keys))
    return generator


def sample_seed_sequence(seed: int, index: int) -> Sequence[np.random.SeedSequence]:
    """Per-sample children (spec, noise, caption) keyed by (seed, index)"""
    return np.random.SeedSequence([int(seed) & 0xFFFFFFFF, int(index)]).spawn(3)


def seed_everything(seed: int) -> None:
    """Seed python, numpy and torch global generators"""
    random.seed(seed)
    np.random.seed(seed & 0xFFFFFFFF)
    torch.manual_seed(seed)


def is_deterministic() -> bool:
    return get_config().runtime.deterministic


def set_deterministic(enabled: bool) -> None:
    """
    Toggle deterministic execution.

    Forces single-threaded torch and deterministic kernels so that two runs
    with identical flags produce bitwise-identical logs and checkpoints.
    """
    get_config().runtime.deterministic = enabled
    torch.use_deterministic_algorithms(enabled)
    if enabled:
        torch.set_num_threads(1)
    logger.debug(f"Deterministic mode {'enabled' if enabled else 'disabled'}")


@contextmanager
def deterministic_mode(enabled: bool = True) -> Iterator[None]:
    """Scoped deterministic mode, restoring previous state on exit"""
    previous = get_config().runtime.deterministic
    previous_threads = torch.get_num_threads()
    set_deterministic(enabled)
    try:
        yield
    finally:
        set_deterministic(previous)
        torch.set_num_threads(previous_threads)
