"""
Test Infrastructure Module

Tests for dualcast.infra package (tracing, seeding, checkpoints, embedding sidecars).
"""

import logging
import sys
import tempfile
from pathlib import Path

import numpy as np
import torch

# Add project root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent.parent))


def test_correlation_context():
    """Test CorrelationContext scoping"""
    from dualcast.infra import CorrelationContext, get_correlation_id

    print("Testing CorrelationContext...")

    assert get_correlation_id() is None
    with CorrelationContext(prefix="train") as cid:
        assert cid.startswith("train_")
        assert get_correlation_id() == cid
        with CorrelationContext(correlation_id="fixed") as inner:
            assert inner == "fixed"
            assert get_correlation_id() == "fixed"
        assert get_correlation_id() == cid
    assert get_correlation_id() is None

    print("  CorrelationContext: PASSED")


def test_log_event():
    """Test log_event formatting"""
    from dualcast.infra import CorrelationContext, log_event

    print("Testing log_event...")

    records = []

    class _Collect(logging.Handler):
        def emit(self, record):
            records.append(record)

    log = logging.getLogger("dualcast.test.log_event")
    log.setLevel(logging.DEBUG)
    handler = _Collect()
    log.addHandler(handler)
    try:
        with CorrelationContext(correlation_id="abc"):
            log_event(logging.INFO, "epoch done", "train", log=log, val_mse=0.123456789, epoch=3)
    finally:
        log.removeHandler(handler)

    assert len(records) == 1
    message = records[0].getMessage()
    assert message.startswith("[abc] [train] epoch done")
    assert "val_mse=0.123457" in message
    assert "epoch=3" in message
    assert records[0].fields == {"val_mse": 0.123456789, "epoch": 3}

    print("  log_event: PASSED")


def test_derive_seed():
    """Test named substreams are stable and independent"""
    from dualcast.infra import derive_seed, substream_rng, torch_generator

    print("Testing derive_seed...")

    assert derive_seed(2021, "init") == derive_seed(2021, "init")
    assert derive_seed(2021, "init") != derive_seed(2021, "order")
    assert derive_seed(2021, "init") != derive_seed(2022, "init")
    assert 0 <= derive_seed(7, "split", 3) < 2 ** 32

    a = substream_rng(5, "split").random(4)
    b = substream_rng(5, "split").random(4)
    assert np.array_equal(a, b)

    p1 = torch.randperm(10, generator=torch_generator(5, "order"))
    p2 = torch.randperm(10, generator=torch_generator(5, "order"))
    assert torch.equal(p1, p2)

    print("  derive_seed: PASSED")


def test_deterministic_mode():
    """Test deterministic toggling restores the previous state"""
    from dualcast.infra import deterministic_mode, is_deterministic

    print("Testing deterministic_mode...")

    before = is_deterministic()
    with deterministic_mode(True):
        assert is_deterministic()
        assert torch.get_num_threads() == 1
    assert is_deterministic() == before

    print("  deterministic_mode: PASSED")


def test_config_defaults():
    """Test config sections carry documented defaults"""
    from dualcast.config import CaptionerConfig, RuntimeConfig, LoggingConfig

    print("Testing config defaults...")

    captioner = CaptionerConfig(epsilon=0.08, noise_low=0.002, noise_high=0.02, significance=0.05)
    assert captioner.noise_low < captioner.noise_high

    runtime = RuntimeConfig(deterministic=True, num_workers=8)
    assert runtime.effective_workers == 1
    runtime = RuntimeConfig(deterministic=False, num_workers=0)
    assert runtime.effective_workers == 1
    runtime = RuntimeConfig(deterministic=False, num_workers=4)
    assert runtime.effective_workers == 4

    assert LoggingConfig(log_level="debug").level == logging.DEBUG
    assert LoggingConfig(log_level="nonsense").level == logging.INFO

    print("  config defaults: PASSED")


def test_setup_logging_without_file():
    """Test setup_logging with console only"""
    from dualcast.config import LoggingConfig, setup_logging

    print("Testing setup_logging...")

    log = setup_logging(LoggingConfig(log_file="", log_level="WARNING", console_output=True), "dualcast.test.setup")
    assert log.level == logging.WARNING
    assert len(log.handlers) == 1
    assert isinstance(log.handlers[0], logging.StreamHandler)

    print("  setup_logging: PASSED")


def test_setup_logging_with_file():
    """Test setup_logging writes through a rotating file handler"""
    from logging.handlers import RotatingFileHandler

    from dualcast.config import LoggingConfig, setup_logging

    print("Testing setup_logging with a file...")

    with tempfile.TemporaryDirectory() as tmp:
        log_file = Path(tmp) / "nested" / "run.log"
        log = setup_logging(
            LoggingConfig(log_file=str(log_file), log_level="DEBUG", console_output=False, max_bytes=4096, backup_count=2),
            "dualcast.test.file",
        )
        assert len(log.handlers) == 1
        handler = log.handlers[0]
        assert isinstance(handler, RotatingFileHandler)
        assert handler.maxBytes == 4096 and handler.backupCount == 2

        log.debug("window batch ready")
        handler.flush()
        text = log_file.read_text(encoding="utf-8")
        assert "Logging initialized" in text
        assert "window batch ready" in text

        # reconfiguring closes the previous file handler
        setup_logging(LoggingConfig(log_file="", console_output=False), "dualcast.test.file")
        assert log.handlers == []
        assert handler.stream is None

    print("  setup_logging with file: PASSED")


def test_tensor_codec():
    """Test the checkpoint tensor layout"""
    from dualcast.errors import CheckpointError
    from dualcast.infra import decode_tensor, encode_tensor

    print("Testing tensor codec...")

    tensor = torch.arange(6, dtype=torch.float32).reshape(2, 3)
    data = encode_tensor(tensor)
    assert data[:4] == b"DCT1"
    # magic + ndim + 2 dims + 6 floats
    assert len(data) == 4 + 4 + 8 + 24
    assert torch.equal(decode_tensor(data), tensor)

    try:
        decode_tensor(b"XXXX" + data[4:])
        assert False, "Should raise on bad magic"
    except CheckpointError:
        pass

    try:
        decode_tensor(data[:-4])
        assert False, "Should raise on truncated data"
    except CheckpointError:
        pass

    print("  tensor codec: PASSED")


def test_checkpoint_directory():
    """Test save/load of a checkpoint directory"""
    from dualcast.errors import CheckpointError, ErrorCode
    from dualcast.infra import is_checkpoint, load_checkpoint, save_checkpoint

    print("Testing checkpoint directory...")

    with tempfile.TemporaryDirectory() as tmp:
        state = {"head.weight": torch.randn(4, 2), "norm.bias": torch.zeros(3)}
        save_checkpoint(Path(tmp) / "ckpt", {"lookback": 16}, state, {"seed": 1})
        assert is_checkpoint(Path(tmp) / "ckpt")

        model, loaded, metadata = load_checkpoint(Path(tmp) / "ckpt")
        assert model == {"lookback": 16}
        assert metadata == {"seed": 1}
        assert set(loaded) == set(state)
        for name in state:
            assert torch.equal(loaded[name], state[name])

        try:
            load_checkpoint(Path(tmp) / "absent")
            assert False, "Should raise for a missing checkpoint"
        except CheckpointError as e:
            assert e.code == ErrorCode.CHECKPOINT_MISSING

        (Path(tmp) / "ckpt" / "tensors" / "norm.bias.bin").unlink()
        try:
            load_checkpoint(Path(tmp) / "ckpt")
            assert False, "Should raise for a missing tensor file"
        except CheckpointError as e:
            assert e.code == ErrorCode.CHECKPOINT_CORRUPT

    print("  checkpoint directory: PASSED")


def test_embedding_store():
    """Test external embedding sidecar"""
    from dualcast.errors import TextEncoderError
    from dualcast.infra import EmbeddingStore, write_embedding_store

    print("Testing embedding store...")

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "emb.f32"
        rows = {
            "a": (np.ones((2, 3)), np.full((5, 3), 2.0)),
            "b": (np.zeros((1, 3)), np.ones((4, 3))),
        }
        write_embedding_store(path, rows, max_tokens=4, width=3)
        store = EmbeddingStore(path)

        assert len(store) == 2
        assert "a" in store and "c" not in store
        assert store.lookup("a", "history").shape == (2, 3)
        # truncated to max_tokens
        future = store.lookup("a", "future")
        assert future.shape == (4, 3)
        assert np.all(future == 2.0)

        try:
            store.lookup("c", "history")
            assert False, "Should raise for an unknown sample"
        except TextEncoderError as e:
            assert e.sample_id == "c"

        try:
            write_embedding_store(Path(tmp) / "bad.f32", {"x": (np.ones((2, 5)), np.ones((2, 5)))}, 4, 3)
            assert False, "Should raise for a width mismatch"
        except TextEncoderError:
            pass

    print("  embedding store: PASSED")


def main():
    """Run all tests"""
    print("=" * 60)
    print("Infrastructure Tests")
    print("=" * 60)

    tests = [
        test_correlation_context,
        test_log_event,
        test_derive_seed,
        test_deterministic_mode,
        test_config_defaults,
        test_setup_logging_without_file,
        test_setup_logging_with_file,
        test_tensor_codec,
        test_checkpoint_directory,
        test_embedding_store,
    ]

    passed = 0
    failed = 0

    for test in tests:
        try:
            test()
            passed += 1
        except Exception as e:
            print(f"  FAILED: {e}")
            failed += 1

    print("=" * 60)
    print(f"Results: {passed} passed, {failed} failed")
    print("=" * 60)

    return failed == 0


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
