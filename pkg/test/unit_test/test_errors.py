"""
Test Errors Module

Tests for dualcast.errors package.
"""

import sys
from pathlib import Path

# Add project root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent.parent))


def test_error_code():
    """Test ErrorCode enum"""
    from dualcast.errors import ErrorCode

    print("Testing ErrorCode...")

    assert ErrorCode.DATASET_MALFORMED_LINE.value == "1001"
    assert ErrorCode.SYNTH_INVALID_SPEC.value == "2001"
    assert ErrorCode.CHECKPOINT_INCOMPATIBLE.value == "7003"
    assert ErrorCode.CONFIG_UNKNOWN_ABLATION.value == "9003"

    # Codes are unique
    values = [code.value for code in ErrorCode]
    assert len(values) == len(set(values))

    print("  ErrorCode: PASSED")


def test_dualcast_error():
    """Test DualcastError base class"""
    from dualcast.errors import DualcastError, ErrorCode

    print("Testing DualcastError...")

    error = DualcastError(
        message="Test error",
        code=ErrorCode.DATASET_EMPTY,
        recoverable=True,
    )

    # __str__ returns "[code] message" format
    assert "[1004] Test error" == str(error)
    assert error.code == ErrorCode.DATASET_EMPTY
    assert error.recoverable == True
    assert error.details == {}
    assert "DualcastError" in repr(error)

    print("  DualcastError: PASSED")


def test_dataset_error():
    """Test DatasetError factories"""
    from dualcast.errors import DatasetError, ErrorCode

    print("Testing DatasetError...")

    error1 = DatasetError.malformed_line("data.jsonl", 17, "Expecting value")
    assert error1.code == ErrorCode.DATASET_MALFORMED_LINE
    assert error1.line_number == 17
    assert error1.path == "data.jsonl"
    assert "line 17" in str(error1)

    error2 = DatasetError.length_mismatch("s1", "history", 200, 199, line_number=3)
    assert error2.code == ErrorCode.DATASET_LENGTH_MISMATCH
    assert error2.series_id == "s1"
    assert "199" in error2.message and "200" in error2.message

    error3 = DatasetError.non_finite("s2", "future")
    assert error3.code == ErrorCode.DATASET_NON_FINITE
    assert "line" not in error3.message

    error4 = DatasetError.bad_keys("data.jsonl", 2, ["history", "extra"])
    assert error4.code == ErrorCode.DATASET_BAD_KEYS

    assert DatasetError.empty("training split").code == ErrorCode.DATASET_EMPTY
    assert DatasetError.missing_file("nope.csv").path == "nope.csv"

    print("  DatasetError: PASSED")


def test_caption_error():
    """Test CaptionError factories"""
    from dualcast.errors import CaptionError, ErrorCode

    print("Testing CaptionError...")

    error1 = CaptionError.uncovered_pair("trend", "stable")
    assert error1.code == ErrorCode.CAPTION_UNCOVERED_PAIR
    assert error1.pair == ("trend", "stable")
    assert error1.details["pair"] == ("trend", "stable")

    error2 = CaptionError.too_short(1)
    assert error2.code == ErrorCode.CAPTION_SERIES_TOO_SHORT

    print("  CaptionError: PASSED")


def test_training_error():
    """Test TrainingError"""
    from dualcast.errors import TrainingError, ErrorCode

    print("Testing TrainingError...")

    error = TrainingError.diverged("epoch3:batch12", float("nan"))
    assert error.code == ErrorCode.TRAIN_DIVERGED
    assert error.batch_id == "epoch3:batch12"
    assert error.recoverable == False
    assert "epoch3:batch12" in str(error)

    print("  TrainingError: PASSED")


def test_checkpoint_error():
    """Test CheckpointError"""
    from dualcast.errors import CheckpointError, ErrorCode

    print("Testing CheckpointError...")

    error = CheckpointError.incompatible({"lookback": (200, 96), "horizon": (30, 30)})
    assert error.code == ErrorCode.CHECKPOINT_INCOMPATIBLE
    assert error.details["fields"]["lookback"] == [200, 96]
    assert "lookback: checkpoint=200 data=96" in error.message

    assert CheckpointError.missing("runs/x").code == ErrorCode.CHECKPOINT_MISSING
    assert CheckpointError.corrupt("a.bin", "bad magic").path == "a.bin"

    print("  CheckpointError: PASSED")


def test_configuration_error():
    """Test ConfigurationError"""
    from dualcast.errors import ConfigurationError, ErrorCode

    print("Testing ConfigurationError...")

    error = ConfigurationError.unknown_ablation("bogus", ["full", "no_text"])
    assert error.code == ErrorCode.CONFIG_UNKNOWN_ABLATION
    assert "bogus" in error.message
    assert "full" in error.message

    assert ConfigurationError.missing("--lookback").code == ErrorCode.CONFIG_MISSING
    assert ConfigurationError.invalid("lr", "must be positive").code == ErrorCode.CONFIG_INVALID

    print("  ConfigurationError: PASSED")


def test_error_inheritance():
    """Test error inheritance hierarchy"""
    from dualcast.errors import (
        DualcastError,
        DatasetError,
        SynthesisError,
        CaptionError,
        TextEncoderError,
        ModelError,
        TrainingError,
        CheckpointError,
        ConfigurationError,
    )

    print("Testing error inheritance...")

    for cls in (
        DatasetError,
        SynthesisError,
        CaptionError,
        TextEncoderError,
        ModelError,
        TrainingError,
        CheckpointError,
        ConfigurationError,
    ):
        assert issubclass(cls, DualcastError)
        assert issubclass(cls, Exception)

    print("  Error inheritance: PASSED")


def main():
    """Run all tests"""
    print("=" * 60)
    print("Errors Module Tests")
    print("=" * 60)

    tests = [
        test_error_code,
        test_dualcast_error,
        test_dataset_error,
        test_caption_error,
        test_training_error,
        test_checkpoint_error,
        test_configuration_error,
        test_error_inheritance,
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
