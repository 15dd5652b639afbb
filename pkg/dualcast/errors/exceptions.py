"""
Exception definitions for dualcast
"""

from enum import Enum
from typing import Any, Optional, Sequence


class ErrorCode(Enum):
    """
    Unified error codes for dualcast operations

    1xxx - Dataset errors
    2xxx - Synthesis errors
    3xxx - Captioning errors
    4xxx - Text encoding errors
    5xxx - Model errors
    6xxx - Training / evaluation errors
    7xxx - Checkpoint / export errors
    9xxx - Configuration errors
    """
    # Dataset errors
    DATASET_MALFORMED_LINE = "1001"
    DATASET_LENGTH_MISMATCH = "1002"
    DATASET_NON_FINITE = "1003"
    DATASET_EMPTY = "1004"
    DATASET_BAD_KEYS = "1005"
    DATASET_MISSING_FILE = "1006"
    DATASET_NON_NUMERIC = "1007"

    # Synthesis errors
    SYNTH_INVALID_SPEC = "2001"

    # Captioning errors
    CAPTION_UNCOVERED_PAIR = "3001"
    CAPTION_SERIES_TOO_SHORT = "3002"

    # Text encoding errors
    TEXT_MISSING_SAMPLE = "4001"
    TEXT_BAD_SIDECAR = "4002"

    # Model errors
    MODEL_SHAPE_MISMATCH = "5001"
    MODEL_EMPTY_BATCH = "5002"
    MODEL_NON_FINITE_TARGET = "5003"

    # Training / evaluation errors
    TRAIN_DIVERGED = "6001"

    # Checkpoint errors
    CHECKPOINT_MISSING = "7001"
    CHECKPOINT_CORRUPT = "7002"
    CHECKPOINT_INCOMPATIBLE = "7003"

    # Configuration errors
    CONFIG_INVALID = "9001"
    CONFIG_MISSING = "9002"
    CONFIG_UNKNOWN_ABLATION = "9003"


class DualcastError(Exception):
    """
    Base exception for all dualcast errors

    Attributes:
        message: Human-readable error message
        code: Error code for programmatic handling
        recoverable: Whether a retry could succeed (I/O mostly)
        original_error: The underlying exception if any
        details: Additional error context
    """

    def __init__(
        self,
        message: str,
        code: ErrorCode,
        recoverable: bool = False,
        original_error: Optional[Exception] = None,
        details: Optional[dict] = None,
    ):
        super().__init__(message)
        self.message = message
        self.code = code
        self.recoverable = recoverable
        self.original_error = original_error
        self.details = details or {}

    def __str__(self) -> str:
        return f"[{self.code.value}] {self.message}"

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(code={self.code.value}, message={self.message!r})"


class DatasetError(DualcastError):
    """
    Dataset-related errors

    Raised when:
    - A JSONL line cannot be parsed
    - A record violates the declared windowing spec
    - A record carries NaN/Inf values
    - A dataset is empty where samples are required
    """

    def __init__(
        self,
        message: str,
        code: ErrorCode = ErrorCode.DATASET_MALFORMED_LINE,
        path: Optional[str] = None,
        line_number: Optional[int] = None,
        series_id: Optional[str] = None,
        original_error: Optional[Exception] = None,
    ):
        super().__init__(
            message,
            code,
            recoverable=False,
            original_error=original_error,
            details={"path": path, "line_number": line_number, "series_id": series_id},
        )
        self.path = path
        self.line_number = line_number
        self.series_id = series_id

    @classmethod
    def malformed_line(cls, path: str, line_number: int, reason: str, error: Exception = None) -> "DatasetError":
        return cls(
            f"{path}: line {line_number}: malformed record: {reason}",
            ErrorCode.DATASET_MALFORMED_LINE,
            path=path,
            line_number=line_number,
            original_error=error,
        )

    @classmethod
    def bad_keys(cls, path: str, line_number: int, keys: Sequence[str]) -> "DatasetError":
        return cls(
            f"{path}: line {line_number}: unexpected key set {sorted(keys)}",
            ErrorCode.DATASET_BAD_KEYS,
            path=path,
            line_number=line_number,
        )

    @classmethod
    def length_mismatch(
        cls,
        series_id: str,
        field_name: str,
        expected: int,
        actual: int,
        line_number: Optional[int] = None,
    ) -> "DatasetError":
        where = f" (line {line_number})" if line_number is not None else ""
        return cls(
            f"Record '{series_id}'{where}: {field_name} has length {actual}, expected {expected}",
            ErrorCode.DATASET_LENGTH_MISMATCH,
            line_number=line_number,
            series_id=series_id,
        )

    @classmethod
    def non_finite(cls, series_id: str, field_name: str, line_number: Optional[int] = None) -> "DatasetError":
        where = f" (line {line_number})" if line_number is not None else ""
        return cls(
            f"Record '{series_id}'{where}: {field_name} contains NaN or Inf",
            ErrorCode.DATASET_NON_FINITE,
            line_number=line_number,
            series_id=series_id,
        )

    @classmethod
    def non_numeric(
        cls,
        series_id: str,
        field_name: str,
        value: Any,
        line_number: Optional[int] = None,
    ) -> "DatasetError":
        where = f" (line {line_number})" if line_number is not None else ""
        return cls(
            f"Record '{series_id}'{where}: {field_name} holds non-numeric value {value!r}",
            ErrorCode.DATASET_NON_NUMERIC,
            line_number=line_number,
            series_id=series_id,
        )

    @classmethod
    def holdout_exceeds(cls, path: str, n_holdout: int, n_records: int) -> "DatasetError":
        return cls(
            f"{path}: manifest holds out {n_holdout} records, file holds {n_records}",
            ErrorCode.DATASET_LENGTH_MISMATCH,
            path=path,
        )

    @classmethod
    def empty(cls, what: str) -> "DatasetError":
        return cls(f"No samples available: {what}", ErrorCode.DATASET_EMPTY)

    @classmethod
    def missing_file(cls, path: str) -> "DatasetError":
        return cls(f"Input file not found: {path}", ErrorCode.DATASET_MISSING_FILE, path=path)


class SynthesisError(DualcastError):
    """Invalid synthetic component specification"""

    def __init__(self, message: str, code: ErrorCode = ErrorCode.SYNTH_INVALID_SPEC):
        super().__init__(message, code, recoverable=False)

    @classmethod
    def invalid_spec(cls, field_name: str, reason: str) -> "SynthesisError":
        return cls(f"Invalid component spec '{field_name}': {reason}")


class CaptionError(DualcastError):
    """
    Captioning errors

    Raised when:
    - The template bank has no sentence for a (component, state) pair
    - A series is too short to segment
    """

    def __init__(
        self,
        message: str,
        code: ErrorCode = ErrorCode.CAPTION_UNCOVERED_PAIR,
        pair: Optional[tuple] = None,
    ):
        super().__init__(message, code, recoverable=False, details={"pair": pair})
        self.pair = pair

    @classmethod
    def uncovered_pair(cls, component: str, state: str) -> "CaptionError":
        return cls(
            f"Template bank has no entry for ({component}, {state})",
            ErrorCode.CAPTION_UNCOVERED_PAIR,
            pair=(component, state),
        )

    @classmethod
    def too_short(cls, length: int, minimum: int = 2) -> "CaptionError":
        return cls(
            f"Series of length {length} is too short, need at least {minimum} points",
            ErrorCode.CAPTION_SERIES_TOO_SHORT,
        )


class TextEncoderError(DualcastError):
    """Text encoder errors (external embedding sidecars mostly)"""

    def __init__(self, message: str, code: ErrorCode = ErrorCode.TEXT_MISSING_SAMPLE, sample_id: Optional[str] = None):
        super().__init__(message, code, recoverable=False, details={"sample_id": sample_id})
        self.sample_id = sample_id

    @classmethod
    def missing_sample(cls, sample_id: str, path: str) -> "TextEncoderError":
        return cls(
            f"No precomputed embedding for sample '{sample_id}' in {path}",
            ErrorCode.TEXT_MISSING_SAMPLE,
            sample_id=sample_id,
        )

    @classmethod
    def bad_sidecar(cls, path: str, reason: str) -> "TextEncoderError":
        return cls(f"Invalid embedding sidecar {path}: {reason}", ErrorCode.TEXT_BAD_SIDECAR)


class ModelError(DualcastError):
    """Model input/shape errors"""

    def __init__(self, message: str, code: ErrorCode = ErrorCode.MODEL_SHAPE_MISMATCH):
        super().__init__(message, code, recoverable=False)

    @classmethod
    def shape_mismatch(cls, left: str, right: str, left_shape, right_shape) -> "ModelError":
        return cls(
            f"Shape mismatch: {left} {tuple(left_shape)} vs {right} {tuple(right_shape)}",
            ErrorCode.MODEL_SHAPE_MISMATCH,
        )

    @classmethod
    def empty_batch(cls, what: str) -> "ModelError":
        return cls(f"{what} requires a batch of at least one sample", ErrorCode.MODEL_EMPTY_BATCH)

    @classmethod
    def non_finite_target(cls) -> "ModelError":
        return cls("Forecast target contains NaN or Inf", ErrorCode.MODEL_NON_FINITE_TARGET)


class TrainingError(DualcastError):
    """Training loop failures"""

    def __init__(self, message: str, code: ErrorCode = ErrorCode.TRAIN_DIVERGED, batch_id: Optional[str] = None):
        super().__init__(message, code, recoverable=False, details={"batch_id": batch_id})
        self.batch_id = batch_id

    @classmethod
    def diverged(cls, batch_id: str, loss_value: float) -> "TrainingError":
        return cls(
            f"Non-finite loss {loss_value} at batch {batch_id}",
            ErrorCode.TRAIN_DIVERGED,
            batch_id=batch_id,
        )


class CheckpointError(DualcastError):
    """Checkpoint persistence and compatibility errors"""

    def __init__(self, message: str, code: ErrorCode = ErrorCode.CHECKPOINT_CORRUPT, path: Optional[str] = None):
        super().__init__(message, code, recoverable=False, details={"path": path})
        self.path = path

    @classmethod
    def missing(cls, path: str) -> "CheckpointError":
        return cls(f"Checkpoint not found: {path}", ErrorCode.CHECKPOINT_MISSING, path=path)

    @classmethod
    def corrupt(cls, path: str, reason: str) -> "CheckpointError":
        return cls(f"Corrupt checkpoint file {path}: {reason}", ErrorCode.CHECKPOINT_CORRUPT, path=path)

    @classmethod
    def incompatible(cls, fields: dict) -> "CheckpointError":
        parts = ", ".join(f"{name}: checkpoint={want} data={got}" for name, (want, got) in sorted(fields.items()))
        error = cls(f"Dataset does not match checkpoint config ({parts})", ErrorCode.CHECKPOINT_INCOMPATIBLE)
        error.details["fields"] = {name: list(pair) for name, pair in fields.items()}
        return error


class ConfigurationError(DualcastError):
    """
    Configuration-related errors

    Raised when:
    - Required configuration is missing
    - Configuration values are invalid
    - An ablation flag or row label is unknown
    """

    def __init__(
        self,
        message: str,
        code: ErrorCode = ErrorCode.CONFIG_INVALID,
    ):
        super().__init__(message, code, recoverable=False)

    @classmethod
    def missing(cls, param: str) -> "ConfigurationError":
        return cls(f"Missing required configuration: {param}", ErrorCode.CONFIG_MISSING)

    @classmethod
    def invalid(cls, param: str, reason: str) -> "ConfigurationError":
        return cls(f"Invalid configuration '{param}': {reason}", ErrorCode.CONFIG_INVALID)

    @classmethod
    def unknown_ablation(cls, name: str, known: Sequence[str]) -> "ConfigurationError":
        return cls(
            f"Unknown ablation '{name}'. Known: {', '.join(known)}",
            ErrorCode.CONFIG_UNKNOWN_ABLATION,
        )
