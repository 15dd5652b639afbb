"""
Dataset Module Unit Tests

Tests windowing, normalization, JSONL persistence, manifests and splits.
"""

import json
import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from dualcast.errors import DatasetError, ErrorCode
from dualcast.infra import load_split, read_jsonl, read_manifest, write_jsonl, write_manifest
from dualcast.modules.dataset import (
    denormalize,
    denormalize_forecast,
    extract_windows,
    normalize_history,
    stack_windows,
    validate_dataset,
    window_starts,
)
from dualcast.types import (
    DatasetManifest,
    MultimodalWindow,
    NormalizationStats,
    StudentTParams,
    WindowingSpec,
)


def _window(i: int, lookback: int = 4, horizon: int = 2) -> MultimodalWindow:
    return MultimodalWindow(
        series_id=f"s{i}",
        history=[float(i + k) for k in range(lookback)],
        future=[float(i - k) * 0.5 for k in range(horizon)],
        history_text=f"History {i}.",
        future_text=f"Future {i}.",
    )


class TestWindowing:
    """Sliding-window extraction"""

    def test_window_count(self):
        spec = WindowingSpec(lookback=5, horizon=2, stride=3)
        # starts 0, 3, 6 fit into a length 14 series (6 + 7 = 13 <= 14)
        assert spec.count(14) == 3
        assert list(window_starts(14, spec)) == [0, 3, 6]
        assert spec.count(6) == 0

    def test_window_count_grid(self):
        # every series length up to 64 against floor((len - L - h) / stride) + 1
        for lookback in range(1, 65):
            for horizon in range(1, 66 - lookback):
                for stride in (1, 2, 3, 4, 5, 7, 8, 16, 64):
                    spec = WindowingSpec(lookback, horizon, stride)
                    for length in range(65):
                        expected = (length - lookback - horizon) // stride + 1 if length >= lookback + horizon else 0
                        assert spec.count(length) == expected, (length, lookback, horizon, stride)
                        starts = list(window_starts(length, spec))
                        assert starts == [k * stride for k in range(expected)]

    def test_extract_windows_grid(self):
        series = np.arange(24, dtype=float)
        for length in range(25):
            for lookback in range(1, 13):
                for horizon in range(1, 13):
                    for stride in range(1, 5):
                        spec = WindowingSpec(lookback, horizon, stride)
                        windows = extract_windows(series[:length], spec)
                        assert len(windows) == spec.count(length)
                        for k, window in enumerate(windows):
                            t = k * stride + lookback
                            assert window.history == tuple(series[t - lookback:t])
                            assert window.future == tuple(series[t:t + horizon])

    def test_extract_windows_contents(self):
        series = np.arange(10, dtype=float)
        windows = extract_windows(series, WindowingSpec(4, 2, 2), series_id="x")
        assert [w.series_id for w in windows] == ["x:0", "x:2", "x:4"]
        assert windows[1].history == (2.0, 3.0, 4.0, 5.0)
        assert windows[1].future == (6.0, 7.0)
        assert windows[0].history_text == ""

    def test_extract_windows_with_captions(self):
        def captions(history, future, start):
            return f"h{start}", f"f{len(future)}"

        windows = extract_windows(np.arange(8.0), WindowingSpec(4, 2, 1), texts=captions)
        assert windows[2].history_text == "h2"
        assert windows[2].future_text == "f2"

    def test_short_series_yields_nothing(self):
        assert extract_windows([1.0, 2.0, 3.0], WindowingSpec(4, 2)) == []

    def test_non_finite_series_rejected(self):
        with pytest.raises(DatasetError) as info:
            extract_windows([1.0, float("nan")] * 5, WindowingSpec(2, 1))
        assert info.value.code == ErrorCode.DATASET_NON_FINITE

    def test_spec_rejects_zero(self):
        from dualcast.errors import ConfigurationError

        with pytest.raises(ConfigurationError):
            WindowingSpec(0, 2)


class TestNormalization:
    """Instance normalization of history windows"""

    def test_zero_mean_unit_std(self):
        values, stats = normalize_history([1.0, 2.0, 3.0, 4.0])
        assert abs(values.mean()) < 1e-12
        assert abs(values.std() - 1.0) < 1e-12
        assert stats.mean == 2.5
        assert np.allclose(denormalize(values, stats), [1.0, 2.0, 3.0, 4.0])

    def test_constant_window_uses_floor(self):
        values, stats = normalize_history([3.0] * 6)
        assert np.all(values == 0.0)
        assert stats.std == pytest.approx(1e-5)

    def test_stats_below_floor_rejected(self):
        from dualcast.errors import ConfigurationError

        with pytest.raises(ConfigurationError):
            NormalizationStats(mean=0.0, std=1e-9)

    def test_denormalize_forecast(self):
        params = StudentTParams(
            location=np.array([0.0, 1.0]),
            scale=np.array([1.0, 2.0]),
            dof=np.array([3.0, 4.0]),
        )
        raw = denormalize_forecast(params, NormalizationStats(mean=10.0, std=2.0))
        assert np.allclose(raw.location, [10.0, 12.0])
        assert np.allclose(raw.scale, [2.0, 4.0])
        assert np.allclose(raw.dof, [3.0, 4.0])

    def test_stack_windows(self):
        history, future = stack_windows([_window(0), _window(1)])
        assert history.shape == (2, 4)
        assert future.shape == (2, 2)
        with pytest.raises(DatasetError):
            stack_windows([])


class TestJsonl:
    """JSONL persistence and validation"""

    def test_round_trip_is_byte_stable(self, tmp_path):
        windows = [_window(i) for i in range(3)]
        windows.append(
            MultimodalWindow("odd", [0.1, 1e-300, -2.5e17, 1 / 3], [0.7, 2.0], "Unicode: é", "")
        )
        first = tmp_path / "a.jsonl"
        second = tmp_path / "b.jsonl"
        assert write_jsonl(first, windows) == 4

        loaded = read_jsonl(first)
        assert loaded == windows
        write_jsonl(second, loaded)
        assert first.read_bytes() == second.read_bytes()

    def test_random_round_trip_is_byte_stable(self, tmp_path):
        rng = np.random.default_rng(2024)
        alphabet = list("abcXYZ019 .,;:-'\"\\/\n\té€中🙂")
        windows = []
        for i in range(1000):
            magnitude = 10.0 ** rng.integers(-300, 300, size=2)
            history = rng.normal(size=int(rng.integers(1, 40))) * magnitude[0]
            future = rng.normal(size=int(rng.integers(1, 12))) * magnitude[1]
            texts = ["".join(rng.choice(alphabet, size=int(rng.integers(0, 30)))) for _ in range(2)]
            windows.append(MultimodalWindow(f"r{i}", history.tolist(), future.tolist(), *texts))

        first = tmp_path / "random.jsonl"
        second = tmp_path / "again.jsonl"
        assert write_jsonl(first, windows) == 1000
        loaded = read_jsonl(first)
        assert loaded == windows
        write_jsonl(second, loaded)
        assert first.read_bytes() == second.read_bytes()

    @pytest.mark.parametrize("history", [
        [True, 2.5, 3],
        ["2.5", 1.0],
        [1.0, None],
        [[1.0], 2.0],
    ])
    def test_non_numeric_values_rejected(self, tmp_path, history):
        path = tmp_path / "typed.jsonl"
        write_jsonl(path, [_window(0)])
        record = {"series_id": "s", "history": history, "future": [1.0],
                  "history_text": "", "future_text": ""}
        with open(path, "a", encoding="utf-8") as f:
            f.write(json.dumps(record) + "\n")
        with pytest.raises(DatasetError) as info:
            read_jsonl(path)
        assert info.value.code == ErrorCode.DATASET_NON_NUMERIC
        assert info.value.line_number == 2
        assert info.value.path == str(path)

    def test_boolean_future_rejected(self):
        with pytest.raises(DatasetError) as info:
            MultimodalWindow.from_dict({"series_id": "s", "history": [1.0, 2.0], "future": [False]})
        assert info.value.code == ErrorCode.DATASET_NON_NUMERIC
        # integers are JSON numbers and load as floats
        window = MultimodalWindow.from_dict({"series_id": "s", "history": [1, 2], "future": [3]})
        assert window.history == (1.0, 2.0)

    def test_key_order(self, tmp_path):
        path = tmp_path / "a.jsonl"
        write_jsonl(path, [_window(0)])
        record = json.loads(path.read_text(encoding="utf-8").splitlines()[0])
        assert list(record) == ["series_id", "history", "future", "history_text", "future_text"]

    def test_malformed_line_names_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        write_jsonl(path, [_window(0), _window(1)])
        with open(path, "a", encoding="utf-8") as f:
            f.write('{"series_id": "broken", "history": [1.0\n')
        with pytest.raises(DatasetError) as info:
            read_jsonl(path)
        assert info.value.line_number == 3
        assert info.value.code == ErrorCode.DATASET_MALFORMED_LINE

    def test_extra_key_rejected(self, tmp_path):
        path = tmp_path / "keys.jsonl"
        record = _window(0).to_dict()
        record["extra"] = 1
        path.write_text(json.dumps(record) + "\n", encoding="utf-8")
        with pytest.raises(DatasetError) as info:
            read_jsonl(path)
        assert info.value.code == ErrorCode.DATASET_BAD_KEYS

    def test_nan_literal_rejected(self, tmp_path):
        path = tmp_path / "nan.jsonl"
        path.write_text(
            '{"series_id": "n", "history": [NaN, 1.0], "future": [1.0], "history_text": "", "future_text": ""}\n',
            encoding="utf-8",
        )
        with pytest.raises(DatasetError) as info:
            read_jsonl(path)
        assert info.value.line_number == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError) as info:
            read_jsonl(tmp_path / "absent.jsonl")
        assert info.value.code == ErrorCode.DATASET_MISSING_FILE

    def test_length_mismatch_against_manifest(self, tmp_path):
        path = tmp_path / "mixed.jsonl"
        write_jsonl(path, [_window(0), _window(1, lookback=5)])
        write_manifest(path, DatasetManifest(4, 2, 1, "mixed", captioned=True, n_train=2))
        with pytest.raises(DatasetError) as info:
            validate_dataset(path)
        assert info.value.code == ErrorCode.DATASET_LENGTH_MISMATCH
        assert info.value.line_number == 2

    def test_validate_infers_lengths_without_manifest(self, tmp_path):
        path = tmp_path / "plain.jsonl"
        write_jsonl(path, [_window(0), _window(1, horizon=3)])
        with pytest.raises(DatasetError) as info:
            validate_dataset(path)
        assert info.value.line_number == 2

    def test_captioned_requires_text(self, tmp_path):
        path = tmp_path / "blank.jsonl"
        write_jsonl(path, [_window(0), _window(1).without_text()])
        with pytest.raises(DatasetError):
            validate_dataset(path, captioned=True)
        windows, _ = validate_dataset(path, captioned=False)
        assert len(windows) == 2


class TestManifestAndSplits:
    """Manifest sidecar and train/test selection"""

    def test_manifest_round_trip(self, tmp_path):
        path = tmp_path / "synth.jsonl"
        manifest = DatasetManifest(200, 30, 1, "synthetic", True, n_train=8, n_holdout=2, extras={"seed": 7})
        target = write_manifest(path, manifest)
        assert target.name == "synth.manifest.json"
        payload = json.loads(target.read_text(encoding="utf-8"))
        assert payload["L"] == 200 and payload["h"] == 30
        assert read_manifest(path) == manifest

    def test_no_manifest(self, tmp_path):
        assert read_manifest(tmp_path / "x.jsonl") is None

    def test_splits_are_train_first(self, tmp_path):
        path = tmp_path / "d.jsonl"
        windows = [_window(i) for i in range(10)]
        write_jsonl(path, windows)
        write_manifest(path, DatasetManifest(4, 2, 1, "d", True, n_train=7, n_holdout=3))

        train, manifest = load_split(path, "train")
        test, _ = load_split(path, "test")
        everything, _ = load_split(path, "all")
        assert [w.series_id for w in train] == [f"s{i}" for i in range(7)]
        assert [w.series_id for w in test] == ["s7", "s8", "s9"]
        assert len(everything) == 10
        assert manifest.n_records == 10

    def test_splits_without_manifest(self, tmp_path):
        path = tmp_path / "d.jsonl"
        write_jsonl(path, [_window(i) for i in range(3)])
        assert len(load_split(path, "train")[0]) == 3
        assert load_split(path, "test")[0] == []

    def test_holdout_larger_than_file(self, tmp_path):
        path = tmp_path / "short.jsonl"
        write_jsonl(path, [_window(i) for i in range(3)])
        write_manifest(path, DatasetManifest(4, 2, 1, "short", True, n_train=2, n_holdout=5))
        for split in ("train", "test"):
            with pytest.raises(DatasetError) as info:
                load_split(path, split)
            assert info.value.code == ErrorCode.DATASET_LENGTH_MISMATCH
        assert len(load_split(path, "all")[0]) == 3

    def test_unknown_split(self, tmp_path):
        path = tmp_path / "d.jsonl"
        write_jsonl(path, [_window(0)])
        with pytest.raises(DatasetError):
            load_split(path, "validation")


def main():
    """Run all dataset unit tests"""
    print("=" * 60)
    print("Dataset Module Unit Tests")
    print("=" * 60)

    # Run with pytest
    exit_code = pytest.main([__file__, "-v", "--tb=short"])
    return exit_code == 0


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
