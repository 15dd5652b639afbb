"""
Test Types Module

Tests for dualcast.types package (settings, presets, ablation rows, results).
"""

import json
import math
import sys
import tempfile
from pathlib import Path

# Add project root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent.parent))


def test_presets():
    """Test preset lookup"""
    from dualcast.errors import ConfigurationError
    from dualcast.types import get_preset, list_presets

    print("Testing presets...")

    toy = get_preset("TOY")
    assert toy.model.lookback == 16 and toy.model.horizon == 4
    assert toy.model.num_patches == 4
    assert toy.model.d_model == 8
    assert toy.train.seeds == (0,)

    synthetic = get_preset("synthetic")
    assert synthetic.model.lookback == 200 and synthetic.model.horizon == 30
    assert synthetic.model.num_patches == 25
    assert synthetic.train.learning_rate == 1e-4

    assert get_preset("Time-MMD-Economy").train.patience == 20
    assert "desk" in list_presets() and "ETTh1" in list_presets()

    try:
        get_preset("huge")
        assert False, "Should raise for an unknown preset"
    except ConfigurationError as e:
        assert "desk" in e.message

    print("  presets: PASSED")


def test_model_config_validation():
    """Test ModelConfig and BackboneConfig checks"""
    from dualcast.errors import ConfigurationError
    from dualcast.types import BackboneConfig, ModelConfig, TextEncoderConfig

    print("Testing ModelConfig validation...")

    for build in (
        lambda: ModelConfig(lookback=30, backbone=BackboneConfig(patch_len=8)),
        lambda: BackboneConfig(d_model=30, heads=8),
        lambda: BackboneConfig(norm_placement="post"),
        lambda: TextEncoderConfig(width=4),
        lambda: TextEncoderConfig(width=10, heads=4),
    ):
        try:
            build()
            assert False, "Should raise ConfigurationError"
        except ConfigurationError:
            pass

    config = ModelConfig(lookback=32, horizon=8, backbone=BackboneConfig(d_model=16, heads=4, patch_len=8))
    assert ModelConfig.from_dict(json.loads(json.dumps(config.to_dict()))) == config

    print("  ModelConfig validation: PASSED")


def test_train_config():
    """Test TrainConfig checks and serialization"""
    from dualcast.errors import ConfigurationError
    from dualcast.types import AblationSet, TrainConfig

    print("Testing TrainConfig...")

    config = TrainConfig(seeds=[1, 2], ablation="no_contrastive")
    assert config.seeds == (1, 2)
    assert config.ablation == AblationSet.parse("no_contrastive")
    data = config.to_dict()
    assert data["ablation"] == "no_contrastive"
    assert TrainConfig.from_dict(data) == config

    for kwargs in ({"learning_rate": 0.0}, {"patience": 0}, {"val_fraction": 1.0}, {"seeds": ()}):
        try:
            TrainConfig(**kwargs)
            assert False, f"Should raise for {kwargs}"
        except ConfigurationError:
            pass

    print("  TrainConfig: PASSED")


def test_ablation_set():
    """Test ablation flag parsing and derived switches"""
    from dualcast.errors import ConfigurationError, ErrorCode
    from dualcast.types import AblationFlag, AblationSet, FULL

    print("Testing AblationSet...")

    assert AblationSet.parse(None) == FULL
    assert AblationSet.parse("full").is_full
    assert FULL.label == "full"

    flags = AblationSet.parse("no_future_text+no_contrastive")
    assert flags == AblationSet.parse(["no_contrastive", "no_future_text"])
    assert flags.label == "no_contrastive,no_future_text"
    assert AblationFlag.NO_CONTRASTIVE in flags
    assert flags.uses_history_text and not flags.uses_future_text
    assert not flags.contrastive_enabled

    no_text = AblationSet.parse("no_any_text")
    assert not no_text.uses_any_text
    assert not no_text.contrastive_enabled
    assert no_text.history_interact and no_text.future_interact

    assert not AblationSet.parse("no_history_text").contrastive_enabled
    assert not AblationSet.parse("no_future_interact").future_interact

    try:
        AblationSet.parse("no_everything")
        assert False, "Should raise for an unknown flag"
    except ConfigurationError as e:
        assert e.code == ErrorCode.CONFIG_UNKNOWN_ABLATION

    print("  AblationSet: PASSED")


def test_ablation_rows():
    """Test ablation matrix row resolution"""
    from dualcast.errors import ConfigurationError
    from dualcast.types import ABLATION_ROWS, FULL, resolve_ablation_rows

    print("Testing ablation rows...")

    assert len(ABLATION_ROWS) == 8
    assert ABLATION_ROWS["full model"] == FULL
    assert ABLATION_ROWS["future text added"] == FULL
    assert ABLATION_ROWS["history text"].label == "no_future_text"

    assert list(resolve_ablation_rows("all")) == list(ABLATION_ROWS)
    rows = resolve_ablation_rows("2; future text without history text")
    assert list(rows) == ["no texts", "future text without history text"]
    assert rows["no texts"].label == "no_any_text"

    for bad in ("9", "0", "Dual Forecaster"):
        try:
            resolve_ablation_rows(bad)
            assert False, f"Should refuse row {bad!r}"
        except ConfigurationError:
            pass

    print("  ablation rows: PASSED")


def test_apply_overrides():
    """Test flat overrides with table column names"""
    from dualcast.errors import ConfigurationError
    from dualcast.types import apply_overrides, get_preset

    print("Testing apply_overrides...")

    preset = get_preset("desk")
    model, train = apply_overrides(
        preset.model,
        preset.train,
        {
            "L": 96, "P": 12, "h": 24, "d_m": 64, "Heads": 8,
            "LR": 5e-4, "Batch Size": 16, "seeds": [7, 8],
            "text_encoder": {"max_tokens": 32},
            "contrastive": {"temperature": 0.1},
        },
    )
    assert model.lookback == 96 and model.horizon == 24
    assert model.backbone.d_model == 64 and model.backbone.heads == 8
    assert model.text_encoder.max_tokens == 32
    assert model.contrastive.temperature == 0.1
    assert train.learning_rate == 5e-4 and train.batch_size == 16
    assert train.seeds == (7, 8)
    # untouched fields keep the preset's values
    assert model.backbone.n_uni == preset.model.backbone.n_uni

    for bad in ({"L": 64, "P": 7}, {"no_such_field": 1}, {"L": 60}):
        try:
            apply_overrides(preset.model, preset.train, bad)
            assert False, f"Should raise for {bad}"
        except ConfigurationError:
            pass

    print("  apply_overrides: PASSED")


def test_read_config_file():
    """Test JSON and TOML config files"""
    from dualcast.errors import ConfigurationError, ErrorCode
    from dualcast.types import read_config_file

    print("Testing read_config_file...")

    with tempfile.TemporaryDirectory() as tmp:
        json_path = Path(tmp) / "exp.json"
        json_path.write_text('{"L": 96, "LR": 0.001}', encoding="utf-8")
        assert read_config_file(json_path) == {"L": 96, "LR": 0.001}

        toml_path = Path(tmp) / "exp.toml"
        toml_path.write_text('L = 96\n"Weight Decay" = 0.05\n\n[text_encoder]\nwidth = 32\n', encoding="utf-8")
        assert read_config_file(toml_path) == {"L": 96, "Weight Decay": 0.05, "text_encoder": {"width": 32}}

        bad_path = Path(tmp) / "bad.json"
        bad_path.write_text("{not json", encoding="utf-8")
        try:
            read_config_file(bad_path)
            assert False, "Should raise for unparsable config"
        except ConfigurationError as e:
            assert e.code == ErrorCode.CONFIG_INVALID

        try:
            read_config_file(Path(tmp) / "absent.toml")
            assert False, "Should raise for a missing config"
        except ConfigurationError as e:
            assert e.code == ErrorCode.CONFIG_MISSING

    print("  read_config_file: PASSED")


def test_run_result():
    """Test seed aggregation"""
    from dualcast.types import RunResult, SeedResult

    print("Testing RunResult...")

    run = RunResult(seeds=[SeedResult(seed=s, mse=m, mae=m / 2) for s, m in ((1, 1.0), (2, 2.0), (3, 3.0))])
    assert run.mean_mse == 2.0
    assert run.std_mse == 1.0
    assert run.mean_mae == 1.0
    assert math.isclose(run.std_mae, 0.5)

    single = RunResult(seeds=[SeedResult(seed=0, mse=0.4, mae=0.3)])
    assert single.std_mse == 0.0

    data = run.to_dict()
    assert data["metric_scale"] == "raw"
    assert [s["seed"] for s in data["seeds"]] == [1, 2, 3]

    with tempfile.TemporaryDirectory() as tmp:
        path = run.write_json(Path(tmp) / "out" / "results.json")
        assert json.loads(path.read_text(encoding="utf-8"))["mean_mse"] == 2.0

    print("  RunResult: PASSED")


def test_student_t_params():
    """Test denormalization and distribution export"""
    import numpy as np
    import torch
    from dualcast.types import BatchStats, NormalizationStats, StudentTParams

    print("Testing StudentTParams...")

    params = StudentTParams(torch.zeros(2, 3), torch.ones(2, 3), torch.full((2, 3), 4.0))
    raw = params.denormalize(BatchStats(mean=torch.tensor([1.0, -1.0]), std=torch.tensor([2.0, 0.5])))
    assert raw.location[0].tolist() == [1.0, 1.0, 1.0]
    assert raw.scale[1].tolist() == [0.5, 0.5, 0.5]
    assert raw.horizon == 3
    assert raw.row(1).location.shape == (3,)

    single = StudentTParams(np.zeros(3), np.ones(3), np.full(3, 4.0)).denormalize(NormalizationStats(3.0, 2.0))
    assert single.location.tolist() == [3.0, 3.0, 3.0]

    assert params.to_distribution().mean.shape == (2, 3)

    print("  StudentTParams: PASSED")


def main():
    """Run all tests"""
    print("=" * 60)
    print("Types Module Tests")
    print("=" * 60)

    tests = [
        test_presets,
        test_model_config_validation,
        test_train_config,
        test_ablation_set,
        test_ablation_rows,
        test_apply_overrides,
        test_read_config_file,
        test_run_result,
        test_student_t_params,
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
