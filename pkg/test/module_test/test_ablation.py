"""
Ablation Acceptance Tests

WARNING: These tests train 3 configurations x 3 seeds on 512 windows
(up to 15 minutes on a laptop CPU)!

Tests:
- Mean raw MSE over 3 seeds orders as
  full < history text only < no text, each gap at least 2% relative

Environment Variables Required:
    DUALCAST_RUN_SLOW=1
"""

import json
import math
import sys
import tempfile
from pathlib import Path

import pytest

# Add parent to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent.parent))
sys.path.insert(0, str(Path(__file__).parent))

from conftest import build_synthetic, create_bench, skip_if_not_slow

ROWS = ["full model", "history text", "no texts"]
MIN_GAP = 0.02


def print_table(results):
    """Print the ablation rows with mean and std over seeds"""
    print("  Ablation:")
    for label, run in results.items():
        print(f"    {label:<28} mse={run.mean_mse:.4f}±{run.std_mse:.4f}  mae={run.mean_mae:.4f}  [{run.ablation}]")


def test_ablation_ordering():
    """
    Desk-scale synthetic set where most horizons contain a trend switch

    Only the future captions announce those switches, so removing them
    should hurt and removing every caption should hurt more.
    """
    from dualcast.types import get_preset

    print("=" * 60)
    print("TEST: Ablation Ordering On Switch-Heavy Synthetic Data")
    print("=" * 60)

    skip_msg = skip_if_not_slow()
    if skip_msg:
        print(f"  SKIPPED: {skip_msg}")
        pytest.skip(skip_msg)

    preset = get_preset("desk")
    with tempfile.TemporaryDirectory() as tmp:
        path, manifest = build_synthetic(
            Path(tmp) / "switch.jsonl", 512, preset.model.lookback, preset.model.horizon,
            seed=7, distribution="switch_heavy", switch_probability=0.6,
        )
        share = manifest.extras["switches"] / 512
        print(f"  Horizon-switch share: {share:.2%}")
        assert share >= 0.4

        bench = create_bench(Path(tmp) / "runs")
        run_dir = Path(tmp) / "ablation"
        results = bench.trainer.ablate(path, preset.model, preset.train, ROWS, run_dir)
        print_table(results)

        assert list(results) == ROWS
        assert all(len(run.seeds) == 3 for run in results.values())
        summary = json.loads((run_dir / "ablation.json").read_text(encoding="utf-8"))
        assert set(summary) == set(ROWS)

    full, history_only, no_text = (results[label].mean_mse for label in ROWS)
    assert all(math.isfinite(v) for v in (full, history_only, no_text))
    assert full < history_only * (1.0 - MIN_GAP)
    assert history_only < no_text * (1.0 - MIN_GAP)

    print("  ablation ordering: PASSED")


def main():
    """Run all ablation acceptance tests"""
    print("=" * 70)
    print("Ablation Acceptance Tests")
    print("=" * 70)

    all_tests = [
        ("test_ablation_ordering", test_ablation_ordering),
    ]

    passed = 0
    failed = 0
    skipped = 0

    for name, test_func in all_tests:
        print()
        try:
            test_func()
            passed += 1
        except pytest.skip.Exception as e:
            print(f"  {name}: SKIPPED - {e}")
            skipped += 1
        except Exception as e:
            print(f"  {name}: FAILED - {e}")
            import traceback
            traceback.print_exc()
            failed += 1

    print()
    print("=" * 70)
    print("SUMMARY")
    print("=" * 70)
    print(f"  Passed:  {passed}")
    print(f"  Failed:  {failed}")
    print(f"  Skipped: {skipped}")
    print("=" * 70)

    return failed == 0


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
