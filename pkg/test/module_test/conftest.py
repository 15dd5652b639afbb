"""
Shared configuration and fixtures for module acceptance tests.

WARNING: These tests train real models and take minutes on a laptop CPU!

Environment Variables:
    DUALCAST_RUN_SLOW: Set to 1 to run the acceptance tests (skipped otherwise)
    DUALCAST_DEVICE: Torch device for training (default cpu)
"""

import os
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

# Load .env file
try:
    from dotenv import load_dotenv
    env_path = Path(__file__).parent.parent.parent / ".env"
    if env_path.exists():
        load_dotenv(env_path)
except ImportError:
    pass


def skip_if_not_slow():
    """Return a skip message unless run-based tests are enabled"""
    if os.getenv("DUALCAST_RUN_SLOW", "").lower() not in ("1", "true", "yes"):
        return "Run-based acceptance test: set DUALCAST_RUN_SLOW=1 to enable"
    return None


def create_bench(run_root):
    """Workbench writing under run_root"""
    from dualcast import Workbench

    return Workbench(run_root=run_root)


def synthetic_windows(n, lookback, horizon, seed=0, distribution=None, **overrides):
    """
    n synthetic windows drawn from a named or explicit distribution

    Args:
        distribution: SpecDistribution name ("default", "family_a", ...) or instance
        overrides: SpecDistribution field overrides
    """
    from dataclasses import replace

    from dualcast.modules.synthgen import generate_samples
    from dualcast.types import SpecDistribution

    if distribution is None or isinstance(distribution, str):
        distribution = SpecDistribution.named(distribution or "default", lookback, horizon)
    if overrides:
        distribution = replace(distribution, **overrides)
    return [window for window, _ in generate_samples(n, distribution, seed, workers=1)]



def build_synthetic(out, n, lookback, horizon, seed=0, distribution=None, holdout_fraction=0.2, **overrides):
    """Write a synthetic JSONL dataset with manifest; returns (path, manifest)"""
    from dataclasses import replace

    from dualcast.modules.synthgen import build_dataset
    from dualcast.types import SpecDistribution

    if distribution is None or isinstance(distribution, str):
        distribution = SpecDistribution.named(distribution or "default", lookback, horizon)
    if overrides:
        distribution = replace(distribution, **overrides)
    manifest = build_dataset(n, distribution, seed, out, holdout_fraction)
    return Path(out), manifest
