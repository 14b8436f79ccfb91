"""
Configuration module for seeds, tolerances and default sample counts.
Every value can be overridden through an environment variable.
"""

import os
from typing import Optional

# Seed used when neither --seed nor CALIBRA_SEED is given (never time-based)
DEFAULT_SEED = 20240607

# Equality / inequality tolerances
REL_TOL = float(os.getenv("CALIBRA_REL_TOL", "1e-10"))
MARGIN_TOL = float(os.getenv("CALIBRA_MARGIN_TOL", "1e-9"))
CLAMP_TOL = 1e-12  # spectra entries in [-CLAMP_TOL, 0) are rounding noise
SPD_SYM_TOL = 1e-12
FRAME_TOL = 1e-10
INVARIANCE_TOL = 1e-8

# Acceptance-size sample counts
IOTA_SAMPLES = int(os.getenv("CALIBRA_IOTA_SAMPLES", "10000"))
PROP53_TRIALS = int(os.getenv("CALIBRA_PROP53_TRIALS", "100000"))
UNITARY_TRIALS = int(os.getenv("CALIBRA_UNITARY_TRIALS", "1000"))
VERIFY_TRIALS = int(os.getenv("CALIBRA_VERIFY_TRIALS", "100000"))
ORACLE_TRIALS = int(os.getenv("CALIBRA_ORACLE_TRIALS", "10000"))
INVARIANCE_TRIALS = int(os.getenv("CALIBRA_INVARIANCE_TRIALS", "100"))
INTERSECTION_SAMPLES = int(os.getenv("CALIBRA_INTERSECTION_SAMPLES", "1000000"))
TORUS_INSTANCES = int(os.getenv("CALIBRA_TORUS_INSTANCES", "5"))
QUICK_FACTOR = 10

# Torus lab defaults
DEFAULT_GRID_N = int(os.getenv("CALIBRA_GRID_N", "64"))
FLOW_TOL = 1e-8
FLOW_MAX_ITER = int(os.getenv("CALIBRA_FLOW_MAX_ITER", "5000"))
FLOW_TARGET_RTOL = 5e-3  # finalEnergy within 0.5% of the closed form
FLOW_SUP_TOL = 1e-3
COUNTEREXAMPLE_GRID_N = 1000

# Parallel sweeps: samples per seeded substream, thread count
CHUNK_SIZE = int(os.getenv("CALIBRA_CHUNK_SIZE", "2048"))
DEFAULT_WORKERS = int(os.getenv("CALIBRA_WORKERS", "1"))

# Report formatting
FLOAT_DIGITS = 17
SCHEMA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "docs")
RUN_CONFIG_SCHEMA = os.path.join(SCHEMA_DIR, "run_config.schema.json")
KFORM_SCHEMA = os.path.join(SCHEMA_DIR, "kform.schema.json")


def resolve_seed(flag_seed: Optional[int] = None) -> int:
    """
    Pick the run seed: explicit flag, then CALIBRA_SEED, then DEFAULT_SEED.

    Args:
        flag_seed: Value of --seed, or None when the flag was absent

    Returns:
        Non-negative integer seed
    """
    if flag_seed is not None:
        return int(flag_seed)
    env_seed = os.getenv("CALIBRA_SEED")
    if env_seed:
        return int(env_seed)
    return DEFAULT_SEED


def scaled_count(count: int, quick: bool) -> int:
    """Sample count after the --quick reduction (never below 1)."""
    if not quick:
        return count
    return max(1, count // QUICK_FACTOR)
