"""
Configuration Module - Environment-driven settings

Every knob is read once from the environment (optionally populated from a
local .env file) and exposed as a module constant. CLI flags override these.
"""

import os
from dotenv import load_dotenv

# Load environment variables from .env
load_dotenv()


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    return int(raw)


# Guard for the closure of simple reflections
WEYL_GROUP_BOUND = _int_env("KEMPF_WEYL_BOUND", 10**6)

# Lattice scans (oracle, Hilbert-Mumford search) refuse boxes larger than this
POINT_BUDGET = _int_env("KEMPF_POINT_BUDGET", 10**7)

DEFAULT_RADIUS = _int_env("KEMPF_RADIUS", 6)

DEFAULT_SEED = _int_env("KEMPF_SEED", 20240617)

# Thread pool width for per-index and per-transform work; 1 keeps it sequential
MAX_WORKERS = max(1, _int_env("KEMPF_MAX_WORKERS", 1))

# joblib Memory location for cached oracle scans (unset disables caching)
CACHE_DIR = os.getenv("KEMPF_CACHE_DIR") or None

LOG_FILE = os.getenv("KEMPF_LOG_FILE") or None
LOG_LEVEL = os.getenv("KEMPF_LOG_LEVEL", "WARNING").upper()
