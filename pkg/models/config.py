"""
Configuration for kernels, filters and the benchmark harness
"""

import os
from enum import Enum
from pathlib import Path
from typing import Dict, Any
from dotenv import load_dotenv

# Load environment variables from .env.local
env_path = Path(__file__).parent.parent / 'env' / '.env.local'
load_dotenv(env_path)


class KernelFamily(Enum):
    COSINE = "cosine"
    POLY = "poly"
    DIRECTIONAL = "directional"
    SEPARABLE = "separable"


class FilterMode(Enum):
    SPATIAL = "spatial"
    BILATERAL = "bilateral"
    NLM = "nlm"


class ShiftConfig:
    # Default configurations
    DEFAULT_THREADS = 1
    DEFAULT_ORDER_CAP = 200
    DEFAULT_RANGE_HALFWIDTH = 255.0
    DEFAULT_ETA_FLOOR = 1e-12
    DEFAULT_BENCH_SEED = 0x5EED

    # Quality-oracle grids
    GRID_POINTS_1D = 1001
    GRID_POINTS_2D = 257

    # Largest eps * term growth accepted for a shifted sum
    ROUNDING_LIMIT = 1e-9

    # NLM caps
    MAX_PATCH_SIZE = 4
    MAX_PER_DIM_ORDER = 5

    @staticmethod
    def _read(name: str, default, cast):
        raw = os.getenv(name)
        if raw is None or raw.strip() == "":
            return default
        try:
            return cast(raw.strip())
        except ValueError:
            raise ValueError(f"Invalid value for {name}: {raw!r}")

    @staticmethod
    def load_config() -> Dict[str, Any]:
        """Load configuration from the environment (and env/.env.local)"""
        config = {
            "threads": ShiftConfig._read("SHIFTKERN_THREADS", ShiftConfig.DEFAULT_THREADS, int),
            "order_cap": ShiftConfig._read("SHIFTKERN_ORDER_CAP", ShiftConfig.DEFAULT_ORDER_CAP, int),
            "range_halfwidth": ShiftConfig._read(
                "SHIFTKERN_RANGE_HALFWIDTH", ShiftConfig.DEFAULT_RANGE_HALFWIDTH, float
            ),
            "eta_floor": ShiftConfig._read("SHIFTKERN_ETA_FLOOR", ShiftConfig.DEFAULT_ETA_FLOOR, float),
            "bench_seed": ShiftConfig._read(
                "SHIFTKERN_BENCH_SEED", ShiftConfig.DEFAULT_BENCH_SEED, lambda v: int(v, 0)
            ),
        }

        # Validate ranges
        if config["threads"] < 1:
            raise ValueError(f"SHIFTKERN_THREADS must be >= 1, got {config['threads']}")
        if config["order_cap"] < 1:
            raise ValueError(f"SHIFTKERN_ORDER_CAP must be >= 1, got {config['order_cap']}")
        if config["range_halfwidth"] <= 0:
            raise ValueError(
                f"SHIFTKERN_RANGE_HALFWIDTH must be positive, got {config['range_halfwidth']}"
            )
        if config["eta_floor"] <= 0:
            raise ValueError(f"SHIFTKERN_ETA_FLOOR must be positive, got {config['eta_floor']}")

        return config

    @staticmethod
    def get_family_choices() -> list:
        """Get the kernel family names accepted on the command line"""
        return [family.value for family in KernelFamily]
