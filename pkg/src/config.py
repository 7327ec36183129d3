from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import List

from dotenv import load_dotenv

load_dotenv()


def _int_env(name: str, default: int, minimum: int = 1) -> int:
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise RuntimeError(f"{name} must be an integer, got {raw!r}.")
    if value < minimum:
        raise RuntimeError(f"{name} must be >= {minimum}, got {value}.")
    return value


@dataclass
class Settings:
    """
    Central configuration object for the decomposition branching toolkit.

    Values come from DBRANCH_* environment variables (or a .env file)
    and are read once at import.

    Limits are defaults only; every solver entry point also accepts
    explicit limits that take precedence.
    """
    node_limit: int = 100_000
    time_limit: int = 60
    brute_force_cap: int = 10_000_000
    detset_cap: int = 6
    vertex_cap: int = 8
    generator_retries: int = 20
    experiment_workers: int = 1
    log_level: str = "INFO"
    instance_dir: Path = Path("./instances")
    cors_origins: List[str] = field(default_factory=list)

    @classmethod
    def from_env(cls) -> "Settings":
        # --- Search limits ---
        node_limit = _int_env("DBRANCH_NODE_LIMIT", 100_000)
        time_limit = _int_env("DBRANCH_TIME_LIMIT", 60)

        # --- Enumeration caps (regularity, vertex oracle) ---
        brute_force_cap = _int_env("DBRANCH_BRUTE_FORCE_CAP", 10_000_000)
        detset_cap = _int_env("DBRANCH_DETSET_CAP", 6)
        vertex_cap = _int_env("DBRANCH_VERTEX_CAP", 8)

        # --- Generators and experiments ---
        generator_retries = _int_env("DBRANCH_GENERATOR_RETRIES", 20)
        experiment_workers = _int_env("DBRANCH_EXPERIMENT_WORKERS", 1)

        log_level = (os.getenv("DBRANCH_LOG_LEVEL") or "INFO").strip().upper()
        instance_dir = Path(
            os.getenv("DBRANCH_INSTANCE_DIR") or "./instances"
        ).expanduser()

        # --- HTTP service ---
        cors_origins = [o.strip() for o in os.getenv("DBRANCH_CORS_ORIGINS", "").split(",") if o.strip()]

        return cls(
            node_limit=node_limit,
            time_limit=time_limit,
            brute_force_cap=brute_force_cap,
            detset_cap=detset_cap,
            vertex_cap=vertex_cap,
            generator_retries=generator_retries,
            experiment_workers=experiment_workers,
            log_level=log_level,
            instance_dir=instance_dir,
            cors_origins=cors_origins,
        )


# Global settings instance
settings = Settings.from_env()


_handler: logging.Handler | None = None


def configure_logging(level: str | None = None) -> None:
    """Attach one stderr handler to the root logger; later calls only change the level."""
    global _handler
    root = logging.getLogger()
    root.setLevel(level or settings.log_level)
    if _handler is None:
        _handler = logging.StreamHandler()
        _handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        root.addHandler(_handler)
