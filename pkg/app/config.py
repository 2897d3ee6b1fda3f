import os
import logging
from functools import lru_cache
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, validator

load_dotenv()

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger(__name__)


class Settings(BaseModel):
    """Numerical thresholds and tolerances shared by every service"""
    dense_vertex_limit: int = Field(2 ** 20, ge=1, description="Use radix vertex indexing while n^k is at most this")
    dense_determinant_limit: int = Field(2048, ge=1, description="Largest Laplacian minor factored densely")
    comparison_tolerance: float = Field(1e-9, gt=0)
    snap_tolerance: float = Field(1e-6, gt=0, description="Relative distance for integer recovery")
    snap_limit: int = Field(2 ** 53, ge=1)
    omega: float = Field(3.0, gt=0, description="Exponent used by the linear-time k heuristic")
    enumeration_limit: int = Field(10 ** 7, ge=1)
    circuit_edge_limit: int = Field(14, ge=1)
    exact_determinant_limit: int = Field(64, ge=1)
    exhaustive_spin_limit: int = Field(20, ge=1)
    max_workers: int = Field(4, ge=1)
    log_level: str = "INFO"

    @validator('log_level')
    def known_level(cls, v):
        """Accept only names the logging module understands"""
        level = v.upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"Unknown log level: {v}")
        return level

    @classmethod
    def from_env(cls) -> "Settings":
        """Read DEBRUIJN_* overrides, falling back to the defaults"""
        overrides = {}
        for name, field in cls.model_fields.items():
            raw = os.getenv(f"DEBRUIJN_{name.upper()}")
            if raw is None:
                continue
            if field.annotation is int:
                overrides[name] = int(float(raw))
            elif field.annotation is float:
                overrides[name] = float(raw)
            else:
                overrides[name] = raw
        if overrides:
            logger.info(f"Settings overridden from environment: {sorted(overrides)}")
        return cls(**overrides)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings.from_env()


def resolve_settings(settings: Optional[Settings] = None) -> Settings:
    return settings if settings is not None else get_settings()


def configure_logging(level: Optional[str] = None) -> None:
    """Configure root logging with the project format; later calls only change the level"""
    resolved = getattr(logging, (level or get_settings().log_level).upper(), logging.INFO)
    logging.basicConfig(level=resolved, format=LOG_FORMAT)
    logging.getLogger().setLevel(resolved)


__all__ = ["Settings", "get_settings", "resolve_settings", "configure_logging", "LOG_FORMAT"]
