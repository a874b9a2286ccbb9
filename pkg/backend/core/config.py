import logging
import math
from functools import lru_cache

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Waveguide geometry (V-groove defaults, SI lengths)
    BETA: float = 0.9
    SPONTANEOUS_RATE: float = 1.0
    GROOVE_HEIGHT: float = 150e-9
    QUBIT_SEPARATION: float = 525e-9  # 7L/2
    PROPAGATION_LENGTH: float = 1.7e-6
    COS_KRD: float = math.sqrt(0.5)
    SIN_KRD: float = math.sqrt(0.5)
    LAMB_SHIFT: float = 0.0

    # Time integration (dimensionless time, rates in units of the spontaneous rate)
    TIME_STEP: float = 1e-3
    TIME_HORIZON: float = 20.0
    RECORD_STRIDE: int = 1
    POSITIVITY_TOLERANCE: float = 1e-6
    UNSTABLE_ENTRY: float = 1e6

    # Stationary search
    STATIONARY_TOLERANCE: float = 1e-12
    STATIONARY_MAX_TIME: float = 200.0
    STATIONARY_TIME_STEP: float = 1e-2
    STATIONARY_CHECK_INTERVAL: int = 10
    STATIONARY_STALL_LIMIT: int = 50
    NULL_SPACE_THRESHOLD: float = 1e-10
    NULL_SPACE_FAILURE: float = 1e-8

    # Measurement minimizer
    THETA_POINTS: int = 61
    PHI_POINTS: int = 121
    REFINE_TOLERANCE: float = 1e-8
    BRUTE_FORCE_RESOLUTION: int = 60

    # Scenario runner
    OUTPUT_DIR: str = "results"
    MAX_WORKERS: int = 4
    ORACLE_THRESHOLD: float = 1e-2
    SIGNIFICANT_DIGITS: int = 12

    LOG_LEVEL: str = "INFO"

    class Config:
        env_file = ".env"
        extra = "allow"

    @property
    def log_level(self) -> int:
        """Numeric logging level, falling back to INFO for unknown names."""
        level = logging.getLevelName(self.LOG_LEVEL.upper())
        return level if isinstance(level, int) else logging.INFO


@lru_cache()
def get_settings() -> Settings:
    return Settings()
