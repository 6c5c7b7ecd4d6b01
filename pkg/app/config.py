"""
Configuration management for the distance engine.
Loads settings from environment variables (prefix PTSDIST_) and an optional .env file.
"""
import logging
from fractions import Fraction
from typing import Optional

from pydantic import field_validator
from pydantic_settings import BaseSettings

from utils.rationals import parse_rational

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Engine settings loaded from environment variables."""

    # Numerics (rationals as p/q strings)
    default_delta: str = "1"
    default_epsilon: str = "1/1000"
    decimal_precision: int = 6

    # Fixed-point engine
    iteration_budget_factor: int = 10  # budget = factor * N^2 rounds
    coupling_rounds: int = 50
    round_down_denominator: Optional[int] = None
    workers: int = 1

    # Decision oracle
    oracle: str = "internal"
    oracle_timeout: float = 60.0
    oracle_tmp_dir: Optional[str] = None
    oracle_format: str = "smt2"
    internal_oracle_refinements: int = 4

    # Logging
    log_level: str = "WARNING"

    class Config:
        env_file = ".env"
        env_prefix = "PTSDIST_"
        case_sensitive = False
        extra = "ignore"

    @field_validator("default_delta", "default_epsilon")
    @classmethod
    def _rational(cls, value: str) -> str:
        parse_rational(value)
        return value

    @property
    def delta(self) -> Fraction:
        return parse_rational(self.default_delta)

    @property
    def epsilon(self) -> Fraction:
        return parse_rational(self.default_epsilon)

    def iteration_budget(self, n_states: int) -> int:
        return max(1, self.iteration_budget_factor * n_states * n_states)


# Global settings instance
try:
    settings = Settings()
except Exception as e:
    # Fall back to defaults when the environment cannot be parsed
    logger.warning(f"Could not load settings from environment: {e}; using defaults")
    settings = Settings.model_construct()
