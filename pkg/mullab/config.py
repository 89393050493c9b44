"""Configuration settings for the multiplication semigroup lab."""

from typing import Tuple

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="MULLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",  # Ignore extra fields from .env file
    )

    # Application Configuration
    app_name: str = "Multiplication Semigroup Lab"
    app_version: str = "0.1.0"

    # Logging Configuration
    log_level: str = "INFO"

    # Centre Z(E) tolerances
    default_tol: float = 1e-12

    # Multiplication operator defaults
    pole_tol: float = 1e-9
    spectrum_threshold: float = 1e6
    domain_tolerance: float = 1e-6
    growth_ratio: float = 1.05

    # C0 membership
    vanishing_epsilon: float = 1e-6
    tail_fraction: float = 0.1

    # Semigroup diagnostics
    witness_limit: int = 10
    witness_cutoff: float = 0.1
    cocycle_tol: float = 1e-8
    recovery_h: Tuple[float, ...] = (1e-2, 5e-3, 2.5e-3)

    # Report Configuration
    output_format: str = "csv"


# Global settings instance
settings = Settings()
