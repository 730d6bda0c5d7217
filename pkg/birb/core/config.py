"""
Global Configuration Management
Loads environment variables and provides centralized config access
"""

from typing import Literal, Optional

from pydantic import AliasChoices, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit Settings"""

    model_config = SettingsConfigDict(
        env_prefix="BIRB_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Logging
    log_level: str = Field(
        default="INFO",
        validation_alias=AliasChoices("BIRB_LOG", "BIRB_LOG_LEVEL"),
    )
    log_file: Optional[str] = None

    # Engine and sampler capabilities
    dense_max_qubits: int = 6
    clifford_max_qubits: int = 8
    lspec_max_qubits: int = 2
    edgegrab_enumeration_max_edges: int = 6

    # Experiment defaults
    default_shots: int = 1000
    bootstrap_samples: int = 1000
    workers: int = 1
    frame_block_shots: int = 10_000

    # Fitting
    fit_amplitude_max: float = 1.1

    # Dense sampling roundoff handling
    negative_probability_clip: float = 1e-9
    negative_probability_warn: float = 1e-6

    # Random noise model families
    single_qubit_rate_ratio: float = 0.1
    hs_rate_convention: Literal["split", "literal"] = "split"

    # Artifacts
    schema_version: str = "1.0.0"


# Global settings instance
settings = Settings()


def get_settings() -> Settings:
    """Get toolkit settings"""
    return settings
