"""Global settings and configuration for the eddy-current LSM toolkit."""

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class CacheSettings(BaseModel):
    """Cache configuration settings."""

    enabled: bool = True
    ttl_days: int = 7  # Time to live for cached incident-field banks
    max_size_gb: float = 2.0  # Maximum cache size in GB
    directory: Path = Path(".eddy_lsm_cache")


class SolverSettings(BaseModel):
    """Numerical solver settings."""

    workers: int = Field(1, ge=1, description="Parallel source / grid-point workers")
    residual_tolerance: float = Field(1e-10, gt=0.0, description="Relative residual contract")
    quadrature_order: int = Field(
        8, ge=3, le=20, description="Gauss points per direction on collapsed triangles"
    )
    point_source_mode: Literal["decomposition", "nodal_delta"] = "decomposition"
    relative_noise: bool = Field(
        False, description="Opt in to scaling the Morozov target by the spectral norm of Z"
    )
    singular_value_floor: float = Field(1e-14, gt=0.0, description="Relative to sigma_1")


class LoggingSettings(BaseModel):
    """Logging configuration."""

    level: str = "INFO"
    format: str = "{time:YYYY-MM-DD HH:mm:ss} | {level:<8} | {name}:{function}:{line} - {message}"
    rotation: str = "100 MB"
    retention: str = "30 days"


class Settings(BaseSettings):
    """Main application settings."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="EDDY_LSM_",
        env_nested_delimiter="__",
        case_sensitive=False,
    )

    # Application settings
    app_name: str = "Eddy-Current LSM"
    debug: bool = False

    # Component settings
    cache: CacheSettings = Field(default_factory=CacheSettings)
    solver: SolverSettings = Field(default_factory=SolverSettings)
    logging: LoggingSettings = Field(default_factory=LoggingSettings)


# Global settings instance
settings = Settings()
