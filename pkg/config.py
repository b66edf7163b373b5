"""
Configuration management for the complex hyperbolic toolkit
Centralizes numerical tolerances and sampling defaults with validation
"""
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit settings with validation"""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="HTG_",
        extra="ignore",  # Ignore unknown environment variables
        case_sensitive=False,
    )

    # Application
    app_name: str = "Complex Hyperbolic Triangle Group Toolkit"
    app_version: str = "1.0.0"

    # Tolerances
    tol: float = Field(default=1e-9, gt=0.0, le=1e-3)
    unitarity_tol: float = Field(default=1e-8, gt=0.0, le=1e-3)
    near_singular_snap: float = Field(default=1e-6, gt=0.0, le=1e-2)
    coefficient_floor: float = Field(default=1e-13, ge=0.0, le=1e-6)

    # Sampling
    default_grid: int = Field(default=64, ge=2, le=4096)
    arc_samples: int = Field(default=48, ge=4, le=2000)
    probe_samples: int = Field(default=10_000, ge=400, le=2_000_000)
    probe_noise_threshold: int = Field(default=10, ge=0)
    leaf_origin_exclusion: float = Field(default=1e-3, gt=0.0, lt=1.0)
    leaf_identity_threshold: float = Field(default=1e-6, gt=0.0, lt=1.0)

    # Logging
    log_level: str = Field(default="WARNING", pattern="^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$")
    audit_enabled: bool = True

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, v):
        """Accept lower-case level names from the environment"""
        return v.upper() if isinstance(v, str) else v

    @property
    def probe_grid_side(self) -> int:
        """Side length of the square (alpha, phi) grid used per sphere by the cell probe"""
        return max(20, int(round(self.probe_samples ** 0.5)))


# Global settings instance
settings = Settings()
