# synth_control/settings.py

from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from synth_control.logging.logging import LogLevel


class Settings(BaseSettings):
    """Runtime settings loaded from environment variables (prefix ``SYNTH_``)."""

    model_config = SettingsConfigDict(
        env_prefix="SYNTH_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    log_level: LogLevel = Field(default=LogLevel.INFO, description="Log level")
    max_workers: int = Field(
        default=1, ge=1, description="Worker threads for placebo and LOO refits"
    )
    progress: bool = Field(default=True, description="Show tqdm progress bars")
    default_out_dir: str = Field(
        default="out", description="Artifact directory when --out-dir is not given"
    )


# Singleton instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get cached settings instance."""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings
