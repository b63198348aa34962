"""
Process-level settings for beamgan.

Values come from the environment (optionally a .env file) with the
BEAMGAN_ prefix, e.g. BEAMGAN_OUTPUT_ROOT=/data/runs.
"""

from functools import lru_cache
from pathlib import Path
from typing import Literal

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load environment variables
load_dotenv()

# Repository root (src/common/settings.py -> repo)
REPO_ROOT = Path(__file__).resolve().parent.parent.parent
CONFIG_DIR = REPO_ROOT / "config"


class BeamganSettings(BaseSettings):
    """Environment-driven defaults shared by every command."""

    model_config = SettingsConfigDict(env_prefix="BEAMGAN_", extra="ignore")

    output_root: Path = Field(Path("runs"), description="Default root for CLI outputs")
    log_level: str = Field("INFO", description="Root logging level")
    log_format: Literal["text", "json"] = Field("text", description="Console log format")
    device: str = Field("cpu", description="torch device for training and inference")
    deterministic: bool = Field(
        True, description="Force deterministic torch kernels and single-threaded execution"
    )


@lru_cache(maxsize=1)
def get_settings() -> BeamganSettings:
    """Return the cached process settings."""
    return BeamganSettings()
