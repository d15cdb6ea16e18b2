"""
Workbench Configuration

Loads session, numeric-check and application settings from config.yaml,
lets FLATWKB_* environment variables (and a .env file) override them, and
exposes a process-wide accessor with a reset hook for tests.
"""

from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

DEFAULT_CONFIG_PATH = Path(__file__).parent.parent / "config.yaml"


class SessionSettings(BaseModel):
    """Defaults for a symbolic session."""

    n: int = Field(default=2, ge=2, le=8, description="Rank of SL(n)")
    h_order: int = Field(default=2, ge=0, description="Truncation order of the h-series tables")
    t_degree: int = Field(default=1, ge=0, description="Maximal t-degree kept by mod-t truncation")
    localize_tn: bool = Field(default=True, description="Allow negative powers of t_n")
    bracket_sign: Literal[1, -1] = Field(
        default=1, description="Orientation of the Poisson bracket"
    )
    companion_orientation: Literal["last_column", "transposed"] = Field(
        default="last_column", description="Where the t̂ entries of the companion matrix sit"
    )


class NumcheckSettings(BaseModel):
    """Defaults for numeric verification."""

    epsilon: float = Field(default=1e-8, gt=0, description="Guard against zeros of invertibles")
    tolerance: float = Field(default=0.2, gt=0, description="Allowed slope deviation")
    patch_size: int = Field(default=5, ge=1, description="Grid points per side of the patch")
    patch_center: Tuple[float, float] = Field(
        default=(1.0, 0.0), description="Center of the sample patch as (re, im)"
    )
    patch_width: float = Field(default=1.0, gt=0, description="Side length of the sample patch")
    h_grid: List[float] = Field(
        default_factory=lambda: [10 ** (-1 - 0.5 * i) for i in range(5)],
        description="Decreasing h values used by the scaling fit",
    )

    @property
    def center(self) -> complex:
        return complex(*self.patch_center)

    @field_validator("h_grid")
    @classmethod
    def validate_h_grid(cls, v: List[float]) -> List[float]:
        if any(h <= 0 for h in v):
            raise ValueError("h values must be positive")
        if any(a <= b for a, b in zip(v, v[1:])):
            raise ValueError("h values must be strictly decreasing")
        return v


class AppSettings(BaseModel):
    """Logging and output defaults."""

    log_level: str = Field(default="WARNING", description="Root log level")
    log_format: str = Field(
        default="%(asctime)s %(levelname)s %(name)s: %(message)s", description="Log record format"
    )

    @field_validator("log_level")
    @classmethod
    def validate_level(cls, v: str) -> str:
        level = v.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level {v!r}")
        return level


class WorkbenchSettings(BaseSettings):
    """
    Top-level settings.

    Precedence: init kwargs (YAML values) < environment < CLI flags; CLI flags are
    applied by the caller through `with_overrides`.
    """

    model_config = SettingsConfigDict(
        env_prefix="FLATWKB_",
        env_nested_delimiter="__",
        extra="ignore",
    )

    session: SessionSettings = Field(default_factory=SessionSettings)
    numcheck: NumcheckSettings = Field(default_factory=NumcheckSettings)
    app: AppSettings = Field(default_factory=AppSettings)

    @classmethod
    def settings_customise_sources(
        cls, settings_cls, init_settings, env_settings, dotenv_settings, file_secret_settings
    ):
        # environment beats file values passed as init kwargs
        return env_settings, dotenv_settings, init_settings

    def with_overrides(self, section: str, **values: Any) -> "WorkbenchSettings":
        """Return a copy with non-None values replaced in one section."""
        current = getattr(self, section)
        patch = {k: v for k, v in values.items() if v is not None}
        if not patch:
            return self
        updated = current.model_validate({**current.model_dump(), **patch})
        return self.model_copy(update={section: updated})


def load_settings(config_path: Optional[str] = None) -> WorkbenchSettings:
    """
    Build settings from a YAML file plus environment.

    Args:
        config_path: Path to config.yaml (default: repository root config.yaml)

    Returns:
        WorkbenchSettings instance
    """
    load_dotenv()
    path = Path(config_path) if config_path is not None else DEFAULT_CONFIG_PATH
    data: Dict[str, Any] = {}
    if path.exists():
        with open(path, "r") as f:
            data = yaml.safe_load(f) or {}
    return WorkbenchSettings(**data)


# Global instance
_settings: Optional[WorkbenchSettings] = None


def get_settings(config_path: Optional[str] = None) -> WorkbenchSettings:
    """
    Get or create the global settings instance.

    Args:
        config_path: Optional path to config.yaml; forces a reload when given

    Returns:
        WorkbenchSettings instance
    """
    global _settings
    if _settings is None or config_path is not None:
        _settings = load_settings(config_path)
    return _settings


def reset_settings() -> None:
    """Drop the cached settings (for tests)."""
    global _settings
    _settings = None
