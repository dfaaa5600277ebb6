"""
Environment-based configuration for the StarkChain simulator.
Handles numerical defaults, output locations and the flat run-file format.
"""

import os
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from dotenv import load_dotenv
from dotenv.parser import parse_stream
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from starkchain.core.errors import ConfigError

# Load environment variables from .env file
load_dotenv(os.path.join(os.path.dirname(__file__), '.env'))


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="STARKCHAIN_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    app_name: str = Field(default="StarkChain non-Hermitian Stark chain simulator")

    # Output
    output_dir: str = Field(default="output")
    threads: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)

    # Chain model
    dense_cap: int = Field(default=2048, ge=2)

    # Asymptotics
    critical_tol: float = Field(default=1e-9, ge=0.0)
    tail_floor: float = Field(default=1e-11, gt=0.0)
    tail_head: float = Field(default=1e-3, gt=0.0)
    tail_boundary: int = Field(default=5, ge=0)

    # Gauge fits (1-based inclusive site / bond windows)
    fit_window: Tuple[int, int] = Field(default=(10, 90))
    increment_window: Tuple[int, int] = Field(default=(20, 99))

    # Spectral diagnostics
    ipr_fraction: float = Field(default=0.2, gt=0.0, le=1.0)

    # Gaussian dynamics
    dt: float = Field(default=0.02, gt=0.0)
    t_max: float = Field(default=8.0, gt=0.0)
    restabilize_every: int = Field(default=1, ge=1)
    rank_floor: float = Field(default=1e-13, gt=0.0)
    entropy_eps: float = Field(default=1e-12, ge=0.0)
    gram_cond_limit: float = Field(default=1e8, gt=1.0)

    # Logging Configuration
    log_level: str = Field(default="INFO")
    log_format: str = Field(default="%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    log_file: Optional[str] = Field(default=None)
    log_json: bool = Field(default=False)

    @property
    def output_path(self) -> Path:
        """Output directory as a path"""
        return Path(self.output_dir)


# Global settings instance
settings = Settings()


def get_settings() -> Settings:
    """Get the global settings instance."""
    return settings


def _float(raw: str) -> float:
    return float(raw)


def _int(raw: str) -> int:
    value = float(raw)
    if not value.is_integer():
        raise ValueError(f"expected an integer, got {raw!r}")
    return int(value)


def _float_list(raw: str) -> Tuple[float, ...]:
    items = [item.strip() for item in raw.split(",") if item.strip()]
    return tuple(float(item) for item in items)


def _grid(raw: str) -> Tuple[float, float, int]:
    start, stop, num = (item.strip() for item in raw.split(","))
    return float(start), float(stop), _int(num)


def _window(raw: str) -> Tuple[int, int]:
    lo, hi = (item.strip() for item in raw.split(","))
    return _int(lo), _int(hi)


def _binding_line(binding) -> int:
    """Line of the statement itself; the parser marks bindings before leading blank lines."""
    text = binding.original.string
    leading = text[: len(text) - len(text.lstrip())]
    return binding.original.line + leading.count("\n")


# Keys accepted in a flat run file and how each value is read
RUN_FILE_KEYS = {
    "N": _int,
    "J": _float,
    "gamma": _float,
    "F1": _float,
    "F2": _float,
    "ratio": _float,
    "dt": _float,
    "t_max": _float,
    "restabilize_every": _int,
    "gamma_grid": _grid,
    "ratio_grid": _grid,
    "cuts": _float_list,
    "ratios": _float_list,
    "window": _window,
    "increment_window": _window,
}


def load_run_file(path: str) -> Dict[str, Any]:
    """
    Parse a flat KEY=value run file.

    Args:
        path: Run file location

    Returns:
        Mapping from recognised key to parsed value

    Raises:
        ConfigError: naming the line and key of the first bad binding
    """
    run_path = Path(path)
    if not run_path.is_file():
        raise ConfigError(f"run file not found: {path}", path=str(path))

    values: Dict[str, Any] = {}
    with open(run_path, "r", encoding="utf-8") as stream:
        for binding in parse_stream(stream):
            line = _binding_line(binding)
            if binding.error:
                raise ConfigError(
                    f"{path}:{line}: cannot parse statement {binding.original.string.strip()!r}",
                    path=str(path), line=line,
                )
            if binding.key is None:
                continue
            key = binding.key
            if key not in RUN_FILE_KEYS:
                raise ConfigError(f"{path}:{line}: unknown key {key!r}", path=str(path), line=line, key=key)
            if binding.value is None or not binding.value.strip():
                raise ConfigError(f"{path}:{line}: key {key!r} has no value", path=str(path), line=line, key=key)
            try:
                values[key] = RUN_FILE_KEYS[key](binding.value)
            except ValueError as e:
                raise ConfigError(
                    f"{path}:{line}: bad value for {key!r}: {e}",
                    path=str(path), line=line, key=key,
                ) from e
    return values
