"""
Core module for the StarkChain simulator.
Provides configuration, logging, error types and run orchestration.
"""

from starkchain.core.config import Settings, get_settings, load_run_file, settings
from starkchain.core.errors import (
    BranchError,
    ConfigError,
    DecouplingError,
    GammaPoleError,
    NumericalError,
    ParameterError,
    RankCollapseError,
    StarkChainError,
)
from starkchain.core.logging import get_logger, log_shutdown_info, log_startup_info, setup_logging

__all__ = [
    # Config
    "Settings",
    "get_settings",
    "load_run_file",
    "settings",

    # Errors
    "BranchError",
    "ConfigError",
    "DecouplingError",
    "GammaPoleError",
    "NumericalError",
    "ParameterError",
    "RankCollapseError",
    "StarkChainError",

    # Logging
    "setup_logging",
    "get_logger",
    "log_startup_info",
    "log_shutdown_info",
]
