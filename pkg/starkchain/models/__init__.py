"""
Models for the StarkChain simulator: run configuration and shared state containers.
"""

from starkchain.models.orbitals import OrbitalState
from starkchain.models.params import (
    MAP_CUTS,
    THRESHOLD_RATIOS,
    ChainParams,
    Command,
    DynamicsSpec,
    FigureRecipe,
    FitSpec,
    GridSpec,
    RunConfig,
    figure_recipe,
)

__all__ = [
    "OrbitalState",
    "MAP_CUTS",
    "THRESHOLD_RATIOS",
    "ChainParams",
    "Command",
    "DynamicsSpec",
    "FigureRecipe",
    "FitSpec",
    "GridSpec",
    "RunConfig",
    "figure_recipe",
]
