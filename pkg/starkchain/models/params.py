"""
Run-level models: chain parameters, run configurations and figure recipes.
"""

from enum import Enum
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class ChainParams(BaseModel):
    """The five model numbers; single source of truth for every run."""

    model_config = ConfigDict(frozen=True)

    N: int = Field(ge=2, description="number of sites")
    J: float = Field(description="uniform hopping offset")
    gamma: float = Field(description="nonreciprocity")
    F1: float = Field(description="Stark slope, energy per site")
    F2: float = Field(description="hopping gradient, energy per site")

    @field_validator("J", "gamma", "F1", "F2")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not np.isfinite(value):
            raise ValueError("must be finite")
        return value

    @property
    def has_gradient(self) -> bool:
        return self.F2 != 0.0

    @property
    def is_even(self) -> bool:
        return self.N % 2 == 0

    @property
    def ratio(self) -> float:
        return self.F1 / self.F2

    def with_ratio(self, ratio: float) -> "ChainParams":
        return self.model_copy(update={"F1": ratio * self.F2})

    def with_gamma(self, gamma: float) -> "ChainParams":
        return self.model_copy(update={"gamma": gamma})


class Command(str, Enum):
    SKIN_FACTOR = "skin-factor"
    CLASSIFY = "classify"
    LOCALIZATION_MAP = "localization-map"
    ENTANGLEMENT = "entanglement"
    SPECTRUM = "spectrum"


GridTriple = Tuple[float, float, int]

MAP_CUTS: Tuple[float, ...] = (0.081, 0.219, 0.362, 0.481)
THRESHOLD_RATIOS: Tuple[float, ...] = (1.0, 2.0, 3.0)


class GridSpec(BaseModel):
    """(γ, F1/F2) map grids; cut values and threshold ratios land exactly on the grid."""

    model_config = ConfigDict(frozen=True)

    gamma: GridTriple = (0.01, 0.5, 30)
    ratio: GridTriple = (0.05, 4.0, 40)
    cuts: Tuple[float, ...] = MAP_CUTS
    extra_ratios: Tuple[float, ...] = THRESHOLD_RATIOS

    @field_validator("gamma", "ratio")
    @classmethod
    def _nonempty(cls, value: GridTriple) -> GridTriple:
        if value[2] < 1:
            raise ValueError("grid must hold at least one point")
        return value

    def gamma_values(self) -> np.ndarray:
        start, stop, num = self.gamma
        return np.union1d(np.linspace(start, stop, num), np.asarray(self.cuts, dtype=float))

    def ratio_values(self) -> np.ndarray:
        start, stop, num = self.ratio
        return np.union1d(np.linspace(start, stop, num), np.asarray(self.extra_ratios, dtype=float))


class DynamicsSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    t_max: float = Field(default=8.0, gt=0.0)
    dt: float = Field(default=0.02, gt=0.0)
    restabilize_every: int = Field(default=1, ge=1)
    ratios: Optional[Tuple[float, ...]] = None
    initial: Literal["cdw-even-sites"] = "cdw-even-sites"

    @field_validator("ratios")
    @classmethod
    def _ratios(cls, value: Optional[Tuple[float, ...]]) -> Optional[Tuple[float, ...]]:
        if value is not None and len(value) == 0:
            raise ValueError("ratios must not be empty")
        if value is not None and len(set(value)) != len(value):
            raise ValueError("ratios must be distinct")
        return value


class FitSpec(BaseModel):
    """1-based inclusive windows for the power-law and increment fits."""

    model_config = ConfigDict(frozen=True)

    window: Tuple[int, int] = (10, 90)
    increment_window: Tuple[int, int] = (20, 99)

    @field_validator("window", "increment_window")
    @classmethod
    def _ordered(cls, value: Tuple[int, int]) -> Tuple[int, int]:
        if value[0] < 1 or value[1] < value[0]:
            raise ValueError(f"window {value} must satisfy 1 <= lo <= hi")
        return value


class RunConfig(BaseModel):
    """Everything that determines the content of a run's output files."""

    model_config = ConfigDict(frozen=True)

    command: Command
    params: ChainParams
    grids: Optional[GridSpec] = None
    dynamics: Optional[DynamicsSpec] = None
    fit: Optional[FitSpec] = None
    output_dir: str = "output"
    deterministic: Literal[True] = True

    @model_validator(mode="after")
    def _sections(self) -> "RunConfig":
        if self.command is Command.LOCALIZATION_MAP and self.grids is None:
            raise ValueError("localization-map needs grids")
        if self.command is Command.ENTANGLEMENT and self.dynamics is None:
            raise ValueError("entanglement needs a dynamics section")
        if self.command is Command.SKIN_FACTOR and self.fit is None:
            raise ValueError("skin-factor needs fit windows")
        return self


class FigureRecipe(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: Literal["fig1", "fig2", "fig3"]
    configs: List[RunConfig]


def figure_recipe(name: str, output_dir: str = "output") -> FigureRecipe:
    """Compiled-in recipes for the three reference figures."""
    root = f"{output_dir}/{name}"
    if name == "fig1":
        params = ChainParams(N=100, J=1.0, gamma=0.5, F1=0.0, F2=1.0)
        configs = [RunConfig(command=Command.SKIN_FACTOR, params=params, fit=FitSpec(), output_dir=root)]
    elif name == "fig2":
        params = ChainParams(N=100, J=1.0, gamma=0.219, F1=0.0, F2=0.2)
        configs = [RunConfig(command=Command.LOCALIZATION_MAP, params=params, grids=GridSpec(), output_dir=root)]
    elif name == "fig3":
        params = ChainParams(N=120, J=-1.0, gamma=0.0, F1=0.16, F2=0.08)
        dynamics = DynamicsSpec(t_max=8.0, dt=0.02, restabilize_every=1, ratios=THRESHOLD_RATIOS)
        configs = [RunConfig(command=Command.ENTANGLEMENT, params=params, dynamics=dynamics, output_dir=root)]
    else:
        raise ValueError(f"unknown figure recipe {name!r}")
    return FigureRecipe(name=name, configs=configs)
