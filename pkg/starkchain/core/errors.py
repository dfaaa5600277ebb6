"""
Error types for the StarkChain simulator.
Every failure carries a human-readable detail and the exit code the CLI reports.
"""

from typing import Optional, Sequence


class StarkChainError(Exception):
    """Base error; `detail` is what gets logged, `exit_code` what the CLI returns."""

    exit_code: int = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class ParameterError(StarkChainError):
    """Invalid chain parameters or operation arguments."""

    exit_code = 2


class ConfigError(StarkChainError):
    """Run file or CLI configuration could not be parsed."""

    exit_code = 2

    def __init__(
        self,
        detail: str,
        path: Optional[str] = None,
        line: Optional[int] = None,
        key: Optional[str] = None,
    ):
        super().__init__(detail)
        self.path = path
        self.line = line
        self.key = key


class DecouplingError(StarkChainError):
    """Some bond has t^L * t^R <= 0, so the real positive gauge does not exist."""

    exit_code = 3

    def __init__(self, detail: str, bonds: Sequence[int] = ()):
        super().__init__(detail)
        self.bonds = list(bonds)


class GammaPoleError(StarkChainError):
    """The Gamma closed form hits a pole at a sampled argument."""

    exit_code = 3

    def __init__(self, detail: str, argument: float):
        super().__init__(detail)
        self.argument = argument


class BranchError(StarkChainError):
    """A quantity is undefined in the current asymptotic branch."""

    exit_code = 3


class NumericalError(StarkChainError):
    """Solver failure or non-finite data."""

    exit_code = 4


class RankCollapseError(NumericalError):
    """The evolved orbital matrix lost column rank."""

    def __init__(self, detail: str, smallest: float, time: Optional[float] = None):
        super().__init__(detail)
        self.smallest = smallest
        self.time = time
